#pragma once

// Synthetic data generators shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "clcrc/forecast_engine.hpp"

namespace clcrc::test {

// x_t = A1 x_{t-1} + A2 x_{t-2} + e_t with e ~ N(0, s^2 I).
inline ErrorSeries simulate_var(const Eigen::Matrix3d& a1, const Eigen::Matrix3d& a2, double s,
                                std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, s);
  ErrorSeries out(n, ErrorVector::Zero());
  for (std::size_t t = 0; t < n; ++t) {
    ErrorVector e(z(rng), z(rng), z(rng));
    if (t >= 1) e += a1 * out[t - 1];
    if (t >= 2) e += a2 * out[t - 2];
    out[t] = e;
  }
  return out;
}

// n draws of a dim-variate normal (nu = 0) or student-t with equicorrelation rho,
// pushed through heterogeneous monotone transforms.
inline std::vector<std::vector<double>> elliptical(std::size_t n, int dim, double rho, double nu,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::chi_squared_distribution<double> chi(nu > 0 ? nu : 1.0);
  std::vector<std::vector<double>> out(n, std::vector<double>(static_cast<std::size_t>(dim)));
  for (auto& row : out) {
    const double common = z(rng);
    const double scale = nu > 0 ? std::sqrt(nu / chi(rng)) : 1.0;
    for (int j = 0; j < dim; ++j) {
      const double x = scale * (std::sqrt(rho) * common + std::sqrt(1.0 - rho) * z(rng));
      row[static_cast<std::size_t>(j)] = j % 2 == 0 ? std::exp(0.5 * x) : 10.0 * x - 20.0;
    }
  }
  return out;
}

// Linear-interpolation sample quantile.
inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(lo);
  return lo + 1 < v.size() ? v[lo] * (1 - f) + v[lo + 1] * f : v[lo];
}

}  // namespace clcrc::test
