#include "clcrc/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "clcrc/errors.hpp"
#include "csv.hpp"

namespace clcrc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMinNu = 2.05;
constexpr double kMaxNu = 200.0;
constexpr double kEigenFloor = 1e-6;

double normal_quantile(double u) {
  static const boost::math::normal_distribution<double> n01;
  return boost::math::quantile(n01, u);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Nearest (in the eigenvalue-clipping sense) positive definite correlation.
Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(kEigenFloor);
  Eigen::MatrixXd r = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd scale = r.diagonal().cwiseSqrt().cwiseInverse();
  r = scale.asDiagonal() * r * scale.asDiagonal();
  r.diagonal().setOnes();
  return r;
}

// Kendall's tau-b, O(n^2).
double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.size();
  double concordant = 0.0, tx = 0.0, ty = 0.0, pairs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dx = x(i) - x(j);
      const double dy = y(i) - y(j);
      pairs += 1.0;
      if (dx == 0.0 && dy == 0.0) {
        tx += 1.0;
        ty += 1.0;
      } else if (dx == 0.0) {
        tx += 1.0;
      } else if (dy == 0.0) {
        ty += 1.0;
      } else {
        concordant += (dx * dy > 0.0) ? 1.0 : -1.0;
      }
    }
  }
  const double denom = std::sqrt((pairs - tx) * (pairs - ty));
  return denom > 0.0 ? concordant / denom : 0.0;
}

Eigen::MatrixXd student_t_scores(const Eigen::MatrixXd& u, double nu) {
  const boost::math::students_t_distribution<double> t(nu);
  Eigen::MatrixXd x(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) x(i, j) = boost::math::quantile(t, u(i, j));
  }
  return x;
}

double log_det_spd(const Eigen::MatrixXd& r) {
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) throw SolverError("correlation matrix not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd standardized(const Eigen::MatrixXd& samples, DistanceMetric metric) {
  if (metric == DistanceMetric::Euclidean) return samples;
  Eigen::MatrixXd z = samples;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mean = z.col(j).mean();
    const double var = (z.col(j).array() - mean).square().mean();
    if (var <= 1e-24) {
      z.col(j).setZero();
    } else {
      z.col(j) = (z.col(j).array() - mean) / std::sqrt(var);
    }
  }
  return z;
}

std::vector<double> normalized_weights(std::span<const double> weights, std::size_t n) {
  if (weights.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  if (weights.size() != n) throw UsageError("weight vector length differs from sample count");
  std::vector<double> w(weights.begin(), weights.end());
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw UsageError("weights must have positive total");
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

std::string to_string(CopulaFamily f) {
  return f == CopulaFamily::Gaussian ? "gaussian" : "student_t";
}

OrderBookReadResult read_order_book_csv(std::istream& in) {
  OrderBookReadResult out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    if (header) {
      header = false;
      if (line.find("order_id") != std::string::npos) continue;
    }
    const auto f = csv::split(line);
    try {
      if (f.size() != 8) throw DataError("field count");
      OrderBookEntry e;
      e.order_id = std::string(f[0]);
      if (f[1] == "buy" || f[1] == "BUY" || f[1] == "Buy") {
        e.side = Side::Buy;
      } else if (f[1] == "sell" || f[1] == "SELL" || f[1] == "Sell") {
        e.side = Side::Sell;
      } else {
        throw DataError("side");
      }
      e.delivery_date = parse_date(f[2]);
      const auto hour = csv::to_int(f[3]);
      const auto vol = csv::to_double(f[4]);
      const auto price = csv::to_double(f[5]);
      if (!hour || !vol || !price || *hour < 0 || *hour > 23 || !(*vol > 0.0)) {
        throw DataError("numeric field");
      }
      e.product_hour = static_cast<int>(*hour);
      e.volume = *vol;
      e.limit_price = *price;
      e.submitted_at = parse_iso8601(f[6]);
      e.closed_at = parse_iso8601(f[7]);
      if (e.closed_at < e.submitted_at) throw DataError("closed before submitted");
      out.orders.push_back(std::move(e));
    } catch (const DataError&) {
      ++out.malformed_rows;
    }
  }
  return out;
}

void write_order_book_csv(std::ostream& out, std::span<const OrderBookEntry> orders) {
  out << "order_id,side,delivery_date,product_hour,volume_mwh,price_eur_mwh,submitted_at,closed_at\n";
  out << std::setprecision(10);
  for (const auto& e : orders) {
    out << e.order_id << ',' << (e.side == Side::Buy ? "buy" : "sell") << ','
        << format_date(e.delivery_date) << ',' << e.product_hour << ',' << e.volume << ','
        << e.limit_price << ',' << format_iso8601(e.submitted_at) << ','
        << format_iso8601(e.closed_at) << '\n';
  }
}

std::vector<OrderBookEntry> filter_orders(std::span<const OrderBookEntry> orders) {
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const auto& o = orders[i];
    if (o.side == Side::Buy && o.closed_at - o.submitted_at < kMinOrderLifetime) continue;
    alive.push_back(i);
  }
  using Key = std::tuple<int, UnixSeconds, int, double, double>;
  std::map<Key, std::vector<std::size_t>> groups;
  for (std::size_t i : alive) {
    const auto& o = orders[i];
    groups[{static_cast<int>(o.side), o.delivery_date, o.product_hour, o.volume, o.limit_price}]
        .push_back(i);
  }
  std::vector<bool> keep(orders.size(), false);
  for (auto& [key, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return orders[a].submitted_at < orders[b].submitted_at;
    });
    UnixSeconds earliest_close = std::numeric_limits<UnixSeconds>::max();
    for (std::size_t i : idx) {
      // A resubmission follows the closure of an identical earlier order.
      if (orders[i].submitted_at < earliest_close) keep[i] = true;
      earliest_close = std::min(earliest_close, orders[i].closed_at);
    }
  }
  std::vector<OrderBookEntry> out;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (keep[i]) out.push_back(orders[i]);
  }
  return out;
}

WindowAggregate window_aggregate(std::span<const OrderBookEntry> orders, UnixSeconds window_start,
                                 UnixSeconds delivery_start) {
  WindowAggregate agg;
  const UnixSeconds gate_closure = delivery_start - kGateClosureLead;
  if (window_start >= gate_closure) {
    agg.window_closed = true;
    return agg;
  }
  double weighted = 0.0;
  for (const auto& o : orders) {
    if (o.side != Side::Buy || o.delivery_start() != delivery_start) continue;
    if (o.submitted_at >= gate_closure || o.closed_at <= window_start) continue;
    agg.volume += o.volume;
    weighted += o.volume * o.limit_price;
    ++agg.orders;
  }
  if (agg.orders > 0 && agg.volume > 0.0) agg.vwap = weighted / agg.volume;
  return agg;
}

std::vector<double> trading_window_row(std::span<const OrderBookEntry> orders, UnixSeconds day,
                                       int tau, std::size_t hours) {
  std::vector<double> row(2 * hours, 0.0);
  const UnixSeconds window_start = day + static_cast<UnixSeconds>(tau) * kSecondsPerHour;
  for (std::size_t d = 0; d < hours; ++d) {
    const auto agg =
        window_aggregate(orders, window_start, day + static_cast<UnixSeconds>(d) * kSecondsPerHour);
    row[d] = agg.volume;
    row[hours + d] = agg.vwap.value_or(std::numeric_limits<double>::quiet_NaN());
  }
  return row;
}

void impute_missing_prices(std::vector<std::vector<double>>& rows, std::size_t hours) {
  for (std::size_t d = 0; d < hours; ++d) {
    std::vector<double> seen;
    for (const auto& r : rows) {
      if (!std::isnan(r[hours + d])) seen.push_back(r[hours + d]);
    }
    double median = 0.0;
    if (!seen.empty()) {
      std::sort(seen.begin(), seen.end());
      const std::size_t m = seen.size() / 2;
      median = seen.size() % 2 == 1 ? seen[m] : 0.5 * (seen[m - 1] + seen[m]);
    }
    for (auto& r : rows) {
      if (std::isnan(r[hours + d])) r[hours + d] = median;
    }
  }
}

double CopulaModel::marginal_quantile(std::size_t column, double u) const {
  const auto& xs = marginal_sorted.at(column);
  if (xs.empty()) return constant_value.at(column);
  if (xs.size() == 1) return xs.front();
  const double h = std::clamp(u, 0.0, 1.0) * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

Eigen::MatrixXd pseudo_observations(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows();
  Eigen::MatrixXd u(n, data.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return data(a, j) < data(b, j); });
    Eigen::Index i = 0;
    while (i < n) {
      Eigen::Index k = i;
      while (k + 1 < n && data(order[static_cast<std::size_t>(k + 1)], j) ==
                              data(order[static_cast<std::size_t>(i)], j)) {
        ++k;
      }
      const double rank = 0.5 * static_cast<double>(i + k) + 1.0;
      for (Eigen::Index t = i; t <= k; ++t) {
        u(order[static_cast<std::size_t>(t)], j) = rank / static_cast<double>(n + 1);
      }
      i = k + 1;
    }
  }
  return u;
}

double gaussian_copula_loglik(const Eigen::MatrixXd& pseudo_obs, const Eigen::MatrixXd& corr) {
  const Eigen::Index n = pseudo_obs.rows();
  const Eigen::Index d = pseudo_obs.cols();
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = normal_quantile(pseudo_obs(i, j));
  }
  const double logdet = log_det_spd(corr);
  const Eigen::MatrixXd q = corr.inverse() - Eigen::MatrixXd::Identity(d, d);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd zi = z.row(i).transpose();
    ll += -0.5 * logdet - 0.5 * zi.dot(q * zi);
  }
  return ll;
}

double student_t_copula_loglik(const Eigen::MatrixXd& pseudo_obs, const Eigen::MatrixXd& corr,
                               double nu) {
  const Eigen::Index n = pseudo_obs.rows();
  const auto d = static_cast<double>(pseudo_obs.cols());
  const Eigen::MatrixXd x = student_t_scores(pseudo_obs, nu);
  const double logdet = log_det_spd(corr);
  const Eigen::MatrixXd inv = corr.inverse();
  const double norm = std::lgamma((nu + d) / 2.0) + (d - 1.0) * std::lgamma(nu / 2.0) -
                      d * std::lgamma((nu + 1.0) / 2.0) - 0.5 * logdet;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = x.row(i).transpose();
    double marg = 0.0;
    for (Eigen::Index j = 0; j < xi.size(); ++j) marg += std::log1p(xi(j) * xi(j) / nu);
    ll += norm - (nu + d) / 2.0 * std::log1p(xi.dot(inv * xi) / nu) + (nu + 1.0) / 2.0 * marg;
  }
  return ll;
}

CopulaModel fit_copula(std::span<const std::vector<double>> samples,
                       const CopulaFitOptions& options) {
  if (samples.size() < options.min_samples) {
    throw UsageError("copula fit needs at least " + std::to_string(options.min_samples) +
                     " samples, got " + std::to_string(samples.size()));
  }
  const std::size_t dim = samples.front().size();
  const std::size_t n = samples.size();
  CopulaModel model;
  model.dimension = dim;
  model.samples = n;
  model.constant_value.assign(dim, 0.0);
  model.marginal_sorted.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (samples[i].size() != dim) throw DataError("copula samples differ in dimension");
      if (!std::isfinite(samples[i][j])) throw DataError("non-finite copula sample");
      col[i] = samples[i][j];
    }
    std::sort(col.begin(), col.end());
    if (col.back() - col.front() <= 1e-12 * std::max(1.0, std::abs(col.front()))) {
      model.constant_value[j] = col.front();
    } else {
      model.active.push_back(j);
      model.constant_value[j] = col[n / 2];
      model.marginal_sorted[j] = std::move(col);
    }
  }

  const auto k = static_cast<Eigen::Index>(model.active.size());
  if (k == 0) {
    model.correlation.resize(0, 0);
    return model;
  }
  Eigen::MatrixXd data(static_cast<Eigen::Index>(n), k);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < k; ++c) {
      data(static_cast<Eigen::Index>(i), c) = samples[i][model.active[static_cast<std::size_t>(c)]];
    }
  }
  const Eigen::MatrixXd u = pseudo_observations(data);

  // Gaussian: correlation of normal scores.
  Eigen::MatrixXd z(u.rows(), k);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < k; ++j) z(i, j) = normal_quantile(u(i, j));
  }
  const Eigen::MatrixXd zc = z.rowwise() - z.colwise().mean();
  Eigen::MatrixXd cov = zc.transpose() * zc / static_cast<double>(n);
  const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd r_gauss = repair_correlation(sd.asDiagonal() * cov * sd.asDiagonal());
  const double ll_gauss = gaussian_copula_loglik(u, r_gauss);

  // Student-t: Kendall's tau inversion, then profile likelihood in nu.
  Eigen::MatrixXd tau_corr = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const double rho = std::sin(kPi / 2.0 * kendall_tau(data.col(a), data.col(b)));
      tau_corr(a, b) = tau_corr(b, a) = rho;
    }
  }
  const Eigen::MatrixXd r_t = repair_correlation(tau_corr);
  const auto ll_of = [&](double log_nu) { return student_t_copula_loglik(u, r_t, std::exp(log_nu)); };
  const std::vector<double> grid = {2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 20.0, 30.0, 50.0,
                                    100.0, kMaxNu};
  std::size_t best_i = 0;
  std::vector<double> grid_ll(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid_ll[i] = ll_of(std::log(grid[i]));
    if (grid_ll[i] > grid_ll[best_i]) best_i = i;
  }
  double lo = std::log(best_i == 0 ? kMinNu : grid[best_i - 1]);
  double hi = std::log(best_i + 1 == grid.size() ? kMaxNu : grid[best_i + 1]);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = ll_of(x1), f2 = ll_of(x2);
  for (int it = 0; it < 30; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = ll_of(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = ll_of(x1);
    }
  }
  double nu = std::exp(0.5 * (lo + hi));
  double ll_t = ll_of(std::log(nu));
  if (grid_ll[best_i] > ll_t) {
    nu = grid[best_i];
    ll_t = grid_ll[best_i];
  }

  const double params = static_cast<double>(k * (k - 1) / 2);
  const double log_n = std::log(static_cast<double>(n));
  model.bic_gaussian = params * log_n - 2.0 * ll_gauss;
  model.bic_student_t = (params + 1.0) * log_n - 2.0 * ll_t;
  if (model.bic_student_t < model.bic_gaussian) {
    model.family = CopulaFamily::StudentT;
    model.correlation = r_t;
    model.degrees_of_freedom = nu;
    model.log_likelihood = ll_t;
  } else {
    model.family = CopulaFamily::Gaussian;
    model.correlation = r_gauss;
    model.log_likelihood = ll_gauss;
  }
  return model;
}

Eigen::MatrixXd sample_market(const CopulaModel& model, std::size_t n, std::uint64_t seed,
                              std::size_t volume_columns) {
  if (n == 0) throw UsageError("sample count must be at least 1");
  const auto dim = static_cast<Eigen::Index>(model.dimension);
  const auto k = static_cast<Eigen::Index>(model.active.size());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index j = 0; j < dim; ++j) out.col(j).setConstant(model.constant_value[static_cast<std::size_t>(j)]);
  if (k > 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.correlation);
    if (llt.info() != Eigen::Success) throw DataError("copula correlation not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const bool student = model.family == CopulaFamily::StudentT;
    std::chi_squared_distribution<double> chi2(student ? model.degrees_of_freedom : 1.0);
    std::optional<boost::math::students_t_distribution<double>> tdist;
    if (student) tdist.emplace(model.degrees_of_freedom);
    Eigen::VectorXd g(k);
    for (std::size_t i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) g(j) = normal(rng);
      Eigen::VectorXd zrow = chol * g;
      if (student) zrow *= std::sqrt(model.degrees_of_freedom / chi2(rng));
      for (Eigen::Index j = 0; j < k; ++j) {
        const double uij = student ? boost::math::cdf(*tdist, zrow(j)) : normal_cdf(zrow(j));
        const std::size_t col = model.active[static_cast<std::size_t>(j)];
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) =
            model.marginal_quantile(col, uij);
      }
    }
  }
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(dim, static_cast<Eigen::Index>(volume_columns)); ++j) {
    out.col(j) = out.col(j).cwiseMax(0.0);
  }
  return out;
}

double kantorovich_distance(const Eigen::MatrixXd& samples, std::span<const std::size_t> kept,
                            DistanceMetric metric, std::span<const double> weights) {
  const auto n = static_cast<std::size_t>(samples.rows());
  const std::vector<double> w = normalized_weights(weights, n);
  const Eigen::MatrixXd pts = standardized(samples, metric).transpose();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s : kept) {
      best = std::min(best, (pts.col(static_cast<Eigen::Index>(i)) -
                             pts.col(static_cast<Eigen::Index>(s))).norm());
    }
    total += w[i] * best;
  }
  return total;
}

ReductionResult fast_forward_reduce(const Eigen::MatrixXd& samples, std::size_t m,
                                    DistanceMetric metric, std::span<const double> weights) {
  const auto n = static_cast<std::size_t>(samples.rows());
  if (m < 1 || m > n) throw UsageError("reduction size must satisfy 1 <= m <= n");
  const std::vector<double> w = normalized_weights(weights, n);
  const Eigen::MatrixXd pts = standardized(samples, metric).transpose();  // dim x n
  const auto dist = [&](std::size_t a, std::size_t b) {
    return (pts.col(static_cast<Eigen::Index>(a)) - pts.col(static_cast<Eigen::Index>(b))).norm();
  };

  ReductionResult out;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t best = n;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < n; ++u) {
      if (chosen[u]) continue;
      double cost = 0.0;
      for (std::size_t k = 0; k < n && cost < best_cost; ++k) {
        if (k == u) continue;
        cost += w[k] * std::min(nearest[k], dist(k, u));
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = u;
      }
    }
    chosen[best] = true;
    out.selected.push_back(best);
    for (std::size_t k = 0; k < n; ++k) nearest[k] = std::min(nearest[k], dist(k, best));
  }

  std::sort(out.selected.begin(), out.selected.end());
  out.probability.assign(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t owner = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < m; ++s) {
      const double dk = dist(k, out.selected[s]);
      if (dk < best) {
        best = dk;
        owner = s;
      }
    }
    out.probability[owner] += w[k];
    out.kantorovich_distance += w[k] * best;
  }
  return out;
}

std::vector<MarketScenario> reduce_scenarios(const Eigen::MatrixXd& samples, std::size_t m,
                                             DistanceMetric metric) {
  if (samples.cols() % 2 != 0) throw UsageError("market samples need 2H columns");
  const auto hours = static_cast<std::size_t>(samples.cols() / 2);
  const ReductionResult red = fast_forward_reduce(samples, m, metric);
  std::vector<MarketScenario> out;
  for (std::size_t s = 0; s < red.selected.size(); ++s) {
    MarketScenario sc;
    const auto row = static_cast<Eigen::Index>(red.selected[s]);
    for (std::size_t d = 0; d < hours; ++d) {
      sc.buy_volume.push_back(std::max(0.0, samples(row, static_cast<Eigen::Index>(d))));
      sc.buy_price.push_back(samples(row, static_cast<Eigen::Index>(hours + d)));
    }
    sc.probability = red.probability[s];
    out.push_back(std::move(sc));
  }
  return out;
}

nlohmann::json CopulaModel::to_json() const {
  nlohmann::json corr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < correlation.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(correlation.cols()));
    for (Eigen::Index j = 0; j < correlation.cols(); ++j) row[static_cast<std::size_t>(j)] = correlation(i, j);
    corr.push_back(row);
  }
  return {{"kind", "copula_model"},
          {"family", to_string(family)},
          {"dimension", dimension},
          {"active", active},
          {"constant_value", constant_value},
          {"degrees_of_freedom", degrees_of_freedom},
          {"correlation", corr},
          {"marginal_sorted", marginal_sorted},
          {"bic_gaussian", bic_gaussian},
          {"bic_student_t", bic_student_t},
          {"log_likelihood", log_likelihood},
          {"samples", samples}};
}

CopulaModel CopulaModel::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "copula_model") throw DataError("not a copula_model file");
  CopulaModel m;
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "gaussian") {
    m.family = CopulaFamily::Gaussian;
  } else if (fam == "student_t") {
    m.family = CopulaFamily::StudentT;
  } else {
    throw DataError("unknown copula family '" + fam + "'");
  }
  m.dimension = j.at("dimension").get<std::size_t>();
  m.active = j.at("active").get<std::vector<std::size_t>>();
  m.constant_value = j.at("constant_value").get<std::vector<double>>();
  m.degrees_of_freedom = j.at("degrees_of_freedom").get<double>();
  const auto rows = j.at("correlation").get<std::vector<std::vector<double>>>();
  m.correlation.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m.correlation(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  m.marginal_sorted = j.at("marginal_sorted").get<std::vector<std::vector<double>>>();
  m.bic_gaussian = j.at("bic_gaussian").get<double>();
  m.bic_student_t = j.at("bic_student_t").get<double>();
  m.log_likelihood = j.at("log_likelihood").get<double>();
  m.samples = j.at("samples").get<std::size_t>();
  return m;
}

nlohmann::json market_scenario_to_json(const MarketScenario& s) {
  return {{"buy_volume", s.buy_volume}, {"buy_price", s.buy_price}, {"probability", s.probability}};
}

MarketScenario market_scenario_from_json(const nlohmann::json& j) {
  MarketScenario s;
  s.buy_volume = j.at("buy_volume").get<std::vector<double>>();
  s.buy_price = j.at("buy_price").get<std::vector<double>>();
  s.probability = j.at("probability").get<double>();
  return s;
}

}  // namespace clcrc
