#pragma once

// Virtual-battery properties checked on random fleets: envelope invariants,
// additivity of aggregation, monotone response in the power cap, and the
// uncapped response equal to the fast baseline.

#include <limits>
#include <random>
#include <string>
#include <vector>

#include "clcrc/fleet_model.hpp"
#include "support.hpp"

namespace clcrc::test {

struct PropertyFailure {
  std::size_t fleet = 0;
  std::string what;
};

inline std::vector<PropertyFailure> check_fleet_properties(std::size_t fleets, std::uint64_t seed) {
  constexpr UnixSeconds kDay = 1488758400;
  constexpr double kTol = 1e-9;
  std::vector<PropertyFailure> failures;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(0, 60);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  const auto fail = [&](std::size_t i, std::string what) { failures.push_back({i, std::move(what)}); };

  for (std::size_t i = 0; i < fleets; ++i) {
    const auto a = random_sessions(rng, size(rng), kDay);
    auto b = random_sessions(rng, size(rng), kDay);
    for (auto& s : b) s.vehicle_id += "b";
    std::vector<ChargingSession> both = a;
    both.insert(both.end(), b.begin(), b.end());

    const FleetEnvelope ea = aggregate_sessions(a, kDay, 24).envelope;
    const FleetEnvelope eb = aggregate_sessions(b, kDay, 24).envelope;
    const FleetEnvelope eab = aggregate_sessions(both, kDay, 24).envelope;
    for (const FleetEnvelope* e : {&ea, &eb, &eab}) {
      const std::string why = check_envelope(*e, kTol);
      if (!why.empty()) fail(i, "invariant: " + why);
    }
    const FleetEnvelope sum = ea + eb;
    for (std::size_t d = 0; d < 24; ++d) {
      if (std::abs(sum.e_hi[d] - eab.e_hi[d]) > kTol || std::abs(sum.e_lo[d] - eab.e_lo[d]) > kTol ||
          std::abs(sum.p_max[d] - eab.p_max[d]) > kTol) {
        fail(i, "additivity at hour " + std::to_string(d));
        break;
      }
    }

    const std::vector<double> inf(24, std::numeric_limits<double>::infinity());
    const LoadTrace free = charging_response(eab, inf);
    const std::vector<double> base = baseline_load(eab);
    for (std::size_t d = 0; d < 24; ++d) {
      if (std::abs(free.power[d] - eab.fast_power(d)) > kTol || std::abs(base[d] - free.power[d]) > kTol) {
        fail(i, "uncapped response differs from the fast baseline at hour " + std::to_string(d));
        break;
      }
    }
    if (std::abs(free.unserved_energy) > kTol) fail(i, "uncapped response leaves energy unserved");

    std::vector<double> lo(24), hi(24);
    for (std::size_t d = 0; d < 24; ++d) {
      lo[d] = frac(rng) * eab.p_max[d];
      hi[d] = lo[d] + frac(rng) * eab.p_max[d];
    }
    const LoadTrace tl = charging_response(eab, lo), th = charging_response(eab, hi);
    for (std::size_t d = 0; d < 24; ++d) {
      if (tl.energy[d] > th.energy[d] + kTol) {
        fail(i, "response not monotone in the cap at hour " + std::to_string(d));
        break;
      }
      if (th.energy[d] > eab.e_hi[d] + kTol || tl.power[d] < -kTol) {
        fail(i, "response charges ahead of the fast envelope at hour " + std::to_string(d));
        break;
      }
      const double prev = d == 0 ? 0.0 : th.energy[d - 1];
      if (std::abs(th.energy[d] - prev - th.power[d] * eab.delta_t) > kTol) {
        fail(i, "energy recursion broken at hour " + std::to_string(d));
        break;
      }
    }
    if (std::abs(th.unserved_energy - (eab.e_hi[23] - th.energy[23])) > kTol) {
      fail(i, "unserved energy mismatch");
    }
  }
  return failures;
}

}  // namespace clcrc::test
