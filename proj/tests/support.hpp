#pragma once

// Fixtures shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "clcrc/decision_model.hpp"
#include "clcrc/fleet_model.hpp"
#include "clcrc/scenario_tree.hpp"

namespace clcrc::test {

inline MarketScenario empty_market(std::size_t hours) {
  MarketScenario m;
  m.buy_volume.assign(hours, 0.0);
  m.buy_price.assign(hours, 0.0);
  m.probability = 1.0;
  return m;
}

inline ScenarioTree single_scenario_tree(const FleetEnvelope& env, const MarketScenario& market,
                                         int tau) {
  EvScenarioSet s1;
  s1.scenarios = {env};
  s1.probability = {1.0};
  MarketScenario m = market;
  m.probability = 1.0;
  return build_tree(s1, {m}, shared_stage_two(s1), tau);
}

inline double grid(std::mt19937_64& rng, int lo, int hi) {
  return 0.1 * std::uniform_int_distribution<int>(lo, hi)(rng);
}

struct TinyCase {
  ScenarioTree tree;
  ContractParams params;
};

inline constexpr int kTinyTau = 1;
inline constexpr double kTinyLimit = 1.0;

// Three hours on a 0.1 grid with L = 1, tau = 1 and p_max <= 1.5, so
// capacity reductions stay within [0, 0.5].
inline FleetEnvelope tiny_envelope(std::mt19937_64& rng) {
  for (;;) {
    FleetEnvelope env(3);
    double hi = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
      env.p_max[d] = 1.0 + grid(rng, 0, 5);
      hi += std::min(env.p_max[d], grid(rng, 0, 15));
      env.e_hi[d] = hi;
    }
    double lo = std::max(0.0, hi - grid(rng, 0, 3));
    for (std::size_t d = 3; d-- > 0;) {
      env.e_lo[d] = lo;
      lo = std::max(0.0, lo - std::min(kTinyLimit, env.p_max[d]));
    }
    if (lo > 1e-9) continue;
    for (auto& v : env.e_lo) v = std::round(v * 10.0) / 10.0;
    if (check_envelope(env, 1e-9).empty() && env.peak_slow_power() <= kTinyLimit + 1e-9) return env;
  }
}

inline FleetEnvelope tiny_child(std::mt19937_64& rng, const FleetEnvelope& parent) {
  FleetEnvelope c = parent;
  c.p_max[2] = 1.0 + grid(rng, 0, 5);
  c.e_hi[2] = parent.e_hi[1] + std::min(c.p_max[2], grid(rng, 0, 15));
  c.e_lo[2] = std::min(c.e_hi[2], parent.e_lo[1] + std::min(kTinyLimit, c.p_max[2]));
  c.e_lo[2] = std::round(c.e_lo[2] * 10.0) / 10.0;
  return c;
}

// Equiprobable three-hour tree with `ev` stage-one envelopes, `rc` markets
// and `children` stage-two envelopes per envelope.
inline TinyCase random_case(std::uint64_t seed, std::size_t ev, std::size_t rc, std::size_t children) {
  std::mt19937_64 rng(seed);
  EvScenarioSet s1;
  for (std::size_t k = 0; k < ev; ++k) s1.scenarios.push_back(tiny_envelope(rng));
  s1.probability.assign(ev, 1.0 / static_cast<double>(ev));
  std::vector<MarketScenario> markets;
  for (std::size_t k = 0; k < rc; ++k) {
    MarketScenario m = empty_market(3);
    m.buy_volume[2] = grid(rng, 0, 5);
    m.buy_price[2] = 60.0 + 10.0 * std::uniform_int_distribution<int>(0, 5)(rng);
    m.probability = 1.0 / static_cast<double>(rc);
    markets.push_back(m);
  }
  std::vector<EvScenarioSet> kids;
  for (const auto& parent : s1.scenarios) {
    EvScenarioSet k;
    for (std::size_t c = 0; c < children; ++c) k.scenarios.push_back(tiny_child(rng, parent));
    k.probability.assign(children, 1.0 / static_cast<double>(children));
    kids.push_back(k);
  }
  TinyCase tc;
  tc.tree = build_tree(s1, markets, [&](std::size_t e, const FleetEnvelope&) { return kids[e]; },
                       kTinyTau);
  double pmax = 0.0;
  for (const auto& env : tc.tree.ev_stage1) pmax = std::max(pmax, *std::max_element(env.p_max.begin(), env.p_max.end()));
  for (const auto& list : tc.tree.children) {
    for (const auto& c : list) pmax = std::max(pmax, *std::max_element(c.envelope.p_max.begin(), c.envelope.p_max.end()));
  }
  const double clc_prices[] = {20.0, 40.0, 100.0};
  tc.params.pi_clc = clc_prices[std::uniform_int_distribution<int>(0, 2)(rng)];
  tc.params.tau = kTinyTau;
  tc.params.capacity_limit = kTinyLimit;
  tc.params.p_clc_min = kTinyLimit;
  tc.params.p_clc_max = pmax;
  tc.params.epsilon = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? 0.125 : 0.25;
  return tc;
}

// 2 x 2 stage-one tree with two children per envelope.
inline TinyCase random_tiny_case(std::uint64_t seed) { return random_case(seed, 2, 2, 2); }

// Random fleet of sessions within a two-day window around `day`.
inline std::vector<ChargingSession> random_sessions(std::mt19937_64& rng, std::size_t n,
                                                    UnixSeconds day) {
  std::vector<ChargingSession> out;
  std::uniform_int_distribution<int> minute(-12 * 60, 30 * 60);
  std::uniform_int_distribution<int> stay(30, 16 * 60);
  std::uniform_real_distribution<double> power(0.0037, 0.011);
  std::uniform_real_distribution<double> fill(0.0, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    ChargingSession s;
    s.vehicle_id = "ev" + std::to_string(k);
    s.arrival = day + 60 * static_cast<UnixSeconds>(minute(rng));
    s.departure = s.arrival + 60 * static_cast<UnixSeconds>(stay(rng));
    s.max_power = power(rng);
    const double hours = static_cast<double>(s.departure - s.arrival) / 3600.0;
    s.energy_demand = fill(rng) * s.max_power * hours;
    out.push_back(s);
  }
  return out;
}

}  // namespace clcrc::test
