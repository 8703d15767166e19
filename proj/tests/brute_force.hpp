#pragma once

// Exhaustive grid search over capacity reductions and redispatch energies
// for the three-hour trees of support.hpp (tau = 1, so only hour 2 has
// redispatch). Loads come from the fleet response function; the CVaR bound
// is evaluated exactly at its breakpoints.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "clcrc/decision_model.hpp"

namespace clcrc::test {

// min over eta of eps*eta + sum p (P - L - eta)^+ ; the minimum sits at a
// breakpoint eta = P_k - L.
inline double cvar_value(const std::vector<std::pair<double, double>>& loads, double limit,
                         double eps) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [pk, unused] : loads) {
    const double eta = pk - limit;
    double v = eps * eta;
    for (const auto& [p, w] : loads) v += w * std::max(p - limit - eta, 0.0);
    best = std::min(best, v);
  }
  return best;
}

struct GridResult {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> clc;
  std::vector<double> rc;  // per node, hour 2
  long evaluated = 0;
};

inline GridResult grid_search(const ScenarioTree& tree, const ContractParams& params, double step) {
  constexpr double kTol = 1e-9;
  const std::size_t H = tree.hours;
  const double L = params.capacity_limit;
  const int n_clc = static_cast<int>(std::floor((params.p_clc_max - params.p_clc_min) / step + 1e-9));
  const std::size_t hour = static_cast<std::size_t>(tree.tau + 1);
  GridResult best;
  std::vector<double> clc(H, 0.0);
  std::vector<int> k(H, 0);
  for (;;) {
    for (std::size_t d = 0; d < H; ++d) clc[d] = k[d] * step;
    double clc_cost = 0.0;
    for (double v : clc) clc_cost += params.pi_clc * v;
    std::vector<double> cap(H);
    for (std::size_t d = 0; d < H; ++d) cap[d] = params.p_clc_max - clc[d];

    bool feasible = clc_cost < best.objective;
    std::vector<LoadTrace> s1;
    for (const auto& env : tree.ev_stage1) {
      s1.push_back(charging_response(env, cap));
      for (std::size_t d = 0; d < H; ++d) {
        if (s1.back().energy[d] < env.e_lo[d] - kTol) feasible = false;
      }
    }
    for (std::size_t d : tree.d_minus) {
      std::vector<std::pair<double, double>> loads;
      for (std::size_t e = 0; e < s1.size(); ++e) loads.emplace_back(s1[e].power[d], tree.ev_probability[e]);
      if (feasible && cvar_value(loads, L, params.epsilon) > kTol) feasible = false;
    }

    if (feasible) {
      // Per node: candidate redispatch energies with their cost and leaf loads.
      struct Option {
        double energy, cost;
        std::vector<std::pair<double, double>> loads;
      };
      std::vector<std::vector<Option>> options(tree.nodes.size());
      for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& node = tree.nodes[i];
        const auto& parent = s1[node.ev];
        const auto& m = tree.markets[node.market];
        const double price = rc_unit_price(params.pi_rc_sell, m.buy_price[hour]);
        std::vector<double> energies = {0.0};
        const double top = std::min(m.buy_volume[hour], parent.power[hour] * params.delta_t);
        for (int q = 1; q * step <= top + kTol; ++q) {
          if (q * step >= params.p_rc_min * params.delta_t - kTol) energies.push_back(q * step);
        }
        for (double de : energies) {
          Option o{de, node.probability * price * de, {}};
          std::vector<double> rc_cap = parent.power;
          rc_cap[hour] -= de / params.delta_t;
          const double start = parent.energy[static_cast<std::size_t>(tree.tau)];
          for (const auto& c : tree.children_of(i)) {
            const LoadTrace t = charging_response_from(c.envelope, hour, start, cap, rc_cap);
            o.loads.emplace_back(t.power[hour], node.probability * c.probability);
          }
          options[i].push_back(std::move(o));
        }
      }
      std::vector<std::size_t> pick(options.size(), 0);
      for (;;) {
        ++best.evaluated;
        double cost = clc_cost;
        std::vector<std::pair<double, double>> loads;
        for (std::size_t i = 0; i < options.size(); ++i) {
          const Option& o = options[i][pick[i]];
          cost += o.cost;
          loads.insert(loads.end(), o.loads.begin(), o.loads.end());
        }
        if (cost < best.objective - 1e-12 && cvar_value(loads, L, params.epsilon) <= kTol) {
          best.objective = cost;
          best.clc = clc;
          best.rc.clear();
          for (std::size_t i = 0; i < options.size(); ++i) best.rc.push_back(options[i][pick[i]].energy);
        }
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
        if (i == pick.size()) break;
      }
    }
    std::size_t d = 0;
    while (d < H && ++k[d] > n_clc) k[d++] = 0;
    if (d == H) break;
  }
  return best;
}

}  // namespace clcrc::test
