#include "clcrc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "clcrc/errors.hpp"

namespace clcrc {

namespace {

std::size_t first_rc_hour(int tau) { return tau < 0 ? 0 : static_cast<std::size_t>(tau + 1); }

std::vector<double> caps_of(const Policy& policy, const ContractParams& params, std::size_t hours) {
  std::vector<double> cap(hours, params.p_clc_max);
  for (std::size_t d = 0; d < hours && d < policy.clc_reduction.size(); ++d) {
    cap[d] -= policy.clc_reduction[d];
  }
  return cap;
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

}  // namespace

bool RealizedOutcome::congested() const {
  return std::any_of(congestion.begin(), congestion.end(), [](int f) { return f != 0; });
}

RecourseSolver make_recourse_solver(const std::string& backend, const SolveSettings& settings) {
  return [backend, settings](const RecourseInputs& in,
                             const ContractParams& params) -> std::optional<std::vector<double>> {
    auto solver = make_backend(backend);
    const DecisionMilp model = build_recourse_milp(in, params);
    const Policy pol = solve(model, *solver, settings);
    if (!pol.ok()) return std::nullopt;
    return pol.rc_energy.at(0);
  };
}

RecourseSolver fixed_recourse(std::vector<double> rc_energy) {
  return [rc = std::move(rc_energy)](const RecourseInputs&, const ContractParams&) {
    return std::optional<std::vector<double>>(rc);
  };
}

RealizedOutcome rollout(const Policy& policy, const Realization& day, const RecourseSolver& recourse,
                        const ContractParams& params) {
  const FleetEnvelope& real = day.realized;
  const std::size_t H = real.hours();
  if (day.prognosis_basis.hours() != H || policy.clc_reduction.size() != H) {
    throw UsageError("rollout inputs disagree on the horizon");
  }
  const std::vector<double> cap = caps_of(policy, params, H);
  const std::size_t first = first_rc_hour(params.tau);

  RealizedOutcome out;
  out.prognosis = charging_response(day.prognosis_basis, cap).power;
  out.rc_energy.assign(H, 0.0);

  if (first < H) {
    const LoadTrace before = charging_response(real, cap);
    RecourseInputs in;
    in.clc_reduction = policy.clc_reduction;
    in.prognosis = out.prognosis;
    in.energy_at_tau = params.tau >= 0 ? before.energy[static_cast<std::size_t>(params.tau)] : 0.0;
    in.market = day.market;
    if (day.recourse_scenarios.size() == 0) {
      in.scenarios = {real};
      in.probability = {1.0};
    } else {
      for (const auto& s : day.recourse_scenarios.scenarios) {
        in.scenarios.push_back(reanchor(real, s, params.tau));
      }
      in.probability = day.recourse_scenarios.probability;
    }
    std::optional<std::vector<double>> rc;
    try {
      rc = recourse(in, params);
    } catch (const SolverError& e) {
      out.warnings.push_back(std::string("recourse solver error: ") + e.what());
    }
    if (rc && rc->size() == H) {
      for (std::size_t d = first; d < H; ++d) out.rc_energy[d] = std::max(0.0, (*rc)[d]);
    } else {
      out.recourse_fallback = true;
      out.warnings.push_back("recourse failed; zero redispatch applied");
    }
  }

  std::vector<double> rc_cap(H, std::numeric_limits<double>::infinity());
  for (std::size_t d = first; d < H; ++d) {
    rc_cap[d] = out.prognosis[d] - out.rc_energy[d] / params.delta_t;
  }
  out.realized_load = charging_response(real, cap, std::span<const double>(rc_cap));
  out.unserved_energy = out.realized_load.unserved_energy;
  out.congestion.assign(H, 0);
  for (std::size_t d = 0; d < H; ++d) {
    out.congestion[d] = out.realized_load.power[d] > params.capacity_limit + kCongestionTol ? 1 : 0;
  }
  out.clc_cost = policy.clc_cost(params);
  for (std::size_t d = first; d < H; ++d) {
    out.rc_cost += rc_unit_price(params.pi_rc_sell, day.market.buy_price.at(d)) * out.rc_energy[d];
  }
  out.total_cost = out.clc_cost + out.rc_cost;
  return out;
}

RealizedOutcome oracle_outcome(const FleetEnvelope& realized, const MarketScenario& market,
                               const ContractParams& params, const std::string& backend,
                               const SolveSettings& settings) {
  auto solver = make_backend(backend);
  const Policy pol = oracle_solve(realized, market, params, *solver, settings);
  if (!pol.ok()) throw SolverError("oracle problem not solved: " + to_string(pol.status));
  Realization day{realized, market, {}, realized};
  return rollout(pol, day, fixed_recourse(pol.rc_energy.at(0)), params);
}

std::vector<double> congestion_frequency(std::span<const RealizedOutcome> outcomes) {
  if (outcomes.empty()) throw UsageError("congestion frequency needs at least one outcome");
  std::vector<double> f(outcomes.front().congestion.size(), 0.0);
  for (const auto& o : outcomes) {
    if (o.congestion.size() != f.size()) throw UsageError("outcomes differ in horizon");
    for (std::size_t d = 0; d < f.size(); ++d) f[d] += o.congestion[d];
  }
  for (double& v : f) v /= static_cast<double>(outcomes.size());
  return f;
}

CostSummary mean_costs(std::span<const RealizedOutcome> outcomes) {
  CostSummary s;
  if (outcomes.empty()) return s;
  for (const auto& o : outcomes) {
    s.clc += o.clc_cost;
    s.rc += o.rc_cost;
    s.total += o.total_cost;
    s.congested_days += o.congested() ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(outcomes.size());
  s.clc /= n;
  s.rc /= n;
  s.total /= n;
  s.congested_days /= n;
  return s;
}

PolicyComparison compare_policies(std::span<const RealizedOutcome> stochastic,
                                  std::span<const RealizedOutcome> oracle) {
  if (stochastic.empty() || stochastic.size() != oracle.size()) {
    throw UsageError("policy comparison needs the same nonempty day set");
  }
  PolicyComparison c;
  c.days = stochastic.size();
  c.stochastic = mean_costs(stochastic);
  c.oracle = mean_costs(oracle);
  c.oracle_bound_holds = c.oracle.total <= c.stochastic.total + 1e-9;
  return c;
}

nlohmann::json PolicyComparison::to_json() const {
  auto costs = [](const CostSummary& s) {
    return nlohmann::json{{"clc", format_number(s.clc, 2)},
                          {"rc", format_number(s.rc, 2)},
                          {"total", format_number(s.total, 2)},
                          {"congested_day_share", format_number(s.congested_days, 4)}};
  };
  return {{"days", days},
          {"stochastic", costs(stochastic)},
          {"oracle", costs(oracle)},
          {"oracle_bound_holds", oracle_bound_holds}};
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next == n) return;
            i = next++;
          }
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

StabilityReport in_sample_stability(std::size_t days, std::span<const TreeSize> grid,
                                    TreeSize reference, const ContractParams& params,
                                    const TreeBuilder& build, const EvaluationSettings& settings) {
  for (const auto& g : grid) {
    if (g.ev > reference.ev || g.rc > reference.rc) {
      throw UsageError("reference tree size must dominate every grid entry");
    }
  }
  struct Metric {
    bool ok = false;
    double cost = 0.0;
    double prob = 0.0;
  };
  // metrics[day][0] is the reference, then one entry per grid cell.
  std::vector<std::vector<Metric>> metrics(days, std::vector<Metric>(grid.size() + 1));
  parallel_for(days, settings.workers, [&](std::size_t k) {
    auto solver = make_backend(settings.backend);
    for (std::size_t c = 0; c <= grid.size(); ++c) {
      const TreeSize size = c == 0 ? reference : grid[c - 1];
      if (c > 0 && size == reference && metrics[k][0].ok) {
        metrics[k][c] = metrics[k][0];
        continue;
      }
      const ScenarioTree tree = build(k, size);
      const Policy pol = solve_tree(tree, params, *solver, settings.solve);
      if (!pol.ok()) continue;
      metrics[k][c] = {true, pol.objective, max_of(in_sample_violation(tree, params, pol))};
    }
  });

  StabilityReport rep;
  rep.reference = reference;
  rep.days = days;
  for (std::size_t k = 0; k < days; ++k) rep.reference_failures += metrics[k][0].ok ? 0 : 1;
  auto rel = [](double v, double r) -> std::optional<double> {
    if (std::abs(r) > 1e-9) return std::abs(v - r) / std::abs(r);
    if (std::abs(v) <= 1e-9) return 0.0;
    return std::nullopt;
  };
  for (std::size_t c = 0; c < grid.size(); ++c) {
    StabilityCell cell;
    cell.size = grid[c];
    double sum_cost = 0.0, sum_prob = 0.0;
    std::size_t n_cost = 0, n_prob = 0;
    for (std::size_t k = 0; k < days; ++k) {
      const Metric& m = metrics[k][c + 1];
      const Metric& r = metrics[k][0];
      if (!m.ok) {
        ++cell.failed;
        continue;
      }
      if (!r.ok) continue;
      ++cell.days_scored;
      if (auto e = rel(m.cost, r.cost)) {
        sum_cost += *e;
        ++n_cost;
      }
      if (auto e = rel(m.prob, r.prob)) {
        sum_prob += *e;
        ++n_prob;
      }
    }
    if (n_cost > 0) cell.mrae_cost = sum_cost / static_cast<double>(n_cost);
    if (n_prob > 0) cell.mrae_probability = sum_prob / static_cast<double>(n_prob);
    rep.cells.push_back(cell);
  }
  return rep;
}

std::vector<SweepRow> epsilon_sweep(std::span<const DayInstance> days, std::vector<double> epsilons,
                                    const ContractParams& params,
                                    const EvaluationSettings& settings) {
  for (double e : epsilons) {
    if (!(e > 0.0 && e < 1.0)) throw UsageError("sweep epsilons must lie in (0, 1)");
  }
  std::sort(epsilons.begin(), epsilons.end());
  const std::size_t E = epsilons.size();
  struct Cell {
    bool ok = false;
    bool kept_previous = false;
    double objective = 0.0;
    RealizedOutcome outcome;
  };
  std::vector<std::vector<Cell>> cells(E, std::vector<Cell>(days.size()));
  parallel_for(days.size(), settings.workers, [&](std::size_t k) {
    auto solver = make_backend(settings.backend);
    const ScenarioTree& tree = days[k].tree;
    std::optional<Policy> prev;
    for (std::size_t e = 0; e < E; ++e) {
      ContractParams p = params;
      p.epsilon = epsilons[e];
      Policy pol;
      if (prev) {
        pol = solve(build_milp(tree, p), *solver, settings.solve, &*prev);
      } else {
        pol = solve_tree(tree, p, *solver, settings.solve);
      }
      Cell& cell = cells[e][k];
      // A policy for a smaller epsilon stays feasible, so never do worse.
      if (prev && (!pol.ok() || pol.objective > prev->objective)) {
        pol = *prev;
        cell.kept_previous = true;
      }
      if (!pol.ok()) continue;
      cell.ok = true;
      cell.objective = pol.objective;
      cell.outcome = rollout(pol, days[k].realization, make_recourse_solver(settings.backend, settings.solve), p);
      prev = pol;
    }
  });

  std::vector<SweepRow> rows;
  for (std::size_t e = 0; e < E; ++e) {
    SweepRow row;
    row.epsilon = epsilons[e];
    std::vector<RealizedOutcome> outs;
    double obj = 0.0;
    for (const Cell& c : cells[e]) {
      if (c.kept_previous) ++row.kept_previous;
      if (!c.ok) {
        ++row.failed;
        continue;
      }
      obj += c.objective;
      outs.push_back(c.outcome);
    }
    if (!outs.empty()) {
      row.mean_objective = obj / static_cast<double>(outs.size());
      row.mean_realized_cost = mean_costs(outs).total;
      row.congestion_frequency = congestion_frequency(outs);
      row.max_congestion_frequency = max_of(row.congestion_frequency);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<DayResult> evaluate_days(std::span<const DayInstance> days, const ContractParams& params,
                                     const EvaluationSettings& settings) {
  std::vector<DayResult> out(days.size());
  parallel_for(days.size(), settings.workers, [&](std::size_t k) {
    auto solver = make_backend(settings.backend);
    const DayInstance& day = days[k];
    DayResult& r = out[k];
    r.day = day.day;
    r.policy = solve_tree(day.tree, params, *solver, settings.solve);
    if (!r.policy.ok()) {
      throw SolverError("day " + format_date(day.day) + ": " + to_string(r.policy.status));
    }
    r.in_sample_violation = in_sample_violation(day.tree, params, r.policy);
    r.stochastic = rollout(r.policy, day.realization,
                           make_recourse_solver(settings.backend, settings.solve), params);
    r.oracle = oracle_outcome(day.realization.realized, day.realization.market, params,
                              settings.backend, settings.solve);
  });
  return out;
}

std::string format_number(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos) s = decimals > 0 ? "0." + std::string(decimals, '0') : "0";
  return s;
}

namespace {

std::string opt_number(const std::optional<double>& v, int decimals = 6) {
  return v ? format_number(*v, decimals) : "";
}

}  // namespace

void write_outcomes_csv(std::ostream& out, std::span<const DayResult> results) {
  out << "day,policy,clc_cost,rc_cost,total_cost,congested_hours,unserved_mwh,recourse_fallback,"
         "in_sample_objective,max_in_sample_violation\n";
  for (const auto& r : results) {
    auto row = [&](const char* name, const RealizedOutcome& o, const std::string& obj,
                   const std::string& viol) {
      int hours = 0;
      for (int f : o.congestion) hours += f;
      out << format_date(r.day) << ',' << name << ',' << format_number(o.clc_cost, 4) << ','
          << format_number(o.rc_cost, 4) << ',' << format_number(o.total_cost, 4) << ',' << hours << ','
          << format_number(o.unserved_energy, 6) << ',' << (o.recourse_fallback ? 1 : 0) << ',' << obj
          << ',' << viol << '\n';
    };
    row("stochastic", r.stochastic, format_number(r.policy.objective, 4),
        format_number(max_of(r.in_sample_violation), 6));
    row("oracle", r.oracle, "", "");
  }
}

void write_frequency_csv(std::ostream& out, std::span<const DayResult> results) {
  out << "hour,stochastic,oracle\n";
  if (results.empty()) return;
  std::vector<RealizedOutcome> s, o;
  for (const auto& r : results) {
    s.push_back(r.stochastic);
    o.push_back(r.oracle);
  }
  const auto fs = congestion_frequency(s);
  const auto fo = congestion_frequency(o);
  for (std::size_t d = 0; d < fs.size(); ++d) {
    out << d << ',' << format_number(fs[d], 6) << ',' << format_number(fo[d], 6) << '\n';
  }
}

void write_stability_csv(std::ostream& out, const StabilityReport& report) {
  out << "ev_scenarios,rc_scenarios,mrae_cost,mrae_max_probability,days_scored,failed\n";
  for (const auto& c : report.cells) {
    out << c.size.ev << ',' << c.size.rc << ',' << opt_number(c.mrae_cost) << ','
        << opt_number(c.mrae_probability) << ',' << c.days_scored << ',' << c.failed << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "epsilon,mean_objective,mean_realized_cost,max_congestion_frequency,failed,kept_previous\n";
  for (const auto& r : rows) {
    out << format_number(r.epsilon, 4) << ',' << opt_number(r.mean_objective, 4) << ','
        << opt_number(r.mean_realized_cost, 4) << ',' << opt_number(r.max_congestion_frequency) << ','
        << r.failed << ',' << r.kept_previous << '\n';
  }
}

nlohmann::json summary_json(std::span<const DayResult> results, const ContractParams& params) {
  std::vector<RealizedOutcome> s, o;
  double in_sample = 0.0, worst_violation = 0.0;
  std::size_t fallbacks = 0, suboptimal = 0;
  for (const auto& r : results) {
    s.push_back(r.stochastic);
    o.push_back(r.oracle);
    in_sample += r.policy.objective;
    worst_violation = std::max(worst_violation, max_of(r.in_sample_violation));
    fallbacks += r.stochastic.recourse_fallback ? 1 : 0;
    suboptimal += r.policy.suboptimal ? 1 : 0;
  }
  nlohmann::json j;
  j["kind"] = "experiment_summary";
  j["params"] = params.to_json();
  j["days"] = results.size();
  if (results.empty()) return j;
  j["comparison"] = compare_policies(s, o).to_json();
  j["mean_in_sample_objective"] = format_number(in_sample / static_cast<double>(results.size()), 4);
  j["max_in_sample_violation"] = format_number(worst_violation, 6);
  std::vector<std::string> freq;
  for (double f : congestion_frequency(s)) freq.push_back(format_number(f, 6));
  j["out_of_sample_congestion_frequency"] = freq;
  j["recourse_fallbacks"] = fallbacks;
  j["suboptimal_solves"] = suboptimal;
  return j;
}

}  // namespace clcrc
