#include "clcrc/decision_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "clcrc/errors.hpp"

namespace clcrc {

namespace {

using Terms = std::vector<std::pair<std::size_t, double>>;

// Linear expression  constant + sum(terms)  with known value range.
struct Affine {
  Terms terms;
  double constant = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// A modelled load at one hour plus the ranges its values can take.
struct LoadInfo {
  LoadVar var;
  double p_lo = 0.0, p_hi = 0.0;
  double e_lo = 0.0, e_hi = 0.0;
};

struct NodeSpec {
  std::size_t ev = 0;
  double probability = 0.0;
  const MarketScenario* market = nullptr;
};

// Everything build_problem needs; the tree and the recourse model both map
// onto it.
struct Problem {
  std::size_t hours = 0;
  int tau = 0;
  std::vector<const FleetEnvelope*> ev;
  std::vector<double> ev_probability;
  std::vector<NodeSpec> nodes;
  std::vector<std::vector<const FleetEnvelope*>> child_env;  // [ev][child]
  std::vector<std::vector<double>> child_probability;
  std::optional<std::vector<double>> fixed_clc;
  std::optional<std::vector<double>> fixed_prognosis;  // single ev only
  std::optional<double> leaf_start_energy;
  bool d_minus_cvar = true;
};

std::string idx(const char* base, std::initializer_list<std::size_t> ids) {
  std::ostringstream s;
  s << base << '[';
  bool first = true;
  for (std::size_t i : ids) {
    s << (first ? "" : ",") << i;
    first = false;
  }
  s << ']';
  return s.str();
}

std::size_t first_leaf_hour(int tau) { return tau < 0 ? 0 : static_cast<std::size_t>(tau + 1); }

std::vector<double> cap_series(const Problem& pb, const ContractParams& params) {
  std::vector<double> cap(pb.hours, params.p_clc_max);
  if (pb.fixed_clc) {
    for (std::size_t d = 0; d < pb.hours; ++d) cap[d] -= (*pb.fixed_clc)[d];
  }
  return cap;
}

// Loads with every free decision at zero.
struct Baseline {
  std::vector<LoadTrace> stage1;                       // [ev]
  std::vector<std::vector<LoadTrace>> leaves;          // [ev][child]
};

Baseline baseline(const Problem& pb, const ContractParams& params) {
  Baseline b;
  const std::vector<double> cap = cap_series(pb, params);
  for (std::size_t e = 0; e < pb.ev.size(); ++e) {
    if (pb.fixed_prognosis) {
      LoadTrace t;
      t.power = *pb.fixed_prognosis;
      t.energy.assign(pb.hours, pb.leaf_start_energy.value_or(0.0));
      b.stage1.push_back(std::move(t));
    } else {
      b.stage1.push_back(charging_response(*pb.ev[e], cap));
    }
  }
  const std::size_t first = first_leaf_hour(pb.tau);
  for (std::size_t e = 0; e < pb.ev.size(); ++e) {
    std::vector<LoadTrace> kids;
    double start = 0.0;
    if (pb.tau >= 0) start = pb.leaf_start_energy.value_or(b.stage1[e].energy[static_cast<std::size_t>(pb.tau)]);
    for (const FleetEnvelope* child : pb.child_env[e]) {
      kids.push_back(first >= pb.hours ? LoadTrace{}
                                       : charging_response_from(*child, first, start, cap,
                                                                b.stage1[e].power));
    }
    b.leaves.push_back(std::move(kids));
  }
  return b;
}

std::set<std::size_t> free_hours(const Problem& pb, const ContractParams& params, const Baseline& b) {
  const double limit = params.capacity_limit + kCongestionTol;
  const std::size_t first = first_leaf_hour(pb.tau);
  std::set<std::size_t> out;
  for (std::size_t d = 0; d < pb.hours; ++d) {
    bool ok = true;
    for (std::size_t e = 0; e < pb.ev.size() && ok; ++e) {
      if (!pb.fixed_prognosis && b.stage1[e].power[d] > limit) ok = false;
      if (d >= first) {
        for (const auto& t : b.leaves[e]) {
          if (t.power[d] > limit) ok = false;
        }
      }
    }
    if (ok) out.insert(d);
  }
  return out;
}

class Builder {
 public:
  Builder(const Problem& pb, const ContractParams& params, const BuildOptions& opt)
      : pb_(pb), params_(params), opt_(opt), dt_(params.delta_t) {}

  DecisionMilp build() {
    const Baseline base = baseline(pb_, params_);
    const std::set<std::size_t> free = free_hours(pb_, params_, base);
    std::size_t prefix = 0;
    if (opt_.prefilter) {
      while (prefix < pb_.hours && free.count(prefix) != 0) ++prefix;
    }
    m_.hours = pb_.hours;
    m_.nodes = pb_.nodes.size();
    m_.fixed_prefix = prefix;
    m_.pi_clc = params_.pi_clc;
    auto& inst = m_.instance;
    const std::size_t first_leaf = first_leaf_hour(pb_.tau);

    // Capacity limitation, first stage.
    m_.clc.assign(pb_.hours, std::nullopt);
    if (pb_.fixed_clc) {
      for (double v : *pb_.fixed_clc) m_.fixed_clc_cost += params_.pi_clc * v;
      inst.objective_constant = m_.fixed_clc_cost;
    } else {
      for (std::size_t d = 0; d < pb_.hours; ++d) {
        const double ub = d < prefix ? 0.0 : params_.p_clc_max - params_.p_clc_min;
        m_.clc[d] = inst.add_column(idx("dP_clc", {d}), 0.0, ub, params_.pi_clc);
      }
    }

    // First-stage loads (prognosis), one block per EV scenario.
    std::vector<std::vector<LoadInfo>> s1(pb_.ev.size());
    for (std::size_t e = 0; e < pb_.ev.size(); ++e) {
      s1[e].resize(pb_.hours);
      for (std::size_t d = 0; d < pb_.hours; ++d) {
        if (pb_.fixed_prognosis || d < prefix) {
          s1[e][d] = constant(base.stage1[e].power[d], base.stage1[e].energy[d]);
          continue;
        }
        const LoadInfo& prev = d == 0 ? zero_ : s1[e][d - 1];
        s1[e][d] = response(idx("P1", {e, d}), idx("E1", {e, d}), *pb_.ev[e], d, prev, nullptr,
                            std::nullopt, opt_.enforce_lower_envelope);
      }
    }

    // Redispatch decisions and leaf loads.
    m_.rc_energy.assign(pb_.nodes.size(), std::vector<std::optional<std::size_t>>(pb_.hours));
    m_.rc_active = m_.rc_energy;
    m_.rc_price.assign(pb_.nodes.size(), std::vector<double>(pb_.hours, 0.0));
    m_.leaves.resize(pb_.nodes.size());
    std::vector<std::vector<std::vector<LoadInfo>>> leaf(pb_.nodes.size());
    for (std::size_t i = 0; i < pb_.nodes.size(); ++i) {
      const NodeSpec& node = pb_.nodes[i];
      m_.node_ev.push_back(node.ev);
      m_.node_probability.push_back(node.probability);
      for (std::size_t d = first_leaf; d < pb_.hours; ++d) {
        const double price = rc_unit_price(params_.pi_rc_sell, node.market->buy_price[d]);
        m_.rc_price[i][d] = price;
        if (d < prefix) continue;
        const double volume = std::min(std::max(node.market->buy_volume[d], 0.0),
                                       s1[node.ev][d].p_hi * dt_);
        if (volume < params_.p_rc_min * dt_) continue;
        const std::size_t de = inst.add_column(idx("dE_rc", {i, d}), 0.0, volume,
                                               node.probability * price);
        const std::size_t z = inst.add_binary(idx("z_rc", {i, d}));
        inst.add_row(idx("rc_min", {i, d}), 0.0, kInf, {{de, 1.0}, {z, -params_.p_rc_min * dt_}});
        inst.add_row(idx("rc_max", {i, d}), -kInf, 0.0, {{de, 1.0}, {z, -volume}});
        m_.rc_energy[i][d] = de;
        m_.rc_active[i][d] = z;
      }
      const std::size_t e = node.ev;
      leaf[i].resize(pb_.child_env[e].size());
      for (std::size_t j = 0; j < pb_.child_env[e].size(); ++j) {
        auto& series = leaf[i][j];
        series.resize(pb_.hours);
        for (std::size_t d = 0; d < pb_.hours; ++d) {
          if (d < first_leaf) {
            series[d] = s1[e][d];
            if (pb_.leaf_start_energy) {
              series[d] = constant(s1[e][d].p_lo, *pb_.leaf_start_energy);
            }
            continue;
          }
          if (d < prefix) {
            const LoadTrace& t = base.leaves[e][j];
            series[d] = constant(t.power[d], t.energy[d]);
            continue;
          }
          const LoadInfo& prev = d == 0 ? zero_ : series[d - 1];
          series[d] = response(idx("P2", {i, j, d}), idx("E2", {i, j, d}), *pb_.child_env[e][j], d,
                               prev, &s1[e][d], m_.rc_energy[i][d], false);
        }
      }
    }

    add_cvar(s1, leaf, prefix, first_leaf);

    for (std::size_t e = 0; e < pb_.ev.size(); ++e) {
      std::vector<LoadVar> v;
      for (const auto& li : s1[e]) v.push_back(li.var);
      m_.stage1.push_back(std::move(v));
    }
    for (std::size_t i = 0; i < leaf.size(); ++i) {
      for (const auto& series : leaf[i]) {
        std::vector<LoadVar> v;
        for (const auto& li : series) v.push_back(li.var);
        m_.leaves[i].push_back(std::move(v));
      }
    }
    return std::move(m_);
  }

 private:
  static LoadInfo constant(double p, double e) {
    LoadInfo li;
    li.var.power_value = p;
    li.var.energy_value = e;
    li.p_lo = li.p_hi = p;
    li.e_lo = li.e_hi = e;
    return li;
  }

  static void add_var(Affine& a, const LoadVar& v, bool energy, double coef) {
    const auto& col = energy ? v.energy : v.power;
    if (col) {
      a.terms.emplace_back(*col, coef);
    } else {
      a.constant += coef * (energy ? v.energy_value : v.power_value);
    }
  }

  double big_m(double hi) const {
    const double need = std::max(hi, 0.0);
    if (params_.big_m > 0.0) {
      if (params_.big_m < need - 1e-9) {
        throw UsageError("big_m " + std::to_string(params_.big_m) +
                         " is below a min-operator bound " + std::to_string(need));
      }
      return params_.big_m;
    }
    return need;
  }

  // P_d = min(args) via one binary per case that can be the minimum.
  LoadInfo response(const std::string& pname, const std::string& ename, const FleetEnvelope& env,
                    std::size_t d, const LoadInfo& prev, const LoadInfo* prognosis,
                    std::optional<std::size_t> rc_col, bool lower_envelope) {
    auto& inst = m_.instance;
    std::vector<Affine> args;
    std::vector<char> tag;

    Affine a;  // (e_hi - E_{d-1}) / dt
    a.constant = env.e_hi[d] / dt_;
    add_var(a, prev.var, true, -1.0 / dt_);
    a.lo = (env.e_hi[d] - prev.e_hi) / dt_;
    a.hi = (env.e_hi[d] - prev.e_lo) / dt_;
    args.push_back(a);
    tag.push_back('a');

    Affine b;
    b.constant = b.lo = b.hi = env.p_max[d];
    args.push_back(b);
    tag.push_back('b');

    Affine c;  // p_clc_max - dP
    c.constant = params_.p_clc_max;
    if (m_.clc[d]) {
      c.terms.emplace_back(*m_.clc[d], -1.0);
      c.lo = params_.p_clc_max - inst.columns()[*m_.clc[d]].upper;
      c.hi = params_.p_clc_max;
    } else {
      const double fixed = pb_.fixed_clc ? (*pb_.fixed_clc)[d] : 0.0;
      c.constant -= fixed;
      c.lo = c.hi = c.constant;
    }
    args.push_back(c);
    tag.push_back('c');

    if (prognosis != nullptr) {  // prognosis - dE / dt
      Affine r;
      add_var(r, prognosis->var, false, 1.0);
      r.lo = prognosis->p_lo;
      r.hi = prognosis->p_hi;
      if (rc_col) {
        r.terms.emplace_back(*rc_col, -1.0 / dt_);
        r.lo -= inst.columns()[*rc_col].upper / dt_;
      }
      args.push_back(r);
      tag.push_back('d');
    }

    // Drop cases that can never be the strict minimum.
    const std::size_t n = args.size();
    std::vector<bool> live(n, true);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != k && live[j] && args[k].lo >= args[j].hi) {
          live[k] = false;
          break;
        }
      }
    }
    double p_hi = kInf, p_lo = kInf;
    for (std::size_t k = 0; k < n; ++k) {
      p_hi = std::min(p_hi, args[k].hi);
      p_lo = std::min(p_lo, args[k].lo);
    }
    p_hi = std::max(p_hi, 0.0);
    p_lo = std::clamp(p_lo, 0.0, p_hi);

    LoadInfo out;
    const std::size_t p = inst.add_column(pname, 0.0, p_hi);
    out.var.power = p;
    out.p_lo = p_lo;
    out.p_hi = p_hi;

    for (std::size_t k = 0; k < n; ++k) {
      if (args[k].terms.empty()) continue;  // constant case: column bound
      Terms t = {{p, 1.0}};
      for (auto [j, v] : args[k].terms) t.emplace_back(j, -v);
      inst.add_row(pname + "_le_" + tag[k], -kInf, args[k].constant, std::move(t));
    }
    std::vector<std::size_t> live_idx;
    for (std::size_t k = 0; k < n; ++k) {
      if (live[k]) live_idx.push_back(k);
    }
    if (live_idx.size() == 1) {
      const Affine& g = args[live_idx.front()];
      Terms t = {{p, 1.0}};
      for (auto [j, v] : g.terms) t.emplace_back(j, -v);
      inst.add_row(pname + "_ge_" + tag[live_idx.front()], g.constant, kInf, std::move(t));
    } else {
      Terms pick;
      for (std::size_t k : live_idx) {
        const Affine& g = args[k];
        const double m = big_m(g.hi);
        const std::size_t z = inst.add_binary(pname + "_z" + tag[k]);
        pick.emplace_back(z, 1.0);
        Terms t = {{p, 1.0}, {z, -m}};
        for (auto [j, v] : g.terms) t.emplace_back(j, -v);
        inst.add_row(pname + "_ge_" + tag[k], g.constant - m, kInf, std::move(t));
      }
      inst.add_row(pname + "_one", 1.0, 1.0, std::move(pick));
    }

    // E_d = E_{d-1} + P_d dt
    double e_lo = prev.e_lo + p_lo * dt_;
    const double e_hi = std::min(env.e_hi[d], prev.e_hi + p_hi * dt_);
    if (lower_envelope) e_lo = std::max(e_lo, env.e_lo[d]);
    const std::size_t e = inst.add_column(ename, std::min(e_lo, e_hi), e_hi);
    out.var.energy = e;
    out.e_lo = std::min(e_lo, e_hi);
    out.e_hi = e_hi;
    Terms t = {{e, 1.0}, {p, -dt_}};
    double rhs = 0.0;
    if (prev.var.energy) {
      t.emplace_back(*prev.var.energy, -1.0);
    } else {
      rhs = prev.var.energy_value;
    }
    inst.add_row(ename + "_state", rhs, rhs, std::move(t));
    if (lower_envelope && env.e_lo[d] > e_hi + 1e-9) {
      // Lower envelope out of reach: keep the model honest and infeasible.
      inst.add_row(ename + "_lo", env.e_lo[d], kInf, {{e, 1.0}});
    }
    return out;
  }

  void add_cvar(const std::vector<std::vector<LoadInfo>>& s1,
                const std::vector<std::vector<std::vector<LoadInfo>>>& leaf, std::size_t prefix,
                std::size_t first_leaf) {
    auto& inst = m_.instance;
    const double eps = params_.epsilon;
    const double limit = params_.capacity_limit;
    const bool robust = opt_.robust;
    auto add_hour = [&](std::size_t d, const std::vector<std::pair<const LoadInfo*, double>>& loads,
                        const char* tag) {
      const std::size_t eta = inst.add_column(idx(tag, {d}) + "_eta", robust ? 0.0 : -kInf,
                                              robust ? 0.0 : kInf);
      Terms sum = {{eta, eps}};
      std::size_t w = 0;
      for (const auto& [li, prob] : loads) {
        const std::size_t zeta = inst.add_column(idx(tag, {d, w}) + "_zeta", 0.0, robust ? 0.0 : kInf);
        // zeta >= P - L - eta
        Terms t = {{zeta, 1.0}, {eta, 1.0}};
        double rhs = -limit;
        if (li->var.power) {
          t.emplace_back(*li->var.power, -1.0);
        } else {
          rhs += li->var.power_value;
        }
        inst.add_row(idx(tag, {d, w}) + "_excess", rhs, kInf, std::move(t));
        sum.emplace_back(zeta, prob);
        ++w;
      }
      inst.add_row(idx(tag, {d}) + "_cvar", -kInf, 0.0, std::move(sum));
    };

    if (pb_.d_minus_cvar && !pb_.fixed_prognosis) {
      for (std::size_t d = prefix; d < std::min(first_leaf, pb_.hours); ++d) {
        std::vector<std::pair<const LoadInfo*, double>> loads;
        for (std::size_t e = 0; e < s1.size(); ++e) loads.emplace_back(&s1[e][d], pb_.ev_probability[e]);
        add_hour(d, loads, "cvar_minus");
      }
    }
    for (std::size_t d = std::max(prefix, first_leaf); d < pb_.hours; ++d) {
      std::vector<std::pair<const LoadInfo*, double>> loads;
      for (std::size_t i = 0; i < leaf.size(); ++i) {
        const auto& kids = pb_.child_probability[pb_.nodes[i].ev];
        for (std::size_t j = 0; j < leaf[i].size(); ++j) {
          loads.emplace_back(&leaf[i][j][d], pb_.nodes[i].probability * kids[j]);
        }
      }
      if (!loads.empty()) add_hour(d, loads, "cvar_plus");
    }
  }

  const Problem& pb_;
  const ContractParams& params_;
  const BuildOptions& opt_;
  double dt_;
  DecisionMilp m_;
  LoadInfo zero_{};
};

Problem problem_from_tree(const ScenarioTree& tree) {
  Problem pb;
  pb.hours = tree.hours;
  pb.tau = tree.tau;
  for (const auto& e : tree.ev_stage1) pb.ev.push_back(&e);
  pb.ev_probability = tree.ev_probability;
  for (const auto& n : tree.nodes) pb.nodes.push_back({n.ev, n.probability, &tree.markets.at(n.market)});
  for (const auto& kids : tree.children) {
    std::vector<const FleetEnvelope*> envs;
    std::vector<double> probs;
    for (const auto& c : kids) {
      envs.push_back(&c.envelope);
      probs.push_back(c.probability);
    }
    pb.child_env.push_back(std::move(envs));
    pb.child_probability.push_back(std::move(probs));
  }
  return pb;
}

double value_of(const LoadVar& v, const std::vector<double>& x, bool energy) {
  const auto& col = energy ? v.energy : v.power;
  return col ? x.at(*col) : (energy ? v.energy_value : v.power_value);
}

}  // namespace

void ContractParams::validate() const {
  auto fail = [](const std::string& why) { throw UsageError("contract parameters: " + why); };
  if (!(delta_t > 0.0)) fail("delta_t must be positive");
  if (!(p_rc_min > 0.0)) fail("p_rc_min must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
  if (p_clc_min > capacity_limit + 1e-9 || capacity_limit > p_clc_max + 1e-9) {
    fail("need p_clc_min <= L <= p_clc_max");
  }
  if (p_clc_min < 0.0) fail("p_clc_min must be nonnegative");
  if (tau < kMinTau || tau > kMaxTau) fail("tau must lie in [-12, 23]");
  if (big_m != 0.0 && big_m < p_clc_max) fail("big_m must be at least p_clc_max");
  if (pi_clc < 0.0 || pi_rc_sell < 0.0) fail("prices must be nonnegative");
}

nlohmann::json ContractParams::to_json() const {
  return {{"pi_clc", pi_clc},         {"pi_rc_sell", pi_rc_sell},
          {"p_rc_min", p_rc_min},     {"p_clc_min", p_clc_min},
          {"p_clc_max", p_clc_max},   {"capacity_limit", capacity_limit},
          {"epsilon", epsilon},       {"tau", tau},
          {"delta_t", delta_t},       {"big_m", big_m}};
}

ContractParams ContractParams::from_json(const nlohmann::json& j) {
  ContractParams p;
  p.pi_clc = j.value("pi_clc", p.pi_clc);
  p.pi_rc_sell = j.value("pi_rc_sell", p.pi_rc_sell);
  p.p_rc_min = j.value("p_rc_min", p.p_rc_min);
  p.p_clc_min = j.value("p_clc_min", p.p_clc_min);
  p.p_clc_max = j.value("p_clc_max", p.p_clc_max);
  p.capacity_limit = j.value("capacity_limit", p.capacity_limit);
  p.epsilon = j.value("epsilon", p.epsilon);
  p.tau = j.value("tau", p.tau);
  p.delta_t = j.value("delta_t", p.delta_t);
  p.big_m = j.value("big_m", p.big_m);
  return p;
}

double rc_unit_price(double pi_rc_sell, double pi_rc_buy) {
  return std::max(0.0, pi_rc_sell - pi_rc_buy);
}

double Policy::clc_cost(const ContractParams& p) const {
  double c = 0.0;
  for (double v : clc_reduction) c += p.pi_clc * v;
  return c;
}

nlohmann::json Policy::to_json() const {
  return {{"kind", "policy"},
          {"status", to_string(status)},
          {"objective", objective},
          {"bound", bound},
          {"gap", gap},
          {"suboptimal", suboptimal},
          {"warm_start_used", warm_start_used},
          {"clc_reduction", clc_reduction},
          {"rc_energy", rc_energy},
          {"rc_active", rc_active},
          {"prognosis", prognosis},
          {"warnings", warnings}};
}

Policy Policy::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "policy") throw DataError("not a policy");
  Policy p;
  const std::string status = j.at("status").get<std::string>();
  bool known = false;
  for (SolveStatus s : {SolveStatus::Optimal, SolveStatus::Feasible, SolveStatus::Infeasible,
                        SolveStatus::Unbounded, SolveStatus::Error}) {
    if (to_string(s) == status) {
      p.status = s;
      known = true;
    }
  }
  if (!known) throw DataError("unknown policy status '" + status + "'");
  p.objective = j.at("objective").get<double>();
  p.bound = j.at("bound").get<double>();
  p.gap = j.at("gap").get<double>();
  p.suboptimal = j.at("suboptimal").get<bool>();
  p.warm_start_used = j.at("warm_start_used").get<bool>();
  p.clc_reduction = j.at("clc_reduction").get<std::vector<double>>();
  p.rc_energy = j.at("rc_energy").get<std::vector<std::vector<double>>>();
  p.rc_active = j.at("rc_active").get<std::vector<std::vector<int>>>();
  p.prognosis = j.at("prognosis").get<std::vector<std::vector<double>>>();
  p.warnings = j.at("warnings").get<std::vector<std::string>>();
  return p;
}

std::set<std::size_t> prefilter_congestion_free_hours(const ScenarioTree& tree,
                                                      const ContractParams& params) {
  const Problem pb = problem_from_tree(tree);
  return free_hours(pb, params, baseline(pb, params));
}

DecisionMilp build_milp(const ScenarioTree& tree, const ContractParams& params,
                        const BuildOptions& options) {
  params.validate();
  if (tree.tau != params.tau) throw UsageError("tree tau differs from contract tau");
  const Problem pb = problem_from_tree(tree);
  return Builder(pb, params, options).build();
}

DecisionMilp build_recourse_milp(const RecourseInputs& in, const ContractParams& params,
                                 bool robust) {
  params.validate();
  if (in.scenarios.empty() || in.scenarios.size() != in.probability.size()) {
    throw UsageError("recourse needs a nonempty, weighted scenario set");
  }
  Problem pb;
  pb.hours = in.scenarios.front().hours();
  pb.tau = params.tau;
  pb.ev.push_back(&in.scenarios.front());
  pb.ev_probability = {1.0};
  pb.nodes.push_back({0, 1.0, &in.market});
  std::vector<const FleetEnvelope*> envs;
  for (const auto& s : in.scenarios) envs.push_back(&s);
  pb.child_env.push_back(std::move(envs));
  pb.child_probability.push_back(in.probability);
  pb.fixed_clc = in.clc_reduction;
  pb.fixed_prognosis = in.prognosis;
  pb.leaf_start_energy = in.energy_at_tau;
  pb.d_minus_cvar = false;
  BuildOptions opt;
  opt.robust = robust;
  return Builder(pb, params, opt).build();
}

Policy extract_policy(const DecisionMilp& model, const SolveResult& result) {
  Policy pol;
  pol.status = result.status;
  pol.bound = result.bound;
  pol.gap = result.gap;
  pol.suboptimal = result.status == SolveStatus::Feasible;
  pol.warm_start_used = result.warm_start_accepted;
  const std::size_t H = model.hours;
  pol.clc_reduction.assign(H, 0.0);
  pol.rc_energy.assign(model.nodes, std::vector<double>(H, 0.0));
  pol.rc_active.assign(model.nodes, std::vector<int>(H, 0));
  if (!result.has_solution()) return pol;
  const auto& x = result.x;
  pol.solution = x;
  const auto& cols = model.instance.columns();
  for (std::size_t d = 0; d < H; ++d) {
    if (model.clc[d]) {
      const auto& c = cols[*model.clc[d]];
      pol.clc_reduction[d] = std::clamp(x[*model.clc[d]], c.lower, c.upper);
    }
  }
  for (std::size_t i = 0; i < model.nodes; ++i) {
    for (std::size_t d = 0; d < H; ++d) {
      if (!model.rc_active[i][d]) continue;
      const int z = x[*model.rc_active[i][d]] > 0.5 ? 1 : 0;
      pol.rc_active[i][d] = z;
      pol.rc_energy[i][d] = z == 1 ? std::max(0.0, x[*model.rc_energy[i][d]]) : 0.0;
    }
  }
  pol.prognosis.resize(model.nodes);
  pol.leaf_load.resize(model.nodes);
  for (std::size_t i = 0; i < model.nodes; ++i) {
    const auto& s1 = model.stage1.at(model.node_ev[i]);
    for (std::size_t d = 0; d < H; ++d) pol.prognosis[i].push_back(value_of(s1[d], x, false));
    for (const auto& series : model.leaves[i]) {
      std::vector<double> p;
      for (const auto& v : series) p.push_back(value_of(v, x, false));
      pol.leaf_load[i].push_back(std::move(p));
    }
  }
  double obj = model.fixed_clc_cost;
  for (double v : pol.clc_reduction) obj += model.pi_clc * v;
  for (std::size_t i = 0; i < model.nodes; ++i) {
    for (std::size_t d = 0; d < H; ++d) {
      obj += model.node_probability[i] * model.rc_price[i][d] * pol.rc_energy[i][d];
    }
  }
  pol.objective = obj;
  return pol;
}

Policy solve(const DecisionMilp& model, MilpBackend& backend, const SolveSettings& settings,
             const Policy* warm) {
  SolveOptions opt;
  opt.mip_gap = settings.mip_gap;
  opt.time_limit = settings.time_limit;
  opt.log = settings.log;
  const std::vector<double>* start = nullptr;
  if (warm != nullptr && warm->ok() && warm->solution.size() == model.instance.columns().size()) {
    start = &warm->solution;
  }
  const SolveResult r = backend.solve(model.instance, opt, start);
  Policy pol = extract_policy(model, r);
  if (r.status == SolveStatus::Infeasible) {
    std::string why = "model infeasible";
    if (!r.conflict.empty()) {
      why += "; conflicting constraints:";
      for (std::size_t k = 0; k < std::min<std::size_t>(r.conflict.size(), 12); ++k) {
        why += " " + r.conflict[k];
      }
    }
    pol.warnings.push_back(why);
  } else if (r.status == SolveStatus::Error || r.status == SolveStatus::Unbounded) {
    pol.warnings.push_back("solver: " + r.message);
  } else if (pol.suboptimal) {
    pol.warnings.push_back("stopped before proving the gap (" + r.message + ")");
  }
  return pol;
}

Policy warm_start_zero_tolerance(const ScenarioTree& tree, const ContractParams& params,
                                 MilpBackend& backend, const SolveSettings& settings) {
  BuildOptions opt;
  opt.robust = true;
  const DecisionMilp model = build_milp(tree, params, opt);
  Policy pol = solve(model, backend, settings);
  if (!pol.ok()) {
    Policy zero;
    zero.status = pol.status;
    zero.clc_reduction.assign(tree.hours, 0.0);
    zero.rc_energy.assign(tree.nodes.size(), std::vector<double>(tree.hours, 0.0));
    zero.rc_active.assign(tree.nodes.size(), std::vector<int>(tree.hours, 0));
    zero.warnings = pol.warnings;
    zero.warnings.push_back("zero-tolerance problem has no solution; warm start skipped");
    return zero;
  }
  return pol;
}

Policy solve_tree(const ScenarioTree& tree, const ContractParams& params, MilpBackend& backend,
                  const SolveSettings& settings) {
  const DecisionMilp model = build_milp(tree, params);
  if (!settings.warm_start) return solve(model, backend, settings);
  const Policy warm = warm_start_zero_tolerance(tree, params, backend, settings);
  Policy pol = solve(model, backend, settings, &warm);
  for (const auto& w : warm.warnings) pol.warnings.push_back("warm start: " + w);
  return pol;
}

Policy oracle_solve(const FleetEnvelope& realized_ev, const MarketScenario& realized_market,
                    const ContractParams& params, MilpBackend& backend,
                    const SolveSettings& settings) {
  params.validate();
  ScenarioTree tree;
  tree.tau = params.tau;
  tree.hours = realized_ev.hours();
  const HourSplit split = split_hours(params.tau, tree.hours);
  tree.d_minus = split.d_minus;
  tree.d_plus = split.d_plus;
  tree.ev_stage1 = {realized_ev};
  tree.ev_probability = {1.0};
  MarketScenario m = realized_market;
  m.probability = 1.0;
  tree.markets = {m};
  tree.nodes = {{0, 0, 1.0}};
  tree.children = {{{realized_ev, 1.0}}};
  BuildOptions opt;
  opt.robust = true;
  // Realized load is judged by the response alone, as in the rollout.
  opt.enforce_lower_envelope = false;
  return solve(build_milp(tree, params, opt), backend, settings);
}

PolicyLoads evaluate_policy_loads(const ScenarioTree& tree, const ContractParams& params,
                                  const Policy& policy) {
  PolicyLoads out;
  const std::size_t H = tree.hours;
  std::vector<double> cap(H);
  for (std::size_t d = 0; d < H; ++d) cap[d] = params.p_clc_max - policy.clc_reduction.at(d);
  for (const auto& env : tree.ev_stage1) out.stage1.push_back(charging_response(env, cap));
  const std::size_t first = first_leaf_hour(tree.tau);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& parent = out.stage1[tree.nodes[i].ev];
    std::vector<double> rc_cap = parent.power;
    for (std::size_t d = first; d < H; ++d) {
      rc_cap[d] -= policy.rc_energy.at(i).at(d) / params.delta_t;
    }
    const double start = tree.tau >= 0 ? parent.energy[static_cast<std::size_t>(tree.tau)] : 0.0;
    std::vector<LoadTrace> kids;
    for (const auto& c : tree.children_of(i)) {
      kids.push_back(first >= H ? LoadTrace{}
                                : charging_response_from(c.envelope, first, start, cap, rc_cap));
    }
    out.leaves.push_back(std::move(kids));
  }
  return out;
}

std::vector<double> in_sample_violation(const ScenarioTree& tree, const ContractParams& params,
                                        const Policy& policy) {
  const PolicyLoads loads = evaluate_policy_loads(tree, params, policy);
  const double limit = params.capacity_limit + kCongestionTol;
  std::vector<double> v(tree.hours, 0.0);
  for (std::size_t d : tree.d_minus) {
    for (std::size_t e = 0; e < tree.ev_stage1.size(); ++e) {
      if (loads.stage1[e].power[d] > limit) v[d] += tree.ev_probability[e];
    }
  }
  for (std::size_t d : tree.d_plus) {
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& kids = tree.children_of(i);
      for (std::size_t j = 0; j < kids.size(); ++j) {
        if (loads.leaves[i][j].power[d] > limit) v[d] += tree.nodes[i].probability * kids[j].probability;
      }
    }
  }
  return v;
}

double policy_cost(const ScenarioTree& tree, const ContractParams& params, const Policy& policy) {
  double cost = policy.clc_cost(params);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& m = tree.markets[tree.nodes[i].market];
    for (std::size_t d : tree.d_plus) {
      cost += tree.nodes[i].probability * rc_unit_price(params.pi_rc_sell, m.buy_price[d]) *
              policy.rc_energy.at(i).at(d);
    }
  }
  return cost;
}

}  // namespace clcrc
