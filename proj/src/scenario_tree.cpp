#include "clcrc/scenario_tree.hpp"

#include <cmath>
#include <numeric>

#include "clcrc/errors.hpp"

namespace clcrc {

namespace {

constexpr double kProbabilityTol = 1e-9;

void check_distribution(const std::vector<double>& p, const std::string& what) {
  if (p.empty()) throw UsageError(what + " is empty");
  double total = 0.0;
  for (double v : p) {
    if (!(v > 0.0) || v > 1.0 + kProbabilityTol) throw UsageError(what + " has a probability outside (0, 1]");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6) throw UsageError(what + " probabilities do not sum to 1");
}

}  // namespace

HourSplit split_hours(int tau, std::size_t hours) {
  if (tau < kMinTau || tau > kMaxTau) {
    throw UsageError("tau must lie in [-12, 23], got " + std::to_string(tau));
  }
  HourSplit s;
  for (std::size_t d = 0; d < hours; ++d) {
    (static_cast<int>(d) <= tau ? s.d_minus : s.d_plus).push_back(d);
  }
  return s;
}

std::size_t ScenarioTree::leaf_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n += children.at(node.ev).size();
  return n;
}

FleetEnvelope reanchor(const FleetEnvelope& parent, const FleetEnvelope& child, int tau) {
  if (parent.hours() != child.hours()) throw UsageError("envelope horizon mismatch");
  FleetEnvelope out = child;
  for (std::size_t d = 0; d < out.hours() && static_cast<int>(d) <= tau; ++d) {
    out.e_lo[d] = parent.e_lo[d];
    out.e_hi[d] = parent.e_hi[d];
    out.p_max[d] = parent.p_max[d];
  }
  repair_envelope(out);
  return out;
}

StageTwoFactory shared_stage_two(EvScenarioSet set) {
  return [set = std::move(set)](std::size_t, const FleetEnvelope&) { return set; };
}

ScenarioTree build_tree(const EvScenarioSet& ev_stage1, const std::vector<MarketScenario>& market,
                        const StageTwoFactory& factory, int tau) {
  ScenarioTree tree;
  if (ev_stage1.size() == 0) throw UsageError("no first-stage EV scenarios");
  tree.hours = ev_stage1.scenarios.front().hours();
  const HourSplit split = split_hours(tau, tree.hours);
  tree.tau = tau;
  tree.d_minus = split.d_minus;
  tree.d_plus = split.d_plus;
  if (tree.d_plus.empty()) tree.warnings.push_back("tau leaves no redispatch hours; single-stage tree");
  if (tree.d_minus.empty()) tree.warnings.push_back("tau before delivery day; all hours in the second stage");

  check_distribution(ev_stage1.probability, "first-stage EV set");
  std::vector<double> mp;
  for (const auto& m : market) mp.push_back(m.probability);
  check_distribution(mp, "market scenario set");

  tree.ev_stage1 = ev_stage1.scenarios;
  tree.ev_probability = ev_stage1.probability;
  tree.markets = market;
  for (const auto& m : tree.markets) {
    if (m.buy_volume.size() != tree.hours || m.buy_price.size() != tree.hours) {
      throw UsageError("market scenario does not cover the horizon");
    }
  }
  for (std::size_t e = 0; e < tree.ev_stage1.size(); ++e) {
    for (std::size_t m = 0; m < tree.markets.size(); ++m) {
      tree.nodes.push_back({e, m, tree.ev_probability[e] * tree.markets[m].probability});
    }
  }
  for (std::size_t e = 0; e < tree.ev_stage1.size(); ++e) {
    const EvScenarioSet kids = factory(e, tree.ev_stage1[e]);
    check_distribution(kids.probability, "second-stage EV set");
    std::vector<StageTwoChild> list;
    for (std::size_t k = 0; k < kids.size(); ++k) {
      list.push_back({reanchor(tree.ev_stage1[e], kids.scenarios[k], tau), kids.probability[k]});
    }
    tree.children.push_back(std::move(list));
  }
  validate_tree(tree);
  return tree;
}

void validate_tree(const ScenarioTree& tree) {
  const HourSplit split = split_hours(tree.tau, tree.hours);
  if (split.d_minus != tree.d_minus || split.d_plus != tree.d_plus) {
    throw DataError("hour split inconsistent with tau");
  }
  if (tree.nodes.size() != tree.ev_stage1.size() * tree.markets.size()) {
    throw DataError("first stage is not the full cross product");
  }
  if (tree.children.size() != tree.ev_stage1.size()) throw DataError("missing second-stage sets");
  double total = 0.0, leaves = 0.0;
  for (const auto& node : tree.nodes) {
    total += node.probability;
    double cond = 0.0;
    for (const auto& c : tree.children.at(node.ev)) {
      cond += c.probability;
      leaves += node.probability * c.probability;
      if (c.envelope.hours() != tree.hours) throw DataError("child envelope horizon mismatch");
      const std::string why = check_envelope(c.envelope, 1e-7);
      if (!why.empty()) throw DataError("child envelope: " + why);
    }
    if (std::abs(cond - 1.0) > 1e-6) throw DataError("child probabilities do not sum to 1");
  }
  if (std::abs(total - 1.0) > 1e-6 || std::abs(leaves - 1.0) > 1e-6) {
    throw DataError("tree probabilities do not sum to 1");
  }
  for (const auto& env : tree.ev_stage1) {
    const std::string why = check_envelope(env, 1e-7);
    if (!why.empty()) throw DataError("first-stage envelope: " + why);
  }
}

nlohmann::json ScenarioTree::to_json() const {
  nlohmann::json j;
  j["kind"] = "scenario_tree";
  j["tau"] = tau;
  j["hours"] = hours;
  j["ev_probability"] = ev_probability;
  j["ev_stage1"] = nlohmann::json::array();
  for (const auto& e : ev_stage1) j["ev_stage1"].push_back(envelope_to_json(e));
  j["markets"] = nlohmann::json::array();
  for (const auto& m : markets) j["markets"].push_back(market_scenario_to_json(m));
  j["children"] = nlohmann::json::array();
  for (const auto& list : children) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : list) {
      arr.push_back({{"probability", c.probability}, {"envelope", envelope_to_json(c.envelope)}});
    }
    j["children"].push_back(arr);
  }
  j["warnings"] = warnings;
  return j;
}

ScenarioTree ScenarioTree::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "scenario_tree") throw DataError("not a scenario_tree file");
  ScenarioTree t;
  t.tau = j.at("tau").get<int>();
  t.hours = j.at("hours").get<std::size_t>();
  const HourSplit split = split_hours(t.tau, t.hours);
  t.d_minus = split.d_minus;
  t.d_plus = split.d_plus;
  t.ev_probability = j.at("ev_probability").get<std::vector<double>>();
  for (const auto& e : j.at("ev_stage1")) t.ev_stage1.push_back(envelope_from_json(e));
  for (const auto& m : j.at("markets")) t.markets.push_back(market_scenario_from_json(m));
  for (const auto& list : j.at("children")) {
    std::vector<StageTwoChild> kids;
    for (const auto& c : list) {
      kids.push_back({envelope_from_json(c.at("envelope")), c.at("probability").get<double>()});
    }
    t.children.push_back(std::move(kids));
  }
  for (std::size_t e = 0; e < t.ev_stage1.size(); ++e) {
    for (std::size_t m = 0; m < t.markets.size(); ++m) {
      t.nodes.push_back({e, m, t.ev_probability[e] * t.markets[m].probability});
    }
  }
  t.warnings = j.value("warnings", std::vector<std::string>{});
  validate_tree(t);
  return t;
}

}  // namespace clcrc
