#pragma once

// Two-stage scenario tree: first-stage nodes are pairs of an EV scenario
// (forecast at 8:00 D-1) and a market scenario; each node carries second-stage
// EV scenarios forecast at the redispatch activation time tau.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clcrc/fleet_model.hpp"
#include "clcrc/forecast_engine.hpp"
#include "clcrc/market_model.hpp"

namespace clcrc {

inline constexpr int kMinTau = -12;
inline constexpr int kMaxTau = 23;

/// Hours d <= tau (only capacity limitation) and d > tau (redispatch too).
struct HourSplit {
  std::vector<std::size_t> d_minus;
  std::vector<std::size_t> d_plus;
};
HourSplit split_hours(int tau, std::size_t hours = 24);

struct StageOneNode {
  std::size_t ev = 0;      ///< index into ScenarioTree::ev_stage1
  std::size_t market = 0;  ///< index into ScenarioTree::markets
  double probability = 0.0;
};

struct StageTwoChild {
  FleetEnvelope envelope;       ///< equals the parent envelope for d <= tau
  double probability = 0.0;     ///< conditional on the parent
};

struct ScenarioTree {
  int tau = 0;
  std::size_t hours = 24;
  std::vector<std::size_t> d_minus;
  std::vector<std::size_t> d_plus;
  std::vector<FleetEnvelope> ev_stage1;
  std::vector<double> ev_probability;
  std::vector<MarketScenario> markets;
  std::vector<StageOneNode> nodes;
  /// Children per first-stage EV scenario; node i uses children[nodes[i].ev].
  std::vector<std::vector<StageTwoChild>> children;
  std::vector<std::string> warnings;

  const std::vector<StageTwoChild>& children_of(std::size_t node) const {
    return children.at(nodes.at(node).ev);
  }
  std::size_t leaf_count() const;

  nlohmann::json to_json() const;
  static ScenarioTree from_json(const nlohmann::json& j);
};

/// Second-stage scenarios for one first-stage EV scenario.
using StageTwoFactory = std::function<EvScenarioSet(std::size_t ev_index, const FleetEnvelope&)>;

/// Uses one shared second-stage set for every node, re-anchored so that hours
/// d <= tau follow the parent envelope.
StageTwoFactory shared_stage_two(EvScenarioSet set);

/// Replaces hours d <= tau of `child` with the parent's values and repairs.
FleetEnvelope reanchor(const FleetEnvelope& parent, const FleetEnvelope& child, int tau);

/// Cross product of EV and market scenarios with children from `factory`.
/// Throws UsageError for tau outside [-12, 23] or invalid probabilities.
ScenarioTree build_tree(const EvScenarioSet& ev_stage1, const std::vector<MarketScenario>& market,
                        const StageTwoFactory& factory, int tau);

/// Throws DataError describing the first violated tree invariant.
void validate_tree(const ScenarioTree& tree);

}  // namespace clcrc
