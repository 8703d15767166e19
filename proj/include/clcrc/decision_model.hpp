#pragma once

// Chance-constrained two-stage model coordinating capacity limitation (CLC)
// and redispatch (RC) contracts, in extensive form on a scenario tree.
//
// Loads follow the fleet's greedy response, written with one binary per
// argument of the min operator. The chance constraints are replaced by CVaR
// bounds: eps * eta_d + sum_w p_w zeta_{d,w} <= 0, zeta >= P - L - eta.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "clcrc/fleet_model.hpp"
#include "clcrc/market_model.hpp"
#include "clcrc/milp.hpp"
#include "clcrc/scenario_tree.hpp"

namespace clcrc {

/// Loads above L by more than this count as congestion.
inline constexpr double kCongestionTol = 1e-6;

struct ContractParams {
  double pi_clc = 100.00;      ///< EUR per MW of capacity reduction per hour
  double pi_rc_sell = 100.00;  ///< EUR/MWh
  double p_rc_min = 0.1;       ///< MW, minimum bid size
  double p_clc_min = 0.0;      ///< MW
  double p_clc_max = 0.0;      ///< MW, connection capacity of the fleet
  double capacity_limit = 0.0; ///< L, MW
  double epsilon = 0.05;       ///< accepted violation probability
  int tau = 12;                ///< RC activation hour relative to midnight of D
  double delta_t = 1.0;        ///< h
  /// 0 selects a tight bound per constraint; otherwise one global value.
  double big_m = 0.0;

  /// Throws UsageError on violated parameter invariants.
  void validate() const;
  nlohmann::json to_json() const;
  static ContractParams from_json(const nlohmann::json& j);
  friend bool operator==(const ContractParams&, const ContractParams&) = default;
};

/// Spread paid by the operator per MWh of redispatch.
double rc_unit_price(double pi_rc_sell, double pi_rc_buy);

struct Policy {
  std::vector<double> clc_reduction;              ///< per hour, MW
  std::vector<std::vector<double>> rc_energy;     ///< [node][hour], MWh
  std::vector<std::vector<int>> rc_active;        ///< [node][hour]
  /// Modelled loads: prognosis per first-stage node and per leaf.
  std::vector<std::vector<double>> prognosis;     ///< [node][hour]
  std::vector<std::vector<std::vector<double>>> leaf_load;  ///< [node][child][hour]
  double objective = 0.0;  ///< recomputed from the decision vectors
  double bound = 0.0;
  double gap = 0.0;
  SolveStatus status = SolveStatus::Error;
  bool suboptimal = false;
  bool warm_start_used = false;
  std::vector<double> solution;  ///< raw column values
  std::vector<std::string> warnings;

  bool ok() const { return status == SolveStatus::Optimal || status == SolveStatus::Feasible; }
  double clc_cost(const ContractParams& p) const;
  /// Decision vectors, prognosis and solve status; raw columns and leaf
  /// loads are not stored.
  nlohmann::json to_json() const;
  static Policy from_json(const nlohmann::json& j);
};

/// One modelled load series and its cumulative energy; each entry is either
/// a column or a constant.
struct LoadVar {
  std::optional<std::size_t> power;
  std::optional<std::size_t> energy;
  double power_value = 0.0;
  double energy_value = 0.0;
};

struct BuildOptions {
  /// P <= L for every scenario (eta and zeta fixed at zero).
  bool robust = false;
  /// Fix decisions to zero on the congestion-free hours before the first
  /// congested one and treat their loads as constants.
  bool prefilter = true;
  /// Enforce E >= e_lo on first-stage loads.
  bool enforce_lower_envelope = true;
};

/// Extensive-form model together with the column maps needed to read a
/// solution back.
struct DecisionMilp {
  MilpInstance instance;
  std::size_t hours = 0;
  std::size_t nodes = 0;
  std::size_t fixed_prefix = 0;  ///< hours [0, fixed_prefix) are precomputed
  std::vector<std::optional<std::size_t>> clc;                     ///< [hour]
  std::vector<std::vector<std::optional<std::size_t>>> rc_energy;  ///< [node][hour]
  std::vector<std::vector<std::optional<std::size_t>>> rc_active;
  std::vector<std::vector<LoadVar>> stage1;                        ///< [ev][hour]
  std::vector<std::size_t> node_ev;                                ///< [node] -> ev
  std::vector<std::vector<std::vector<LoadVar>>> leaves;           ///< [node][child][hour]
  std::vector<double> node_probability;
  std::vector<std::vector<double>> rc_price;                       ///< [node][hour]
  double pi_clc = 0.0;
  double fixed_clc_cost = 0.0;
};

/// Hours where the uncapped response stays at or below L in every first-stage
/// scenario and every leaf.
std::set<std::size_t> prefilter_congestion_free_hours(const ScenarioTree& tree,
                                                      const ContractParams& params);

DecisionMilp build_milp(const ScenarioTree& tree, const ContractParams& params,
                        const BuildOptions& options = {});

/// Second-stage problem at tau with fixed CLC: the prognosis and the
/// realized energy at tau are constants, `scenarios` are fresh EV scenarios
/// (already re-anchored), and only the second-stage CVaR is imposed.
struct RecourseInputs {
  std::vector<double> clc_reduction;
  std::vector<double> prognosis;       ///< per hour, MW
  double energy_at_tau = 0.0;          ///< realized cumulative energy at tau
  std::vector<FleetEnvelope> scenarios;
  std::vector<double> probability;
  MarketScenario market;               ///< realized volumes and prices
};
DecisionMilp build_recourse_milp(const RecourseInputs& in, const ContractParams& params,
                                 bool robust = false);

struct SolveSettings {
  double mip_gap = 1e-3;
  double time_limit = kInf;
  bool warm_start = true;  ///< solve the zero-tolerance variant first
  bool log = false;
};

/// Reads a policy out of a backend result for `model`.
Policy extract_policy(const DecisionMilp& model, const SolveResult& result);

/// Solves `model`, optionally starting from `warm` (a policy of a model with
/// the same column layout).
Policy solve(const DecisionMilp& model, MilpBackend& backend, const SolveSettings& settings,
             const Policy* warm = nullptr);

/// Zero-tolerance policy (P <= L in every scenario). If infeasible, returns
/// an all-zero policy with a warning.
Policy warm_start_zero_tolerance(const ScenarioTree& tree, const ContractParams& params,
                                 MilpBackend& backend, const SolveSettings& settings = {});

/// Builds, warm-starts and solves the chance-constrained model.
Policy solve_tree(const ScenarioTree& tree, const ContractParams& params, MilpBackend& backend,
                  const SolveSettings& settings = {});

/// Perfect-information policy for one realization with the hard limit.
Policy oracle_solve(const FleetEnvelope& realized_ev, const MarketScenario& realized_market,
                    const ContractParams& params, MilpBackend& backend,
                    const SolveSettings& settings = {});

/// Loads of a policy recomputed with the fleet response function.
struct PolicyLoads {
  std::vector<LoadTrace> stage1;                    ///< [ev]
  std::vector<std::vector<LoadTrace>> leaves;       ///< [node][child]
};
PolicyLoads evaluate_policy_loads(const ScenarioTree& tree, const ContractParams& params,
                                  const Policy& policy);

/// Probability mass with load above L per hour: first-stage scenarios on
/// D-, leaves on D+.
std::vector<double> in_sample_violation(const ScenarioTree& tree, const ContractParams& params,
                                        const Policy& policy);

/// Objective of a policy on a tree, from the decision vectors.
double policy_cost(const ScenarioTree& tree, const ContractParams& params, const Policy& policy);

}  // namespace clcrc
