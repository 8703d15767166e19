#pragma once

// Out-of-sample rollout of policies on realized days, in-sample stability of
// the tree size, epsilon sweeps and cost comparison against the oracle.

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "clcrc/decision_model.hpp"

namespace clcrc {

struct RealizedOutcome {
  LoadTrace realized_load;
  std::vector<int> congestion;      ///< per hour, 1 when P_d > L + tol
  std::vector<double> prognosis;    ///< reported baseline, MW
  std::vector<double> rc_energy;    ///< activated redispatch per hour, MWh
  double clc_cost = 0.0;
  double rc_cost = 0.0;
  double total_cost = 0.0;
  double unserved_energy = 0.0;
  bool recourse_fallback = false;   ///< recourse failed, zero RC applied
  std::vector<std::string> warnings;

  bool congested() const;
};

/// What the operator sees on the day: the CSP's day-ahead point forecast
/// (whose capped response is the prognosis), the realized redispatch market,
/// fresh EV scenarios forecast at tau, and the realized envelope.
struct Realization {
  FleetEnvelope prognosis_basis;
  MarketScenario market;
  EvScenarioSet recourse_scenarios;
  FleetEnvelope realized;
};

/// Second-stage decision at tau: redispatch energy per hour, or nothing when
/// no decision could be computed.
using RecourseSolver =
    std::function<std::optional<std::vector<double>>(const RecourseInputs&, const ContractParams&)>;

/// Solves the chance-constrained recourse problem with the given backend.
RecourseSolver make_recourse_solver(const std::string& backend = "highs",
                                    const SolveSettings& settings = {});
/// Replays a precomputed redispatch schedule.
RecourseSolver fixed_recourse(std::vector<double> rc_energy);

/// Applies the first-stage decision of `policy`, re-solves the recourse at
/// tau on the realized market and evaluates the physical load.
RealizedOutcome rollout(const Policy& policy, const Realization& day, const RecourseSolver& recourse,
                        const ContractParams& params);

/// Perfect-information policy for the realized day, evaluated like a rollout.
RealizedOutcome oracle_outcome(const FleetEnvelope& realized, const MarketScenario& market,
                               const ContractParams& params, const std::string& backend = "highs",
                               const SolveSettings& settings = {});

/// Per-hour fraction of outcomes flagged as congested. Throws UsageError on
/// an empty sequence.
std::vector<double> congestion_frequency(std::span<const RealizedOutcome> outcomes);

struct CostSummary {
  double clc = 0.0;
  double rc = 0.0;
  double total = 0.0;
  double congested_days = 0.0;
};

struct PolicyComparison {
  CostSummary stochastic;
  CostSummary oracle;
  std::size_t days = 0;
  bool oracle_bound_holds = false;  ///< oracle mean total <= stochastic mean total

  nlohmann::json to_json() const;
};

CostSummary mean_costs(std::span<const RealizedOutcome> outcomes);
/// Throws UsageError when the sequences differ in length or are empty.
PolicyComparison compare_policies(std::span<const RealizedOutcome> stochastic,
                                  std::span<const RealizedOutcome> oracle);

/// Settings shared by the multi-day experiments. Days are independent and run
/// on up to `workers` threads, each with its own backend.
struct EvaluationSettings {
  SolveSettings solve;
  std::string backend = "highs";
  std::size_t workers = 1;
};

/// A test day with its scenario tree and realized data.
struct DayInstance {
  UnixSeconds day = 0;
  ScenarioTree tree;
  Realization realization;
};

struct TreeSize {
  std::size_t ev = 0;
  std::size_t rc = 0;
  friend bool operator==(const TreeSize&, const TreeSize&) = default;
};

/// Builds the tree of day `day_index` with the given numbers of EV and market
/// scenarios.
using TreeBuilder = std::function<ScenarioTree(std::size_t day_index, TreeSize size)>;

struct StabilityCell {
  TreeSize size;
  std::optional<double> mrae_cost;         ///< empty when no day could be scored
  std::optional<double> mrae_probability;
  std::size_t days_scored = 0;
  std::size_t failed = 0;                  ///< solver failures at this size
};

struct StabilityReport {
  TreeSize reference;
  std::size_t days = 0;
  std::size_t reference_failures = 0;
  std::vector<StabilityCell> cells;
};

/// Mean relative absolute error of the expected cost and of the maximum
/// in-sample congestion probability against the reference size, averaged
/// over days. A day whose reference value is zero is scored only if the cell
/// value is zero too (error 0); otherwise it is left out of that metric.
StabilityReport in_sample_stability(std::size_t days, std::span<const TreeSize> grid,
                                    TreeSize reference, const ContractParams& params,
                                    const TreeBuilder& build, const EvaluationSettings& settings = {});

struct SweepRow {
  double epsilon = 0.0;
  std::optional<double> mean_objective;        ///< in-sample
  std::optional<double> mean_realized_cost;    ///< out-of-sample
  std::optional<double> max_congestion_frequency;
  std::vector<double> congestion_frequency;    ///< per hour
  std::size_t failed = 0;
  std::size_t kept_previous = 0;  ///< days where the smaller-epsilon policy was kept
};

/// Solves every day for each epsilon (ascending, each solve warm-started from
/// the previous epsilon's policy, which stays feasible) and rolls the
/// policies out. Throws UsageError for epsilons outside (0, 1).
std::vector<SweepRow> epsilon_sweep(std::span<const DayInstance> days, std::vector<double> epsilons,
                                    const ContractParams& params,
                                    const EvaluationSettings& settings = {});

/// Result of solving and rolling out one day.
struct DayResult {
  UnixSeconds day = 0;
  Policy policy;
  RealizedOutcome stochastic;
  RealizedOutcome oracle;
  std::vector<double> in_sample_violation;
};

std::vector<DayResult> evaluate_days(std::span<const DayInstance> days, const ContractParams& params,
                                     const EvaluationSettings& settings = {});

/// Runs fn(0..n-1) on up to `workers` threads. Exceptions are rethrown
/// after all workers finish (the first by index wins).
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

// Report files. Numbers are printed with fixed precision so that identical
// runs produce identical bytes.
void write_outcomes_csv(std::ostream& out, std::span<const DayResult> results);
/// Per-hour congestion frequency of the stochastic and the oracle policy.
void write_frequency_csv(std::ostream& out, std::span<const DayResult> results);
void write_stability_csv(std::ostream& out, const StabilityReport& report);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
nlohmann::json summary_json(std::span<const DayResult> results, const ContractParams& params);

std::string format_number(double v, int decimals = 6);

}  // namespace clcrc
