#pragma once

// Experiment configuration, data ingestion and the staged pipeline behind the
// command-line tool. Every stage reads and writes files in a run directory,
// so each can be rerun on its own.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "clcrc/decision_model.hpp"
#include "clcrc/evaluation.hpp"
#include "clcrc/forecast_engine.hpp"
#include "clcrc/market_model.hpp"
#include "clcrc/synthetic.hpp"

namespace clcrc {

struct ExperimentConfig {
  std::string run_dir = "run";
  /// Empty paths select the synthetic generator.
  std::string sessions_csv;
  std::string order_book_csv;
  SyntheticParams synthetic;
  /// Vehicles kept from the session data; 0 keeps all.
  int fleet_size = 0;
  /// Contract terms. Zero capacities are derived from the forecasts.
  ContractParams contract;
  std::size_t ev_scenarios = 28;
  std::size_t rc_scenarios = 8;
  std::size_t market_samples = 200;
  std::size_t copula_min_samples = 50;
  double train_fraction = 0.7;
  double validation_fraction = 0.2;
  std::uint64_t seed = 20170306;
  std::string backend = "highs";
  double mip_gap = 1e-3;
  double time_limit = 0.0;  ///< seconds per solve, 0 = none
  std::size_t workers = 1;
  std::vector<double> sweep_epsilons = {0.025, 0.05, 0.075, 0.1};
  std::vector<TreeSize> stability_grid = {{4, 2}, {8, 4}, {16, 8}};
  TreeSize stability_reference = {32, 20};

  bool synthetic_data() const { return sessions_csv.empty(); }
  /// Throws UsageError on invalid values and DataError on missing files.
  void validate() const;
  SolveSettings solve_settings() const;
  EvaluationSettings evaluation_settings() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

/// Seed of one pipeline stage, derived from the root seed, a stage tag and an
/// index (usually the day): splitmix64(root ^ fnv1a(tag) ^ splitmix64(index)).
std::uint64_t derive_seed(std::uint64_t root, std::string_view stage, std::int64_t index = 0);

struct IngestReport {
  std::vector<ChargingSession> sessions;
  std::size_t rows = 0;
  std::size_t malformed = 0;
  std::vector<std::string> problems;  ///< first few malformed rows
};

/// Reads `vehicle_id,arrival_iso8601,departure_iso8601,energy_kwh,max_power_kw`
/// and converts to MW/MWh. Rows with unparsable fields, departure <= arrival,
/// nonpositive power, negative energy or a demand the session cannot deliver
/// are rejected and counted. Throws DataError when more than 5% are rejected.
IngestReport ingest_sessions(const std::filesystem::path& path);
IngestReport ingest_sessions(std::istream& in);

/// Keeps the sessions of `fleet_size` vehicles chosen by a seeded shuffle of
/// the distinct ids (all sessions when fleet_size is 0 or exceeds the fleet).
std::vector<ChargingSession> select_fleet(const std::vector<ChargingSession>& sessions,
                                          int fleet_size, std::uint64_t seed);

/// Daily envelopes for every day strictly between the first and the last
/// arrival day.
std::map<UnixSeconds, FleetEnvelope> daily_envelopes(const std::vector<ChargingSession>& sessions);

struct Capacities {
  double capacity_limit = 0.0;
  double p_clc_min = 0.0;
  double p_clc_max = 0.0;
};

/// L is the largest slow-as-possible peak over the forecasts, the maximum
/// connected power over forecasts and scenarios gives p_clc_max, and
/// p_clc_min = L. Throws DataError when both sets are empty.
Capacities derive_capacities(std::span<const FleetEnvelope> forecasts,
                             std::span<const FleetEnvelope> scenarios);

/// Fitted models shared by all days of an experiment.
struct ExperimentModels {
  std::shared_ptr<const BaselineForecaster> forecaster;
  Var1ErrorModel clc_errors;  ///< forecast time 8:00 D-1
  Var1ErrorModel rc_errors;   ///< forecast time tau
  std::optional<CopulaModel> market;  ///< empty when no hour follows tau
  std::vector<std::size_t> market_hours;  ///< hours carried by the copula
  std::vector<double> price_median;       ///< per hour, for imputing realized prices
  DaySplit split;
};

/// Builds the tree and the realized data of one test day.
DayInstance build_day_instance(const ExperimentModels& models, const ExperimentConfig& config,
                               const ContractParams& contract,
                               const std::map<UnixSeconds, FleetEnvelope>& envelopes,
                               const std::vector<OrderBookEntry>& orders, UnixSeconds day,
                               TreeSize size);

/// Realized (volume, price) of the window opening at tau, NaN prices replaced
/// by the given medians.
MarketScenario realized_market(const std::vector<OrderBookEntry>& orders, UnixSeconds day, int tau,
                               const std::vector<double>& price_median);

// Pipeline stages on a run directory. Each writes its artifacts and can be
// invoked on its own once its inputs exist.
void stage_data(const ExperimentConfig& config);
void stage_aggregate(const ExperimentConfig& config);
void stage_forecast(const ExperimentConfig& config);
void stage_fit_market(const ExperimentConfig& config);
void stage_tree(const ExperimentConfig& config);
void stage_solve(const ExperimentConfig& config);
void stage_evaluate(const ExperimentConfig& config);
void stage_report(const ExperimentConfig& config);
void stage_stability(const ExperimentConfig& config);
void stage_sweep(const ExperimentConfig& config);

/// data -> aggregate -> forecast -> fit-market -> tree -> solve -> evaluate
/// -> report. A failing stage is rethrown with its name prefixed; artifacts
/// of finished stages stay on disk.
void run_pipeline(const ExperimentConfig& config);

/// Loads the persisted models of a run directory.
ExperimentModels load_models(const ExperimentConfig& config);
/// Contract terms with the capacities written by the tree stage.
ContractParams load_contract(const ExperimentConfig& config);
/// Trees and realizations of the test days written by the tree stage.
std::vector<DayInstance> load_day_instances(const ExperimentConfig& config);

nlohmann::json ev_scenarios_to_json(const EvScenarioSet& set);
EvScenarioSet ev_scenarios_from_json(const nlohmann::json& j);
nlohmann::json outcome_to_json(const RealizedOutcome& o);
RealizedOutcome outcome_from_json(const nlohmann::json& j);

}  // namespace clcrc
