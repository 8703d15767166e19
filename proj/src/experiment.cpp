#include "clcrc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "clcrc/errors.hpp"
#include "clcrc/scenario_tree.hpp"
#include "csv.hpp"

namespace clcrc {

namespace fs = std::filesystem;

namespace {

constexpr double kMaxMalformedShare = 0.05;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

fs::path run_path(const ExperimentConfig& c, const std::string& rel) { return fs::path(c.run_dir) / rel; }

fs::path sessions_path(const ExperimentConfig& c) {
  return c.synthetic_data() ? run_path(c, "data/sessions.csv") : fs::path(c.sessions_csv);
}

fs::path orders_path(const ExperimentConfig& c) {
  return c.synthetic_data() ? run_path(c, "data/order_book.csv") : fs::path(c.order_book_csv);
}

std::vector<OrderBookEntry> load_orders(const ExperimentConfig& c) {
  std::ifstream in(orders_path(c));
  if (!in) throw DataError("cannot open order book " + orders_path(c).string());
  OrderBookReadResult r = read_order_book_csv(in);
  const std::size_t total = r.orders.size() + r.malformed_rows;
  if (total > 0 && static_cast<double>(r.malformed_rows) > kMaxMalformedShare * static_cast<double>(total)) {
    throw DataError("order book: " + std::to_string(r.malformed_rows) + " of " + std::to_string(total) +
                    " rows malformed");
  }
  return filter_orders(r.orders);
}

std::map<UnixSeconds, FleetEnvelope> load_envelopes(const ExperimentConfig& c) {
  const nlohmann::json j = read_json(run_path(c, "envelopes.json"));
  std::map<UnixSeconds, FleetEnvelope> out;
  for (const auto& d : j.at("days")) {
    out.emplace(parse_date(d.at("date").get<std::string>()), envelope_from_json(d.at("envelope")));
  }
  return out;
}

nlohmann::json days_to_json(const std::vector<UnixSeconds>& days) {
  std::vector<std::string> s;
  for (UnixSeconds d : days) s.push_back(format_date(d));
  return s;
}

std::vector<UnixSeconds> days_from_json(const nlohmann::json& j) {
  std::vector<UnixSeconds> out;
  for (const auto& s : j) out.push_back(parse_date(s.get<std::string>()));
  return out;
}

std::string date_file(UnixSeconds day) { return format_date(day) + ".json"; }

nlohmann::json realization_to_json(const Realization& r) {
  return {{"kind", "realization"},
          {"prognosis_basis", envelope_to_json(r.prognosis_basis)},
          {"market", market_scenario_to_json(r.market)},
          {"recourse_scenarios", ev_scenarios_to_json(r.recourse_scenarios)},
          {"realized", envelope_to_json(r.realized)}};
}

Realization realization_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "realization") throw DataError("not a realization");
  return {envelope_from_json(j.at("prognosis_basis")), market_scenario_from_json(j.at("market")),
          ev_scenarios_from_json(j.at("recourse_scenarios")), envelope_from_json(j.at("realized"))};
}

template <class Fn>
void staged(const char* name, Fn&& fn) {
  const std::string tag = std::string("[") + name + "] ";
  try {
    fn();
  } catch (const UsageError& e) {
    throw UsageError(tag + e.what());
  } catch (const DataError& e) {
    throw DataError(tag + e.what());
  } catch (const SolverError& e) {
    throw SolverError(tag + e.what());
  } catch (const fs::filesystem_error& e) {
    throw DataError(tag + e.what());
  }
}

}  // namespace

ContractParams load_contract(const ExperimentConfig& c) {
  return ContractParams::from_json(read_json(run_path(c, "models/capacities.json")).at("contract"));
}

std::vector<DayInstance> load_day_instances(const ExperimentConfig& c) {
  const auto split = days_from_json(read_json(run_path(c, "models/split.json")).at("test"));
  std::vector<DayInstance> out;
  for (UnixSeconds day : split) {
    DayInstance d;
    d.day = day;
    d.tree = ScenarioTree::from_json(read_json(run_path(c, "trees/" + date_file(day))));
    d.realization = realization_from_json(read_json(run_path(c, "realizations/" + date_file(day))));
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  contract.validate();
  if (sessions_csv.empty() != order_book_csv.empty()) {
    throw UsageError("give both a sessions CSV and an order-book CSV, or neither for synthetic data");
  }
  if (!synthetic_data()) {
    if (!fs::exists(sessions_csv)) throw DataError("sessions CSV not found: " + sessions_csv);
    if (!fs::exists(order_book_csv)) throw DataError("order-book CSV not found: " + order_book_csv);
  }
  if (fleet_size < 0) throw UsageError("fleet_size must be nonnegative");
  if (ev_scenarios == 0 || rc_scenarios == 0 || market_samples < rc_scenarios) {
    throw UsageError("tree sizes must be positive and market_samples >= rc_scenarios");
  }
  if (!(train_fraction > 0.0) || validation_fraction < 0.0 ||
      train_fraction + validation_fraction >= 1.0) {
    throw UsageError("split fractions must leave a nonempty test share");
  }
  if (mip_gap < 0.0 || time_limit < 0.0 || workers == 0) {
    throw UsageError("solver settings: mip_gap, time_limit >= 0 and workers >= 1");
  }
  for (double e : sweep_epsilons) {
    if (!(e > 0.0 && e < 1.0)) throw UsageError("sweep epsilons must lie in (0, 1)");
  }
  for (const auto& g : stability_grid) {
    if (g.ev == 0 || g.rc == 0 || g.ev > stability_reference.ev || g.rc > stability_reference.rc) {
      throw UsageError("stability grid entries must be positive and within the reference size");
    }
  }
}

SolveSettings ExperimentConfig::solve_settings() const {
  SolveSettings s;
  s.mip_gap = mip_gap;
  s.time_limit = time_limit > 0.0 ? time_limit : kInf;
  return s;
}

EvaluationSettings ExperimentConfig::evaluation_settings() const {
  return {solve_settings(), backend, workers};
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& g : stability_grid) grid.push_back({g.ev, g.rc});
  return {{"run_dir", run_dir},
          {"sessions_csv", sessions_csv},
          {"order_book_csv", order_book_csv},
          {"synthetic", synthetic.to_json()},
          {"fleet_size", fleet_size},
          {"contract", contract.to_json()},
          {"ev_scenarios", ev_scenarios},
          {"rc_scenarios", rc_scenarios},
          {"market_samples", market_samples},
          {"copula_min_samples", copula_min_samples},
          {"train_fraction", train_fraction},
          {"validation_fraction", validation_fraction},
          {"seed", seed},
          {"backend", backend},
          {"mip_gap", mip_gap},
          {"time_limit", time_limit},
          {"workers", workers},
          {"sweep_epsilons", sweep_epsilons},
          {"stability_grid", grid},
          {"stability_reference", {stability_reference.ev, stability_reference.rc}}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.run_dir = j.value("run_dir", c.run_dir);
    c.sessions_csv = j.value("sessions_csv", c.sessions_csv);
    c.order_book_csv = j.value("order_book_csv", c.order_book_csv);
    if (j.contains("synthetic")) c.synthetic = SyntheticParams::from_json(j.at("synthetic"));
    c.fleet_size = j.value("fleet_size", c.fleet_size);
    if (j.contains("contract")) c.contract = ContractParams::from_json(j.at("contract"));
    c.ev_scenarios = j.value("ev_scenarios", c.ev_scenarios);
    c.rc_scenarios = j.value("rc_scenarios", c.rc_scenarios);
    c.market_samples = j.value("market_samples", c.market_samples);
    c.copula_min_samples = j.value("copula_min_samples", c.copula_min_samples);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.seed = j.value("seed", c.seed);
    c.backend = j.value("backend", c.backend);
    c.mip_gap = j.value("mip_gap", c.mip_gap);
    c.time_limit = j.value("time_limit", c.time_limit);
    c.workers = j.value("workers", c.workers);
    c.sweep_epsilons = j.value("sweep_epsilons", c.sweep_epsilons);
    if (j.contains("stability_grid")) {
      c.stability_grid.clear();
      for (const auto& g : j.at("stability_grid")) {
        c.stability_grid.push_back({g.at(0).get<std::size_t>(), g.at(1).get<std::size_t>()});
      }
    }
    if (j.contains("stability_reference")) {
      const auto& r = j.at("stability_reference");
      c.stability_reference = {r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) { return ExperimentConfig::from_json(read_json(path)); }

void save_config(const ExperimentConfig& config, const fs::path& path) { write_json(path, config.to_json()); }

std::uint64_t derive_seed(std::uint64_t root, std::string_view stage, std::int64_t index) {
  return splitmix64(root ^ fnv1a(stage) ^ splitmix64(static_cast<std::uint64_t>(index)));
}

// ---------------------------------------------------------------- ingest

IngestReport ingest_sessions(std::istream& in) {
  IngestReport rep;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    if (first) {
      first = false;
      if (line.find("vehicle_id") != std::string::npos) continue;
    }
    ++rep.rows;
    const auto f = csv::split(line);
    std::string problem;
    ChargingSession s;
    try {
      if (f.size() != 5) throw DataError("expected 5 fields");
      if (f[0].empty()) throw DataError("empty vehicle id");
      s.vehicle_id = std::string(f[0]);
      s.arrival = parse_iso8601(f[1]);
      s.departure = parse_iso8601(f[2]);
      const auto kwh = csv::to_double(f[3]);
      const auto kw = csv::to_double(f[4]);
      if (!kwh || !kw) throw DataError("non-numeric energy or power");
      if (s.departure <= s.arrival) throw DataError("departure not after arrival");
      if (!(*kw > 0.0)) throw DataError("nonpositive power");
      if (*kwh < 0.0) throw DataError("negative energy");
      s.energy_demand = *kwh * 1e-3;
      s.max_power = *kw * 1e-3;
      const double hours = static_cast<double>(s.departure - s.arrival) / 3600.0;
      if (s.energy_demand > s.max_power * hours * (1.0 + 1e-9)) {
        throw DataError("demand exceeds what the stay can deliver");
      }
    } catch (const DataError& e) {
      problem = e.what();
    }
    if (!problem.empty()) {
      ++rep.malformed;
      if (rep.problems.size() < 10) rep.problems.push_back("row " + std::to_string(rep.rows) + ": " + problem);
      continue;
    }
    rep.sessions.push_back(std::move(s));
  }
  if (rep.rows > 0 && static_cast<double>(rep.malformed) > kMaxMalformedShare * static_cast<double>(rep.rows)) {
    std::string msg = std::to_string(rep.malformed) + " of " + std::to_string(rep.rows) +
                      " session rows malformed (limit 5%)";
    for (const auto& p : rep.problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  return rep;
}

IngestReport ingest_sessions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sessions CSV " + path.string());
  return ingest_sessions(in);
}

std::vector<ChargingSession> select_fleet(const std::vector<ChargingSession>& sessions, int fleet_size,
                                          std::uint64_t seed) {
  std::set<std::string> ids;
  for (const auto& s : sessions) ids.insert(s.vehicle_id);
  if (fleet_size <= 0 || static_cast<std::size_t>(fleet_size) >= ids.size()) return sessions;
  std::vector<std::string> order(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::set<std::string> keep(order.begin(), order.begin() + fleet_size);
  std::vector<ChargingSession> out;
  for (const auto& s : sessions) {
    if (keep.count(s.vehicle_id)) out.push_back(s);
  }
  return out;
}

std::map<UnixSeconds, FleetEnvelope> daily_envelopes(const std::vector<ChargingSession>& sessions) {
  std::map<UnixSeconds, FleetEnvelope> out;
  if (sessions.empty()) return out;
  UnixSeconds lo = sessions.front().arrival, hi = lo;
  for (const auto& s : sessions) {
    lo = std::min(lo, s.arrival);
    hi = std::max(hi, s.arrival);
  }
  for (UnixSeconds day = floor_to_day(lo) + kSecondsPerDay; day < floor_to_day(hi); day += kSecondsPerDay) {
    out.emplace(day, aggregate_sessions(sessions, day, 24).envelope);
  }
  return out;
}

Capacities derive_capacities(std::span<const FleetEnvelope> forecasts,
                             std::span<const FleetEnvelope> scenarios) {
  if (forecasts.empty() && scenarios.empty()) throw DataError("no forecasts or scenarios to derive capacities");
  Capacities c;
  for (const auto& f : forecasts) {
    c.capacity_limit = std::max(c.capacity_limit, f.peak_slow_power());
    c.p_clc_max = std::max(c.p_clc_max, *std::max_element(f.p_max.begin(), f.p_max.end()));
  }
  for (const auto& s : scenarios) {
    c.p_clc_max = std::max(c.p_clc_max, *std::max_element(s.p_max.begin(), s.p_max.end()));
  }
  if (forecasts.empty()) {
    for (const auto& s : scenarios) c.capacity_limit = std::max(c.capacity_limit, s.peak_slow_power());
  }
  c.p_clc_min = c.capacity_limit;
  return c;
}

// ---------------------------------------------------------------- day instance

MarketScenario realized_market(const std::vector<OrderBookEntry>& orders, UnixSeconds day, int tau,
                               const std::vector<double>& price_median) {
  const std::size_t H = price_median.size();
  const std::vector<double> row = trading_window_row(orders, day, tau, H);
  MarketScenario m;
  for (std::size_t d = 0; d < H; ++d) {
    m.buy_volume.push_back(row[d]);
    m.buy_price.push_back(std::isnan(row[H + d]) ? price_median[d] : row[H + d]);
  }
  m.probability = 1.0;
  return m;
}

namespace {

std::vector<MarketScenario> market_scenarios(const ExperimentModels& models, std::size_t samples,
                                             std::size_t m, std::uint64_t seed) {
  const std::size_t H = models.price_median.size();
  if (!models.market) {
    MarketScenario s;
    s.buy_volume.assign(H, 0.0);
    s.buy_price = models.price_median;
    s.probability = 1.0;
    return {s};
  }
  const std::size_t k = models.market_hours.size();
  const Eigen::MatrixXd draw = sample_market(*models.market, samples, seed, k);
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(draw.rows(), static_cast<Eigen::Index>(2 * H));
  for (std::size_t d = 0; d < H; ++d) full.col(static_cast<Eigen::Index>(H + d)).setConstant(models.price_median[d]);
  for (std::size_t c = 0; c < k; ++c) {
    const auto h = static_cast<Eigen::Index>(models.market_hours[c]);
    full.col(h) = draw.col(static_cast<Eigen::Index>(c));
    full.col(static_cast<Eigen::Index>(H) + h) = draw.col(static_cast<Eigen::Index>(k + c));
  }
  return reduce_scenarios(full, std::min(m, samples));
}

EnvelopeForecast forecast_at(const BaselineForecaster& f, UnixSeconds day, int forecast_time,
                             const FleetEnvelope* observed) {
  EnvelopeForecast out = f.predict({day, forecast_time, 0.0, observed});
  if (observed == nullptr) out.observed_hours = observed_hours_at(forecast_time, out.envelope.hours());
  return out;
}

}  // namespace

DayInstance build_day_instance(const ExperimentModels& models, const ExperimentConfig& config,
                               const ContractParams& contract,
                               const std::map<UnixSeconds, FleetEnvelope>& envelopes,
                               const std::vector<OrderBookEntry>& orders, UnixSeconds day, TreeSize size) {
  const auto it = envelopes.find(day);
  if (it == envelopes.end()) throw DataError("no envelope for " + format_date(day));
  const FleetEnvelope& actual = it->second;
  const BaselineForecaster& f = *models.forecaster;
  const int tau = contract.tau;
  const std::int64_t key = day / kSecondsPerDay;

  EnvelopeForecast f_clc = f.predict({day, kClcForecastTime, 0.0, nullptr});
  const EvScenarioSet s1 = sample_ev_scenarios(f_clc, models.clc_errors, size.ev,
                                               derive_seed(config.seed, "ev-stage1", key));
  // Second-stage scenarios do not condition on the first-stage branch; they
  // are re-anchored to it inside the tree.
  const EvScenarioSet s2 = sample_ev_scenarios(forecast_at(f, day, tau, nullptr), models.rc_errors, size.ev,
                                               derive_seed(config.seed, "ev-stage2", key));
  const auto markets = market_scenarios(models, config.market_samples, size.rc,
                                        derive_seed(config.seed, "market", key));

  DayInstance inst;
  inst.day = day;
  inst.tree = build_tree(s1, markets, shared_stage_two(s2), tau);
  inst.realization.prognosis_basis = f_clc.envelope;
  inst.realization.market = realized_market(orders, day, tau, models.price_median);
  inst.realization.recourse_scenarios =
      sample_ev_scenarios(forecast_at(f, day, tau, &actual), models.rc_errors, size.ev,
                          derive_seed(config.seed, "ev-recourse", key));
  inst.realization.realized = actual;
  return inst;
}

// ---------------------------------------------------------------- JSON helpers

nlohmann::json ev_scenarios_to_json(const EvScenarioSet& set) {
  nlohmann::json sc = nlohmann::json::array();
  for (const auto& s : set.scenarios) sc.push_back(envelope_to_json(s));
  return {{"kind", "ev_scenarios"},
          {"scenarios", sc},
          {"probability", set.probability},
          {"forecast_time", set.forecast_time},
          {"observed_hours", set.observed_hours}};
}

EvScenarioSet ev_scenarios_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "ev_scenarios") throw DataError("not an EV scenario set");
  EvScenarioSet s;
  for (const auto& e : j.at("scenarios")) s.scenarios.push_back(envelope_from_json(e));
  s.probability = j.at("probability").get<std::vector<double>>();
  s.forecast_time = j.at("forecast_time").get<int>();
  s.observed_hours = j.at("observed_hours").get<std::size_t>();
  if (s.probability.size() != s.scenarios.size()) throw DataError("scenario probabilities misaligned");
  return s;
}

nlohmann::json outcome_to_json(const RealizedOutcome& o) {
  return {{"kind", "outcome"},
          {"power", o.realized_load.power},
          {"energy", o.realized_load.energy},
          {"lower_envelope_breaches", o.realized_load.lower_envelope_breaches},
          {"clamped_redispatch_caps", o.realized_load.clamped_redispatch_caps},
          {"congestion", o.congestion},
          {"prognosis", o.prognosis},
          {"rc_energy", o.rc_energy},
          {"clc_cost", o.clc_cost},
          {"rc_cost", o.rc_cost},
          {"total_cost", o.total_cost},
          {"unserved_energy", o.unserved_energy},
          {"recourse_fallback", o.recourse_fallback},
          {"warnings", o.warnings}};
}

RealizedOutcome outcome_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "outcome") throw DataError("not an outcome");
  RealizedOutcome o;
  o.realized_load.power = j.at("power").get<std::vector<double>>();
  o.realized_load.energy = j.at("energy").get<std::vector<double>>();
  o.realized_load.lower_envelope_breaches = j.at("lower_envelope_breaches").get<std::vector<std::size_t>>();
  o.realized_load.clamped_redispatch_caps = j.at("clamped_redispatch_caps").get<std::size_t>();
  o.congestion = j.at("congestion").get<std::vector<int>>();
  o.prognosis = j.at("prognosis").get<std::vector<double>>();
  o.rc_energy = j.at("rc_energy").get<std::vector<double>>();
  o.clc_cost = j.at("clc_cost").get<double>();
  o.rc_cost = j.at("rc_cost").get<double>();
  o.total_cost = j.at("total_cost").get<double>();
  o.unserved_energy = j.at("unserved_energy").get<double>();
  o.realized_load.unserved_energy = o.unserved_energy;
  o.recourse_fallback = j.at("recourse_fallback").get<bool>();
  o.warnings = j.at("warnings").get<std::vector<std::string>>();
  return o;
}

// ---------------------------------------------------------------- stages

void stage_data(const ExperimentConfig& c) {
  c.validate();
  fs::create_directories(c.run_dir);
  save_config(c, run_path(c, "config.json"));
  nlohmann::json seeds = {{"root", c.seed},
                          {"derivation", "splitmix64(root ^ fnv1a(tag) ^ splitmix64(index))"},
                          {"synthetic-sessions", derive_seed(c.seed, "synthetic-sessions")},
                          {"synthetic-orders", derive_seed(c.seed, "synthetic-orders")},
                          {"fleet", derive_seed(c.seed, "fleet")},
                          {"split", derive_seed(c.seed, "split")},
                          {"per_day_tags", {"ev-stage1", "ev-stage2", "market", "ev-recourse"}},
                          {"per_day_index", "days since 1970-01-01"}};
  write_json(run_path(c, "seeds.json"), seeds);
  if (!c.synthetic_data()) return;
  {
    auto out = open_out(run_path(c, "data/sessions.csv"));
    write_sessions_csv(out, generate_sessions(c.synthetic, derive_seed(c.seed, "synthetic-sessions")));
  }
  auto out = open_out(run_path(c, "data/order_book.csv"));
  write_order_book_csv(out, generate_order_book(c.synthetic, derive_seed(c.seed, "synthetic-orders")));
}

void stage_aggregate(const ExperimentConfig& c) {
  const IngestReport rep = ingest_sessions(sessions_path(c));
  const auto fleet = select_fleet(rep.sessions, c.fleet_size, derive_seed(c.seed, "fleet"));
  std::set<std::string> ids;
  for (const auto& s : fleet) ids.insert(s.vehicle_id);
  const auto env = daily_envelopes(fleet);
  if (env.empty()) throw DataError("sessions span no complete day");
  nlohmann::json days = nlohmann::json::array();
  for (const auto& [day, e] : env) days.push_back({{"date", format_date(day)}, {"envelope", envelope_to_json(e)}});
  write_json(run_path(c, "envelopes.json"), {{"kind", "daily_envelopes"}, {"days", days}});
  write_json(run_path(c, "ingest.json"), {{"rows", rep.rows},
                                          {"malformed", rep.malformed},
                                          {"problems", rep.problems},
                                          {"sessions", fleet.size()},
                                          {"vehicles", ids.size()}});
}

void stage_forecast(const ExperimentConfig& c) {
  const auto env = load_envelopes(c);
  std::vector<UnixSeconds> days;
  for (const auto& kv : env) days.push_back(kv.first);
  const DaySplit split = split_days(days, c.train_fraction, c.validation_fraction, derive_seed(c.seed, "split"));
  if (split.test.empty()) throw DataError("split leaves no test day");
  std::map<UnixSeconds, FleetEnvelope> train;
  for (UnixSeconds d : split.train) train.emplace(d, env.at(d));
  const BaselineFitResult fit = fit_baseline_forecaster(train);
  const BaselineForecaster& f = *fit.forecaster;

  // Errors are measured on days the forecaster has not seen, when there are
  // enough of them.
  const auto& error_days = split.validation.size() >= 2 ? split.validation : split.train;
  std::vector<ErrorSeries> clc, rc;
  for (UnixSeconds d : error_days) {
    const FleetEnvelope& actual = env.at(d);
    clc.push_back(relative_errors(f.predict({d, kClcForecastTime, 0.0, nullptr}).envelope, actual));
    const EnvelopeForecast at_tau = f.predict({d, c.contract.tau, 0.0, &actual});
    if (at_tau.observed_hours < actual.hours()) {
      rc.push_back(relative_errors(at_tau.envelope, actual, at_tau.observed_hours));
    }
  }
  Var1ErrorModel clc_model = fit_error_model(clc);
  Var1ErrorModel rc_model = fit_error_model(rc);
  clc_model.forecast_time = kClcForecastTime;
  rc_model.forecast_time = c.contract.tau;
  write_json(run_path(c, "models/forecaster.json"), f.to_json());
  write_json(run_path(c, "models/error_clc.json"), clc_model.to_json());
  write_json(run_path(c, "models/error_rc.json"), rc_model.to_json());
  write_json(run_path(c, "models/split.json"),
             {{"train", days_to_json(split.train)},
              {"validation", days_to_json(split.validation)},
              {"test", days_to_json(split.test)},
              {"below_recommended_training_days", fit.below_recommended_size}});
}

void stage_fit_market(const ExperimentConfig& c) {
  const auto orders = load_orders(c);
  const auto test = days_from_json(read_json(run_path(c, "models/split.json")).at("test"));
  const std::set<UnixSeconds> excluded(test.begin(), test.end());
  std::set<UnixSeconds> days;
  for (const auto& o : orders) days.insert(o.delivery_date);
  constexpr std::size_t H = 24;
  std::vector<std::vector<double>> rows;
  for (UnixSeconds d : days) {
    if (!excluded.count(d)) rows.push_back(trading_window_row(orders, d, c.contract.tau, H));
  }
  std::vector<double> median(H, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (!std::isnan(r[H + h])) v.push_back(r[H + h]);
    }
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    median[h] = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }
  impute_missing_prices(rows, H);
  const std::vector<std::size_t> hours = split_hours(c.contract.tau, H).d_plus;
  nlohmann::json j = {{"kind", "market_model"},
                      {"tau", c.contract.tau},
                      {"hours", hours},
                      {"price_median", median},
                      {"training_days", rows.size()}};
  if (hours.empty()) {
    j["copula"] = nullptr;
  } else {
    std::vector<std::vector<double>> sub;
    for (const auto& r : rows) {
      std::vector<double> s;
      for (std::size_t h : hours) s.push_back(r[h]);
      for (std::size_t h : hours) s.push_back(r[H + h]);
      sub.push_back(std::move(s));
    }
    CopulaFitOptions opt;
    opt.min_samples = c.copula_min_samples;
    opt.volume_columns = hours.size();
    j["copula"] = fit_copula(sub, opt).to_json();
  }
  write_json(run_path(c, "models/market.json"), j);
}

ExperimentModels load_models(const ExperimentConfig& c) {
  ExperimentModels m;
  m.forecaster = std::make_shared<BaselineForecaster>(
      BaselineForecaster::from_json(read_json(run_path(c, "models/forecaster.json"))));
  m.clc_errors = Var1ErrorModel::from_json(read_json(run_path(c, "models/error_clc.json")));
  m.rc_errors = Var1ErrorModel::from_json(read_json(run_path(c, "models/error_rc.json")));
  const auto mk = read_json(run_path(c, "models/market.json"));
  if (mk.at("tau").get<int>() != c.contract.tau) throw DataError("market model was fitted for another tau");
  m.market_hours = mk.at("hours").get<std::vector<std::size_t>>();
  m.price_median = mk.at("price_median").get<std::vector<double>>();
  if (!mk.at("copula").is_null()) m.market = CopulaModel::from_json(mk.at("copula"));
  const auto sp = read_json(run_path(c, "models/split.json"));
  m.split = {days_from_json(sp.at("train")), days_from_json(sp.at("validation")), days_from_json(sp.at("test"))};
  return m;
}

void stage_tree(const ExperimentConfig& c) {
  const ExperimentModels models = load_models(c);
  const auto env = load_envelopes(c);
  const auto orders = load_orders(c);
  ContractParams contract = c.contract;
  if (contract.p_clc_max <= 0.0) {
    std::vector<FleetEnvelope> forecasts, scenarios;
    for (UnixSeconds d : models.split.test) {
      const EnvelopeForecast f = models.forecaster->predict({d, kClcForecastTime, 0.0, nullptr});
      forecasts.push_back(f.envelope);
      const EvScenarioSet s = sample_ev_scenarios(f, models.clc_errors, c.ev_scenarios,
                                                  derive_seed(c.seed, "ev-stage1", d / kSecondsPerDay));
      scenarios.insert(scenarios.end(), s.scenarios.begin(), s.scenarios.end());
    }
    const Capacities cap = derive_capacities(forecasts, scenarios);
    contract.capacity_limit = cap.capacity_limit;
    contract.p_clc_min = cap.p_clc_min;
    contract.p_clc_max = cap.p_clc_max;
  }
  contract.validate();
  write_json(run_path(c, "models/capacities.json"),
             {{"capacity_limit", contract.capacity_limit},
              {"p_clc_min", contract.p_clc_min},
              {"p_clc_max", contract.p_clc_max},
              {"contract", contract.to_json()}});
  std::vector<DayInstance> inst(models.split.test.size());
  parallel_for(inst.size(), c.workers, [&](std::size_t k) {
    inst[k] = build_day_instance(models, c, contract, env, orders, models.split.test[k],
                                 {c.ev_scenarios, c.rc_scenarios});
  });
  for (const auto& d : inst) {
    write_json(run_path(c, "trees/" + date_file(d.day)), d.tree.to_json());
    write_json(run_path(c, "realizations/" + date_file(d.day)), realization_to_json(d.realization));
  }
}

void stage_solve(const ExperimentConfig& c) {
  const ContractParams contract = load_contract(c);
  const auto days = load_day_instances(c);
  make_backend(c.backend);  // fail early with the backend's own message
  std::vector<Policy> pol(days.size());
  parallel_for(days.size(), c.workers, [&](std::size_t k) {
    auto backend = make_backend(c.backend);
    pol[k] = solve_tree(days[k].tree, contract, *backend, c.solve_settings());
  });
  auto log = open_out(run_path(c, "solve_log.txt"));
  for (std::size_t k = 0; k < days.size(); ++k) {
    log << format_date(days[k].day) << " status=" << to_string(pol[k].status)
        << " objective=" << format_number(pol[k].objective, 4) << " gap=" << format_number(pol[k].gap, 6)
        << " warm_start=" << (pol[k].warm_start_used ? 1 : 0) << '\n';
    for (const auto& w : pol[k].warnings) log << "  warning: " << w << '\n';
    write_json(run_path(c, "policies/" + date_file(days[k].day)), pol[k].to_json());
  }
  for (std::size_t k = 0; k < days.size(); ++k) {
    if (!pol[k].ok()) {
      throw SolverError(format_date(days[k].day) + ": no policy (" + to_string(pol[k].status) +
                        "); see solve_log.txt");
    }
  }
}

void stage_evaluate(const ExperimentConfig& c) {
  const ContractParams contract = load_contract(c);
  const auto days = load_day_instances(c);
  std::vector<DayResult> res(days.size());
  parallel_for(days.size(), c.workers, [&](std::size_t k) {
    DayResult& r = res[k];
    r.day = days[k].day;
    r.policy = Policy::from_json(read_json(run_path(c, "policies/" + date_file(r.day))));
    if (!r.policy.ok()) throw SolverError(format_date(r.day) + ": policy has no solution");
    r.in_sample_violation = in_sample_violation(days[k].tree, contract, r.policy);
    r.stochastic = rollout(r.policy, days[k].realization, make_recourse_solver(c.backend, c.solve_settings()),
                           contract);
    r.oracle = oracle_outcome(days[k].realization.realized, days[k].realization.market, contract, c.backend,
                              c.solve_settings());
  });
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : res) {
    j.push_back({{"date", format_date(r.day)},
                 {"policy", r.policy.to_json()},
                 {"in_sample_violation", r.in_sample_violation},
                 {"stochastic", outcome_to_json(r.stochastic)},
                 {"oracle", outcome_to_json(r.oracle)}});
  }
  write_json(run_path(c, "results.json"), {{"kind", "day_results"}, {"days", j}});
}

void stage_report(const ExperimentConfig& c) {
  const ContractParams contract = load_contract(c);
  const auto j = read_json(run_path(c, "results.json"));
  std::vector<DayResult> res;
  for (const auto& d : j.at("days")) {
    DayResult r;
    r.day = parse_date(d.at("date").get<std::string>());
    r.policy = Policy::from_json(d.at("policy"));
    r.in_sample_violation = d.at("in_sample_violation").get<std::vector<double>>();
    r.stochastic = outcome_from_json(d.at("stochastic"));
    r.oracle = outcome_from_json(d.at("oracle"));
    res.push_back(std::move(r));
  }
  {
    auto out = open_out(run_path(c, "outcomes.csv"));
    write_outcomes_csv(out, res);
  }
  {
    auto out = open_out(run_path(c, "frequency.csv"));
    write_frequency_csv(out, res);
  }
  write_json(run_path(c, "summary.json"), summary_json(res, contract));
}

void stage_stability(const ExperimentConfig& c) {
  const ContractParams contract = load_contract(c);
  const ExperimentModels models = load_models(c);
  const auto env = load_envelopes(c);
  const auto orders = load_orders(c);
  const auto& test = models.split.test;
  const TreeBuilder build = [&](std::size_t k, TreeSize size) {
    return build_day_instance(models, c, contract, env, orders, test[k], size).tree;
  };
  const StabilityReport rep = in_sample_stability(test.size(), c.stability_grid, c.stability_reference, contract,
                                                  build, c.evaluation_settings());
  auto out = open_out(run_path(c, "stability.csv"));
  write_stability_csv(out, rep);
}

void stage_sweep(const ExperimentConfig& c) {
  const ContractParams contract = load_contract(c);
  const auto days = load_day_instances(c);
  const auto rows = epsilon_sweep(days, c.sweep_epsilons, contract, c.evaluation_settings());
  auto out = open_out(run_path(c, "sweep.csv"));
  write_sweep_csv(out, rows);
}

void run_pipeline(const ExperimentConfig& c) {
  staged("data", [&] { stage_data(c); });
  staged("aggregate", [&] { stage_aggregate(c); });
  staged("forecast", [&] { stage_forecast(c); });
  staged("fit-market", [&] { stage_fit_market(c); });
  staged("tree", [&] { stage_tree(c); });
  staged("solve", [&] { stage_solve(c); });
  staged("evaluate", [&] { stage_evaluate(c); });
  staged("report", [&] { stage_report(c); });
}

}  // namespace clcrc
