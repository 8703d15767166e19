// Command-line front end. Exit codes: 0 success, 1 usage, 2 data, 3 solver.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "clcrc/errors.hpp"
#include "clcrc/experiment.hpp"

namespace {

using namespace clcrc;

struct Overrides {
  std::string config_path;
  std::optional<std::string> run_dir, sessions, order_book, backend;
  std::optional<int> fleet_size, tau, days;
  std::optional<double> epsilon, pi_clc, pi_rc_sell, p_rc_min, capacity_limit, p_clc_min, p_clc_max;
  std::optional<double> mip_gap, time_limit, train_fraction, validation_fraction;
  std::optional<std::size_t> ev_scenarios, rc_scenarios, market_samples, workers;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config_path, "experiment config (JSON)");
    app.add_option("--run-dir", run_dir, "run directory");
    app.add_option("--sessions", sessions, "sessions CSV (kW/kWh)");
    app.add_option("--order-book", order_book, "order-book CSV");
    app.add_option("--fleet-size", fleet_size, "vehicles kept, 0 = all");
    app.add_option("--days", days, "synthetic delivery days");
    app.add_option("--tau", tau, "redispatch activation hour in [-12, 23]");
    app.add_option("--epsilon", epsilon, "accepted violation probability");
    app.add_option("--pi-clc", pi_clc, "EUR/MW per hour of capacity reduction");
    app.add_option("--pi-rc-sell", pi_rc_sell, "EUR/MWh");
    app.add_option("--p-rc-min", p_rc_min, "minimum redispatch bid, MW");
    app.add_option("--capacity-limit", capacity_limit, "L in MW (0 derives it)");
    app.add_option("--p-clc-min", p_clc_min, "MW");
    app.add_option("--p-clc-max", p_clc_max, "MW (0 derives it)");
    app.add_option("--ev-scenarios", ev_scenarios, "EV scenarios per stage");
    app.add_option("--rc-scenarios", rc_scenarios, "market scenarios after reduction");
    app.add_option("--market-samples", market_samples, "copula samples before reduction");
    app.add_option("--seed", seed, "root seed");
    app.add_option("--backend", backend, "MILP backend");
    app.add_option("--mip-gap", mip_gap, "relative MIP gap");
    app.add_option("--time-limit", time_limit, "seconds per solve, 0 = none");
    app.add_option("--workers", workers, "concurrent days");
    app.add_option("--train-fraction", train_fraction);
    app.add_option("--validation-fraction", validation_fraction);
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (run_dir) c.run_dir = *run_dir;
    if (sessions) c.sessions_csv = *sessions;
    if (order_book) c.order_book_csv = *order_book;
    if (backend) c.backend = *backend;
    if (fleet_size) c.fleet_size = *fleet_size;
    if (days) c.synthetic.days = *days;
    if (tau) c.contract.tau = *tau;
    if (epsilon) c.contract.epsilon = *epsilon;
    if (pi_clc) c.contract.pi_clc = *pi_clc;
    if (pi_rc_sell) c.contract.pi_rc_sell = *pi_rc_sell;
    if (p_rc_min) c.contract.p_rc_min = *p_rc_min;
    if (capacity_limit) c.contract.capacity_limit = *capacity_limit;
    if (p_clc_min) c.contract.p_clc_min = *p_clc_min;
    if (p_clc_max) c.contract.p_clc_max = *p_clc_max;
    if (mip_gap) c.mip_gap = *mip_gap;
    if (time_limit) c.time_limit = *time_limit;
    if (train_fraction) c.train_fraction = *train_fraction;
    if (validation_fraction) c.validation_fraction = *validation_fraction;
    if (ev_scenarios) c.ev_scenarios = *ev_scenarios;
    if (rc_scenarios) c.rc_scenarios = *rc_scenarios;
    if (market_samples) c.market_samples = *market_samples;
    if (workers) c.workers = *workers;
    if (seed) c.seed = *seed;
    return c;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Coordinated capacity-limitation and redispatch contracts for EV fleets"};
  app.require_subcommand(1);
  app.fallthrough();  // shared options may follow the subcommand
  Overrides ov;
  ov.attach(app);
  std::string path, out_dir;

  auto* config = app.add_subcommand("config", "write the resolved config");
  config->add_option("-o,--out", path, "output file")->required();
  config->callback([&] {
    const ExperimentConfig c = ov.resolve();
    c.validate();
    save_config(c, path);
  });

  auto* ingest = app.add_subcommand("ingest", "validate a sessions CSV and report malformed rows");
  ingest->add_option("file", path, "sessions CSV")->required();
  ingest->callback([&] {
    const IngestReport r = ingest_sessions(std::filesystem::path(path));
    std::cout << nlohmann::json{{"rows", r.rows}, {"sessions", r.sessions.size()},
                                {"malformed", r.malformed}, {"problems", r.problems}}
                     .dump(2)
              << '\n';
  });

  auto* synth = app.add_subcommand("synth", "generate synthetic sessions and order book");
  synth->add_option("-o,--out", out_dir, "output directory")->required();
  synth->callback([&] {
    const ExperimentConfig c = ov.resolve();
    std::filesystem::create_directories(out_dir);
    std::ofstream s(std::filesystem::path(out_dir) / "sessions.csv");
    write_sessions_csv(s, generate_sessions(c.synthetic, derive_seed(c.seed, "synthetic-sessions")));
    std::ofstream o(std::filesystem::path(out_dir) / "order_book.csv");
    write_order_book_csv(o, generate_order_book(c.synthetic, derive_seed(c.seed, "synthetic-orders")));
    if (!s || !o) throw DataError("cannot write to " + out_dir);
  });

  auto stage = [&](const char* name, const char* help, void (*fn)(const ExperimentConfig&)) {
    app.add_subcommand(name, help)->callback([&ov, fn] { fn(ov.resolve()); });
  };
  stage("aggregate", "write data (synthetic if configured) and daily envelopes", [](const ExperimentConfig& c) {
    stage_data(c);
    stage_aggregate(c);
  });
  stage("forecast", "fit the forecaster and error models", stage_forecast);
  stage("fit-market", "fit the redispatch market copula", stage_fit_market);
  stage("tree", "derive capacities and build scenario trees for the test days", stage_tree);
  stage("solve", "solve the decision model per test day", stage_solve);
  stage("evaluate", "roll policies out on realized data", stage_evaluate);
  stage("report", "write outcome tables and the summary", stage_report);
  stage("stability", "in-sample stability over tree sizes", stage_stability);
  stage("sweep-eps", "epsilon sweep on the test days", stage_sweep);
  stage("run", "run every stage from data to report", run_pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const clcrc::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const clcrc::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const clcrc::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
}
