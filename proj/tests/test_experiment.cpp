#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "clcrc/errors.hpp"
#include "clcrc/experiment.hpp"

using namespace clcrc;

namespace {

const char* kHeader = "vehicle_id,arrival_iso8601,departure_iso8601,energy_kwh,max_power_kw\n";

IngestReport ingest_text(const std::string& body) {
  std::istringstream in(kHeader + body);
  return ingest_sessions(in);
}

}  // namespace

TEST_CASE("default contract terms") {
  const ExperimentConfig c;
  CHECK(c.contract.pi_clc == 100.00);
  CHECK(c.contract.pi_rc_sell == 100.00);
  CHECK(c.contract.p_rc_min == 0.1);
  CHECK(c.contract.epsilon == 0.05);
  CHECK(c.ev_scenarios == 28);
  CHECK(c.rc_scenarios == 8);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config survives a save and load") {
  ExperimentConfig c;
  c.run_dir = "somewhere";
  c.contract.tau = -3;
  c.contract.epsilon = 0.1;
  c.synthetic.days = 21;
  c.stability_grid = {{2, 1}};
  c.seed = 99;
  c.time_limit = 12.5;
  const auto path = std::filesystem::temp_directory_path() / "clcrc_config_roundtrip.json";
  save_config(c, path);
  CHECK(load_config(path) == c);
  CHECK(ExperimentConfig::from_json(c.to_json()) == c);
  std::filesystem::remove(path);
}

TEST_CASE("invalid configs are usage errors and missing files data errors") {
  ExperimentConfig c;
  c.train_fraction = 0.9;
  c.validation_fraction = 0.1;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = {};
  c.sessions_csv = "/nonexistent/sessions.csv";
  c.order_book_csv = "/nonexistent/orders.csv";
  CHECK_THROWS_AS(c.validate(), DataError);
  c = {};
  c.sessions_csv = "only-one.csv";
  CHECK_THROWS_AS(c.validate(), UsageError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), DataError);
}

TEST_CASE("well-formed rows are ingested and converted to MW") {
  const IngestReport r = ingest_text(
      "ev1,2017-03-06T18:00:00,2017-03-07T07:00:00,22.5,7.4\n"
      "ev2,2017-03-06T08:30:00,2017-03-06T16:00:00,10,3.7\n"
      "ev1,2017-03-07T19:15,2017-03-08T06:45,5.0,11\n");
  REQUIRE(r.sessions.size() == 3);
  CHECK(r.malformed == 0);
  CHECK(r.sessions[0].energy_demand == doctest::Approx(0.0225));
  CHECK(r.sessions[0].max_power == doctest::Approx(0.0074));
  CHECK(r.sessions[1].arrival == parse_iso8601("2017-03-06T08:30:00"));
}

TEST_CASE("a departure before arrival is rejected and counted") {
  std::string body;
  for (int i = 0; i < 30; ++i) body += "ev" + std::to_string(i) + ",2017-03-06T18:00,2017-03-06T20:00,1,7\n";
  body += "bad,2017-03-06T18:00,2017-03-06T17:00,1,7\n";
  const IngestReport r = ingest_text(body);
  CHECK(r.sessions.size() == 30);
  CHECK(r.malformed == 1);
  CHECK(r.problems.size() == 1);
}

TEST_CASE("more than five percent malformed rows abort the ingest") {
  std::string body;
  for (int i = 0; i < 18; ++i) body += "ev,2017-03-06T18:00,2017-03-06T20:00,1,7\n";
  body += "x,not-a-date,2017-03-06T20:00,1,7\n";
  body += "y,2017-03-06T18:00,2017-03-06T20:00,1,-7\n";
  CHECK_THROWS_AS(ingest_text(body), DataError);
}

TEST_CASE("single vehicle capacities") {
  FleetEnvelope env(24);
  const std::vector<ChargingSession> s = {
      {"ev", parse_iso8601("2017-03-06T18:00"), parse_iso8601("2017-03-06T22:00"), 0.01, 0.011}};
  env = aggregate_sessions(s, parse_date("2017-03-06"), 24).envelope;
  const std::vector<FleetEnvelope> one = {env};
  const Capacities c = derive_capacities(one, {});
  CHECK(c.p_clc_max == doctest::Approx(0.011));
  CHECK(c.capacity_limit == doctest::Approx(env.peak_slow_power()));
  CHECK(c.p_clc_min == c.capacity_limit);
  CHECK_THROWS_AS(derive_capacities({}, {}), DataError);
}

TEST_CASE("seed derivation separates stages and days") {
  CHECK(derive_seed(1, "fleet") == derive_seed(1, "fleet"));
  CHECK(derive_seed(1, "fleet") != derive_seed(2, "fleet"));
  CHECK(derive_seed(1, "fleet") != derive_seed(1, "split"));
  CHECK(derive_seed(1, "market", 17000) != derive_seed(1, "market", 17001));
}

TEST_CASE("fleet selection keeps whole vehicles") {
  const std::vector<ChargingSession> s = {{"a", 0, 3600, 0, 1}, {"b", 0, 3600, 0, 1},
                                          {"a", 7200, 9000, 0, 1}, {"c", 0, 3600, 0, 1}};
  const auto two = select_fleet(s, 2, 5);
  std::set<std::string> ids;
  for (const auto& x : two) ids.insert(x.vehicle_id);
  CHECK(ids.size() == 2);
  CHECK(two == select_fleet(s, 2, 5));
  CHECK(select_fleet(s, 0, 5).size() == 4);
}

TEST_CASE("synthetic order book is quiet before 15:00 the day before and cheap on average") {
  SyntheticParams p;
  p.days = 20;
  p.market_lead_days = 10;
  const auto orders = generate_order_book(p, 7);
  double early = 0.0, total = 0.0, price = 0.0, buys = 0.0;
  for (const auto& o : orders) {
    if (o.side != Side::Buy) continue;
    total += o.volume;
    if (o.submitted_at < o.delivery_date - 9 * kSecondsPerHour) early += o.volume;
    price += o.limit_price;
    buys += 1.0;
  }
  REQUIRE(total > 0.0);
  CHECK(early / total < 0.02);
  CHECK(price / buys < 0.0);
}

TEST_CASE("synthetic data is byte identical for a fixed seed") {
  SyntheticParams p;
  p.days = 5;
  p.market_lead_days = 3;
  p.fleet_size = 50;
  std::ostringstream a, b, c, d;
  write_sessions_csv(a, generate_sessions(p, 11));
  write_sessions_csv(b, generate_sessions(p, 11));
  write_order_book_csv(c, generate_order_book(p, 12));
  write_order_book_csv(d, generate_order_book(p, 12));
  CHECK(a.str() == b.str());
  CHECK(c.str() == d.str());
  std::ostringstream e;
  write_sessions_csv(e, generate_sessions(p, 13));
  CHECK(e.str() != a.str());

  std::istringstream back(a.str());
  const IngestReport r = ingest_sessions(back);
  CHECK(r.malformed == 0);
  CHECK(r.sessions.size() == generate_sessions(p, 11).size());
}

TEST_CASE("daily envelopes cover the interior days") {
  SyntheticParams p;
  p.days = 4;
  p.fleet_size = 60;
  const auto env = daily_envelopes(generate_sessions(p, 3));
  CHECK(env.size() >= 4);
  for (const auto& [day, e] : env) {
    CHECK(floor_to_day(day) == day);
    CHECK(check_envelope(e, 1e-9).empty());
  }
}
