#include <doctest.h>

#include <limits>
#include <random>

#include "clcrc/errors.hpp"
#include "clcrc/fleet_model.hpp"

using namespace clcrc;

namespace {

constexpr UnixSeconds kDay = 1488758400;  // 2017-03-06

ChargingSession session(const char* id, double from_h, double to_h, double mwh, double mw) {
  return {id, kDay + static_cast<UnixSeconds>(from_h * 3600),
          kDay + static_cast<UnixSeconds>(to_h * 3600), mwh, mw};
}

const double kInf = std::numeric_limits<double>::infinity();

void check_vec(const std::vector<double>& got, const std::vector<double>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]));
}

}  // namespace

TEST_CASE("single session envelope") {
  const std::vector<ChargingSession> s = {session("a", 0, 2, 1.0, 1.0)};
  const FleetEnvelope env = aggregate_sessions(s, kDay, 4).envelope;
  check_vec(env.e_hi, {1, 1, 1, 1});
  check_vec(env.e_lo, {0, 1, 1, 1});
  check_vec(env.p_max, {1, 1, 0, 0});
  CHECK(check_envelope(env).empty());
}

TEST_CASE("empty fleet has a zero envelope") {
  const FleetEnvelope env = aggregate_sessions({}, kDay, 24).envelope;
  CHECK(env == FleetEnvelope(24));
}

TEST_CASE("duplicated sessions double the envelope") {
  std::vector<ChargingSession> s = {session("a", 1, 5.5, 2.0, 0.7), session("b", 3.25, 9, 1.0, 0.3)};
  const FleetEnvelope one = aggregate_sessions(s, kDay, 12).envelope;
  std::vector<ChargingSession> twice = s;
  twice.push_back(session("c", 1, 5.5, 2.0, 0.7));
  twice.push_back(session("d", 3.25, 9, 1.0, 0.3));
  const FleetEnvelope two = aggregate_sessions(twice, kDay, 12).envelope;
  for (std::size_t d = 0; d < 12; ++d) {
    CHECK(two.e_hi[d] == doctest::Approx(2 * one.e_hi[d]));
    CHECK(two.e_lo[d] == doctest::Approx(2 * one.e_lo[d]));
    CHECK(two.p_max[d] == doctest::Approx(2 * one.p_max[d]));
  }
}

TEST_CASE("partially connected hour counts the vehicle") {
  const std::vector<ChargingSession> s = {session("a", 0.5, 1.25, 0.1, 0.4)};
  const FleetEnvelope env = aggregate_sessions(s, kDay, 3).envelope;
  check_vec(env.p_max, {0.4, 0.4, 0});
  CHECK(check_envelope(env).empty());
}

TEST_CASE("sessions outside the horizon are skipped and infeasible ones rejected") {
  std::vector<ChargingSession> s = {session("early", -10, -2, 1.0, 1.0)};
  const AggregationResult r = aggregate_sessions(s, kDay, 24);
  CHECK(r.skipped == 1);
  CHECK(r.envelope == FleetEnvelope(24));

  s = {session("bad-ev", 0, 1, 5.0, 1.0)};
  try {
    aggregate_sessions(s, kDay, 24);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bad-ev") != std::string::npos);
  }
}

TEST_CASE("charging response under a power cap") {
  const std::vector<ChargingSession> s = {session("a", 0, 2, 1.0, 1.0)};
  const FleetEnvelope env = aggregate_sessions(s, kDay, 3).envelope;
  const std::vector<double> cap = {0.5, 0.5, 0.5};
  const LoadTrace t = charging_response(env, cap);
  check_vec(t.power, {0.5, 0.5, 0});
  check_vec(t.energy, {0.5, 1.0, 1.0});
  CHECK(t.unserved_energy == doctest::Approx(0.0));
}

TEST_CASE("uncapped response is the fast baseline and a zero cap curtails everything") {
  FleetEnvelope env(4);
  env.e_hi = {0.5, 1.5, 2.0, 2.0};
  env.e_lo = {0.0, 0.0, 1.0, 2.0};
  env.p_max = {1.0, 1.0, 1.0, 1.0};
  const std::vector<double> inf(4, kInf), zero(4, 0.0);
  const LoadTrace fast = charging_response(env, inf);
  check_vec(fast.power, {0.5, 1.0, 0.5, 0.0});
  check_vec(fast.power, baseline_load(env));
  CHECK(fast.unserved_energy == 0.0);

  const LoadTrace none = charging_response(env, zero);
  check_vec(none.power, {0, 0, 0, 0});
  CHECK(none.unserved_energy == doctest::Approx(2.0));
  CHECK(!none.lower_envelope_breaches.empty());
}

TEST_CASE("negative redispatch ceilings are clamped and counted") {
  FleetEnvelope env(2);
  env.e_hi = {1.0, 2.0};
  env.e_lo = {0.0, 1.0};
  env.p_max = {1.0, 1.0};
  const std::vector<double> cap(2, kInf), rc = {-0.3, 0.4};
  const LoadTrace t = charging_response(env, cap, std::span<const double>(rc));
  check_vec(t.power, {0.0, 0.4});
  CHECK(t.clamped_redispatch_caps == 1);
  CHECK(t.unserved_energy == doctest::Approx(1.6));
}

TEST_CASE("response from a later hour starts at the given energy") {
  FleetEnvelope env(3);
  env.e_hi = {1.0, 2.0, 3.0};
  env.e_lo = {0.0, 0.0, 3.0};
  env.p_max = {1.0, 1.0, 2.0};
  const std::vector<double> cap(3, kInf);
  const LoadTrace t = charging_response_from(env, 2, 1.5, cap);
  check_vec(t.power, {0, 0, 1.5});
  CHECK(t.energy[2] == doctest::Approx(3.0));
}

TEST_CASE("envelope check and repair") {
  FleetEnvelope env(3);
  env.e_hi = {1.0, 0.8, 2.5};
  env.e_lo = {1.2, 0.0, 0.5};
  env.p_max = {0.5, 1.0, 1.0};
  CHECK_FALSE(check_envelope(env).empty());
  repair_envelope(env);
  CHECK(check_envelope(env).empty());
}
