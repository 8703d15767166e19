#include <doctest.h>

#include <random>
#include <sstream>

#include "clcrc/errors.hpp"
#include "clcrc/forecast_engine.hpp"
#include "generators.hpp"

using namespace clcrc;
using clcrc::test::simulate_var;

namespace {

constexpr UnixSeconds kMonday = 1488758400;  // 2017-03-06

FleetEnvelope profile(double scale) {
  FleetEnvelope env(24);
  double hi = 0.0, lo = 0.0;
  for (std::size_t d = 0; d < 24; ++d) {
    const double step = scale * (d >= 17 && d <= 21 ? 1.0 : 0.2);
    hi += step;
    env.e_hi[d] = hi;
    env.p_max[d] = 2.0 * scale;
  }
  for (std::size_t d = 0; d < 24; ++d) {
    lo = std::max(lo, env.e_hi[d] - 4.0 * scale);
    env.e_lo[d] = d == 23 ? env.e_hi[23] : lo;
  }
  repair_envelope(env);
  return env;
}

std::map<UnixSeconds, FleetEnvelope> days_of(std::size_t n, auto&& make) {
  std::map<UnixSeconds, FleetEnvelope> m;
  for (std::size_t i = 0; i < n; ++i) {
    const UnixSeconds day = kMonday + static_cast<UnixSeconds>(i) * kSecondsPerDay;
    m[day] = make(i);
  }
  return m;
}

}  // namespace

TEST_CASE("constant training data is forecast exactly") {
  const FleetEnvelope p = profile(1.0);
  const auto train = days_of(28, [&](std::size_t) { return p; });
  const auto fit = fit_baseline_forecaster(train);
  CHECK_FALSE(fit.below_recommended_size);
  for (int k = 0; k < 7; ++k) {
    const EnvelopeForecast f = fit.forecaster->predict({kMonday + k * kSecondsPerDay});
    for (std::size_t d = 0; d < 24; ++d) {
      CHECK(f.envelope.e_hi[d] == doctest::Approx(p.e_hi[d]));
      CHECK(f.envelope.e_lo[d] == doctest::Approx(p.e_lo[d]));
      CHECK(f.envelope.p_max[d] == doctest::Approx(p.p_max[d]));
    }
  }
}

TEST_CASE("weekday means separate alternating profiles") {
  const FleetEnvelope a = profile(1.0), b = profile(3.0);
  const auto train = days_of(14, [&](std::size_t i) { return i % 7 < 5 ? a : b; });
  const auto fit = fit_baseline_forecaster(train);
  CHECK(fit.below_recommended_size);
  const FleetEnvelope wk = fit.forecaster->predict({kMonday + 14 * kSecondsPerDay}).envelope;
  const FleetEnvelope we = fit.forecaster->predict({kMonday + 19 * kSecondsPerDay}).envelope;
  CHECK(wk.e_hi[23] == doctest::Approx(a.e_hi[23]));
  CHECK(we.e_hi[23] == doctest::Approx(b.e_hi[23]));
}

TEST_CASE("fewer than seven training days are refused") {
  const auto train = days_of(6, [](std::size_t) { return profile(1.0); });
  CHECK_THROWS_AS(fit_baseline_forecaster(train), UsageError);
}

TEST_CASE("observed hours are reproduced by the nowcast") {
  const auto train = days_of(28, [](std::size_t) { return profile(1.0); });
  const auto fit = fit_baseline_forecaster(train);
  const FleetEnvelope obs = profile(1.4);
  ForecastQuery q{kMonday + 28 * kSecondsPerDay, 10, 0.0, &obs};
  const EnvelopeForecast f = fit.forecaster->predict(q);
  CHECK(f.observed_hours == 10);
  for (std::size_t d = 0; d < 10; ++d) {
    CHECK(f.envelope.e_hi[d] == doctest::Approx(obs.e_hi[d]));
    CHECK(f.envelope.p_max[d] == doctest::Approx(obs.p_max[d]));
  }
  CHECK(check_envelope(f.envelope).empty());
}

TEST_CASE("forecaster round-trips through JSON") {
  const auto train = days_of(21, [](std::size_t i) { return profile(1.0 + 0.1 * static_cast<double>(i % 3)); });
  const auto fit = fit_baseline_forecaster(train, 100.0);
  const BaselineForecaster back = BaselineForecaster::from_json(fit.forecaster->to_json());
  const ForecastQuery q{kMonday + 30 * kSecondsPerDay, kClcForecastTime, 150.0};
  CHECK(back.predict(q).envelope == fit.forecaster->predict(q).envelope);
}

TEST_CASE("VAR(1) coefficients are recovered") {
  const Eigen::Matrix3d a = 0.5 * Eigen::Matrix3d::Identity();
  const ErrorSeries x = simulate_var(a, Eigen::Matrix3d::Zero(), 0.1, 10000, 7);
  const Var1ErrorModel m = fit_error_model(x);
  CHECK((m.a - a).cwiseAbs().maxCoeff() <= 0.05);
  CHECK(m.sigma(0, 0) == doctest::Approx(0.01).epsilon(0.1));
  CHECK(m.stationary());
}

TEST_CASE("white noise fits a near-zero coefficient matrix and lag one") {
  const ErrorSeries x = simulate_var(Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero(), 1.0, 5000, 11);
  const Var1ErrorModel m = fit_error_model(x);
  CHECK(m.a.cwiseAbs().maxCoeff() < 0.06);
  CHECK(select_lag(x, 4).lag == 1);
}

TEST_CASE("constant zero errors give a zero model") {
  const ErrorSeries x(100, ErrorVector::Zero());
  const Var1ErrorModel m = fit_error_model(x);
  CHECK(m.a.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(m.c.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.sigma.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.regularized);
}

TEST_CASE("too few error observations are refused") {
  const ErrorSeries x(20, ErrorVector::Zero());
  CHECK_THROWS_AS(fit_error_model(x), UsageError);
}

TEST_CASE("lag selection finds lag one and lag two processes") {
  const Eigen::Matrix3d a1 = 0.6 * Eigen::Matrix3d::Identity();
  CHECK(select_lag(simulate_var(a1, Eigen::Matrix3d::Zero(), 0.1, 3000, 3), 4).lag == 1);
  const Eigen::Matrix3d a2 = 0.6 * Eigen::Matrix3d::Identity();
  CHECK(select_lag(simulate_var(0.2 * Eigen::Matrix3d::Identity(), a2, 0.1, 3000, 5), 4).lag == 2);
}

TEST_CASE("lag selection reduces an unusable maximum lag") {
  const ErrorSeries x = simulate_var(Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero(), 1.0, 40, 1);
  const LagSelection s = select_lag(x, 30);
  CHECK(s.max_lag_reduced);
  CHECK(s.max_lag_used < 30);
}

TEST_CASE("zero noise scenarios equal the forecast") {
  const EnvelopeForecast f{profile(1.0), 0, kClcForecastTime};
  const EvScenarioSet s = sample_ev_scenarios(f, Var1ErrorModel{}, 5, 1);
  REQUIRE(s.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(s.probability[k] == doctest::Approx(0.2));
    CHECK(s.scenarios[k] == f.envelope);
  }
}

TEST_CASE("scenario sampling is reproducible, repaired and unbiased") {
  const EnvelopeForecast f{profile(1.0), 0, kClcForecastTime};
  Var1ErrorModel m;
  m.a = 0.3 * Eigen::Matrix3d::Identity();
  m.sigma = 0.0025 * Eigen::Matrix3d::Identity();
  const EvScenarioSet s = sample_ev_scenarios(f, m, 10000, 42);
  const EvScenarioSet again = sample_ev_scenarios(f, m, 10000, 42);
  CHECK(s.scenarios == again.scenarios);
  double mean = 0.0;
  bool repaired = true;
  for (const auto& env : s.scenarios) {
    mean += env.e_hi[20] / 10000.0;
    repaired = repaired && check_envelope(env, 1e-9).empty();
  }
  CHECK(repaired);
  CHECK(mean == doctest::Approx(f.envelope.e_hi[20]).epsilon(0.01));
}

TEST_CASE("observed hours carry no sampling error") {
  EnvelopeForecast f{profile(1.0), 12, 12};
  Var1ErrorModel m;
  m.sigma = 0.01 * Eigen::Matrix3d::Identity();
  const EvScenarioSet s = sample_ev_scenarios(f, m, 50, 9);
  for (const auto& env : s.scenarios)
    for (std::size_t d = 0; d < 12; ++d) CHECK(env.e_hi[d] == doctest::Approx(f.envelope.e_hi[d]));
}

TEST_CASE("day split follows the fractions and is seeded") {
  std::vector<UnixSeconds> days;
  for (int i = 0; i < 100; ++i) days.push_back(kMonday + i * kSecondsPerDay);
  const DaySplit a = split_days(days, 0.7, 0.2, 3), b = split_days(days, 0.7, 0.2, 3);
  CHECK(a.train.size() == 70);
  CHECK(a.validation.size() == 20);
  CHECK(a.test.size() == 10);
  CHECK(a.test == b.test);
  CHECK(std::is_sorted(a.train.begin(), a.train.end()));
}

TEST_CASE("scenario CSV has the documented columns") {
  EvScenarioSet s;
  s.scenarios = {FleetEnvelope(2)};
  s.probability = {1.0};
  std::ostringstream out;
  write_scenarios_csv(out, kMonday, s);
  CHECK(out.str().rfind("day,omega,d,e_lo,e_hi,p_max\n", 0) == 0);
}
