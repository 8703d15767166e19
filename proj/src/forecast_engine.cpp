#include "clcrc/forecast_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "clcrc/errors.hpp"

namespace clcrc {

namespace {

constexpr std::size_t kMinTrainingDays = 7;
constexpr std::size_t kRecommendedTrainingDays = 28;
constexpr std::size_t kMinErrorObservations = 30;
constexpr double kBlendDecayHours = 6.0;

FleetEnvelope scaled(const FleetEnvelope& env, double factor) {
  FleetEnvelope out = env;
  for (std::size_t d = 0; d < out.hours(); ++d) {
    out.e_lo[d] *= factor;
    out.e_hi[d] *= factor;
    out.p_max[d] *= factor;
  }
  return out;
}

double clamp_ratio(double observed, double expected) {
  if (!(expected > 1e-12)) return 1.0;
  return std::clamp(observed / expected, 0.5, 2.0);
}

}  // namespace

std::size_t observed_hours_at(int forecast_time, std::size_t horizon) {
  if (forecast_time <= 0) return 0;
  return std::min(static_cast<std::size_t>(forecast_time), horizon);
}

BaselineForecaster::BaselineForecaster(std::array<std::optional<FleetEnvelope>, 7> by_weekday,
                                       FleetEnvelope overall, double training_fleet_size,
                                       std::size_t training_days)
    : by_weekday_(std::move(by_weekday)),
      overall_(std::move(overall)),
      training_fleet_size_(training_fleet_size),
      training_days_(training_days) {}

const FleetEnvelope& BaselineForecaster::profile(int weekday) const {
  const auto& p = by_weekday_.at(static_cast<std::size_t>(weekday));
  return p ? *p : overall_;
}

nlohmann::json BaselineForecaster::to_json() const {
  nlohmann::json days = nlohmann::json::array();
  for (const auto& p : by_weekday_) days.push_back(p ? envelope_to_json(*p) : nlohmann::json());
  return {{"kind", "baseline_forecaster"},
          {"by_weekday", days},
          {"overall", envelope_to_json(overall_)},
          {"training_fleet_size", training_fleet_size_},
          {"training_days", training_days_}};
}

BaselineForecaster BaselineForecaster::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "baseline_forecaster") throw DataError("not a baseline forecaster");
  std::array<std::optional<FleetEnvelope>, 7> days;
  const auto& arr = j.at("by_weekday");
  if (!arr.is_array() || arr.size() != 7) throw DataError("forecaster needs seven weekday profiles");
  for (std::size_t w = 0; w < 7; ++w) {
    if (!arr[w].is_null()) days[w] = envelope_from_json(arr[w]);
  }
  return BaselineForecaster(std::move(days), envelope_from_json(j.at("overall")),
                            j.at("training_fleet_size").get<double>(),
                            j.at("training_days").get<std::size_t>());
}

EnvelopeForecast BaselineForecaster::predict(const ForecastQuery& query) const {
  const double factor = (query.fleet_size > 0.0 && training_fleet_size_ > 0.0)
                            ? query.fleet_size / training_fleet_size_
                            : 1.0;
  const FleetEnvelope mean = scaled(profile(day_of_week(query.day)), factor);
  EnvelopeForecast out{mean, 0, query.forecast_time};
  if (query.observed == nullptr) return out;

  const FleetEnvelope& obs = *query.observed;
  if (obs.hours() != mean.hours()) throw UsageError("observed envelope horizon mismatch");
  const std::size_t k = observed_hours_at(query.forecast_time, mean.hours());
  out.observed_hours = k;
  if (k == 0) return out;

  FleetEnvelope& f = out.envelope;
  for (std::size_t d = 0; d < k; ++d) {
    f.e_lo[d] = obs.e_lo[d];
    f.e_hi[d] = obs.e_hi[d];
    f.p_max[d] = obs.p_max[d];
  }
  const double r_lo = clamp_ratio(obs.e_lo[k - 1], mean.e_lo[k - 1]);
  const double r_hi = clamp_ratio(obs.e_hi[k - 1], mean.e_hi[k - 1]);
  const double r_p = clamp_ratio(obs.p_max[k - 1], mean.p_max[k - 1]);
  for (std::size_t d = k; d < f.hours(); ++d) {
    const double w = std::exp(-static_cast<double>(d - k + 1) / kBlendDecayHours);
    f.e_lo[d] = obs.e_lo[k - 1] + (mean.e_lo[d] - mean.e_lo[k - 1]) * (1.0 + (r_lo - 1.0) * w);
    f.e_hi[d] = obs.e_hi[k - 1] + (mean.e_hi[d] - mean.e_hi[k - 1]) * (1.0 + (r_hi - 1.0) * w);
    f.p_max[d] = mean.p_max[d] * (1.0 + (r_p - 1.0) * w);
  }
  repair_envelope(f);
  return out;
}

BaselineFitResult fit_baseline_forecaster(const std::map<UnixSeconds, FleetEnvelope>& training_days,
                                          double fleet_size) {
  if (training_days.size() < kMinTrainingDays) {
    throw UsageError("baseline forecaster needs at least 7 training days, got " +
                     std::to_string(training_days.size()));
  }
  const std::size_t hours = training_days.begin()->second.hours();
  const double dt = training_days.begin()->second.delta_t;
  std::array<FleetEnvelope, 7> sums;
  std::array<std::size_t, 7> counts{};
  sums.fill(FleetEnvelope(hours, dt));
  FleetEnvelope total(hours, dt);
  for (const auto& [day, env] : training_days) {
    if (env.hours() != hours) throw DataError("training envelopes differ in horizon");
    const auto w = static_cast<std::size_t>(day_of_week(day));
    sums[w] += env;
    ++counts[w];
    total += env;
  }
  std::array<std::optional<FleetEnvelope>, 7> profiles;
  for (std::size_t w = 0; w < 7; ++w) {
    if (counts[w] > 0) profiles[w] = scaled(sums[w], 1.0 / static_cast<double>(counts[w]));
  }
  FleetEnvelope overall = scaled(total, 1.0 / static_cast<double>(training_days.size()));
  BaselineFitResult result;
  result.forecaster = std::make_unique<BaselineForecaster>(std::move(profiles), std::move(overall),
                                                           fleet_size, training_days.size());
  result.below_recommended_size = training_days.size() < kRecommendedTrainingDays;
  return result;
}

ErrorSeries relative_errors(const FleetEnvelope& forecast, const FleetEnvelope& actual,
                            std::size_t first) {
  if (forecast.hours() != actual.hours()) throw UsageError("envelope horizon mismatch");
  const auto series_floor = [](const std::vector<double>& v) {
    const double peak = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    return std::max(1e-3 * peak, 1e-9);
  };
  const double floor_lo = series_floor(forecast.e_lo);
  const double floor_hi = series_floor(forecast.e_hi);
  const double floor_p = series_floor(forecast.p_max);
  const auto rel = [](double a, double f, double fl) {
    if (std::abs(a - f) < 1e-12) return 0.0;
    return std::clamp((a - f) / std::max(f, fl), -1.0, 5.0);
  };
  ErrorSeries out;
  for (std::size_t d = first; d < forecast.hours(); ++d) {
    out.emplace_back(rel(actual.e_lo[d], forecast.e_lo[d], floor_lo),
                     rel(actual.e_hi[d], forecast.e_hi[d], floor_hi),
                     rel(actual.p_max[d], forecast.p_max[d], floor_p));
  }
  return out;
}

double Var1ErrorModel::spectral_radius() const {
  Eigen::EigenSolver<Eigen::Matrix3d> solver(a, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

nlohmann::json Var1ErrorModel::to_json() const {
  const auto mat = [](const Eigen::Matrix3d& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
    return rows;
  };
  return {{"kind", "var1_error_model"},
          {"series", {"e_lo", "e_hi", "p_max"}},
          {"error_type", "relative"},
          {"forecast_time", forecast_time},
          {"observations", observations},
          {"regularized", regularized},
          {"A", mat(a)},
          {"c", {c(0), c(1), c(2)}},
          {"sigma", mat(sigma)}};
}

Var1ErrorModel Var1ErrorModel::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "var1_error_model") throw DataError("not a var1_error_model file");
  Var1ErrorModel m;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      m.a(i, k) = j.at("A").at(i).at(k).get<double>();
      m.sigma(i, k) = j.at("sigma").at(i).at(k).get<double>();
    }
    m.c(i) = j.at("c").at(i).get<double>();
  }
  m.forecast_time = j.at("forecast_time").get<int>();
  m.observations = j.at("observations").get<std::size_t>();
  m.regularized = j.at("regularized").get<bool>();
  return m;
}

VarFit fit_var(std::span<const ErrorSeries> series, int lag, int skip) {
  if (lag < 1) throw UsageError("VAR lag must be at least 1");
  if (skip < lag) skip = lag;
  constexpr int K = 3;
  const int cols = 1 + K * lag;
  std::size_t rows = 0;
  for (const auto& s : series) {
    if (s.size() > static_cast<std::size_t>(skip)) rows += s.size() - static_cast<std::size_t>(skip);
  }
  if (rows == 0) throw UsageError("no usable observations for VAR fit");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), cols);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(rows), K);
  Eigen::Index r = 0;
  for (const auto& s : series) {
    for (std::size_t t = static_cast<std::size_t>(skip); t < s.size(); ++t, ++r) {
      x(r, 0) = 1.0;
      for (int l = 1; l <= lag; ++l) x.block(r, 1 + K * (l - 1), 1, K) = s[t - l].transpose();
      y.row(r) = s[t].transpose();
    }
  }

  VarFit fit;
  fit.lag = lag;
  fit.samples = rows;
  Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (lu.rank() < cols) {
    gram += kVarRidge * Eigen::MatrixXd::Identity(cols, cols);
    fit.regularized = true;
  }
  const Eigen::MatrixXd beta = gram.ldlt().solve(x.transpose() * y);  // cols x K
  fit.coefficients = beta.transpose();
  const Eigen::MatrixXd resid = y - x * beta;
  fit.sigma = resid.transpose() * resid / static_cast<double>(rows);
  return fit;
}

Var1ErrorModel fit_error_model(std::span<const ErrorSeries> series) {
  std::size_t usable = 0;
  for (const auto& s : series) usable += s.size() > 1 ? s.size() - 1 : 0;
  if (usable < kMinErrorObservations) {
    throw UsageError("error model needs at least 30 observations, got " + std::to_string(usable));
  }
  const VarFit fit = fit_var(series, 1);
  Var1ErrorModel m;
  m.c = fit.coefficients.col(0);
  m.a = fit.coefficients.block(0, 1, 3, 3);
  m.sigma = 0.5 * (fit.sigma + fit.sigma.transpose());
  m.observations = fit.samples;
  m.regularized = fit.regularized;
  return m;
}

Var1ErrorModel fit_error_model(const ErrorSeries& errors) {
  return fit_error_model(std::span<const ErrorSeries>(&errors, 1));
}

LagSelection select_lag(std::span<const ErrorSeries> series, int max_lag) {
  if (max_lag < 1) throw UsageError("max_lag must be at least 1");
  constexpr int K = 3;
  const auto rows_for = [&](int skip) {
    std::size_t rows = 0;
    for (const auto& s : series) {
      if (s.size() > static_cast<std::size_t>(skip)) rows += s.size() - static_cast<std::size_t>(skip);
    }
    return rows;
  };
  LagSelection out;
  int usable = max_lag;
  while (usable >= 1 && rows_for(usable) < static_cast<std::size_t>(2 * (1 + K * usable))) --usable;
  if (usable < 1) throw UsageError("insufficient data for VAR lag selection");
  out.max_lag_reduced = usable < max_lag;
  out.max_lag_used = usable;

  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= usable; ++k) {
    const VarFit fit = fit_var(series, k, usable);
    const double t = static_cast<double>(fit.samples);
    const double det = std::max(fit.sigma.determinant(), 1e-300);
    const double bic = std::log(det) + std::log(t) / t * static_cast<double>(K * K * k + K);
    out.bic.push_back(bic);
    if (k == 1 || bic < best - 1e-12 * std::max(1.0, std::abs(best))) {
      best = bic;
      out.lag = k;
    }
  }
  return out;
}

LagSelection select_lag(const ErrorSeries& errors, int max_lag) {
  return select_lag(std::span<const ErrorSeries>(&errors, 1), max_lag);
}

EvScenarioSet sample_ev_scenarios(const EnvelopeForecast& forecast, const Var1ErrorModel& model,
                                  std::size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("scenario count must be at least 1");
  const std::string why = check_envelope(forecast.envelope, 1e-6);
  if (!why.empty()) throw DataError("forecast envelope invalid: " + why);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(0.5 * (model.sigma + model.sigma.transpose()));
  const Eigen::Vector3d root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix3d shock = eig.eigenvectors() * root.asDiagonal();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  EvScenarioSet out;
  out.forecast_time = forecast.forecast_time;
  out.observed_hours = forecast.observed_hours;
  out.scenarios.reserve(n);
  const FleetEnvelope& f = forecast.envelope;
  for (std::size_t s = 0; s < n; ++s) {
    FleetEnvelope env = f;
    Eigen::Vector3d state = Eigen::Vector3d::Zero();
    for (std::size_t d = 0; d < f.hours(); ++d) {
      Eigen::Vector3d z(normal(rng), normal(rng), normal(rng));
      if (d < forecast.observed_hours) continue;
      state = model.c + model.a * state + shock * z;
      const Eigen::Vector3d factor = (Eigen::Vector3d::Ones() + state).cwiseMax(0.0);
      env.e_lo[d] = f.e_lo[d] * factor(0);
      env.e_hi[d] = f.e_hi[d] * factor(1);
      env.p_max[d] = f.p_max[d] * factor(2);
    }
    repair_envelope(env);
    out.scenarios.push_back(std::move(env));
  }
  out.probability.assign(n, 1.0 / static_cast<double>(n));
  return out;
}

DaySplit split_days(std::vector<UnixSeconds> days, double train_fraction,
                    double validation_fraction, std::uint64_t seed) {
  if (train_fraction < 0.0 || validation_fraction < 0.0 ||
      train_fraction + validation_fraction > 1.0 + 1e-12) {
    throw UsageError("invalid split fractions");
  }
  std::sort(days.begin(), days.end());
  std::mt19937_64 rng(seed);
  std::shuffle(days.begin(), days.end(), rng);
  const auto n = static_cast<double>(days.size());
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * n));
  const auto n_val = std::min(days.size() - n_train,
                              static_cast<std::size_t>(std::llround(validation_fraction * n)));
  DaySplit split;
  split.train.assign(days.begin(), days.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(days.begin() + static_cast<std::ptrdiff_t>(n_train),
                          days.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(days.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), days.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void write_scenarios_csv(std::ostream& out, UnixSeconds day, const EvScenarioSet& set,
                         bool header) {
  if (header) out << "day,omega,d,e_lo,e_hi,p_max\n";
  const std::string date = format_date(day);
  out << std::setprecision(10);
  for (std::size_t w = 0; w < set.size(); ++w) {
    const FleetEnvelope& env = set.scenarios[w];
    for (std::size_t d = 0; d < env.hours(); ++d) {
      out << date << ',' << w << ',' << d << ',' << env.e_lo[d] << ',' << env.e_hi[d] << ','
          << env.p_max[d] << '\n';
    }
  }
}

nlohmann::json envelope_to_json(const FleetEnvelope& env) {
  return {{"e_lo", env.e_lo}, {"e_hi", env.e_hi}, {"p_max", env.p_max}, {"delta_t", env.delta_t}};
}

FleetEnvelope envelope_from_json(const nlohmann::json& j) {
  FleetEnvelope env;
  env.e_lo = j.at("e_lo").get<std::vector<double>>();
  env.e_hi = j.at("e_hi").get<std::vector<double>>();
  env.p_max = j.at("p_max").get<std::vector<double>>();
  env.delta_t = j.value("delta_t", 1.0);
  return env;
}

}  // namespace clcrc
