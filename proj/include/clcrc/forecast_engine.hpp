#pragma once

// Point forecasts of the fleet envelope, VAR error models on relative
// forecast errors and equiprobable EV scenario sampling.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "clcrc/calendar.hpp"
#include "clcrc/fleet_model.hpp"

namespace clcrc {

/// Forecast time of the capacity-limitation stage (8:00 on D-1), in hours
/// relative to midnight of the delivery day.
inline constexpr int kClcForecastTime = -16;

struct CalendarFeatures {
  int day_of_week = 0;  ///< 0 = Monday
  static CalendarFeatures of(UnixSeconds day) { return {clcrc::day_of_week(day)}; }
};

struct ForecastQuery {
  UnixSeconds day = 0;        ///< midnight of delivery day D
  int forecast_time = kClcForecastTime;
  double fleet_size = 0.0;    ///< 0 keeps the training fleet size
  /// Realized envelope of day D; hours before forecast_time are taken from it.
  const FleetEnvelope* observed = nullptr;
};

/// Point forecast together with the number of leading hours that are
/// already observed (and therefore carry no error).
struct EnvelopeForecast {
  FleetEnvelope envelope;
  std::size_t observed_hours = 0;
  int forecast_time = kClcForecastTime;
};

/// Number of complete hours of day D known at `forecast_time`.
std::size_t observed_hours_at(int forecast_time, std::size_t horizon);

class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual EnvelopeForecast predict(const ForecastQuery& query) const = 0;
  virtual std::string name() const = 0;
};

/// Day-of-week mean envelope, blended toward the observed part of day D.
class BaselineForecaster final : public Forecaster {
 public:
  BaselineForecaster(std::array<std::optional<FleetEnvelope>, 7> by_weekday, FleetEnvelope overall,
                     double training_fleet_size, std::size_t training_days);

  EnvelopeForecast predict(const ForecastQuery& query) const override;
  std::string name() const override { return "weekday-mean"; }

  std::size_t training_days() const { return training_days_; }
  double training_fleet_size() const { return training_fleet_size_; }
  const FleetEnvelope& profile(int weekday) const;

  nlohmann::json to_json() const;
  static BaselineForecaster from_json(const nlohmann::json& j);

 private:
  std::array<std::optional<FleetEnvelope>, 7> by_weekday_;
  FleetEnvelope overall_;
  double training_fleet_size_;
  std::size_t training_days_;
};

struct BaselineFitResult {
  std::unique_ptr<BaselineForecaster> forecaster;
  /// Set when fewer than the recommended 28 training days were supplied.
  bool below_recommended_size = false;
};

/// Requires at least 7 days (UsageError otherwise); 28 or more recommended.
BaselineFitResult fit_baseline_forecaster(const std::map<UnixSeconds, FleetEnvelope>& training_days,
                                          double fleet_size = 0.0);

using ErrorVector = Eigen::Vector3d;
/// One contiguous series of relative errors (one day of hourly errors).
using ErrorSeries = std::vector<ErrorVector>;

/// Relative errors (actual - forecast) / forecast of (e_lo, e_hi, p_max) per
/// hour, starting at hour `first`. Forecast values below a small floor are
/// replaced by the floor; results are clamped to [-1, 5].
ErrorSeries relative_errors(const FleetEnvelope& forecast, const FleetEnvelope& actual,
                            std::size_t first = 0);

/// VAR(1) on the three relative-error series: x_t = c + A x_{t-1} + e_t,
/// e_t ~ N(0, sigma).
struct Var1ErrorModel {
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
  int forecast_time = kClcForecastTime;
  std::size_t observations = 0;
  bool regularized = false;

  double spectral_radius() const;
  bool stationary() const { return spectral_radius() < 1.0; }

  nlohmann::json to_json() const;
  static Var1ErrorModel from_json(const nlohmann::json& j);
};

/// Least-squares VAR(k) fit, used both for the error model and for lag
/// selection.
struct VarFit {
  int lag = 1;
  Eigen::MatrixXd coefficients;  ///< K x (1 + K*lag): [c A_1 ... A_lag]
  Eigen::MatrixXd sigma;         ///< residual covariance (ML, divisor T)
  std::size_t samples = 0;       ///< effective regression rows
  bool regularized = false;
};

inline constexpr double kVarRidge = 1e-8;

/// Fits VAR(lag) on the given series, skipping the first `skip` entries of
/// each series as regressands (so different lags can share one sample).
VarFit fit_var(std::span<const ErrorSeries> series, int lag, int skip = -1);

/// Throws UsageError with fewer than 30 usable observations.
Var1ErrorModel fit_error_model(std::span<const ErrorSeries> series);
Var1ErrorModel fit_error_model(const ErrorSeries& errors);

struct LagSelection {
  int lag = 1;
  int max_lag_used = 1;
  bool max_lag_reduced = false;
  std::vector<double> bic;  ///< bic[k-1]
};

/// Argmin-BIC lag among 1..max_lag, ties toward the smaller lag.
LagSelection select_lag(std::span<const ErrorSeries> series, int max_lag);
LagSelection select_lag(const ErrorSeries& errors, int max_lag);

struct EvScenarioSet {
  std::vector<FleetEnvelope> scenarios;
  std::vector<double> probability;
  int forecast_time = kClcForecastTime;
  std::size_t observed_hours = 0;

  std::size_t size() const { return scenarios.size(); }
};

/// n equiprobable envelopes: forecast * (1 + simulated VAR(1) error path),
/// each repaired onto the envelope invariant set. Observed hours carry no
/// error. Deterministic in `seed`.
EvScenarioSet sample_ev_scenarios(const EnvelopeForecast& forecast, const Var1ErrorModel& model,
                                  std::size_t n, std::uint64_t seed);

struct DaySplit {
  std::vector<UnixSeconds> train;
  std::vector<UnixSeconds> validation;
  std::vector<UnixSeconds> test;
};

/// Random day split with the given train and validation fractions; the
/// remainder is the test set. Each output list is sorted.
DaySplit split_days(std::vector<UnixSeconds> days, double train_fraction,
                    double validation_fraction, std::uint64_t seed);

/// CSV rows `day,omega,d,e_lo,e_hi,p_max` (header included when requested).
void write_scenarios_csv(std::ostream& out, UnixSeconds day, const EvScenarioSet& set,
                         bool header = true);

nlohmann::json envelope_to_json(const FleetEnvelope& env);
FleetEnvelope envelope_from_json(const nlohmann::json& j);

}  // namespace clcrc
