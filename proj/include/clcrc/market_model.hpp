#pragma once

// Redispatch order books: filtering, trading-window aggregation, copula
// fitting and sampling of the joint (volume, price) distribution, and
// fast-forward scenario reduction.

#include <Eigen/Dense>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "clcrc/calendar.hpp"

namespace clcrc {

/// Gate closure of a redispatch product, before delivery start.
inline constexpr UnixSeconds kGateClosureLead = 45 * 60;
/// Orders alive for less than this are dropped as likely manipulation.
inline constexpr UnixSeconds kMinOrderLifetime = 15 * 60;

enum class Side { Buy, Sell };

struct OrderBookEntry {
  std::string order_id;
  Side side = Side::Buy;
  UnixSeconds delivery_date = 0;  ///< midnight of the delivery day
  int product_hour = 0;           ///< delivery hour d within the day
  double volume = 0.0;            ///< MWh
  double limit_price = 0.0;       ///< EUR/MWh, may be negative
  UnixSeconds submitted_at = 0;
  UnixSeconds closed_at = 0;      ///< retraction, expiry or full match

  UnixSeconds delivery_start() const { return delivery_date + product_hour * kSecondsPerHour; }
  UnixSeconds gate_closure() const { return delivery_start() - kGateClosureLead; }
};

/// Reads `order_id,side,delivery_date,product_hour,volume_mwh,price_eur_mwh,
/// submitted_at,closed_at`. Malformed rows are counted, not thrown.
struct OrderBookReadResult {
  std::vector<OrderBookEntry> orders;
  std::size_t malformed_rows = 0;
};
OrderBookReadResult read_order_book_csv(std::istream& in);
void write_order_book_csv(std::ostream& out, std::span<const OrderBookEntry> orders);

/// Drops buy orders alive for less than 15 minutes, then keeps only the
/// first of identical orders (side, product, volume, price) resubmitted
/// after an earlier one closed. Idempotent.
std::vector<OrderBookEntry> filter_orders(std::span<const OrderBookEntry> orders);

struct WindowAggregate {
  double volume = 0.0;
  std::optional<double> vwap;  ///< empty when no order qualifies
  bool window_closed = false;
  std::size_t orders = 0;
};

/// Buy volume and VWAP of the orders for `product` (delivery start) whose
/// active interval intersects [window_start, gate closure).
WindowAggregate window_aggregate(std::span<const OrderBookEntry> orders, UnixSeconds window_start,
                                 UnixSeconds delivery_start);

/// Per-day 2H-vector: H buy volumes followed by H VWAPs for the trading
/// window opening at `tau` hours relative to midnight of `day`. Missing
/// prices are NaN.
std::vector<double> trading_window_row(std::span<const OrderBookEntry> orders, UnixSeconds day,
                                       int tau, std::size_t hours = 24);

/// Replaces NaN prices with the per-column median (0 if a column has no
/// observation at all). Volumes are left as-is.
void impute_missing_prices(std::vector<std::vector<double>>& rows, std::size_t hours);

/// Redispatch market outcome for one scenario. Entries for hours not in the
/// second stage are unused.
struct MarketScenario {
  std::vector<double> buy_volume;  ///< MWh
  std::vector<double> buy_price;   ///< EUR/MWh
  double probability = 1.0;

  friend bool operator==(const MarketScenario&, const MarketScenario&) = default;
};

enum class CopulaFamily { Gaussian, StudentT };
std::string to_string(CopulaFamily f);

/// Elliptical copula on the active (non-constant) columns with empirical
/// quantile marginals.
struct CopulaModel {
  CopulaFamily family = CopulaFamily::Gaussian;
  std::size_t dimension = 0;
  std::vector<std::size_t> active;        ///< columns carried by the copula
  std::vector<double> constant_value;     ///< per column; used when inactive
  Eigen::MatrixXd correlation;            ///< |active| x |active|
  double degrees_of_freedom = 0.0;        ///< student-t only
  std::vector<std::vector<double>> marginal_sorted;  ///< per column sorted data
  double bic_gaussian = 0.0;
  double bic_student_t = 0.0;
  double log_likelihood = 0.0;
  std::size_t samples = 0;

  /// Empirical quantile (linear interpolation between order statistics).
  double marginal_quantile(std::size_t column, double u) const;

  nlohmann::json to_json() const;
  static CopulaModel from_json(const nlohmann::json& j);
};

struct CopulaFitOptions {
  std::size_t min_samples = 50;
  /// Columns of the form [0, volume_columns) are volumes (clamped >= 0 when
  /// sampled).
  std::size_t volume_columns = 0;
};

/// Fits both families on rank pseudo-observations and keeps the lower BIC.
CopulaModel fit_copula(std::span<const std::vector<double>> samples,
                       const CopulaFitOptions& options = {});

/// Log-likelihood helpers exposed for tests.
double gaussian_copula_loglik(const Eigen::MatrixXd& pseudo_obs, const Eigen::MatrixXd& corr);
double student_t_copula_loglik(const Eigen::MatrixXd& pseudo_obs, const Eigen::MatrixXd& corr,
                               double nu);
/// Average-rank pseudo-observations rank / (n + 1).
Eigen::MatrixXd pseudo_observations(const Eigen::MatrixXd& data);

/// n rows sampled from the copula and mapped through the marginals;
/// `volume_columns` leading columns are clamped to be nonnegative.
Eigen::MatrixXd sample_market(const CopulaModel& model, std::size_t n, std::uint64_t seed,
                              std::size_t volume_columns = 0);

enum class DistanceMetric { StandardizedEuclidean, Euclidean };

struct ReductionResult {
  std::vector<std::size_t> selected;  ///< indices into the sample matrix
  std::vector<double> probability;    ///< aligned with `selected`
  double kantorovich_distance = 0.0;
};

/// Fast-forward selection of m of the n (row) samples minimizing the
/// transport distance greedily; mass is redistributed to nearest kept
/// sample. `weights` default to equiprobable.
ReductionResult fast_forward_reduce(const Eigen::MatrixXd& samples, std::size_t m,
                                    DistanceMetric metric = DistanceMetric::StandardizedEuclidean,
                                    std::span<const double> weights = {});

/// Kantorovich distance between the weighted sample set and the subset
/// `kept` after optimal nearest-neighbor redistribution.
double kantorovich_distance(const Eigen::MatrixXd& samples, std::span<const std::size_t> kept,
                            DistanceMetric metric, std::span<const double> weights = {});

/// Reduces 2H-column samples to MarketScenarios.
std::vector<MarketScenario> reduce_scenarios(const Eigen::MatrixXd& samples, std::size_t m,
                                             DistanceMetric metric =
                                                 DistanceMetric::StandardizedEuclidean);

nlohmann::json market_scenario_to_json(const MarketScenario& s);
MarketScenario market_scenario_from_json(const nlohmann::json& j);

}  // namespace clcrc
