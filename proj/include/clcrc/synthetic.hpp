#pragma once

// Seeded synthetic charging sessions and redispatch order books standing in
// for the real datasets. Sessions cluster around evening arrivals; buy
// volume concentrates on the 18:00-22:00 products and is submitted close to
// delivery, with negative prices on average.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clcrc/fleet_model.hpp"
#include "clcrc/market_model.hpp"

namespace clcrc {

struct SyntheticParams {
  std::string start_date = "2017-03-06";  ///< first delivery day with EV data
  int days = 50;
  int fleet_size = 1000;           ///< vehicles
  double plug_in_probability = 0.7;
  /// Order-book days before start_date (the market model needs >= 50 days).
  int market_lead_days = 80;
  double orders_per_peak_product = 12.0;   ///< mean buy orders on 18-22 products
  double orders_per_other_product = 1.5;
  double mean_order_volume = 0.4;          ///< MWh
  double mean_buy_price = -25.0;           ///< EUR/MWh
  double buy_price_sd = 35.0;
  double short_lived_share = 0.1;          ///< orders closed within 15 minutes
  double resubmission_share = 0.1;

  nlohmann::json to_json() const;
  static SyntheticParams from_json(const nlohmann::json& j);
  friend bool operator==(const SyntheticParams&, const SyntheticParams&) = default;
};

std::vector<ChargingSession> generate_sessions(const SyntheticParams& params, std::uint64_t seed);
std::vector<OrderBookEntry> generate_order_book(const SyntheticParams& params, std::uint64_t seed);

/// Sessions in the ingest schema (kW/kWh):
/// `vehicle_id,arrival_iso8601,departure_iso8601,energy_kwh,max_power_kw`.
void write_sessions_csv(std::ostream& out, const std::vector<ChargingSession>& sessions);

}  // namespace clcrc
