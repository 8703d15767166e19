#include "clcrc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "clcrc/calendar.hpp"

namespace clcrc {

namespace {

constexpr double kChargerKw[] = {3.7, 7.4, 11.0};

UnixSeconds minutes(double m) { return static_cast<UnixSeconds>(std::llround(m)) * 60; }

std::string order_id(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "o%07zu", k);
  return buf;
}

}  // namespace

nlohmann::json SyntheticParams::to_json() const {
  return {{"start_date", start_date},
          {"days", days},
          {"fleet_size", fleet_size},
          {"plug_in_probability", plug_in_probability},
          {"market_lead_days", market_lead_days},
          {"orders_per_peak_product", orders_per_peak_product},
          {"orders_per_other_product", orders_per_other_product},
          {"mean_order_volume", mean_order_volume},
          {"mean_buy_price", mean_buy_price},
          {"buy_price_sd", buy_price_sd},
          {"short_lived_share", short_lived_share},
          {"resubmission_share", resubmission_share}};
}

SyntheticParams SyntheticParams::from_json(const nlohmann::json& j) {
  SyntheticParams p;
  p.start_date = j.value("start_date", p.start_date);
  p.days = j.value("days", p.days);
  p.fleet_size = j.value("fleet_size", p.fleet_size);
  p.plug_in_probability = j.value("plug_in_probability", p.plug_in_probability);
  p.market_lead_days = j.value("market_lead_days", p.market_lead_days);
  p.orders_per_peak_product = j.value("orders_per_peak_product", p.orders_per_peak_product);
  p.orders_per_other_product = j.value("orders_per_other_product", p.orders_per_other_product);
  p.mean_order_volume = j.value("mean_order_volume", p.mean_order_volume);
  p.mean_buy_price = j.value("mean_buy_price", p.mean_buy_price);
  p.buy_price_sd = j.value("buy_price_sd", p.buy_price_sd);
  p.short_lived_share = j.value("short_lived_share", p.short_lived_share);
  p.resubmission_share = j.value("resubmission_share", p.resubmission_share);
  return p;
}

std::vector<ChargingSession> generate_sessions(const SyntheticParams& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> evening(18.0 * 60, 100.0);
  std::normal_distribution<double> morning(8.5 * 60, 70.0);
  std::uniform_int_distribution<int> charger(0, 2);
  const UnixSeconds start = parse_date(params.start_date);
  std::vector<ChargingSession> out;
  // One day either side so the first and last delivery days see overnight
  // sessions.
  for (int k = -1; k <= params.days; ++k) {
    const UnixSeconds day = start + k * kSecondsPerDay;
    const bool weekend = day_of_week(day) >= 5;
    for (int v = 0; v < params.fleet_size; ++v) {
      if (u(rng) >= params.plug_in_probability * (weekend ? 0.8 : 1.0)) continue;
      ChargingSession s;
      s.vehicle_id = "ev" + std::to_string(v);
      const bool home = u(rng) < (weekend ? 0.6 : 0.75);
      double arrive, stay;
      if (home) {
        arrive = std::clamp(evening(rng), 14.0 * 60, 23.5 * 60);
        stay = 6.0 * 60 + u(rng) * 7.0 * 60;
      } else {
        arrive = std::clamp(morning(rng), 6.0 * 60, 12.0 * 60);
        stay = 2.0 * 60 + u(rng) * 6.0 * 60;
      }
      s.arrival = day + minutes(arrive);
      s.departure = s.arrival + minutes(stay);
      const double kw = kChargerKw[charger(rng)];
      const double hours = static_cast<double>(s.departure - s.arrival) / 3600.0;
      // Demand is a large share of what the stay can deliver, which keeps the
      // slow-as-possible profile close to the uncontrolled one.
      double kwh = std::min(60.0, kw * hours * (0.15 + 0.6 * u(rng)));
      kwh = std::floor(kwh * 1000.0) / 1000.0;
      s.max_power = kw / 1000.0;
      s.energy_demand = kwh / 1000.0;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<OrderBookEntry> generate_order_book(const SyntheticParams& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> lead(1.0 / 150.0);      // minutes before gate closure
  std::exponential_distribution<double> life(1.0 / 90.0);       // minutes
  std::exponential_distribution<double> volume(1.0 / params.mean_order_volume);
  std::normal_distribution<double> buy_price(params.mean_buy_price, params.buy_price_sd);
  std::normal_distribution<double> sell_price(60.0, 25.0);
  const UnixSeconds start = parse_date(params.start_date);
  std::vector<OrderBookEntry> out;
  std::size_t next_id = 0;
  for (int k = -params.market_lead_days; k < params.days; ++k) {
    const UnixSeconds day = start + k * kSecondsPerDay;
    for (int h = 0; h < 24; ++h) {
      const bool peak = h >= 18 && h <= 22;
      const double rate = peak ? params.orders_per_peak_product : params.orders_per_other_product;
      for (Side side : {Side::Buy, Side::Sell}) {
        std::poisson_distribution<int> count(side == Side::Buy ? rate : 0.3 * rate);
        const int n = count(rng);
        for (int q = 0; q < n; ++q) {
          OrderBookEntry o;
          o.order_id = order_id(next_id++);
          o.side = side;
          o.delivery_date = day;
          o.product_hour = h;
          o.volume = std::max(0.1, std::round(volume(rng) * 10.0) / 10.0);
          o.limit_price = std::round((side == Side::Buy ? buy_price(rng) : sell_price(rng)) * 100.0) / 100.0;
          o.submitted_at = o.gate_closure() - minutes(std::max(1.0, lead(rng)));
          const double alive = u(rng) < params.short_lived_share ? 1.0 + u(rng) * 13.0
                                                                   : 15.0 + life(rng);
          o.closed_at = std::min(o.submitted_at + minutes(alive), o.gate_closure());
          const bool resubmit = u(rng) < params.resubmission_share;
          const double gap = 1.0 + u(rng) * 29.0;
          out.push_back(o);
          if (resubmit && o.closed_at + minutes(gap) < o.gate_closure()) {
            OrderBookEntry again = o;
            again.order_id = order_id(next_id++);
            again.submitted_at = o.closed_at + minutes(gap);
            again.closed_at = std::min(again.submitted_at + minutes(15.0 + life(rng)), o.gate_closure());
            out.push_back(again);
          }
        }
      }
    }
  }
  return out;
}

void write_sessions_csv(std::ostream& out, const std::vector<ChargingSession>& sessions) {
  out << "vehicle_id,arrival_iso8601,departure_iso8601,energy_kwh,max_power_kw\n";
  char buf[64];
  for (const auto& s : sessions) {
    out << s.vehicle_id << ',' << format_iso8601(s.arrival) << ',' << format_iso8601(s.departure) << ',';
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", s.energy_demand * 1000.0, s.max_power * 1000.0);
    out << buf << '\n';
  }
}

}  // namespace clcrc
