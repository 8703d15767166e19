#include "clcrc/fleet_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "clcrc/errors.hpp"

namespace clcrc {

double FleetEnvelope::fast_power(std::size_t d) const {
  const double prev = d == 0 ? 0.0 : e_hi[d - 1];
  return (e_hi[d] - prev) / delta_t;
}

double FleetEnvelope::slow_power(std::size_t d) const {
  const double prev = d == 0 ? 0.0 : e_lo[d - 1];
  return (e_lo[d] - prev) / delta_t;
}

double FleetEnvelope::peak_fast_power() const {
  double peak = 0.0;
  for (std::size_t d = 0; d < hours(); ++d) peak = std::max(peak, fast_power(d));
  return peak;
}

double FleetEnvelope::peak_slow_power() const {
  double peak = 0.0;
  for (std::size_t d = 0; d < hours(); ++d) peak = std::max(peak, slow_power(d));
  return peak;
}

FleetEnvelope& FleetEnvelope::operator+=(const FleetEnvelope& other) {
  if (other.hours() != hours()) throw UsageError("envelope horizon mismatch");
  for (std::size_t d = 0; d < hours(); ++d) {
    e_lo[d] += other.e_lo[d];
    e_hi[d] += other.e_hi[d];
    p_max[d] += other.p_max[d];
  }
  return *this;
}

FleetEnvelope operator+(FleetEnvelope a, const FleetEnvelope& b) {
  a += b;
  return a;
}

std::string check_envelope(const FleetEnvelope& env, double tol) {
  const std::size_t n = env.hours();
  if (env.e_lo.size() != n || env.p_max.size() != n) return "series lengths differ";
  if (!(env.delta_t > 0.0)) return "delta_t must be positive";
  std::ostringstream why;
  for (std::size_t d = 0; d < n; ++d) {
    const double lo_prev = d == 0 ? 0.0 : env.e_lo[d - 1];
    const double hi_prev = d == 0 ? 0.0 : env.e_hi[d - 1];
    if (!std::isfinite(env.e_lo[d]) || !std::isfinite(env.e_hi[d]) ||
        !std::isfinite(env.p_max[d])) {
      why << "non-finite value at hour " << d;
    } else if (env.p_max[d] < -tol) {
      why << "negative p_max at hour " << d;
    } else if (env.e_lo[d] < lo_prev - tol || env.e_hi[d] < hi_prev - tol) {
      why << "decreasing cumulative energy at hour " << d;
    } else if (env.e_lo[d] > env.e_hi[d] + tol) {
      why << "e_lo above e_hi at hour " << d;
    } else if (env.e_hi[d] - hi_prev > env.p_max[d] * env.delta_t + tol ||
               env.e_lo[d] - lo_prev > env.p_max[d] * env.delta_t + tol) {
      why << "envelope step exceeds p_max at hour " << d;
    }
    if (!why.str().empty()) return why.str();
  }
  return {};
}

void repair_envelope(FleetEnvelope& env) {
  double hi_run = 0.0;
  double lo_run = 0.0;
  for (std::size_t d = 0; d < env.hours(); ++d) {
    hi_run = std::max(hi_run, std::max(env.e_hi[d], 0.0));
    env.e_hi[d] = hi_run;
    lo_run = std::max(lo_run, std::max(env.e_lo[d], 0.0));
    env.e_lo[d] = std::min(lo_run, env.e_hi[d]);
    lo_run = env.e_lo[d];
  }
  for (std::size_t d = 0; d < env.hours(); ++d) {
    const double need = std::max(env.fast_power(d), env.slow_power(d));
    env.p_max[d] = std::max({env.p_max[d], need, 0.0});
  }
}

AggregationResult aggregate_sessions(std::span<const ChargingSession> sessions,
                                     UnixSeconds horizon_start, std::size_t hours,
                                     double delta_t) {
  if (!(delta_t > 0.0)) throw UsageError("delta_t must be positive");
  AggregationResult out{FleetEnvelope(hours, delta_t), 0};
  const double step = delta_t * static_cast<double>(kSecondsPerHour);
  const double horizon_end = static_cast<double>(horizon_start) + step * static_cast<double>(hours);

  std::vector<double> fast(hours), slow(hours);
  for (const ChargingSession& s : sessions) {
    const double duration_h =
        static_cast<double>(s.departure - s.arrival) / static_cast<double>(kSecondsPerHour);
    if (s.departure <= s.arrival || !(s.max_power > 0.0) || s.energy_demand < 0.0 ||
        s.energy_demand > s.max_power * duration_h * (1.0 + 1e-9) + 1e-12) {
      throw DataError("infeasible charging session '" + s.vehicle_id + "'");
    }
    const double a = std::max(static_cast<double>(s.arrival), static_cast<double>(horizon_start));
    const double b = std::min(static_cast<double>(s.departure), horizon_end);
    if (b <= a) {
      ++out.skipped;
      continue;
    }
    // Before the horizon the EV is assumed to have charged fast-as-possible;
    // after it, the slow strategy may defer energy up to the EV's max power.
    const double hours_before = (a - static_cast<double>(s.arrival)) / kSecondsPerHour;
    const double hours_after = (static_cast<double>(s.departure) - b) / kSecondsPerHour;
    const double remaining_at_start =
        std::max(0.0, s.energy_demand - s.max_power * hours_before);
    const double required_in_horizon =
        std::max(0.0, remaining_at_start - s.max_power * hours_after);
    const auto first = static_cast<std::size_t>(
        std::floor((a - static_cast<double>(horizon_start)) / step));
    const auto last = std::min(
        hours, static_cast<std::size_t>(std::ceil((b - static_cast<double>(horizon_start)) / step)));

    std::fill(fast.begin(), fast.end(), 0.0);
    std::fill(slow.begin(), slow.end(), 0.0);
    const double per_step = s.max_power * delta_t;
    double remaining = remaining_at_start;
    for (std::size_t d = first; d < last && remaining > 0.0; ++d) {
      fast[d] = std::min(per_step, remaining);
      remaining -= fast[d];
    }
    remaining = required_in_horizon;
    for (std::size_t d = last; d-- > first && remaining > 0.0;) {
      slow[d] = std::min(per_step, remaining);
      remaining -= slow[d];
    }
    double cum_fast = 0.0, cum_slow = 0.0;
    for (std::size_t d = 0; d < hours; ++d) {
      cum_fast += fast[d];
      cum_slow += slow[d];
      out.envelope.e_hi[d] += cum_fast;
      out.envelope.e_lo[d] += cum_slow;
      if (d >= first && d < last) out.envelope.p_max[d] += s.max_power;
    }
  }
  return out;
}

LoadTrace charging_response_from(const FleetEnvelope& env, std::size_t first,
                                 double initial_energy, std::span<const double> power_cap,
                                 std::optional<std::span<const double>> redispatch_cap) {
  const std::size_t n = env.hours();
  if (power_cap.size() != n) throw UsageError("power_cap length differs from envelope");
  if (redispatch_cap && redispatch_cap->size() != n) {
    throw UsageError("redispatch_cap length differs from envelope");
  }
  LoadTrace trace;
  trace.power.assign(n, 0.0);
  trace.energy.assign(n, initial_energy);
  double energy = initial_energy;
  for (std::size_t d = first; d < n; ++d) {
    double p = std::min((env.e_hi[d] - energy) / env.delta_t, env.p_max[d]);
    p = std::min(p, std::max(power_cap[d], 0.0));
    if (redispatch_cap) {
      double rc = (*redispatch_cap)[d];
      if (rc < 0.0) {
        rc = 0.0;
        ++trace.clamped_redispatch_caps;
      }
      p = std::min(p, rc);
    }
    p = std::max(p, 0.0);
    energy += p * env.delta_t;
    trace.power[d] = p;
    trace.energy[d] = energy;
    if (energy < env.e_lo[d] - 1e-9) trace.lower_envelope_breaches.push_back(d);
  }
  trace.unserved_energy = n == 0 ? 0.0 : std::max(0.0, env.e_hi[n - 1] - energy);
  return trace;
}

LoadTrace charging_response(const FleetEnvelope& env, std::span<const double> power_cap,
                            std::optional<std::span<const double>> redispatch_cap) {
  return charging_response_from(env, 0, 0.0, power_cap, redispatch_cap);
}

std::vector<double> baseline_load(const FleetEnvelope& env) {
  const std::vector<double> cap(env.hours(), std::numeric_limits<double>::infinity());
  return charging_response(env, cap).power;
}

}  // namespace clcrc
