#pragma once

// Virtual-battery representation of an EV fleet: three hourly series that
// bound every feasible aggregate charging schedule, plus the fleet's greedy
// (fast-as-possible) response to power ceilings.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clcrc/calendar.hpp"

namespace clcrc {

/// One charging session. Energies in MWh, powers in MW.
struct ChargingSession {
  std::string vehicle_id;
  UnixSeconds arrival = 0;
  UnixSeconds departure = 0;
  double energy_demand = 0.0;
  double max_power = 0.0;

  friend bool operator==(const ChargingSession&, const ChargingSession&) = default;
};

/// Hourly virtual-battery envelope of a fleet.
///
/// e_hi is the cumulative energy when every EV charges as fast as possible
/// from arrival, e_lo the cumulative energy when every EV defers charging as
/// long as its departure allows, and p_max the connected charging power.
/// Index d refers to the end of hour d.
struct FleetEnvelope {
  std::vector<double> e_lo;
  std::vector<double> e_hi;
  std::vector<double> p_max;
  double delta_t = 1.0;

  FleetEnvelope() = default;
  explicit FleetEnvelope(std::size_t hours, double dt = 1.0)
      : e_lo(hours, 0.0), e_hi(hours, 0.0), p_max(hours, 0.0), delta_t(dt) {}

  std::size_t hours() const { return e_hi.size(); }

  /// Uncontrolled (fast-as-possible) charging power of hour d.
  double fast_power(std::size_t d) const;
  /// Charging power of hour d under the slow-as-possible strategy.
  double slow_power(std::size_t d) const;
  double peak_fast_power() const;
  double peak_slow_power() const;

  FleetEnvelope& operator+=(const FleetEnvelope& other);
  friend bool operator==(const FleetEnvelope&, const FleetEnvelope&) = default;
};

FleetEnvelope operator+(FleetEnvelope a, const FleetEnvelope& b);

/// Returns an empty string when `env` satisfies every envelope invariant
/// within `tol`, otherwise a description of the first violation.
std::string check_envelope(const FleetEnvelope& env, double tol = 1e-9);

/// Projects a perturbed envelope back onto the invariant set: clamps to
/// nonnegative values, enforces monotone cumulative series by running
/// maximum, clamps e_lo to e_hi and lifts p_max to cover both envelope steps.
void repair_envelope(FleetEnvelope& env);

/// Hourly load of the fleet and the resulting cumulative energy.
struct LoadTrace {
  std::vector<double> power;
  std::vector<double> energy;
  double unserved_energy = 0.0;
  /// Hours in which the cumulative energy fell below e_lo.
  std::vector<std::size_t> lower_envelope_breaches;
  /// Redispatch ceilings that were negative and clamped to zero.
  std::size_t clamped_redispatch_caps = 0;
};

struct AggregationResult {
  FleetEnvelope envelope;
  /// Sessions entirely outside the horizon.
  std::size_t skipped = 0;
};

/// Builds the fleet envelope over `hours` hourly steps starting at
/// `horizon_start`. Sessions crossing the horizon start enter with the
/// energy they would have charged fast-as-possible before it; sessions
/// crossing the horizon end only require, on the slow envelope, the energy
/// that cannot be deferred past it. A session whose demand cannot be
/// delivered at its max power throws DataError naming it.
AggregationResult aggregate_sessions(std::span<const ChargingSession> sessions,
                                     UnixSeconds horizon_start, std::size_t hours,
                                     double delta_t = 1.0);

/// Evaluates the fleet's greedy response
///   P_d = min((e_hi[d] - E[d-1]) / dt, p_max[d], power_cap[d], redispatch_cap[d])
/// with E[-1] = 0. Negative redispatch caps are clamped to zero and counted.
LoadTrace charging_response(const FleetEnvelope& env, std::span<const double> power_cap,
                            std::optional<std::span<const double>> redispatch_cap = std::nullopt);

/// Same recursion restricted to hours [first, hours), starting from
/// cumulative energy `initial_energy` at the end of hour first-1. Entries of
/// the returned trace before `first` are left at zero power and
/// `initial_energy`.
LoadTrace charging_response_from(const FleetEnvelope& env, std::size_t first,
                                 double initial_energy, std::span<const double> power_cap,
                                 std::optional<std::span<const double>> redispatch_cap =
                                     std::nullopt);

/// Uncapped response: the fast-as-possible baseline load.
std::vector<double> baseline_load(const FleetEnvelope& env);

}  // namespace clcrc
