#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "billiard/types.hpp"

namespace billiard {

// Either a time horizon or a collision count. Count-stopped runs end right
// after the last requested event, or at params.time_cap if it never comes.
struct StopRule {
  std::optional<double> time;
  std::optional<std::size_t> events;

  static StopRule at_time(double t) { return StopRule{t, std::nullopt}; }
  static StopRule after_events(std::size_t n) { return StopRule{std::nullopt, n}; }
};

struct Impact {
  double t = 0.0;
  Vec normal;  // from `second` toward `first` at contact
};

// Earliest t >= 0 at which the pair reaches distance 2r, searched over the
// 3^nu nearest periodic images and repeated window by window up to
// params.time_cap. Empty if the pair never meets.
std::optional<Impact> time_of_impact(const SystemParams& params, const PhasePoint& state, Pair pair);

// Equal-mass reflection of the pair's relative velocity across the contact
// plane. Throws NotAtContact unless q_first - q_second = 2r * normal to 1e-9.
PhasePoint apply_collision(const SystemParams& params, const PhasePoint& state, Pair pair, const Vec& normal);

// Positions advanced by t (wrapped); velocities unchanged.
PhasePoint free_flight(const PhasePoint& x, double t);

// Regular billiard flow. Throws SingularEvent (tangential or multiple) rather
// than crossing a singular event.
TrajectorySegment advance_flow(const SystemParams& params, const PhasePoint& x, const StopRule& stop);

struct PastReflection {
  double tau = 0.0;  // negative: time of the reflection relative to x
  // Reported in forward-time convention (v_rel_pre is the velocity before the
  // reflection in forward time); `time` equals `tau`.
  CollisionEvent event;
};

// First reflection in the past of x. Singular reflections are classified in
// the result, not raised. Throws NoPastReflection after params.time_cap.
PastReflection backward_first_reflection(const SystemParams& params, const PhasePoint& x);

// Flow in which only the next unconsumed prescribed pair may collide; every
// other pair passes through. Ends once the prescription is consumed (or at
// params.time_cap for an empty prescription). Throws PrescriptionStalled if
// the next prescribed pair does not meet within the time cap.
TrajectorySegment phantom_flow(const SystemParams& params, const PhasePoint& x, std::span<const Pair> prescribed);

}  // namespace billiard
