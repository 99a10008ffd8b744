#pragma once

// Extended-precision instance of the regular event-driven flow. The hard-ball
// flow is chaotic: a perturbation grows by a factor of several per collision,
// so round trips over ~100 events are out of reach in double precision. This
// engine carries the state in 150-digit binary floating point and follows the
// same event rules (3^nu image search, global earliest impact, exhaustive
// window stepping, equal-mass reflection).

#include <cstddef>
#include <vector>

#include "billiard/dynamics.hpp"
#include "billiard/types.hpp"

namespace billiard::precise {

inline constexpr unsigned kDigits = 150;

// Same contract as billiard::advance_flow; times, normals and states are
// rounded to double on output.
TrajectorySegment advance_flow(const SystemParams& params, const PhasePoint& x, const StopRule& stop);

struct RoundTrip {
  std::size_t events = 0;
  double horizon = 0.0;
  double position_error = 0.0;  // max torus distance to the initial positions
  double velocity_error = 0.0;  // max |v_back + v_initial| entry
};

// Runs n_events forward, negates all velocities of the (unrounded) final
// state and flows back for the same elapsed time.
RoundTrip reversal_round_trip(const SystemParams& params, const PhasePoint& x, std::size_t n_events);

// Central differences of the final velocities (flattened ball-major, nu N
// entries) along each column of `directions`, with the perturbed runs and the
// differences carried out in extended precision before rounding. Throws
// FragileSegment if a probe's symbolic sequence differs from `expected` or a
// probe hits a singular event.
Mat velocity_jacobian(const SystemParams& params, const PhasePoint& x, const StopRule& stop, const Mat& directions,
                      double step, const std::vector<Pair>& expected);

}  // namespace billiard::precise
