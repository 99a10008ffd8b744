#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <string_view>
#include <vector>

namespace billiard {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Tolerances {
  double rank_rel = 1e-8;
  double tangency_eps = 1e-10;
  double coincidence_eps = 1e-9;
  double bisection_res = 1e-12;
  double fd_step = 1e-6;

  // Throws InvalidParams unless every entry is positive and rank_rel < 1.
  void validate() const;
};

struct SystemParams {
  int n_balls = 3;
  int nu = 2;
  double radius = 0.1;
  Tolerances tol;
  // Upper bound on simulated time for searches that might never terminate
  // (backward reflection, phantom prescriptions, count-stopped flow).
  double time_cap = 1e3;

  int config_dim() const noexcept { return nu * (n_balls - 1); }
  void validate() const;
};

// A point of the unit torus R^nu / Z^nu.
struct TorusPoint {
  Vec coords;

  static TorusPoint normalized(const Vec& raw);
  bool is_normalized() const;
};

// Wraps every coordinate into [0, 1).
double wrap_unit(double x) noexcept;

// Unordered ball pair stored with first < second. Indices are zero-based;
// the textual forms used by the CLI are one-based.
struct Pair {
  int first = 0;
  int second = 1;

  static Pair make(int a, int b) noexcept { return a < b ? Pair{a, b} : Pair{b, a}; }
  friend auto operator<=>(const Pair&, const Pair&) = default;
};

// Positions (rows wrapped into [0,1)) and velocities of N balls; one row per ball.
struct PhasePoint {
  Mat q;
  Mat v;

  int n_balls() const noexcept { return static_cast<int>(q.rows()); }
  int nu() const noexcept { return static_cast<int>(q.cols()); }

  Vec total_momentum() const { return v.colwise().sum().transpose(); }
  double kinetic() const { return v.squaredNorm(); }
};

enum class EventKind : std::uint8_t { regular, tangential, multiple };

std::string_view to_string(EventKind kind) noexcept;

struct CollisionEvent {
  double time = 0.0;
  Pair pair;
  // Unit vector from ball `second` toward ball `first` at contact.
  Vec normal;
  // v_first - v_second just before and just after the reflection.
  Vec v_rel_pre;
  Vec v_rel_post;
  EventKind kind = EventKind::regular;

  // <v_rel_pre, normal>; negative for an approaching pair.
  double normal_speed() const { return v_rel_pre.dot(normal); }
};

struct TrajectorySegment {
  PhasePoint initial;
  double horizon = 0.0;
  std::vector<CollisionEvent> events;
  PhasePoint final;
  // State immediately after each event, aligned with `events`.
  std::vector<PhasePoint> after_event;

  std::vector<Pair> pairs() const;
};

}  // namespace billiard
