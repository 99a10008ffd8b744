#include "billiard/dynamics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "billiard/core.hpp"
#include "billiard/error.hpp"
#include "billiard/simd/kernels.hpp"

namespace billiard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
  double t = kInf;
  Pair pair;
  Vec dq;  // q_first - q_second for this image, at the start of the step
  Vec dv;  // v_first - v_second
};

struct Search {
  std::optional<Candidate> first;
  std::optional<Candidate> second;
  // Horizon over which the 3^nu image search is exhaustive for every pair:
  // a contact needing |t dv| >= 1 would have to come from a farther image.
  double window = kInf;
};

int image_count(int nu) {
  int m = 1;
  for (int c = 0; c < nu; ++c) m *= 3;
  return m;
}

// Shift in {-1,0,1}^nu encoded in base 3.
void image_shift(int code, int nu, double* out) {
  for (int c = 0; c < nu; ++c) {
    out[c] = static_cast<double>(code % 3 - 1);
    code /= 3;
  }
}

Search search_events(const SystemParams& params, const PhasePoint& s, std::optional<Pair> only) {
  const int n = s.n_balls();
  const int nu = s.nu();
  const int images = image_count(nu);

  Search out;
  std::vector<Pair> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Pair p{i, j};
      const double speed = (s.v.row(i) - s.v.row(j)).norm();
      if (speed > 0.0) out.window = std::min(out.window, 1.0 / speed);
      if (!only || *only == p) pairs.push_back(p);
    }
  }
  if (pairs.empty()) return out;

  const std::size_t count = pairs.size() * images;
  std::vector<double> dq(count * nu), dv(count * nu), t(count);
  std::vector<double> shift(nu);
  std::vector<Vec> base(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    base[p] = minimal_image(s.q.row(j).transpose(), s.q.row(i).transpose());
    for (int code = 0; code < images; ++code) {
      const std::size_t k = p * images + code;
      image_shift(code, nu, shift.data());
      for (int c = 0; c < nu; ++c) {
        dq[c * count + k] = base[p][c] + shift[c];
        dv[c * count + k] = s.v(i, c) - s.v(j, c);
      }
    }
  }
  simd::ImpactInputs in{nu, count, dq, dv, 4.0 * params.radius * params.radius};
  simd::active().impact_times(in, t);

  for (std::size_t k = 0; k < count; ++k) {
    if (!std::isfinite(t[k])) continue;
    const Pair p = pairs[k / images];
    Vec rel_v(nu), rel_q(nu);
    for (int c = 0; c < nu; ++c) {
      rel_q[c] = dq[c * count + k];
      rel_v[c] = dv[c * count + k];
    }
    if (t[k] * rel_v.norm() > 1.0) continue;  // beyond this pair's exhaustive horizon
    Candidate cand{t[k], p, rel_q, rel_v};
    if (!out.first || cand.t < out.first->t) {
      out.second = std::move(out.first);
      out.first = std::move(cand);
    } else if (!out.second || cand.t < out.second->t) {
      out.second = std::move(cand);
    }
  }
  return out;
}

void advance_positions(PhasePoint& x, double t) {
  for (Eigen::Index i = 0; i < x.q.rows(); ++i) {
    for (Eigen::Index c = 0; c < x.q.cols(); ++c) x.q(i, c) = wrap_unit(x.q(i, c) + t * x.v(i, c));
  }
}

CollisionEvent make_event(const Candidate& cand, double elapsed, const Tolerances& tol) {
  CollisionEvent e;
  e.time = elapsed + cand.t;
  e.pair = cand.pair;
  const Vec contact = cand.dq + cand.t * cand.dv;
  e.normal = contact / contact.norm();
  e.v_rel_pre = cand.dv;
  const double vn = cand.dv.dot(e.normal);
  e.v_rel_post = cand.dv - 2.0 * vn * e.normal;
  e.kind = std::abs(vn) < tol.tangency_eps ? EventKind::tangential : EventKind::regular;
  return e;
}

// Moves the state to the contact instant, reflects the pair and places the
// two centres exactly 2r apart along the normal.
void resolve(PhasePoint& s, const Candidate& cand, const CollisionEvent& e, double radius) {
  advance_positions(s, cand.t);
  const auto [i, j] = cand.pair;
  const Vec contact = cand.dq + cand.t * cand.dv;
  const Vec mid = s.q.row(j).transpose() + 0.5 * contact;
  for (int c = 0; c < s.nu(); ++c) {
    s.q(i, c) = wrap_unit(mid[c] + radius * e.normal[c]);
    s.q(j, c) = wrap_unit(mid[c] - radius * e.normal[c]);
  }
  const double vn = e.v_rel_pre.dot(e.normal);
  s.v.row(i) -= vn * e.normal.transpose();
  s.v.row(j) += vn * e.normal.transpose();
}

enum class Mode { regular, phantom };

TrajectorySegment run_flow(const SystemParams& params, const PhasePoint& x, const StopRule& stop, Mode mode,
                           std::span<const Pair> prescription) {
  params.validate();
  TrajectorySegment seg;
  seg.initial = x;
  PhasePoint s = x;
  double elapsed = 0.0;
  const double limit = stop.time ? *stop.time : params.time_cap;
  std::size_t consumed = 0;

  while (true) {
    if (stop.events && seg.events.size() >= *stop.events) break;
    if (mode == Mode::phantom && !prescription.empty() && consumed == prescription.size()) break;
    if (elapsed >= limit) break;

    std::optional<Pair> only;
    bool frozen = false;  // phantom run with nothing left that may collide
    if (mode == Mode::phantom) {
      if (prescription.empty()) {
        frozen = true;
      } else {
        only = prescription[consumed];
      }
    }
    const Search found = search_events(params, s, only);
    const double remaining = limit - elapsed;

    if (!frozen && found.first && found.first->t <= found.window && found.first->t <= remaining) {
      const Candidate& cand = *found.first;
      CollisionEvent e = make_event(cand, elapsed, params.tol);
      if (found.second && found.second->t - cand.t < params.tol.coincidence_eps) {
        CollisionEvent other = make_event(*found.second, elapsed, params.tol);
        e.kind = EventKind::multiple;
        other.kind = EventKind::multiple;
        throw SingularEvent(EventKind::multiple, {e, other}, e.time);
      }
      if (e.kind == EventKind::tangential) throw SingularEvent(EventKind::tangential, {e}, e.time);
      resolve(s, cand, e, params.radius);
      elapsed = e.time;
      seg.events.push_back(std::move(e));
      seg.after_event.push_back(s);
      ++consumed;
      continue;
    }

    const double step = std::min(found.window, remaining);
    advance_positions(s, step);
    elapsed = step == remaining ? limit : elapsed + step;
  }

  if (mode == Mode::phantom && consumed < prescription.size()) {
    throw PrescriptionStalled(consumed, "phantom_flow: prescribed collision " + std::to_string(consumed + 1) +
                                            " did not occur within the time cap");
  }
  seg.horizon = elapsed;
  seg.final = s;
  return seg;
}

}  // namespace

PhasePoint free_flight(const PhasePoint& x, double t) {
  PhasePoint out = x;
  advance_positions(out, t);
  return out;
}

std::optional<Impact> time_of_impact(const SystemParams& params, const PhasePoint& state, Pair pair) {
  if (pair.first == pair.second || pair.first < 0 || pair.second >= state.n_balls()) {
    throw InvalidPair("time_of_impact: invalid pair");
  }
  pair = Pair::make(pair.first, pair.second);
  const double speed = (state.v.row(pair.first) - state.v.row(pair.second)).norm();
  if (speed == 0.0) return std::nullopt;
  const double own_window = 1.0 / speed;

  PhasePoint s = state;
  double elapsed = 0.0;
  while (elapsed < params.time_cap) {
    const Search found = search_events(params, s, pair);
    if (found.first) {
      const Candidate& c = *found.first;
      const Vec contact = c.dq + c.t * c.dv;
      return Impact{elapsed + c.t, contact / contact.norm()};
    }
    advance_positions(s, own_window);
    elapsed += own_window;
  }
  return std::nullopt;
}

PhasePoint apply_collision(const SystemParams& params, const PhasePoint& state, Pair pair, const Vec& normal) {
  pair = Pair::make(pair.first, pair.second);
  const auto [i, j] = pair;
  const Vec sep = minimal_image(state.q.row(j).transpose(), state.q.row(i).transpose());
  if ((sep - 2.0 * params.radius * normal).norm() > 1e-9) {
    throw NotAtContact("apply_collision: balls " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                       " are not in contact along the given normal");
  }
  PhasePoint out = state;
  const double vn = (state.v.row(i) - state.v.row(j)).dot(normal.transpose());
  out.v.row(i) -= vn * normal.transpose();
  out.v.row(j) += vn * normal.transpose();
  return out;
}

TrajectorySegment advance_flow(const SystemParams& params, const PhasePoint& x, const StopRule& stop) {
  return run_flow(params, x, stop, Mode::regular, {});
}

TrajectorySegment phantom_flow(const SystemParams& params, const PhasePoint& x, std::span<const Pair> prescribed) {
  return run_flow(params, x, StopRule{}, Mode::phantom, prescribed);
}

PastReflection backward_first_reflection(const SystemParams& params, const PhasePoint& x) {
  params.validate();
  PhasePoint s = x;
  s.v = -x.v;
  double elapsed = 0.0;
  while (elapsed < params.time_cap) {
    const Search found = search_events(params, s, std::nullopt);
    const double remaining = params.time_cap - elapsed;
    if (found.first && found.first->t <= found.window && found.first->t <= remaining) {
      const CollisionEvent back = make_event(*found.first, elapsed, params.tol);
      PastReflection out;
      out.tau = -back.time;
      out.event.time = out.tau;
      out.event.pair = back.pair;
      out.event.normal = back.normal;
      out.event.v_rel_pre = -back.v_rel_post;
      out.event.v_rel_post = -back.v_rel_pre;
      out.event.kind = back.kind;
      if (found.second && found.second->t - found.first->t < params.tol.coincidence_eps) {
        out.event.kind = EventKind::multiple;
      }
      return out;
    }
    const double step = std::min(found.window, remaining);
    advance_positions(s, step);
    elapsed = step == remaining ? params.time_cap : elapsed + step;
  }
  throw NoPastReflection("backward_first_reflection: no reflection within time cap " +
                         std::to_string(params.time_cap));
}

}  // namespace billiard
