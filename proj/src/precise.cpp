#include "billiard/precise.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "billiard/core.hpp"
#include "billiard/error.hpp"

namespace billiard::precise {

namespace {

namespace mp = boost::multiprecision;
using Real = mp::number<mp::cpp_bin_float<kDigits>, mp::et_off>;

struct State {
  int n = 0;
  int nu = 0;
  std::vector<Real> q, v;  // row-major: ball i, coordinate c at i*nu + c

  Real& qi(int i, int c) { return q[i * nu + c]; }
  Real& vi(int i, int c) { return v[i * nu + c]; }
};

State lift(const PhasePoint& x) {
  State s;
  s.n = x.n_balls();
  s.nu = x.nu();
  for (int i = 0; i < s.n; ++i) {
    for (int c = 0; c < s.nu; ++c) {
      s.q.emplace_back(x.q(i, c));
      s.v.emplace_back(x.v(i, c));
    }
  }
  return s;
}

PhasePoint lower(const State& s) {
  PhasePoint x;
  x.q.resize(s.n, s.nu);
  x.v.resize(s.n, s.nu);
  for (int i = 0; i < s.n; ++i) {
    for (int c = 0; c < s.nu; ++c) {
      x.q(i, c) = wrap_unit(static_cast<double>(s.q[i * s.nu + c]));
      x.v(i, c) = static_cast<double>(s.v[i * s.nu + c]);
    }
  }
  return x;
}

Real wrap(const Real& x) { return x - floor(x); }

void advance(State& s, const Real& t) {
  for (std::size_t k = 0; k < s.q.size(); ++k) s.q[k] = wrap(s.q[k] + t * s.v[k]);
}

struct Candidate {
  Real t;
  Pair pair;
  std::vector<Real> dq, dv;
};

struct Search {
  std::optional<Candidate> first, second;
  std::optional<Real> window;
};

Search search(const State& s, const Real& contact2) {
  Search out;
  const int nu = s.nu;
  int images = 1;
  for (int c = 0; c < nu; ++c) images *= 3;
  std::vector<Real> base(nu), dv(nu), dq(nu);
  for (int i = 0; i < s.n; ++i) {
    for (int j = i + 1; j < s.n; ++j) {
      Real a = 0;
      for (int c = 0; c < nu; ++c) {
        Real d = s.q[i * nu + c] - s.q[j * nu + c];
        base[c] = d - floor(d + Real(0.5));
        dv[c] = s.v[i * nu + c] - s.v[j * nu + c];
        a += dv[c] * dv[c];
      }
      if (a == 0) continue;
      const Real speed = sqrt(a);
      const Real own = 1 / speed;
      if (!out.window || own < *out.window) out.window = own;
      for (int code = 0; code < images; ++code) {
        int rest = code;
        Real b = 0, qq = 0;
        for (int c = 0; c < nu; ++c) {
          dq[c] = base[c] + (rest % 3 - 1);
          rest /= 3;
          b += dq[c] * dv[c];
          qq += dq[c] * dq[c];
        }
        if (b >= 0) continue;
        const Real cc = qq - contact2;
        const Real disc = b * b - a * cc;
        if (disc < 0) continue;
        const Real t = cc <= 0 ? Real(0) : cc / (sqrt(disc) - b);
        if (t * speed > 1) continue;
        Candidate cand{t, Pair{i, j}, dq, dv};
        if (!out.first || cand.t < out.first->t) {
          out.second = std::move(out.first);
          out.first = std::move(cand);
        } else if (!out.second || cand.t < out.second->t) {
          out.second = std::move(cand);
        }
      }
    }
  }
  return out;
}

Vec to_vec(const std::vector<Real>& x) {
  Vec out(static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) out[static_cast<Eigen::Index>(k)] = static_cast<double>(x[k]);
  return out;
}

struct Run {
  TrajectorySegment seg;
  State final;
  Real horizon;
};

Run run(const SystemParams& params, State s, const PhasePoint& initial, std::optional<std::size_t> max_events,
        const Real& limit) {
  params.validate();
  const Real contact2 = Real(4) * Real(params.radius) * Real(params.radius);
  Run out;
  out.seg.initial = initial;
  Real elapsed = 0;
  while (true) {
    if (max_events && out.seg.events.size() >= *max_events) break;
    if (elapsed >= limit) break;
    const Search found = search(s, contact2);
    const Real remaining = limit - elapsed;
    if (found.first && (!found.window || found.first->t <= *found.window) && found.first->t <= remaining) {
      const Candidate& cand = *found.first;
      std::vector<Real> n(s.nu);
      Real norm2 = 0;
      for (int c = 0; c < s.nu; ++c) {
        n[c] = cand.dq[c] + cand.t * cand.dv[c];
        norm2 += n[c] * n[c];
      }
      const Real norm = sqrt(norm2);
      Real vn = 0;
      for (int c = 0; c < s.nu; ++c) {
        n[c] /= norm;
        vn += cand.dv[c] * n[c];
      }
      CollisionEvent e;
      e.time = static_cast<double>(elapsed + cand.t);
      e.pair = cand.pair;
      e.normal = to_vec(n);
      e.v_rel_pre = to_vec(cand.dv);
      std::vector<Real> post(s.nu);
      for (int c = 0; c < s.nu; ++c) post[c] = cand.dv[c] - 2 * vn * n[c];
      e.v_rel_post = to_vec(post);
      if (found.second && found.second->t - cand.t < Real(params.tol.coincidence_eps)) {
        e.kind = EventKind::multiple;
        throw SingularEvent(EventKind::multiple, {e}, e.time);
      }
      if (abs(vn) < Real(params.tol.tangency_eps)) {
        e.kind = EventKind::tangential;
        throw SingularEvent(EventKind::tangential, {e}, e.time);
      }
      advance(s, cand.t);
      const auto [i, j] = cand.pair;
      for (int c = 0; c < s.nu; ++c) {
        s.vi(i, c) -= vn * n[c];
        s.vi(j, c) += vn * n[c];
      }
      elapsed += cand.t;
      out.seg.events.push_back(std::move(e));
      out.seg.after_event.push_back(lower(s));
      continue;
    }
    Real step = remaining;
    if (found.window && *found.window < step) step = *found.window;
    advance(s, step);
    elapsed = step == remaining ? limit : elapsed + step;
  }
  out.horizon = elapsed;
  out.seg.horizon = static_cast<double>(elapsed);
  out.seg.final = lower(s);
  out.final = std::move(s);
  return out;
}

}  // namespace

TrajectorySegment advance_flow(const SystemParams& params, const PhasePoint& x, const StopRule& stop) {
  const Real limit = stop.time ? Real(*stop.time) : Real(params.time_cap);
  return run(params, lift(x), x, stop.events, limit).seg;
}

RoundTrip reversal_round_trip(const SystemParams& params, const PhasePoint& x, std::size_t n_events) {
  const Run fwd = run(params, lift(x), x, n_events, Real(params.time_cap));
  State back = fwd.final;
  for (Real& u : back.v) u = -u;
  const Run rev = run(params, back, lower(back), std::nullopt, fwd.horizon);

  RoundTrip out;
  out.events = fwd.seg.events.size();
  out.horizon = static_cast<double>(fwd.horizon);
  const PhasePoint end = lower(rev.final);
  for (int i = 0; i < x.n_balls(); ++i) {
    out.position_error =
        std::max(out.position_error, minimal_image(end.q.row(i).transpose(), x.q.row(i).transpose()).norm());
  }
  out.velocity_error = (end.v + x.v).cwiseAbs().maxCoeff();
  return out;
}

Mat velocity_jacobian(const SystemParams& params, const PhasePoint& x, const StopRule& stop, const Mat& directions,
                      double step, const std::vector<Pair>& expected) {
  const Real limit = stop.time ? Real(*stop.time) : Real(params.time_cap);
  const Real h(step);
  auto probe = [&](Eigen::Index col, int sign) {
    State s = lift(x);
    for (std::size_t k = 0; k < s.q.size(); ++k) {
      s.q[k] = wrap(s.q[k] + sign * h * Real(directions(static_cast<Eigen::Index>(k), col)));
    }
    Run r;
    try {
      r = run(params, s, x, stop.events, limit);
    } catch (const SingularEvent& e) {
      throw FragileSegment(std::string("fd probe hit a singular event: ") + e.what());
    }
    if (r.seg.pairs() != expected) throw FragileSegment("fd probe changed the symbolic collision sequence");
    return r.final.v;
  };
  Mat jac(directions.rows(), directions.cols());
  for (Eigen::Index col = 0; col < directions.cols(); ++col) {
    const std::vector<Real> plus = probe(col, 1);
    const std::vector<Real> minus = probe(col, -1);
    for (std::size_t k = 0; k < plus.size(); ++k) {
      jac(static_cast<Eigen::Index>(k), col) = static_cast<double>((plus[k] - minus[k]) / (2 * h));
    }
  }
  return jac;
}

}  // namespace billiard::precise
