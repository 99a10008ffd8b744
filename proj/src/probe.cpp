#include "billiard/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "billiard/core.hpp"
#include "billiard/error.hpp"
#include "billiard/neutral.hpp"

namespace billiard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string show(double u) {
  std::ostringstream os;
  os.precision(17);
  os << u;
  return os.str();
}

Mat random_zero_sum(int n, int nu, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(n, nu);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < nu; ++c) m(i, c) = g(rng);
  }
  m.rowwise() -= m.colwise().mean();
  return m / m.norm();
}

// ---- K ----------------------------------------------------------------

// A past reflection is identified by its pair and by the periodic image in
// which the contact happened; the same pair may collide through another image
// once the nearer contact is missed.
struct PastKey {
  Pair pair;
  std::vector<long> image;
  bool operator==(const PastKey&) const = default;
};

struct PastSample {
  double u = 0.0;
  PastReflection past;
  PastKey key;
};

PastKey past_key(const SystemParams& params, const PhasePoint& x, const PastReflection& past) {
  const auto [i, j] = past.event.pair;
  const Vec unwrapped = 2.0 * params.radius * past.event.normal - past.tau * past.event.v_rel_post;
  const Vec nearest = minimal_image(x.q.row(j).transpose(), x.q.row(i).transpose());
  PastKey k{past.event.pair, {}};
  for (Eigen::Index c = 0; c < unwrapped.size(); ++c) k.image.push_back(std::lround(unwrapped[c] - nearest[c]));
  return k;
}

PastSample past_at(const SystemParams& params, const CurveSpec& curve, double u) {
  try {
    const PhasePoint x = curve.at(u);
    const PastReflection past = backward_first_reflection(params, x);
    return PastSample{u, past, past_key(params, x, past)};
  } catch (const NoPastReflection& e) {
    throw NoPastReflection(std::string(e.what()) + " (curve parameter u=" + show(u) + ")");
  }
}

CrossingReport refine_K(const SystemParams& params, const CurveSpec& curve, const PastSample& left,
                        const PastSample& right) {
  // The more recent of the two reflections is the one that appears or
  // disappears inside the bracket: its side is where the pair still collides.
  const bool left_collides = std::abs(left.past.tau) < std::abs(right.past.tau);
  const PastKey target = left_collides ? left.key : right.key;
  PastSample hit = left_collides ? left : right;
  double a = hit.u;
  double b = left_collides ? right.u : left.u;
  while (true) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const PastSample s = past_at(params, curve, m);
    if (s.key == target) {
      a = m;
      hit = s;
    } else {
      b = m;
    }
  }

  CrossingReport r;
  r.kind = CrossingKind::K;
  r.u_star = hit.u;
  r.residual = std::abs(hit.past.event.normal_speed());
  r.witness = hit.past.event;
  r.bracket_pair_stable = hit.past.event.kind == EventKind::tangential;
  return r;
}

// ---- J ----------------------------------------------------------------

struct JSample {
  bool ok = false;
  std::vector<Pair> pairs;
  int dimension = 0;
  Eigen::Index columns = 0;
  Vec singular_values;
  double sigma_max = 0.0;
};

JSample j_sample(const SystemParams& params, const CurveSpec& curve, const StopRule& stop, double u) {
  JSample s;
  TrajectorySegment seg;
  try {
    seg = advance_flow(params, curve.at(u), stop);
  } catch (const SingularEvent&) {
    return s;
  }
  const NeutralitySystem sys = build_neutrality_system(seg);
  const KernelResult k = kernel(sys.matrix, params.tol);
  s.ok = true;
  s.pairs = seg.pairs();
  s.dimension = k.dimension;
  s.columns = sys.matrix.cols();
  s.singular_values = k.singular_values;
  s.sigma_max = k.sigma_max;
  return s;
}

// The singular value that vanishes when the rank drops below generic_rank.
double j_signal(const JSample& s, Eigen::Index generic_rank) {
  if (generic_rank < 1 || generic_rank > s.singular_values.size()) return kInf;
  return s.singular_values[generic_rank - 1];
}

// ---- worked example -----------------------------------------------------

const std::vector<Pair>& worked_pairs() {
  static const std::vector<Pair> pairs{Pair{0, 1}, Pair{0, 2}, Pair{1, 2}};
  return pairs;
}

std::optional<TrajectorySegment> worked_segment(const SystemParams& params, const PhasePoint& x) {
  try {
    TrajectorySegment seg = advance_flow(params, x, StopRule::after_events(3));
    if (seg.pairs() != worked_pairs()) return std::nullopt;
    return seg;
  } catch (const SingularEvent&) {
    return std::nullopt;
  }
}

std::optional<double> det_at(const SystemParams& params, const PhasePoint& x) {
  const auto seg = worked_segment(params, x);
  if (!seg) return std::nullopt;
  return parallelity_determinant(*seg);
}

CurveSpec line_through(const PhasePoint& base, const Mat& dq, const Mat& dv, double lo, double hi,
                       std::size_t samples) {
  CurveSpec c;
  c.base = base;
  c.dq = dq;
  c.dv = dv;
  c.u_min = lo;
  c.u_max = hi;
  c.samples = samples;
  return c;
}

std::optional<PhasePoint> realize_worked(const SystemParams& params, std::uint64_t seed, std::size_t budget) {
  for (std::size_t k = 0; k < budget; ++k) {
    PhasePoint x = sample_phase_point(params, derive_seed(seed, k));
    if (worked_segment(params, x)) return x;
  }
  return std::nullopt;
}

// Newton steps on the determinant along its numerical gradient.
std::optional<PhasePoint> project_to_locus(const SystemParams& params, PhasePoint x, std::mt19937_64& rng) {
  const int n = x.n_balls();
  const int nu = x.nu();
  constexpr int kDirections = 8;
  constexpr double kH = 1e-7;
  for (int it = 0; it < 12; ++it) {
    const auto d0 = det_at(params, x);
    if (!d0) return std::nullopt;
    if (std::abs(*d0) < 1e-14) return x;
    Mat gq = Mat::Zero(n, nu), gv = Mat::Zero(n, nu);
    double g2 = 0.0;
    for (int j = 0; j < kDirections; ++j) {
      const Mat eq = random_zero_sum(n, nu, rng);
      const Mat ev = random_zero_sum(n, nu, rng);
      const CurveSpec line = line_through(x, eq, ev, -kH, kH, 2);
      const auto plus = det_at(params, line.at(kH));
      const auto minus = det_at(params, line.at(-kH));
      if (!plus || !minus) return std::nullopt;
      const double d = (*plus - *minus) / (2.0 * kH);
      gq += d * eq;
      gv += d * ev;
      g2 += d * d;
    }
    if (g2 == 0.0) return std::nullopt;
    // Along w = sum d_j e_j the directional derivative is sum d_j^2.
    const CurveSpec step = line_through(x, gq, gv, -1.0, 1.0, 2);
    x = step.at(-*d0 / g2);
  }
  const auto d = det_at(params, x);
  if (d && std::abs(*d) < 1e-12) return x;
  return std::nullopt;
}

}  // namespace

// ---- curves -------------------------------------------------------------

PhasePoint CurveSpec::at(double u) const {
  PhasePoint x = base;
  for (Eigen::Index i = 0; i < x.q.rows(); ++i) {
    for (Eigen::Index c = 0; c < x.q.cols(); ++c) x.q(i, c) = wrap_unit(base.q(i, c) + u * dq(i, c));
  }
  x.v = base.v + u * dv;
  x.v /= x.v.norm();
  return x;
}

double CurveSpec::grid(std::size_t k) const {
  if (samples < 2) return u_min;
  if (k + 1 == samples) return u_max;
  return u_min + (u_max - u_min) * static_cast<double>(k) / static_cast<double>(samples - 1);
}

void CurveSpec::validate() const {
  if (samples < 2) throw std::invalid_argument("curve needs at least two samples");
  if (!(u_min < u_max)) throw std::invalid_argument("curve range must satisfy u_min < u_max");
  if (dq.rows() != base.q.rows() || dq.cols() != base.q.cols() || dv.rows() != base.v.rows() ||
      dv.cols() != base.v.cols()) {
    throw std::invalid_argument("curve direction does not match the base point");
  }
  if (dq.colwise().sum().norm() > 1e-12 || dv.colwise().sum().norm() > 1e-12) {
    throw std::invalid_argument("curve direction must have zero total displacement and momentum");
  }
}

CurveSpec random_curve(const PhasePoint& base, std::uint64_t seed, double half_width, std::size_t samples) {
  std::mt19937_64 rng(seed);
  const Mat dq = random_zero_sum(base.n_balls(), base.nu(), rng);
  const Mat dv = random_zero_sum(base.n_balls(), base.nu(), rng);
  return line_through(base, dq, dv, -half_width, half_width, samples);
}

CurveSpec admissible(const SystemParams& params, const CurveSpec& curve) {
  curve.validate();
  const double contact = 2.0 * params.radius;
  std::size_t best_start = 0, best_len = 0, start = 0, len = 0;
  for (std::size_t k = 0; k < curve.samples; ++k) {
    if (min_pair_distance(curve.at(curve.grid(k))) >= contact) {
      if (len == 0) start = k;
      ++len;
      if (len > best_len) {
        best_len = len;
        best_start = start;
      }
    } else {
      len = 0;
    }
  }
  if (best_len < 2) throw std::invalid_argument("curve has fewer than two admissible grid points");
  CurveSpec out = curve;
  out.u_min = curve.grid(best_start);
  out.u_max = curve.grid(best_start + best_len - 1);
  out.samples = best_len;
  return out;
}

std::string_view to_string(CrossingKind kind) noexcept { return kind == CrossingKind::J ? "J" : "K"; }

bool CrossingReport::accepted(const Tolerances& tol) const {
  if (kind == CrossingKind::K) return bracket_pair_stable && residual < tol.bisection_res;
  return residual < tol.rank_rel && dim_at > std::max(dim_left, dim_right);
}

// ---- scans ----------------------------------------------------------------

std::vector<CrossingReport> scan_K(const SystemParams& params, const CurveSpec& curve) {
  curve.validate();
  std::vector<PastSample> grid;
  grid.reserve(curve.samples);
  for (std::size_t k = 0; k < curve.samples; ++k) grid.push_back(past_at(params, curve, curve.grid(k)));

  std::vector<CrossingReport> out;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (grid[k].key == grid[k + 1].key) continue;
    out.push_back(refine_K(params, curve, grid[k], grid[k + 1]));
  }
  return out;
}

std::vector<CrossingReport> scan_J(const SystemParams& params, const CurveSpec& curve, const StopRule& stop) {
  curve.validate();
  std::vector<JSample> grid;
  grid.reserve(curve.samples);
  for (std::size_t k = 0; k < curve.samples; ++k) grid.push_back(j_sample(params, curve, stop, curve.grid(k)));

  // Runs of consecutive grid points sharing one symbolic sequence.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t k = 0; k < grid.size();) {
    if (!grid[k].ok) {
      ++k;
      continue;
    }
    std::size_t end = k + 1;
    while (end < grid.size() && grid[end].ok && grid[end].pairs == grid[k].pairs) ++end;
    if (end - k >= 3) runs.emplace_back(k, end);
    k = end;
  }
  if (runs.empty()) {
    throw SequenceUnstable("scan_J: no three consecutive grid points share a symbolic sequence on [" +
                           show(curve.u_min) + ", " + show(curve.u_max) + "]");
  }

  std::vector<CrossingReport> out;
  for (const auto& [begin, end] : runs) {
    const std::vector<Pair>& pairs = grid[begin].pairs;
    int generic = std::numeric_limits<int>::max();
    for (std::size_t k = begin; k < end; ++k) generic = std::min(generic, grid[k].dimension);
    const Eigen::Index rank = grid[begin].columns - generic;

    auto signal = [&](double u) {
      const JSample s = j_sample(params, curve, stop, u);
      if (!s.ok || s.pairs != pairs) return kInf;
      return j_signal(s, rank) / s.sigma_max;
    };

    std::vector<double> sig(end - begin);
    for (std::size_t k = begin; k < end; ++k) sig[k - begin] = j_signal(grid[k], rank) / grid[k].sigma_max;

    for (std::size_t k = begin + 1; k + 1 < end; ++k) {
      const double s = sig[k - begin];
      if (!(s <= sig[k - 1 - begin] && s <= sig[k + 1 - begin])) continue;
      if (s == sig[k - 1 - begin] && s == sig[k + 1 - begin]) continue;  // flat, no dip

      // Golden-section search on [u_{k-1}, u_{k+1}].
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double a = curve.grid(k - 1), b = curve.grid(k + 1);
      double c = b - phi * (b - a), d = a + phi * (b - a);
      double fc = signal(c), fd = signal(d);
      double best_u = curve.grid(k), best_f = s;
      for (int it = 0; it < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a));
           ++it) {
        if (fc < best_f) best_f = fc, best_u = c;
        if (fd < best_f) best_f = fd, best_u = d;
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - phi * (b - a);
          fc = signal(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + phi * (b - a);
          fd = signal(d);
        }
      }
      if (fc < best_f) best_f = fc, best_u = c;
      if (fd < best_f) best_f = fd, best_u = d;

      const JSample at = j_sample(params, curve, stop, best_u);
      if (!at.ok || at.pairs != pairs) continue;
      CrossingReport r;
      r.kind = CrossingKind::J;
      r.u_star = best_u;
      r.sigma_max = at.sigma_max;
      r.sigma_min = j_signal(at, rank);
      r.residual = r.sigma_min / at.sigma_max;
      r.dim_left = grid[k - 1].dimension;
      r.dim_at = at.dimension;
      r.dim_right = grid[k + 1].dimension;
      if (!r.accepted(params.tol)) continue;
      const bool duplicate = std::any_of(out.begin(), out.end(), [&](const CrossingReport& o) {
        return std::abs(o.u_star - r.u_star) <= 1e-9 * std::max(1.0, std::abs(r.u_star));
      });
      if (!duplicate) out.push_back(r);
    }
  }
  return out;
}

// ---- parallelity ------------------------------------------------------------

double parallelity_determinant(const TrajectorySegment& seg) {
  if (seg.events.size() < 2 || seg.events[0].pair != worked_pairs()[0] || seg.events[1].pair != worked_pairs()[1]) {
    throw std::invalid_argument("parallelity_determinant: segment does not start with (1,2);(1,3)");
  }
  if (seg.initial.nu() != 2) throw std::invalid_argument("parallelity_determinant: needs nu = 2");
  const Vec a = seg.events[0].v_rel_post;
  const Vec b = seg.events[1].v_rel_pre + seg.events[1].v_rel_post;
  return a[0] * b[1] - a[1] * b[0];
}

TunedCurve tuned_parallelity_curve(const SystemParams& params, std::uint64_t seed, double half_width,
                                   std::size_t samples) {
  if (params.n_balls != 3 || params.nu != 2) {
    throw std::invalid_argument("tuned_parallelity_curve: the worked example needs N = 3, nu = 2");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> offset(-0.5, 0.5);
  for (std::uint64_t attempt = 0; attempt < 200; ++attempt) {
    const auto start = realize_worked(params, derive_seed(seed, attempt), 20000);
    if (!start) continue;
    const auto on_locus = project_to_locus(params, *start, rng);
    if (!on_locus) continue;

    // Transversal direction with the range shifted off-centre so the root
    // is not at the midpoint.
    const Mat dq = random_zero_sum(3, 2, rng);
    const Mat dv = random_zero_sum(3, 2, rng);
    const double shift = offset(rng);
    for (double w = half_width; w >= half_width * 1e-3; w *= 0.25) {
      CurveSpec curve = line_through(*on_locus, dq, dv, (-1.0 + shift) * w, (1.0 + shift) * w, samples);
      bool stable = min_pair_distance(curve.at(curve.u_min)) >= 2.0 * params.radius;
      std::vector<double> det(samples);
      for (std::size_t k = 0; k < samples && stable; ++k) {
        const auto d = det_at(params, curve.at(curve.grid(k)));
        stable = d.has_value() && min_pair_distance(curve.at(curve.grid(k))) >= 2.0 * params.radius;
        if (stable) det[k] = *d;
      }
      if (!stable) continue;
      if (!(det.front() * det.back() < 0.0)) break;  // not transversal; next attempt

      double a = curve.u_min, b = curve.u_max;
      const double sa = det.front();
      while (true) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        const auto dm = det_at(params, curve.at(m));
        if (!dm) break;
        if ((*dm < 0.0) == (sa < 0.0)) {
          a = m;
        } else {
          b = m;
        }
      }
      return TunedCurve{curve, 0.5 * (a + b)};
    }
  }
  throw SequenceUnrealizable("tuned_parallelity_curve: no curve crossing the parallelity locus was found");
}

// ---- non-coincidence -----------------------------------------------------------

CurveOutcome noncoincidence_curve(const SystemParams& params, const EnsembleSpec& spec, std::size_t index) {
  CurveOutcome out;
  out.curve = index;
  const std::uint64_t seed = derive_seed(spec.master_seed, index);
  std::vector<CrossingReport> crossings;
  CurveSpec curve;
  try {
    const PhasePoint base = sample_phase_point(params, seed);
    curve = admissible(params, random_curve(base, derive_seed(seed, 1), spec.half_width, spec.samples));
    crossings = scan_K(params, curve);
  } catch (const PackingError&) {
    out.skipped = true;
    return out;
  } catch (const NoPastReflection&) {
    out.skipped = true;
    return out;
  } catch (const std::invalid_argument&) {
    out.skipped = true;
    return out;
  }

  for (const CrossingReport& c : crossings) {
    if (!c.accepted(params.tol)) {
      ++out.unstable;
      continue;
    }
    KWitness w;
    w.curve = index;
    w.u_star = c.u_star;
    w.residual = c.residual;
    w.pair = c.witness->pair;
    TrajectorySegment seg;
    try {
      seg = advance_flow(params, curve.at(c.u_star), StopRule::after_events(spec.forward_events));
    } catch (const SingularEvent&) {
      ++out.singular;
      continue;
    }
    const SymbolicSequence seq = SymbolicSequence::from_segment(seg);
    w.connected = collision_graph(params.n_balls, seq, seq.size()).connected();
    if (w.connected) {
      const NeutralSpaceResult ns = neutral_space(seg, params.tol);
      w.dimension = ns.dimension;
      w.sufficient = ns.dimension == 1;
    }
    out.witnesses.push_back(w);
  }
  return out;
}

NoncoincidenceReport summarize_noncoincidence(const EnsembleSpec& spec, std::vector<CurveOutcome> outcomes) {
  std::sort(outcomes.begin(), outcomes.end(),
            [](const CurveOutcome& a, const CurveOutcome& b) { return a.curve < b.curve; });
  NoncoincidenceReport r;
  r.curves = outcomes.size();
  for (const CurveOutcome& o : outcomes) {
    if (o.skipped) ++r.curves_skipped;
    r.unstable += o.unstable;
    r.singular += o.singular;
    for (const KWitness& w : o.witnesses) {
      if (!w.connected) {
        ++r.disconnected;
      } else {
        ++r.accepted;
        if (w.sufficient) {
          ++r.sufficient;
        } else {
          ++r.non_sufficient;
        }
      }
      r.witnesses.push_back(w);
    }
  }
  r.pass = r.sufficient >= 1;
  if (r.accepted < spec.min_accepted) {
    throw NotEnoughSamples("noncoincidence_experiment: " + std::to_string(r.accepted) +
                           " accepted K-points with connected forward graphs, " + std::to_string(spec.min_accepted) +
                           " required");
  }
  return r;
}

NoncoincidenceReport noncoincidence_experiment(const SystemParams& params, const EnsembleSpec& spec) {
  std::vector<CurveOutcome> outcomes;
  for (std::size_t i = 0; i < spec.curves; ++i) outcomes.push_back(noncoincidence_curve(params, spec, i));
  return summarize_noncoincidence(spec, std::move(outcomes));
}

// ---- dimension statistics ----------------------------------------------------------

std::string_view to_string(RealizationMode mode) noexcept {
  return mode == RealizationMode::rejection ? "rejection" : "phantom";
}

DimensionSample dimension_sample(const SystemParams& params, const SymbolicSequence& sequence, std::uint64_t seed,
                                 std::size_t index, RealizationMode start, const DimensionStatsOptions& options) {
  params.validate();
  sequence.validate(params.n_balls);
  const std::size_t len = sequence.size();
  const std::uint64_t item = derive_seed(seed, index);
  std::uint64_t stream = 0;
  auto next_point = [&]() { return sample_phase_point(params, derive_seed(item, stream++)); };

  DimensionSample out;
  out.mode = start;
  TrajectorySegment seg;
  bool found = false;
  if (len == 0) {
    seg.initial = next_point();
    seg.final = seg.initial;
    found = true;
  } else if (start == RealizationMode::rejection) {
    for (std::size_t k = 0; k < options.rejection_budget && !found; ++k) {
      try {
        seg = advance_flow(params, next_point(), StopRule::after_events(len));
        found = seg.pairs() == sequence.entries;
      } catch (const SingularEvent&) {
      }
    }
    if (!found) out.mode = RealizationMode::phantom;
  }
  for (std::size_t k = 0; k < options.phantom_budget && !found; ++k) {
    try {
      seg = phantom_flow(params, next_point(), sequence.entries);
      found = true;
    } catch (const PrescriptionStalled&) {
    } catch (const SingularEvent&) {
    }
  }
  if (!found) {
    throw SequenceUnrealizable("dimension_statistics: " + sequence.to_string() + " not realized within " +
                               std::to_string(options.phantom_budget) + " phantom attempts (sample " +
                               std::to_string(index) + ")");
  }
  out.dims = dimension_profile(seg, params.tol);
  return out;
}

DimensionStats summarize_dimension_stats(const SystemParams& params, const SymbolicSequence& sequence,
                                         std::uint64_t seed, const std::vector<DimensionSample>& samples,
                                         const DimensionStatsOptions& options) {
  if (samples.empty()) throw NotEnoughSamples("dimension_statistics: no samples requested");
  const std::size_t len = sequence.size();
  DimensionStats out;
  out.sequence = sequence;
  out.samples = samples.size();
  out.histogram.resize(len + 1);
  for (const DimensionSample& s : samples) {
    if (s.mode == RealizationMode::phantom) out.mode = RealizationMode::phantom;
    for (std::size_t m = 0; m <= len && m < s.dims.size(); ++m) ++out.histogram[m][s.dims[m]];
  }
  for (const auto& h : out.histogram) out.delta.push_back(h.empty() ? -1 : h.begin()->first);
  for (std::size_t m = 1; m < out.delta.size(); ++m) {
    if (out.delta[m] > out.delta[m - 1]) out.monotone = false;
  }

  if (options.j_curves > 0 && params.n_balls == 3 && params.nu == 2 && sequence.entries == worked_pairs()) {
    for (std::size_t i = 0; i < options.j_curves; ++i) {
      try {
        const TunedCurve t = tuned_parallelity_curve(params, derive_seed(seed ^ 0x4a4a4a4aULL, i), 1e-3, 17);
        for (const CrossingReport& c : scan_J(params, t.curve, StopRule::after_events(len))) {
          ++out.j_points;
          out.delta_J = out.delta_J ? std::min(*out.delta_J, c.dim_at) : c.dim_at;
        }
      } catch (const SequenceUnrealizable&) {
      } catch (const SequenceUnstable&) {
      }
    }
  }
  return out;
}

DimensionStats dimension_statistics(const SystemParams& params, const SymbolicSequence& sequence,
                                    std::size_t samples, std::uint64_t seed, const DimensionStatsOptions& options) {
  std::vector<DimensionSample> all;
  all.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const RealizationMode start = i == 0 ? RealizationMode::rejection : all.front().mode;
    all.push_back(dimension_sample(params, sequence, seed, i, start, options));
  }
  return summarize_dimension_stats(params, sequence, seed, all, options);
}

}  // namespace billiard
