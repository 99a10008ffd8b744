#include "billiard/core.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "billiard/error.hpp"
#include "billiard/simd/kernels.hpp"

namespace billiard {

void Tolerances::validate() const {
  if (!(rank_rel > 0.0 && rank_rel < 1.0)) throw InvalidParams("tolerances.rank_rel must lie in (0, 1)");
  if (!(tangency_eps > 0.0)) throw InvalidParams("tolerances.tangency_eps must be positive");
  if (!(coincidence_eps > 0.0)) throw InvalidParams("tolerances.coincidence_eps must be positive");
  if (!(bisection_res > 0.0)) throw InvalidParams("tolerances.bisection_res must be positive");
  if (!(fd_step > 0.0)) throw InvalidParams("tolerances.fd_step must be positive");
}

void SystemParams::validate() const {
  if (n_balls < 2) throw InvalidParams("N must be at least 2");
  if (nu < 2) throw InvalidParams("nu must be at least 2");
  if (!(radius > 0.0 && radius < 0.25)) throw InvalidParams("r must lie in (0, 1/4)");
  if (!(time_cap > 0.0)) throw InvalidParams("time_cap must be positive");
  tol.validate();
}

double wrap_unit(double x) noexcept {
  double w = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.
  if (w >= 1.0) w = 0.0;
  return w;
}

TorusPoint TorusPoint::normalized(const Vec& raw) {
  TorusPoint p{raw};
  for (Eigen::Index c = 0; c < p.coords.size(); ++c) p.coords[c] = wrap_unit(p.coords[c]);
  return p;
}

bool TorusPoint::is_normalized() const {
  for (Eigen::Index c = 0; c < coords.size(); ++c) {
    if (!(coords[c] >= 0.0 && coords[c] < 1.0)) return false;
  }
  return true;
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::regular:
      return "regular";
    case EventKind::tangential:
      return "tangential";
    case EventKind::multiple:
      return "multiple";
  }
  return "unknown";
}

std::vector<Pair> TrajectorySegment::pairs() const {
  std::vector<Pair> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.pair);
  return out;
}

Vec minimal_image(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
  Vec d = b - a;
  for (Eigen::Index c = 0; c < d.size(); ++c) d[c] -= std::floor(d[c] + 0.5);
  return d;
}

Vec minimal_image(const TorusPoint& a, const TorusPoint& b) { return minimal_image(a.coords, b.coords); }

double torus_distance(const PhasePoint& x, int i, int j) {
  return minimal_image(x.q.row(i).transpose(), x.q.row(j).transpose()).norm();
}

double min_pair_distance(const PhasePoint& x) {
  const int n = x.n_balls();
  const int nu = x.nu();
  const std::size_t pairs = static_cast<std::size_t>(n) * (n - 1) / 2;
  if (pairs == 0) return std::numeric_limits<double>::infinity();
  std::vector<double> soa(pairs * nu);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      const Vec d = minimal_image(x.q.row(i).transpose(), x.q.row(j).transpose());
      for (int c = 0; c < nu; ++c) soa[c * pairs + k] = d[c];
    }
  }
  std::vector<double> d2(pairs);
  simd::active().squared_norms(nu, pairs, soa, d2);
  double best = d2[0];
  for (double v : d2) best = std::min(best, v);
  return std::sqrt(best);
}

KernelResult kernel(const Mat& m, const Tolerances& tol) {
  if (m.cols() < 1) throw InvalidMatrix("kernel: matrix has no columns");
  if (!m.allFinite()) throw InvalidMatrix("kernel: matrix has non-finite entries");

  KernelResult out;
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0) {
    out.dimension = static_cast<int>(cols);
    out.basis = Mat::Identity(cols, cols);
    return out;
  }

  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  out.sigma_max = out.singular_values.size() > 0 ? out.singular_values[0] : 0.0;
  const double cutoff = tol.rank_rel * out.sigma_max;

  Eigen::Index rank = 0;
  if (out.sigma_max > 0.0) {
    for (Eigen::Index k = 0; k < out.singular_values.size(); ++k) {
      if (out.singular_values[k] >= cutoff) {
        ++rank;
        out.sigma_min_nonkernel = out.singular_values[k];
      }
    }
  }
  out.dimension = static_cast<int>(cols - rank);
  out.basis = svd.matrixV().rightCols(cols - rank);
  return out;
}

Mat center_of_mass_free_basis(int n_balls, int nu) {
  Mat com = Mat::Zero(nu, static_cast<Eigen::Index>(nu) * n_balls);
  for (int i = 0; i < n_balls; ++i) {
    for (int c = 0; c < nu; ++c) com(c, i * nu + c) = 1.0;
  }
  return kernel(com, Tolerances{}).basis;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(master ^ mix(index));
}

PhasePoint sample_phase_point(const SystemParams& params, std::uint64_t seed) {
  params.validate();
  const int n = params.n_balls;
  const int nu = params.nu;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  PhasePoint x;
  x.q.resize(n, nu);
  x.v.resize(n, nu);
  const double contact = 2.0 * params.radius;
  constexpr long kMaxAttempts = 1'000'000;
  bool placed = false;
  for (long attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < nu; ++c) x.q(i, c) = wrap_unit(uniform(rng));
    }
    placed = min_pair_distance(x) >= contact;
  }
  if (!placed) {
    throw PackingError("sample_phase_point: no admissible configuration after 10^6 attempts (N=" +
                       std::to_string(n) + ", r=" + std::to_string(params.radius) + ")");
  }

  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < nu; ++c) x.v(i, c) = gauss(rng);
  }
  x.v.rowwise() -= x.v.colwise().mean();
  x.v /= x.v.norm();
  return x;
}

bool satisfies_invariants(const PhasePoint& x, const SystemParams& params, double momentum_slack,
                          double overlap_slack) {
  if (x.n_balls() != params.n_balls || x.nu() != params.nu) return false;
  if (x.v.rows() != x.q.rows() || x.v.cols() != x.q.cols()) return false;
  for (int i = 0; i < x.n_balls(); ++i) {
    if (!TorusPoint{x.q.row(i).transpose()}.is_normalized()) return false;
  }
  if (x.total_momentum().norm() > momentum_slack) return false;
  if (std::abs(x.kinetic() - 1.0) > momentum_slack) return false;
  return min_pair_distance(x) >= 2.0 * params.radius - overlap_slack;
}

SingularEvent::SingularEvent(EventKind kind, std::vector<CollisionEvent> events, double elapsed)
    : Error("singular event (" + std::string(to_string(kind)) + ") at t=" + std::to_string(elapsed)),
      kind_(kind),
      events_(std::move(events)),
      elapsed_(elapsed) {}

PrescriptionStalled::PrescriptionStalled(std::size_t consumed, const std::string& what)
    : Error(what), consumed_(consumed) {}

NotConnected::NotConnected(int components)
    : Error("collision graph is disconnected (" + std::to_string(components) + " components)"),
      components_(components) {}

}  // namespace billiard
