#include "billiard/neutral.hpp"

#include <cmath>
#include <string>

#include "billiard/core.hpp"
#include "billiard/error.hpp"
#include "billiard/precise.hpp"
#include "billiard/symbolic.hpp"

namespace billiard {

namespace {

// +1 if ball is the first participant of pair, -1 if the second, else 0.
int side(int ball, const Pair& p) {
  if (ball == p.first) return 1;
  if (ball == p.second) return -1;
  return 0;
}

constexpr int kFdLevels = 14;
constexpr double kFdShrink = 1e-3;
constexpr double kFdAgreement = 1e-15;
// Kernel cut for the converged Jacobian, relative to its largest singular
// value. Its spectrum spans the expansion of the segment (up to ~1e6 after six
// collisions), so the neutral-system rank_rel would discard genuine directions.
constexpr double kFdRankRel = 1e-12;

// Per-ball velocity jump of the first participant: (v_rel_post - v_rel_pre)/2
// for equal masses; the second participant receives the negative.
Vec jump(const NeutralitySystem& sys, std::size_t k) { return 0.5 * (sys.v_rel_post[k] - sys.v_rel_pre[k]); }

}  // namespace

NeutralitySystem build_neutrality_system(const TrajectorySegment& seg, std::optional<std::size_t> prefix_len) {
  const std::size_t n = prefix_len.value_or(seg.events.size());
  if (n > seg.events.size()) throw std::invalid_argument("build_neutrality_system: prefix longer than segment");

  NeutralitySystem sys;
  sys.n_balls = seg.initial.n_balls();
  sys.nu = seg.initial.nu();
  for (std::size_t k = 0; k < n; ++k) {
    const CollisionEvent& e = seg.events[k];
    if (e.kind != EventKind::regular) {
      throw SingularSegment("build_neutrality_system: event " + std::to_string(k + 1) + " is " +
                            std::string(to_string(e.kind)));
    }
    sys.pairs.push_back(e.pair);
    sys.v_rel_pre.push_back(e.v_rel_pre);
    sys.v_rel_post.push_back(e.v_rel_post);
  }

  const int nu = sys.nu;
  sys.matrix = Mat::Zero(static_cast<Eigen::Index>(nu) * (n + 1), sys.n_unknowns());
  for (int i = 0; i < sys.n_balls; ++i) {
    for (int c = 0; c < nu; ++c) sys.matrix(c, sys.dq_col(i, c)) = 1.0;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Pair& p = sys.pairs[k];
    const Eigen::Index row = static_cast<Eigen::Index>(nu) * (k + 1);
    for (int c = 0; c < nu; ++c) {
      sys.matrix(row + c, sys.dq_col(p.first, c)) += 1.0;
      sys.matrix(row + c, sys.dq_col(p.second, c)) -= 1.0;
      sys.matrix(row + c, sys.alpha_col(k)) = -sys.v_rel_pre[k][c];
    }
    for (std::size_t l = 0; l < k; ++l) {
      const int f = side(p.first, sys.pairs[l]) - side(p.second, sys.pairs[l]);
      if (f == 0) continue;
      const Vec w = jump(sys, l);
      for (int c = 0; c < nu; ++c) sys.matrix(row + c, sys.alpha_col(l)) += f * w[c];
    }
  }
  return sys;
}

NeutralSpaceResult neutral_space(const NeutralitySystem& sys, const Tolerances& tol) {
  const KernelResult k = kernel(sys.matrix, tol);
  NeutralSpaceResult out;
  out.dimension = k.dimension;
  const Eigen::Index n_dq = static_cast<Eigen::Index>(sys.n_balls) * sys.nu;
  out.dq_basis = k.basis.topRows(n_dq);
  out.alpha_basis = k.basis.bottomRows(static_cast<Eigen::Index>(sys.n_events()));
  out.advance_matrix = out.alpha_basis.transpose();
  out.sigma_min = k.sigma_min_nonkernel;
  out.sigma_max = k.sigma_max;
  out.singular_values = k.singular_values;
  return out;
}

NeutralSpaceResult neutral_space(const TrajectorySegment& seg, const Tolerances& tol,
                                 std::optional<std::size_t> prefix_len) {
  return neutral_space(build_neutrality_system(seg, prefix_len), tol);
}

std::vector<int> dimension_profile(const TrajectorySegment& seg, const Tolerances& tol) {
  std::vector<int> dims;
  for (std::size_t m = 0; m <= seg.events.size(); ++m) dims.push_back(neutral_space(seg, tol, m).dimension);
  return dims;
}

bool is_sufficient(const TrajectorySegment& seg, const Tolerances& tol) {
  const SymbolicSequence seq = SymbolicSequence::from_segment(seg);
  const int components = collision_graph(seg.initial.n_balls(), seq, seq.size()).components();
  if (components != 1) throw NotConnected(components);
  return neutral_space(seg, tol).dimension == 1;
}

AdvanceCertificate advance_vectors(const NeutralSpaceResult& result, const Tolerances& tol) {
  AdvanceCertificate cert;
  cert.advance_matrix = result.advance_matrix;
  if (result.dimension == 0) return cert;
  if (result.advance_matrix.cols() == 0) {
    throw EmbeddingViolation("advance_vectors: no collisions, advances cannot separate the neutral space");
  }
  // Rank of the advances over the neutral space: the transpose has one
  // column per basis vector, so its kernel is the non-injective part.
  const KernelResult k = kernel(result.advance_matrix.transpose(), tol);
  cert.rank = result.dimension - k.dimension;
  cert.sigma_min = k.sigma_min_nonkernel;
  if (cert.rank < result.dimension) {
    throw EmbeddingViolation("advance_vectors: advance matrix has rank " + std::to_string(cert.rank) +
                             " on a " + std::to_string(result.dimension) + "-dimensional neutral space");
  }
  return cert;
}

double EliminatedRelation::residual(const Eigen::Ref<const Vec>& alpha) const {
  Vec r = alpha[static_cast<Eigen::Index>(target)] * target_velocity;
  for (std::size_t k = 0; k < gamma.size(); ++k) r -= alpha[static_cast<Eigen::Index>(k)] * gamma[k];
  return r.norm();
}

EliminatedRelation cpf_eliminate(const NeutralitySystem& sys, std::size_t m) {
  if (m >= sys.n_events()) throw std::invalid_argument("cpf_eliminate: event index out of range");
  const Pair& target = sys.pairs[m];
  SymbolicSequence seq{sys.pairs, std::nullopt};
  const auto path = forest_path(sys.n_balls, seq, m, target.first, target.second);
  if (!path) {
    throw NoRelation("cpf_eliminate: collision " + std::to_string(m + 1) +
                     " is essential and carries no connecting relation");
  }

  EliminatedRelation rel;
  rel.target = m;
  rel.pre.assign(m, 0.0);
  rel.post.assign(m, 0.0);
  rel.target_velocity = sys.v_rel_pre[m];

  // Adds f * (per-ball jump of event l) = f/2 (post_l - pre_l).
  auto add_jump = [&](std::size_t l, double f) {
    rel.post[l] += 0.5 * f;
    rel.pre[l] -= 0.5 * f;
  };

  // Displacement difference at time 0 along the path; each edge k contributes
  // R_k(dq^{(0)}) = alpha_k pre_k - sum_{l<k} alpha_l (side diff) jump_l.
  for (const PathStep& step : *path) {
    const Pair& p = sys.pairs[step.edge];
    rel.pre[step.edge] += step.direction;
    for (std::size_t l = 0; l < step.edge; ++l) {
      const int f = side(p.first, sys.pairs[l]) - side(p.second, sys.pairs[l]);
      if (f != 0) add_jump(l, -static_cast<double>(step.direction * f));
    }
  }
  // Transport of the target pair's displacement from time 0 to collision m.
  for (std::size_t l = 0; l < m; ++l) {
    const int f = side(target.first, sys.pairs[l]) - side(target.second, sys.pairs[l]);
    if (f != 0) add_jump(l, static_cast<double>(f));
  }

  for (std::size_t k = 0; k < m; ++k) rel.gamma.push_back(rel.pre[k] * sys.v_rel_pre[k] + rel.post[k] * sys.v_rel_post[k]);
  return rel;
}

DisplacementCoefficients displacement_coefficients(const TrajectorySegment& seg, std::size_t prefix_len,
                                                   std::size_t observe_after, const Tolerances& tol) {
  if (observe_after > prefix_len || prefix_len > seg.events.size()) {
    throw std::invalid_argument("displacement_coefficients: need observe_after <= prefix_len <= events");
  }
  const NeutralitySystem sys = build_neutrality_system(seg, prefix_len);
  const NeutralSpaceResult ns = neutral_space(sys, tol);
  const int n = sys.n_balls;
  const int nu = sys.nu;
  const int dim = ns.dimension;
  const PhasePoint& observed = observe_after == 0 ? seg.initial : seg.after_event[observe_after - 1];

  std::vector<Vec> g(prefix_len);
  for (std::size_t k = 0; k < prefix_len; ++k) {
    const Pair& p = sys.pairs[k];
    g[k] = (observed.v.row(p.first) - observed.v.row(p.second)).transpose();
  }

  // Observed displacement of every ball for every basis vector.
  Mat dq_obs = ns.dq_basis;  // nu N x dim
  for (std::size_t l = 0; l < observe_after; ++l) {
    const Vec w = jump(sys, l);
    for (int b = 0; b < dim; ++b) {
      const double a = ns.alpha_basis(static_cast<Eigen::Index>(l), b);
      for (int c = 0; c < nu; ++c) {
        dq_obs(sys.dq_col(sys.pairs[l].first, c), b) += a * w[c];
        dq_obs(sys.dq_col(sys.pairs[l].second, c), b) -= a * w[c];
      }
    }
  }

  DisplacementCoefficients out;
  out.coefficients = Mat::Zero(n, static_cast<Eigen::Index>(prefix_len));
  for (int i = 0; i < n; ++i) {
    Mat a(static_cast<Eigen::Index>(dim) * nu, static_cast<Eigen::Index>(prefix_len));
    Vec rhs(static_cast<Eigen::Index>(dim) * nu);
    for (int b = 0; b < dim; ++b) {
      for (int c = 0; c < nu; ++c) {
        const Eigen::Index row = static_cast<Eigen::Index>(b) * nu + c;
        rhs[row] = dq_obs(sys.dq_col(i, c), b);
        for (std::size_t k = 0; k < prefix_len; ++k) {
          a(row, static_cast<Eigen::Index>(k)) = ns.alpha_basis(static_cast<Eigen::Index>(k), b) * g[k][c];
        }
      }
    }
    const Vec x = a.completeOrthogonalDecomposition().solve(rhs);
    out.coefficients.row(i) = x.transpose();
    out.residual = std::max(out.residual, (a * x - rhs).norm());
  }
  return out;
}

Mat fd_velocity_jacobian(const SystemParams& params, const PhasePoint& x, const StopRule& stop, double step) {
  const TrajectorySegment base = advance_flow(params, x, stop);
  const Mat z = center_of_mass_free_basis(x.n_balls(), x.nu());
  return precise::velocity_jacobian(params, x, stop, z, step, base.pairs());
}

FdKernelResult fd_jacobian_kernel(const SystemParams& params, const PhasePoint& x, const StopRule& stop) {
  const Tolerances& tol = params.tol;
  const TrajectorySegment base = advance_flow(params, x, stop);
  for (std::size_t k = 0; k < base.events.size(); ++k) {
    if (std::abs(base.events[k].normal_speed()) <= 10.0 * tol.tangency_eps) {
      throw FragileSegment("fd_jacobian_kernel: event " + std::to_string(k + 1) + " is nearly tangential");
    }
    if (k > 0 && base.events[k].time - base.events[k - 1].time <= 10.0 * tol.coincidence_eps) {
      throw FragileSegment("fd_jacobian_kernel: events " + std::to_string(k) + " and " + std::to_string(k + 1) +
                           " nearly coincide");
    }
  }

  // Shrink the step until two successive Jacobians agree; the extended
  // precision probes leave truncation as the only error source.
  std::optional<Mat> prev, jac;
  double h = tol.fd_step;
  for (int level = 0; level < kFdLevels && !jac; ++level, h *= kFdShrink) {
    Mat j;
    try {
      j = fd_velocity_jacobian(params, x, stop, h);
    } catch (const FragileSegment&) {
      prev.reset();
      continue;
    }
    if (prev && (j - *prev).cwiseAbs().maxCoeff() <= kFdAgreement * std::max(1.0, j.cwiseAbs().maxCoeff())) jac = j;
    prev = std::move(j);
  }
  if (!jac) throw FragileSegment("fd_jacobian_kernel: central differences did not converge");
  Tolerances cut = tol;
  cut.rank_rel = kFdRankRel;
  const KernelResult k = kernel(*jac, cut);
  FdKernelResult out;
  out.dimension = k.dimension;
  out.basis = center_of_mass_free_basis(x.n_balls(), x.nu()) * k.basis;
  out.singular_values = k.singular_values;
  return out;
}

}  // namespace billiard
