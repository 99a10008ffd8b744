#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "billiard/dynamics.hpp"
#include "billiard/types.hpp"

namespace billiard {

// Linear system in the unknowns (dq, alpha): dq in R^{nu N} is the initial
// position perturbation (ball i, coordinate c at column i*nu + c), alpha in
// R^n holds one advance per collision. Rows: the nu centre-of-mass rows
// sum_i dq_i = 0, then nu rows per collision k:
//
//   R_k(dq^{(k-1)}) - alpha_k (v_rel_pre)_k = 0,
//
// where dq^{(k)} = dq^{(k-1)} + alpha_k (v^+ - v^-) on the two participants of
// collision k. The transport is substituted, so row block k references
// alpha_1..alpha_k only.
struct NeutralitySystem {
  int n_balls = 0;
  int nu = 0;
  std::vector<Pair> pairs;
  std::vector<Vec> v_rel_pre;
  std::vector<Vec> v_rel_post;
  Mat matrix;

  std::size_t n_events() const noexcept { return pairs.size(); }
  Eigen::Index dq_col(int ball, int c) const noexcept { return static_cast<Eigen::Index>(ball) * nu + c; }
  Eigen::Index alpha_col(std::size_t k) const noexcept {
    return static_cast<Eigen::Index>(n_balls) * nu + static_cast<Eigen::Index>(k);
  }
  Eigen::Index n_unknowns() const noexcept { return alpha_col(n_events()); }
};

// Uses the first `prefix_len` events (all when absent). Throws SingularSegment
// if any used event is tangential or multiple.
NeutralitySystem build_neutrality_system(const TrajectorySegment& seg,
                                         std::optional<std::size_t> prefix_len = std::nullopt);

struct NeutralSpaceResult {
  int dimension = 0;
  Mat dq_basis;        // nu N x dimension
  Mat alpha_basis;     // n x dimension
  Mat advance_matrix;  // dimension x n: row b holds the advances of basis vector b
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  Vec singular_values;  // descending
};

NeutralSpaceResult neutral_space(const NeutralitySystem& sys, const Tolerances& tol);
NeutralSpaceResult neutral_space(const TrajectorySegment& seg, const Tolerances& tol,
                                 std::optional<std::size_t> prefix_len = std::nullopt);

// Neutral-space dimension after every prefix 0..n of the segment.
std::vector<int> dimension_profile(const TrajectorySegment& seg, const Tolerances& tol);

// True iff the neutral space is one-dimensional. Throws NotConnected when the
// collision graph of the segment is disconnected.
bool is_sufficient(const TrajectorySegment& seg, const Tolerances& tol);

struct AdvanceCertificate {
  Mat advance_matrix;
  int rank = 0;
  double sigma_min = 0.0;
};

// Verifies that alpha is injective on the neutral space. Throws
// EmbeddingViolation when the advance matrix is rank deficient.
AdvanceCertificate advance_vectors(const NeutralSpaceResult& result, const Tolerances& tol);

// alpha_m (v_rel_pre)_m = sum_{k<m} alpha_k Gamma_k with
// Gamma_k = pre[k] (v_rel_pre)_k + post[k] (v_rel_post)_k.
struct EliminatedRelation {
  std::size_t target = 0;
  std::vector<double> pre;
  std::vector<double> post;
  std::vector<Vec> gamma;
  Vec target_velocity;

  // |alpha_m v_m - sum_k alpha_k Gamma_k| for an advance vector of length >= m+1.
  double residual(const Eigen::Ref<const Vec>& alpha) const;
};

// Eliminates the displacements along the spanning forest of earlier
// essential edges. `m` is the zero-based event index. Throws NoRelation when
// event m is essential.
EliminatedRelation cpf_eliminate(const NeutralitySystem& sys, std::size_t m);

// Least-squares coefficients C (N x prefix_len) with
//   dq_i observed after `observe_after` events = sum_k C(i,k) alpha_k g_k,
// g_k being the relative velocity of pair k in that observed state, fitted
// over the neutral space of the prefix.
struct DisplacementCoefficients {
  Mat coefficients;
  double residual = 0.0;
};

DisplacementCoefficients displacement_coefficients(const TrajectorySegment& seg, std::size_t prefix_len,
                                                   std::size_t observe_after, const Tolerances& tol);

// Central-difference Jacobian (nu N x d) of the final velocities with respect
// to initial position perturbations along an orthonormal basis of the
// centre-of-mass-free subspace. Probes run in extended precision (see
// precise.hpp), so roundoff does not limit the step. Throws FragileSegment if
// any probe changes the symbolic sequence or hits a singular event.
Mat fd_velocity_jacobian(const SystemParams& params, const PhasePoint& x, const StopRule& stop, double step);

struct FdKernelResult {
  int dimension = 0;
  Mat basis;  // nu N x dimension, in dq coordinates
  Vec singular_values;
};

// Kernel of the finite-difference Jacobian. The step starts at tol.fd_step and
// shrinks by 10^3 until successive Jacobians agree to 1e-15 relative; probes
// that change the sequence also shrink it. Throws FragileSegment when the base
// segment lacks margin (an event with |<dv,n>| <= 10 tangency_eps or two
// events closer than 10 coincidence_eps) or when no step converges. The kernel
// is cut at 1e-12 relative to the largest singular value, not at rank_rel.
FdKernelResult fd_jacobian_kernel(const SystemParams& params, const PhasePoint& x, const StopRule& stop);

}  // namespace billiard
