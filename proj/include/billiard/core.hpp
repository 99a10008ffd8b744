#pragma once

#include <cstdint>
#include <optional>

#include "billiard/types.hpp"

namespace billiard {

// Representative of b - a (mod 1) with every coordinate in [-1/2, 1/2).
// An exact tie at +-1/2 resolves to -1/2.
Vec minimal_image(const TorusPoint& a, const TorusPoint& b);
Vec minimal_image(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b);

// Torus distance between ball centres i and j.
double torus_distance(const PhasePoint& x, int i, int j);

struct KernelResult {
  int dimension = 0;
  // Orthonormal kernel basis, one column per vector.
  Mat basis;
  // Smallest singular value at or above the cutoff; 0 when every singular
  // value is below it.
  double sigma_min_nonkernel = 0.0;
  double sigma_max = 0.0;
  // All singular values, descending. Length min(rows, cols).
  Vec singular_values;
};

// Null space by SVD with relative cutoff tol.rank_rel * sigma_max. A matrix
// with no rows, or identically zero, has the full column space as kernel.
// Throws InvalidMatrix on non-finite entries or zero columns.
KernelResult kernel(const Mat& m, const Tolerances& tol);

// Orthonormal basis (columns) of {dq in R^{nu N} : sum_i dq_i = 0}, with the
// unknown layout dq[i * nu + c].
Mat center_of_mass_free_basis(int n_balls, int nu);

// Uniform positions with all pairwise torus distances >= 2r (whole
// configurations are redrawn until one fits), then Gaussian velocities
// projected to zero momentum and unit kinetic norm. Deterministic in `seed`.
// Throws PackingError after 10^6 rejected configurations.
PhasePoint sample_phase_point(const SystemParams& params, std::uint64_t seed);

// Zero total momentum, unit sum |v_i|^2, and no overlaps, to the stated slack.
bool satisfies_invariants(const PhasePoint& x, const SystemParams& params, double momentum_slack = 1e-12,
                          double overlap_slack = 1e-12);

// Smallest pairwise torus distance between ball centres.
double min_pair_distance(const PhasePoint& x);

// Per-item seed: splitmix64 finalizer applied to master ^ splitmix64(index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace billiard
