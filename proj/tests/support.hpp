#pragma once

// Shared fixtures and independent oracles for the unit tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "billiard/core.hpp"
#include "billiard/dynamics.hpp"
#include "billiard/error.hpp"
#include "billiard/types.hpp"

namespace billiard::testing {

inline SystemParams params_2d(int n = 3, double r = 0.1) {
  SystemParams p;
  p.n_balls = n;
  p.nu = 2;
  p.radius = r;
  return p;
}

// Rank by Gaussian elimination with full pivoting; entries below
// rel * max|entry| count as zero. Independent of the SVD path.
inline int elimination_rank(Mat a, double rel = 1e-9) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0;
  int rank = 0;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  for (Eigen::Index step = 0; step < std::min(rows, cols); ++step) {
    Eigen::Index pr = step, pc = step;
    double best = 0.0;
    for (Eigen::Index r = step; r < rows; ++r) {
      for (Eigen::Index c = step; c < cols; ++c) {
        if (std::abs(a(r, c)) > best) {
          best = std::abs(a(r, c));
          pr = r;
          pc = c;
        }
      }
    }
    if (best <= rel * scale) break;
    a.row(step).swap(a.row(pr));
    a.col(step).swap(a.col(pc));
    for (Eigen::Index r = step + 1; r < rows; ++r) {
      const double f = a(r, step) / a(step, step);
      a.row(r) -= f * a.row(step);
    }
    ++rank;
  }
  return rank;
}

// Random matrix of exact rank k as a sum of k outer products.
inline Mat random_rank_matrix(int rows, int cols, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m = Mat::Zero(rows, cols);
  for (int t = 0; t < k; ++t) {
    Vec u(rows), v(cols);
    for (auto& x : u) x = g(rng);
    for (auto& x : v) x = g(rng);
    m += u * v.transpose();
  }
  return m;
}

// Two balls at contact distance along x, moving head-on with unit kinetic norm.
inline PhasePoint head_on_pair(double radius, double gap) {
  PhasePoint x;
  x.q.resize(2, 2);
  x.v.resize(2, 2);
  const double c = std::sqrt(0.5);
  x.q << 0.5 - radius - 0.5 * gap, 0.5, 0.5 + radius + 0.5 * gap, 0.5;
  x.v << c, 0.0, -c, 0.0;
  return x;
}

inline std::vector<Pair> worked_example_pairs() { return {Pair{0, 1}, Pair{0, 2}, Pair{1, 2}}; }

// First seed at or after `start` whose forward flow begins with `pairs`.
struct Realization {
  std::uint64_t seed = 0;
  PhasePoint point;
  TrajectorySegment segment;
};

inline std::optional<Realization> realize(const SystemParams& params, const std::vector<Pair>& pairs,
                                          std::uint64_t start, int max_tries = 20000) {
  for (int k = 0; k < max_tries; ++k) {
    const std::uint64_t seed = start + static_cast<std::uint64_t>(k);
    PhasePoint x = sample_phase_point(params, seed);
    try {
      TrajectorySegment seg = advance_flow(params, x, StopRule::after_events(pairs.size()));
      if (seg.pairs() == pairs) return Realization{seed, x, seg};
    } catch (const SingularEvent&) {
    }
  }
  return std::nullopt;
}

}  // namespace billiard::testing
