#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "billiard/dynamics.hpp"
#include "billiard/symbolic.hpp"
#include "billiard/types.hpp"

namespace billiard {

// x(u): positions base.q + u dq (wrapped), velocities base.v + u dv rescaled
// to unit kinetic norm. dq and dv must have zero column sums.
struct CurveSpec {
  PhasePoint base;
  Mat dq;
  Mat dv;
  double u_min = -1.0;
  double u_max = 1.0;
  std::size_t samples = 64;

  PhasePoint at(double u) const;
  double grid(std::size_t k) const;
  void validate() const;
};

// Random unit-norm direction with zero column sums, for both blocks.
CurveSpec random_curve(const PhasePoint& base, std::uint64_t seed, double half_width, std::size_t samples);

// Restricts the range to the longest run of grid points without overlap.
// Throws std::invalid_argument if fewer than two grid points are admissible.
CurveSpec admissible(const SystemParams& params, const CurveSpec& curve);

enum class CrossingKind { J, K };
std::string_view to_string(CrossingKind kind) noexcept;

struct CrossingReport {
  CrossingKind kind = CrossingKind::K;
  double u_star = 0.0;
  double residual = 0.0;
  // K: the tangential past reflection at u_star (forward-time convention).
  std::optional<CollisionEvent> witness;
  // J: smallest non-generic singular value at u_star and the neutral
  // dimensions on the left flank, at u_star and on the right flank.
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  int dim_left = -1;
  int dim_at = -1;
  int dim_right = -1;
  // K: true when the refined bracket ends on a tangency of a single pair;
  // false when the first past reflection switched between two regular
  // events (an ordering swap). Always true for J.
  bool bracket_pair_stable = true;

  bool accepted(const Tolerances& tol) const;
};

// Past-singularity crossings along the curve. Throws NoPastReflection (naming
// u) if a grid point has no reflection within the time cap.
std::vector<CrossingReport> scan_K(const SystemParams& params, const CurveSpec& curve);

// Non-sufficiency crossings along the curve. The grid is split into runs
// with a common symbolic sequence; runs of at least three points are scanned.
// Throws SequenceUnstable when no such run exists.
std::vector<CrossingReport> scan_J(const SystemParams& params, const CurveSpec& curve, const StopRule& stop);

// det[g_0^+, g_1^- + g_1^+] for a segment whose first three events realize
// (1,2);(1,3);(2,3), g_k^{-/+} being the relative velocity of event k before
// and after the collision. Its zero set is the parallelity locus on which the
// three-collision neutral space stays two-dimensional.
double parallelity_determinant(const TrajectorySegment& seg);

// A curve of the three-ball worked-example cell that crosses the parallelity
// locus transversally near u = 0. Throws SequenceUnrealizable if no base
// realizes the sequence or no tuning converges within the attempt budget.
struct TunedCurve {
  CurveSpec curve;
  double u_root = 0.0;  // parallelity root located by bisection of the determinant
};
TunedCurve tuned_parallelity_curve(const SystemParams& params, std::uint64_t seed, double half_width,
                                   std::size_t samples);

struct EnsembleSpec {
  std::uint64_t master_seed = 1;
  std::size_t curves = 100;
  double half_width = 0.05;
  std::size_t samples = 64;
  std::size_t min_accepted = 50;
  std::size_t forward_events = 8;
};

struct KWitness {
  std::size_t curve = 0;
  double u_star = 0.0;
  double residual = 0.0;
  Pair pair;
  bool connected = false;
  bool sufficient = false;
  int dimension = -1;
};

struct CurveOutcome {
  std::size_t curve = 0;
  std::vector<KWitness> witnesses;
  std::size_t unstable = 0;  // crossings rejected as ordering swaps
  std::size_t singular = 0;  // accepted K-points whose forward run hit a singular event
  bool skipped = false;      // curve inadmissible or without past reflections
};

struct NoncoincidenceReport {
  std::size_t curves = 0;
  std::size_t curves_skipped = 0;
  std::size_t accepted = 0;  // K-points with a connected forward collision graph
  std::size_t sufficient = 0;
  std::size_t non_sufficient = 0;
  std::size_t disconnected = 0;
  std::size_t singular = 0;
  std::size_t unstable = 0;
  std::vector<KWitness> witnesses;  // sorted by (curve, u_star)
  bool pass = false;

  double sufficient_fraction() const { return accepted ? static_cast<double>(sufficient) / accepted : 0.0; }
};

// One work item of the experiment; pure function of (params, spec, index).
CurveOutcome noncoincidence_curve(const SystemParams& params, const EnsembleSpec& spec, std::size_t index);

// Order-independent merge. Throws NotEnoughSamples when fewer than
// spec.min_accepted K-points were accepted.
NoncoincidenceReport summarize_noncoincidence(const EnsembleSpec& spec, std::vector<CurveOutcome> outcomes);

NoncoincidenceReport noncoincidence_experiment(const SystemParams& params, const EnsembleSpec& spec);

enum class RealizationMode { rejection, phantom };
std::string_view to_string(RealizationMode mode) noexcept;

struct DimensionStatsOptions {
  std::size_t rejection_budget = 20000;  // attempts before switching to phantom
  std::size_t phantom_budget = 2000;
  std::size_t j_curves = 0;  // tuned J-curves for delta_J (worked example only)
};

struct DimensionStats {
  SymbolicSequence sequence;
  std::size_t samples = 0;
  RealizationMode mode = RealizationMode::rejection;
  std::vector<std::map<int, std::size_t>> histogram;  // per prefix 0..len
  std::vector<int> delta;                             // per prefix 0..len
  bool monotone = true;
  std::optional<int> delta_J;
  std::size_t j_points = 0;
};

// One realization, drawn from its own seed stream derive_seed(seed, index).
// Starting in rejection mode it falls back to phantom once the rejection
// budget is spent; sample 0 decides the mode the others start in.
struct DimensionSample {
  std::vector<int> dims;  // per prefix 0..len
  RealizationMode mode = RealizationMode::rejection;
};
DimensionSample dimension_sample(const SystemParams& params, const SymbolicSequence& sequence, std::uint64_t seed,
                                 std::size_t index, RealizationMode start, const DimensionStatsOptions& options = {});

// Order-independent merge; also evaluates delta_J when requested.
DimensionStats summarize_dimension_stats(const SystemParams& params, const SymbolicSequence& sequence,
                                         std::uint64_t seed, const std::vector<DimensionSample>& samples,
                                         const DimensionStatsOptions& options = {});

DimensionStats dimension_statistics(const SystemParams& params, const SymbolicSequence& sequence,
                                    std::size_t samples, std::uint64_t seed, const DimensionStatsOptions& options = {});

}  // namespace billiard
