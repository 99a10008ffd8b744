#pragma once

// Batched arithmetic kernels for the event search. Each kernel has a scalar
// reference implementation and optional vector variants; the active variant
// is chosen once at startup from the CPU features (override with
// BILLIARD_SIMD=scalar|avx2). Every variant performs the same IEEE operations
// in the same order, so results are bit-identical across variants.

#include <cstddef>
#include <span>
#include <string_view>

namespace billiard::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

// Structure-of-arrays candidate list: coordinate c of candidate k lives at
// [c * count + k]. `dq` holds relative positions, `dv` relative velocities.
struct ImpactInputs {
  int dim = 0;
  std::size_t count = 0;
  std::span<const double> dq;
  std::span<const double> dv;
  double contact2 = 0.0;  // squared contact distance (2r)^2
};

// Writes, per candidate, the earliest t >= 0 with |dq + t dv|^2 = contact2, or
// +inf when the pair is not approaching or misses. A discriminant within
// roundoff of zero (|disc| <= 64 eps b^2) is treated as an exact
// graze. Pairs already at or inside contact and approaching get t = 0.
using ImpactFn = void (*)(const ImpactInputs& in, std::span<double> t_out);

// out[k] = sum_c d[c * count + k]^2
using SquaredNormsFn = void (*)(int dim, std::size_t count, std::span<const double> d,
                                std::span<double> out);

struct KernelTable {
  Isa isa;
  ImpactFn impact_times;
  SquaredNormsFn squared_norms;
};

bool available(Isa isa) noexcept;
const KernelTable& table_for(Isa isa);

// The table currently in use.
const KernelTable& active() noexcept;
// Forces a variant; throws std::invalid_argument if the CPU lacks it.
void select(Isa isa);

namespace scalar {
void impact_times(const ImpactInputs& in, std::span<double> t_out);
void squared_norms(int dim, std::size_t count, std::span<const double> d, std::span<double> out);
}  // namespace scalar

namespace avx2 {
void impact_times(const ImpactInputs& in, std::span<double> t_out);
void squared_norms(int dim, std::size_t count, std::span<const double> d, std::span<double> out);
}  // namespace avx2

}  // namespace billiard::simd
