#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "billiard/simd/kernels.hpp"

namespace billiard::simd {

namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::impact_times, &scalar::squared_norms};
#if defined(BILLIARD_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::impact_times, &avx2::squared_norms};
#endif

const KernelTable* initial_table() {
  const char* env = std::getenv("BILLIARD_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return &kScalar;
#if defined(BILLIARD_HAVE_AVX2)
  if (available(Isa::avx2)) return &kAvx2;
#endif
  return &kScalar;
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{initial_table()};
  return current;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(BILLIARD_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (!available(isa)) {
    throw std::invalid_argument("kernel variant not available on this CPU: " + std::string(to_string(isa)));
  }
#if defined(BILLIARD_HAVE_AVX2)
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

void select(Isa isa) { slot().store(&table_for(isa), std::memory_order_release); }

}  // namespace billiard::simd

#if !defined(BILLIARD_HAVE_AVX2)
namespace billiard::simd::avx2 {
// Non-x86 builds: symbols exist so the header links, but are never selected.
void impact_times(const ImpactInputs& in, std::span<double> t_out) { scalar::impact_times(in, t_out); }
void squared_norms(int dim, std::size_t count, std::span<const double> d, std::span<double> out) {
  scalar::squared_norms(dim, count, d, out);
}
}  // namespace billiard::simd::avx2
#endif
