// Compiled with -mavx2 only; never called unless the CPU reports AVX2.
// No FMA: every lane must round exactly like the scalar reference.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "billiard/simd/kernels.hpp"

namespace billiard::simd::avx2 {

namespace {
constexpr double kGraze = 64.0 * std::numeric_limits<double>::epsilon();
}  // namespace

void impact_times(const ImpactInputs& in, std::span<double> t_out) {
  const std::size_t n = in.count;
  const __m256d zero = _mm256_setzero_pd();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d graze = _mm256_set1_pd(kGraze);
  const __m256d contact2 = _mm256_set1_pd(in.contact2);

  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d a = zero, b = zero, qq = zero;
    for (int c = 0; c < in.dim; ++c) {
      const __m256d x = _mm256_loadu_pd(in.dq.data() + c * n + k);
      const __m256d u = _mm256_loadu_pd(in.dv.data() + c * n + k);
      a = _mm256_add_pd(a, _mm256_mul_pd(u, u));
      b = _mm256_add_pd(b, _mm256_mul_pd(x, u));
      qq = _mm256_add_pd(qq, _mm256_mul_pd(x, x));
    }
    const __m256d cc = _mm256_sub_pd(qq, contact2);
    const __m256d bb = _mm256_mul_pd(b, b);
    __m256d disc = _mm256_sub_pd(bb, _mm256_mul_pd(a, cc));

    // Discriminants within roundoff of zero are an exact graze.
    const __m256d band = _mm256_mul_pd(graze, bb);
    const __m256d below = _mm256_cmp_pd(disc, band, _CMP_LE_OQ);
    const __m256d above = _mm256_cmp_pd(_mm256_sub_pd(zero, disc), band, _CMP_LE_OQ);
    disc = _mm256_blendv_pd(disc, zero, _mm256_and_pd(below, above));

    const __m256d approaching = _mm256_and_pd(_mm256_cmp_pd(a, zero, _CMP_GT_OQ),
                                              _mm256_cmp_pd(b, zero, _CMP_LT_OQ));
    const __m256d hits = _mm256_and_pd(approaching, _mm256_cmp_pd(disc, zero, _CMP_GE_OQ));
    const __m256d touching = _mm256_cmp_pd(cc, zero, _CMP_LE_OQ);

    // Lanes that miss may produce NaN here; they are masked out below.
    const __m256d root = _mm256_sqrt_pd(_mm256_max_pd(disc, zero));
    const __m256d t_far = _mm256_div_pd(cc, _mm256_sub_pd(root, b));
    __m256d t = _mm256_blendv_pd(t_far, zero, touching);
    t = _mm256_blendv_pd(inf, t, hits);
    _mm256_storeu_pd(t_out.data() + k, t);
  }
  if (k < n) {
    // Remainder lanes: same arithmetic as the reference, one at a time.
    for (; k < n; ++k) {
      double a = 0.0, b = 0.0, qq = 0.0;
      for (int c = 0; c < in.dim; ++c) {
        const double x = in.dq[c * n + k];
        const double u = in.dv[c * n + k];
        a = a + u * u;
        b = b + x * u;
        qq = qq + x * x;
      }
      const double cc = qq - in.contact2;
      const double bb = b * b;
      double disc = bb - a * cc;
      double t = std::numeric_limits<double>::infinity();
      if (a > 0.0 && b < 0.0) {
        if (std::abs(disc) <= kGraze * bb) disc = 0.0;
        if (disc >= 0.0) t = cc <= 0.0 ? 0.0 : cc / (std::sqrt(disc) - b);
      }
      t_out[k] = t;
    }
  }
}

void squared_norms(int dim, std::size_t count, std::span<const double> d, std::span<double> out) {
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    __m256d s = _mm256_setzero_pd();
    for (int c = 0; c < dim; ++c) {
      const __m256d x = _mm256_loadu_pd(d.data() + c * count + k);
      s = _mm256_add_pd(s, _mm256_mul_pd(x, x));
    }
    _mm256_storeu_pd(out.data() + k, s);
  }
  for (; k < count; ++k) {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) {
      const double x = d[c * count + k];
      s = s + x * x;
    }
    out[k] = s;
  }
}

}  // namespace billiard::simd::avx2
