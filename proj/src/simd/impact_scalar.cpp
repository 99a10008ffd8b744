#include <cmath>
#include <limits>

#include "billiard/simd/kernels.hpp"

namespace billiard::simd::scalar {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGraze = 64.0 * std::numeric_limits<double>::epsilon();
}  // namespace

void impact_times(const ImpactInputs& in, std::span<double> t_out) {
  const std::size_t n = in.count;
  for (std::size_t k = 0; k < n; ++k) {
    double a = 0.0, b = 0.0, qq = 0.0;
    for (int c = 0; c < in.dim; ++c) {
      const double x = in.dq[c * n + k];
      const double u = in.dv[c * n + k];
      a = a + u * u;
      b = b + x * u;
      qq = qq + x * x;
    }
    const double cc = qq - in.contact2;
    double disc = b * b - a * cc;
    const double bb = b * b;
    double t = kInf;
    if (a > 0.0 && b < 0.0) {
      if (std::abs(disc) <= kGraze * bb) disc = 0.0;
      if (disc >= 0.0) {
        if (cc <= 0.0) {
          t = 0.0;
        } else {
          // c / (-b + sqrt(disc)) avoids cancellation of the smaller root.
          t = cc / (std::sqrt(disc) - b);
        }
      }
    }
    t_out[k] = t;
  }
}

void squared_norms(int dim, std::size_t count, std::span<const double> d, std::span<double> out) {
  for (std::size_t k = 0; k < count; ++k) {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) {
      const double x = d[c * count + k];
      s = s + x * x;
    }
    out[k] = s;
  }
}

}  // namespace billiard::simd::scalar
