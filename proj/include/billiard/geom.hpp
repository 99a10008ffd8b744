#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "billiard/types.hpp"

// Plane and space geometry of tangent-line families reflected off the unit
// circle (or the circle cut from the unit sphere by an affine plane).
namespace billiard::geom {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

enum class ConicKind { point, ellipse };
std::string_view to_string(ConicKind kind) noexcept;

// Coordinates are those of the carrier plane.
struct ConicSpec {
  ConicKind kind = ConicKind::point;
  Vec2 center = Vec2::Zero();
  double a = 0.0;  // semi-axes, a >= b > 0 (ellipse only)
  double b = 0.0;
  double rotation = 0.0;

  static ConicSpec point(const Vec2& at);
  static ConicSpec ellipse(const Vec2& center, double a, double b, double rotation);

  // Throws InvalidFamily on bad semi-axes.
  void validate() const;
  // Boundary point at parameter s (the centre for a point).
  Vec2 boundary(double s) const;
  // Support function <center, n> + sqrt(n^T M n), M = R diag(a^2, b^2) R^T.
  double support(const Vec2& n) const;
};

// Affine plane x0 + span{e1, e2} in R^3, with x0 orthogonal to e1, e2 and
// |x0| < 1; it meets the unit sphere in a circle of radius sqrt(1 - |x0|^2).
struct Carrier {
  Vec3 x0 = Vec3::Zero();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();

  static Carrier at_distance(const Vec3& normal, double distance);
  void validate() const;
  double circle_radius() const;
  Vec3 embed(const Vec2& p) const { return x0 + p.x() * e1 + p.y() * e2; }
  Vec3 direction(const Vec2& d) const { return d.x() * e1 + d.y() * e2; }
};

struct OrientedLine {
  Vec2 point;
  Vec2 direction;  // unit
};

// Point case: the line through the point with direction angle s. Ellipse
// case: the tangent at boundary(s), along the counterclockwise tangent for
// orientation +1 and against it for -1.
OrientedLine tangent_line(const ConicSpec& conic, double s, int orientation = 1);

// Number of lines tangent to both the conic and the circle of radius rho
// about the origin. Counted from sign changes of support(n) -+ rho on a fine
// grid of normals, so tangencies of even multiplicity are not counted.
int common_tangents(const ConicSpec& conic, double rho = 1.0);

struct LineFamily {
  ConicSpec conic;
  int orientation = 1;
  double s_min = 0.0;
  double s_max = 0.0;
  std::optional<Carrier> carrier;  // absent: the plane itself, circle = unit circle

  int ambient() const { return carrier ? 3 : 2; }
  double circle_radius() const { return carrier ? carrier->circle_radius() : 1.0; }
  OrientedLine line(double s) const { return tangent_line(conic, s, orientation); }
  std::vector<double> grid(std::size_t count) const;
  bool admissible() const { return common_tangents(conic, circle_radius()) >= 2; }
};

struct ReflectionSample {
  double s = 0.0;
  Vec v;       // ambient unit direction
  Vec B;       // entry point on the unit circle / sphere
  Vec v_plus;  // v reflected across the tangent line / plane at B
};

// Intersects the line with the circle and reflects at the intersection point
// whose position vector has the smaller inner product with the direction.
// Throws NoTransversalEntry when the line misses the circle or is tangent to
// it within 1e-12.
ReflectionSample entry_and_reflect(const OrientedLine& line, const std::optional<Carrier>& carrier = std::nullopt,
                                   double s = 0.0);

ReflectionSample sample(const LineFamily& family, double s);

// Longest arc of parameters (scanned over [0, 2 pi)) along which every line
// enters the circle transversally, shrunk by `margin` of its length at each
// end. Throws NoTransversalEntry if there is none.
LineFamily transversal_family(const ConicSpec& conic, int orientation, const std::optional<Carrier>& carrier,
                              double margin = 0.05);

enum class Admissibility { required, waived };

// Checks tangency (residual < 1e-10), transversal entry and strictly
// increasing direction angle at every given parameter. Throws InvalidFamily
// naming the first violation.
void validate_family(const LineFamily& family, const std::vector<double>& s,
                     Admissibility admissibility = Admissibility::required);

struct SpanReport {
  int dimension = 0;
  int ambient = 0;       // 4 in the plane, 5 in space
  double sigma_min = 0;  // smallest retained singular value, relative to the largest
  std::size_t samples = 0;
};

// Dimension of the linear span of (v, v_plus) over the samples: in the plane
// vectors of R^2 x R^2, in space (carrier coordinates of v) x R^3. Requires at
// least 4 * ambient samples (std::invalid_argument otherwise).
SpanReport span_test(const LineFamily& family, const std::vector<double>& s, double rank_rel = 1e-9,
                     Admissibility admissibility = Admissibility::required);
SpanReport span_test(const LineFamily& family, std::size_t count = 64, double rank_rel = 1e-9,
                     Admissibility admissibility = Admissibility::required);

enum class EnvelopeCase { A, B };
std::string_view to_string(EnvelopeCase c) noexcept;

struct EnvelopeReport {
  EnvelopeCase which = EnvelopeCase::A;
  double max_residual = 0.0;
  std::size_t samples = 0;
};

// Case A: every sampled line passes through the conic centre. Case B: every
// sampled line is tangent to the ellipse, measured as the gap between the
// line's distance from the centre and the support function along its normal.
// Throws EnvelopeMismatch when neither holds within tol.
EnvelopeReport envelope_check(const ConicSpec& conic, const std::vector<OrientedLine>& lines, double tol = 1e-10);
EnvelopeReport envelope_check(const LineFamily& family, std::size_t count = 64, double tol = 1e-10);

// Random admissible families: a point or an ellipse in the carrier plane, on a
// random sub-arc (at least a third) of the transversal arc.
LineFamily random_family_2d(std::uint64_t seed);
LineFamily random_family_3d(std::uint64_t seed);

// Direction angle in (-pi, pi].
double direction_angle(const Vec2& v);

}  // namespace billiard::geom
