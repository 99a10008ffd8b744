#include "billiard/geom.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "billiard/core.hpp"
#include "billiard/error.hpp"

namespace billiard::geom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTangencyTol = 1e-10;
constexpr double kEntryTol = 1e-12;
constexpr int kScan = 4096;

Eigen::Matrix2d rotation_matrix(double angle) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

Vec2 unit_normal(const Vec2& v) { return Vec2(-v.y(), v.x()); }

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

std::string show(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Discriminant of |A + t v|^2 = rho^2 (v unit), i.e. rho^2 - dist(origin, line)^2.
double entry_discriminant(const OrientedLine& line, double rho) {
  const double beta = line.point.dot(line.direction);
  return beta * beta - (line.point.squaredNorm() - rho * rho);
}

double tangency_residual(const ConicSpec& conic, const OrientedLine& line) {
  const Vec2 n = unit_normal(line.direction);
  if (conic.kind == ConicKind::point) return std::abs((line.point - conic.center).dot(n));
  const double h = std::abs((line.point - conic.center).dot(n));
  return std::abs(h - (conic.support(n) - conic.center.dot(n)));
}

double through_center_residual(const ConicSpec& conic, const OrientedLine& line) {
  return std::abs(cross(line.point - conic.center, line.direction));
}

double wrapped_angle_step(const Vec2& from, const Vec2& to) { return std::atan2(cross(from, to), from.dot(to)); }

}  // namespace

std::string_view to_string(ConicKind kind) noexcept { return kind == ConicKind::point ? "point" : "ellipse"; }
std::string_view to_string(EnvelopeCase c) noexcept { return c == EnvelopeCase::A ? "A" : "B"; }

double direction_angle(const Vec2& v) { return std::atan2(v.y(), v.x()); }

// ---- conics -------------------------------------------------------------

ConicSpec ConicSpec::point(const Vec2& at) {
  ConicSpec c;
  c.kind = ConicKind::point;
  c.center = at;
  return c;
}

ConicSpec ConicSpec::ellipse(const Vec2& center, double a, double b, double rotation) {
  ConicSpec c;
  c.kind = ConicKind::ellipse;
  c.center = center;
  c.a = a;
  c.b = b;
  c.rotation = rotation;
  c.validate();
  return c;
}

void ConicSpec::validate() const {
  if (!center.allFinite()) throw InvalidFamily("conic centre must be finite");
  if (kind == ConicKind::ellipse && !(a >= b && b > 0.0 && std::isfinite(a) && std::isfinite(rotation))) {
    throw InvalidFamily("ellipse needs semi-axes a >= b > 0, got a=" + show(a) + " b=" + show(b));
  }
}

Vec2 ConicSpec::boundary(double s) const {
  if (kind == ConicKind::point) return center;
  return center + rotation_matrix(rotation) * Vec2(a * std::cos(s), b * std::sin(s));
}

double ConicSpec::support(const Vec2& n) const {
  if (kind == ConicKind::point) return center.dot(n);
  const Vec2 local = rotation_matrix(rotation).transpose() * n;
  return center.dot(n) + std::sqrt(a * a * local.x() * local.x() + b * b * local.y() * local.y());
}

int common_tangents(const ConicSpec& conic, double rho) {
  conic.validate();
  // Lines tangent to the circle are <x, n> = rho over all unit n. Such a line
  // touches the conic when rho equals its upper or lower support value.
  auto upper = [&](double th) { return conic.support(Vec2(std::cos(th), std::sin(th))) - rho; };
  auto lower = [&](double th) {
    const Vec2 n(std::cos(th), std::sin(th));
    return -conic.support(-n) - rho;
  };
  auto changes = [](auto&& f) {
    int count = 0;
    double prev = f(0.0);
    for (int k = 1; k <= kScan; ++k) {
      const double cur = f(kTwoPi * k / kScan);
      if ((prev < 0.0) != (cur < 0.0)) ++count;
      prev = cur;
    }
    return count;
  };
  if (conic.kind == ConicKind::point) return changes(upper);
  return changes(upper) + changes(lower);
}

// ---- carrier ------------------------------------------------------------

Carrier Carrier::at_distance(const Vec3& normal, double distance) {
  const Vec3 m = normal.normalized();
  Eigen::Index least = 0;
  m.cwiseAbs().minCoeff(&least);
  const Vec3 axis = Vec3::Unit(least);
  Carrier c;
  c.x0 = distance * m;
  c.e1 = (axis - axis.dot(m) * m).normalized();
  c.e2 = m.cross(c.e1);
  c.validate();
  return c;
}

void Carrier::validate() const {
  const double d = x0.norm();
  if (!(d < 1.0)) throw InvalidFamily("carrier plane must cut the unit sphere (|x0| < 1), got " + show(d));
  if (d == 0.0) throw InvalidFamily("carrier plane must not pass through the origin");
  const double skew = std::max({std::abs(e1.norm() - 1.0), std::abs(e2.norm() - 1.0), std::abs(e1.dot(e2)),
                                std::abs(e1.dot(x0)) / d, std::abs(e2.dot(x0)) / d});
  if (skew > 1e-12) throw InvalidFamily("carrier basis must be orthonormal and orthogonal to x0");
}

double Carrier::circle_radius() const { return std::sqrt(1.0 - x0.squaredNorm()); }

// ---- lines and reflections ----------------------------------------------

OrientedLine tangent_line(const ConicSpec& conic, double s, int orientation) {
  if (conic.kind == ConicKind::point) return {conic.center, Vec2(std::cos(s), std::sin(s))};
  const Vec2 t = rotation_matrix(conic.rotation) * Vec2(-conic.a * std::sin(s), conic.b * std::cos(s));
  return {conic.boundary(s), (orientation < 0 ? -1.0 : 1.0) * t.normalized()};
}

std::vector<double> LineFamily::grid(std::size_t count) const {
  std::vector<double> s(count);
  for (std::size_t k = 0; k < count; ++k) {
    s[k] = count == 1 ? s_min : s_min + (s_max - s_min) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  if (count > 1) s.back() = s_max;
  return s;
}

ReflectionSample entry_and_reflect(const OrientedLine& line, const std::optional<Carrier>& carrier, double s) {
  const double rho = carrier ? carrier->circle_radius() : 1.0;
  const double disc = entry_discriminant(line, rho);
  if (!(disc > kEntryTol)) {
    throw NoTransversalEntry("line at parameter " + show(s) + " does not cross the circle transversally (gap " +
                             show(disc) + ")");
  }
  // Of the two crossings the one with smaller <B, v> is the smaller root.
  const double t = -line.point.dot(line.direction) - std::sqrt(disc);
  const Vec2 hit = line.point + t * line.direction;

  ReflectionSample out;
  out.s = s;
  if (carrier) {
    const Vec3 b = carrier->embed(hit);
    const Vec3 v = carrier->direction(line.direction);
    const Vec3 n = b.normalized();
    out.B = b;
    out.v = v;
    out.v_plus = v - 2.0 * v.dot(n) * n;
  } else {
    const Vec2 n = hit.normalized();
    out.B = hit;
    out.v = line.direction;
    out.v_plus = line.direction - 2.0 * line.direction.dot(n) * n;
  }
  return out;
}

ReflectionSample sample(const LineFamily& family, double s) {
  return entry_and_reflect(family.line(s), family.carrier, s);
}

LineFamily transversal_family(const ConicSpec& conic, int orientation, const std::optional<Carrier>& carrier,
                              double margin) {
  conic.validate();
  if (carrier) carrier->validate();
  const double rho = carrier ? carrier->circle_radius() : 1.0;
  std::vector<bool> ok(kScan);
  bool all = true;
  for (int k = 0; k < kScan; ++k) {
    ok[k] = entry_discriminant(tangent_line(conic, kTwoPi * k / kScan, orientation), rho) > 1e-6 * rho * rho;
    all = all && ok[k];
  }
  int best_start = 0, best_len = 0;
  if (all) {
    best_len = kScan;
  } else {
    // Cyclic runs: start scanning just after a failing index.
    int first_bad = 0;
    while (ok[first_bad]) ++first_bad;
    int len = 0, start = 0;
    for (int step = 1; step <= kScan; ++step) {
      const int k = (first_bad + step) % kScan;
      if (ok[k]) {
        if (len == 0) start = first_bad + step;
        ++len;
        if (len > best_len) best_len = len, best_start = start;
      } else {
        len = 0;
      }
    }
  }
  if (best_len < 3) throw NoTransversalEntry("no arc of transversal lines for this conic");
  const double h = kTwoPi / kScan;
  const double lo = best_start * h;
  const double hi = (best_start + best_len - 1) * h;
  LineFamily f;
  f.conic = conic;
  f.orientation = orientation;
  f.carrier = carrier;
  f.s_min = lo + margin * (hi - lo);
  f.s_max = hi - margin * (hi - lo);
  return f;
}

void validate_family(const LineFamily& family, const std::vector<double>& s, Admissibility admissibility) {
  family.conic.validate();
  if (family.carrier) family.carrier->validate();
  if (admissibility == Admissibility::required && !family.admissible()) {
    throw InvalidFamily("conic and circle have fewer than two common tangent lines");
  }
  std::optional<Vec2> prev;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const OrientedLine line = family.line(s[k]);
    if (const double r = tangency_residual(family.conic, line); !(r < kTangencyTol)) {
      throw InvalidFamily("line at s=" + show(s[k]) + " is not tangent to the conic (residual " + show(r) + ")");
    }
    try {
      entry_and_reflect(line, family.carrier, s[k]);
    } catch (const NoTransversalEntry& e) {
      throw InvalidFamily(e.what());
    }
    if (prev && !(wrapped_angle_step(*prev, line.direction) > 0.0)) {
      throw InvalidFamily("direction angle does not increase at s=" + show(s[k]));
    }
    prev = line.direction;
  }
}

SpanReport span_test(const LineFamily& family, const std::vector<double>& s, double rank_rel,
                     Admissibility admissibility) {
  const int ambient = family.carrier ? 5 : 4;
  if (s.size() < static_cast<std::size_t>(4 * ambient)) {
    throw std::invalid_argument("span_test needs at least " + std::to_string(4 * ambient) + " samples");
  }
  validate_family(family, s, admissibility);
  Mat m(s.size(), ambient);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const ReflectionSample r = sample(family, s[k]);
    const Vec2 v = family.line(s[k]).direction;  // carrier coordinates
    m(k, 0) = v.x();
    m(k, 1) = v.y();
    m.row(k).tail(ambient - 2) = r.v_plus.transpose();
  }
  Tolerances tol;
  tol.rank_rel = rank_rel;
  const KernelResult k = kernel(m, tol);
  SpanReport out;
  out.ambient = ambient;
  out.dimension = ambient - k.dimension;
  out.sigma_min = k.sigma_max > 0.0 ? k.sigma_min_nonkernel / k.sigma_max : 0.0;
  out.samples = s.size();
  return out;
}

SpanReport span_test(const LineFamily& family, std::size_t count, double rank_rel, Admissibility admissibility) {
  return span_test(family, family.grid(count), rank_rel, admissibility);
}

EnvelopeReport envelope_check(const ConicSpec& conic, const std::vector<OrientedLine>& lines, double tol) {
  conic.validate();
  double res_a = 0.0, res_b = 0.0;
  for (const OrientedLine& line : lines) {
    res_a = std::max(res_a, through_center_residual(conic, line));
    if (conic.kind == ConicKind::ellipse) res_b = std::max(res_b, tangency_residual(conic, line));
  }
  EnvelopeReport out;
  out.samples = lines.size();
  if (conic.kind == ConicKind::ellipse && res_b < tol) {
    out.which = EnvelopeCase::B;
    out.max_residual = res_b;
    return out;
  }
  if (res_a < tol) {
    out.which = EnvelopeCase::A;
    out.max_residual = res_a;
    return out;
  }
  throw EnvelopeMismatch("lines neither share a common point (residual " + show(res_a) +
                         ") nor envelope the ellipse (residual " +
                         (conic.kind == ConicKind::ellipse ? show(res_b) : std::string("n/a")) + ")");
}

EnvelopeReport envelope_check(const LineFamily& family, std::size_t count, double tol) {
  std::vector<OrientedLine> lines;
  for (double s : family.grid(count)) lines.push_back(family.line(s));
  return envelope_check(family.conic, lines, tol);
}

// ---- random families ----------------------------------------------------

namespace {

LineFamily random_family(std::uint64_t seed, bool space) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::optional<Carrier> carrier;
    if (space) carrier = Carrier::at_distance(Vec3(gauss(rng), gauss(rng), gauss(rng)), 0.1 + 0.7 * unit(rng));
    const double rho = carrier ? carrier->circle_radius() : 1.0;
    const double dir = kTwoPi * unit(rng);
    ConicSpec conic;
    if (unit(rng) < 0.5) {
      conic = ConicSpec::point(rho * (1.1 + 1.9 * unit(rng)) * Vec2(std::cos(dir), std::sin(dir)));
    } else {
      const double a = rho * (0.2 + 1.3 * unit(rng));
      const double b = a * (0.15 + 0.85 * unit(rng));
      conic = ConicSpec::ellipse(rho * 3.0 * unit(rng) * Vec2(std::cos(dir), std::sin(dir)), a, b, kTwoPi * unit(rng));
    }
    if (common_tangents(conic, rho) < 2) continue;
    const int orientation = unit(rng) < 0.5 ? 1 : -1;
    LineFamily f;
    try {
      f = transversal_family(conic, orientation, carrier);
    } catch (const NoTransversalEntry&) {
      continue;
    }
    const double len = f.s_max - f.s_min;
    const double width = len * (1.0 / 3.0 + (2.0 / 3.0) * unit(rng));
    f.s_min += (len - width) * unit(rng);
    f.s_max = f.s_min + width;
    try {
      validate_family(f, f.grid(64));
    } catch (const InvalidFamily&) {
      continue;
    }
    return f;
  }
  throw InvalidFamily("no admissible random family for seed " + std::to_string(seed));
}

}  // namespace

LineFamily random_family_2d(std::uint64_t seed) { return random_family(seed, false); }
LineFamily random_family_3d(std::uint64_t seed) { return random_family(seed, true); }

}  // namespace billiard::geom
