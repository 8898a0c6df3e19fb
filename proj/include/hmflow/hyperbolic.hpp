#pragma once

// Upper half-space model of H^3, its ideal boundary CP^1, and the PSL(2,C)
// action on both. H^2 sits inside as the vertical half-plane {x2 = 0}.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <utility>

#include "hmflow/error.hpp"

namespace hmflow {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Point of CP^1: a finite complex value or the point at infinity.
class BoundaryPoint {
 public:
  BoundaryPoint() = default;
  BoundaryPoint(cplx z) : value_(z) {}  // NOLINT(google-explicit-constructor)
  BoundaryPoint(double x) : value_(x) {}  // NOLINT(google-explicit-constructor)

  static BoundaryPoint infinity()
  {
    BoundaryPoint p;
    p.infinite_ = true;
    return p;
  }

  bool is_infinite() const { return infinite_; }
  cplx value() const
  {
    if (infinite_) throw Error(Stage::geometry, "value() of the point at infinity");
    return value_;
  }

 private:
  cplx value_{0.0, 0.0};
  bool infinite_ = false;
};

/// Chordal distance on the Riemann sphere, in [0, 1].
inline double chordal_distance(const BoundaryPoint& p, const BoundaryPoint& q)
{
  if (p.is_infinite() && q.is_infinite()) return 0.0;
  if (p.is_infinite()) return 1.0 / std::sqrt(1.0 + std::norm(q.value()));
  if (q.is_infinite()) return 1.0 / std::sqrt(1.0 + std::norm(p.value()));
  const cplx a = p.value(), b = q.value();
  return std::abs(a - b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
}

struct H3Point {
  double x1 = 0.0, x2 = 0.0, x3 = 1.0;

  cplx horizontal() const { return {x1, x2}; }
  static H3Point from(cplx z, double height) { return {z.real(), z.imag(), height}; }
};

/// Tangent vector in ambient coordinates; the hyperbolic norm divides by x3.
struct TangentVector {
  H3Point base;
  double v1 = 0.0, v2 = 0.0, v3 = 0.0;

  double euclidean_norm() const { return std::sqrt(v1 * v1 + v2 * v2 + v3 * v3); }
  double norm() const { return euclidean_norm() / base.x3; }
};

inline double dist_h3(const H3Point& x, const H3Point& y)
{
  const double dx = x.x1 - y.x1, dy = x.x2 - y.x2, dz = x.x3 - y.x3;
  const double chord = std::sqrt(dx * dx + dy * dy + dz * dz);
  // cosh d = 1 + chord^2 / (2 x3 y3), written in the cancellation-free asinh form
  return 2.0 * std::asinh(chord / (2.0 * std::sqrt(x.x3 * y.x3)));
}

/// Element of PSL(2,C), stored as one SL(2,C) representative.
struct MobiusMap {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

  static MobiusMap identity() { return {}; }

  /// Rescales to determinant one. Throws on a singular matrix.
  static MobiusMap normalized(cplx a, cplx b, cplx c, cplx d)
  {
    const cplx det = a * d - b * c;
    if (std::abs(det) < 1e-300) throw Error(Stage::geometry, "singular Mobius matrix");
    const cplx s = std::sqrt(det);
    return {a / s, b / s, c / s, d / s};
  }

  cplx trace() const { return a + d; }
  cplx det() const { return a * d - b * c; }
  MobiusMap inverse() const { return {d, -b, -c, a}; }
  MobiusMap negated() const { return {-a, -b, -c, -d}; }

  friend MobiusMap operator*(const MobiusMap& m, const MobiusMap& n)
  {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c,
            m.c * n.b + m.d * n.d};
  }

  BoundaryPoint apply(const BoundaryPoint& p) const
  {
    if (p.is_infinite()) {
      if (c == cplx{0.0}) return BoundaryPoint::infinity();
      return BoundaryPoint(a / c);
    }
    const cplx z = p.value();
    const cplx den = c * z + d;
    if (den == cplx{0.0}) return BoundaryPoint::infinity();
    return BoundaryPoint((a * z + b) / den);
  }

  /// Poincare extension to the upper half-space.
  H3Point apply(const H3Point& x) const
  {
    const cplx z = x.horizontal();
    const double t = x.x3;
    const cplx czd = c * z + d;
    const double den = std::norm(czd) + std::norm(c) * t * t;
    const cplx w = ((a * z + b) * std::conj(czd) + a * std::conj(c) * t * t) / den;
    return H3Point::from(w, t / den);
  }
};

/// Entrywise distance to the closer of the two SL(2,C) lifts of n.
inline double matrix_distance(const MobiusMap& m, const MobiusMap& n)
{
  auto dist = [](const MobiusMap& p, const MobiusMap& q) {
    return std::max({std::abs(p.a - q.a), std::abs(p.b - q.b), std::abs(p.c - q.c),
                     std::abs(p.d - q.d)});
  };
  return std::min(dist(m, n), dist(m, n.negated()));
}

inline MobiusMap power(MobiusMap m, long n)
{
  if (n < 0) {
    m = m.inverse();
    n = -n;
  }
  MobiusMap result = MobiusMap::identity();
  while (n > 0) {
    if (n & 1) result = result * m;
    m = m * m;
    n >>= 1;
  }
  return result;
}

inline constexpr double kClassifyTolerance = 1e-9;

enum class MobiusType { identity, parabolic, elliptic, loxodromic };

inline MobiusType classify(const MobiusMap& m, double tol = kClassifyTolerance)
{
  if (matrix_distance(m, MobiusMap::identity()) < tol) return MobiusType::identity;
  const cplx tr2 = m.trace() * m.trace();
  if (std::abs(tr2 - 4.0) < tol) return MobiusType::parabolic;
  if (std::abs(tr2.imag()) < tol && tr2.real() >= -tol && tr2.real() < 4.0)
    return MobiusType::elliptic;
  return MobiusType::loxodromic;
}

inline const char* type_name(MobiusType t)
{
  switch (t) {
    case MobiusType::identity: return "identity";
    case MobiusType::parabolic: return "parabolic";
    case MobiusType::elliptic: return "elliptic";
    case MobiusType::loxodromic: return "loxodromic";
  }
  return "?";
}

inline bool is_semisimple(MobiusType t)
{
  return t == MobiusType::elliptic || t == MobiusType::loxodromic;
}

/// Oriented bi-infinite geodesic, given by its ideal endpoints.
struct Geodesic {
  BoundaryPoint from, to;
};

/// Fixed points of the boundary action; two coincide for parabolics.
inline std::array<BoundaryPoint, 2> fixed_points(const MobiusMap& m)
{
  // c z^2 + (d - a) z - b = 0
  const double scale = std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
  if (std::abs(m.c) <= 1e-14 * scale) {
    const cplx den = m.d - m.a;
    if (std::abs(den) <= 1e-14 * scale) return {BoundaryPoint::infinity(), BoundaryPoint::infinity()};
    return {BoundaryPoint(m.b / den), BoundaryPoint::infinity()};
  }
  const cplx disc = std::sqrt((m.a + m.d) * (m.a + m.d) - 4.0);
  const cplx z1 = (m.a - m.d + disc) / (2.0 * m.c);
  const cplx z2 = (m.a - m.d - disc) / (2.0 * m.c);
  return {BoundaryPoint(z1), BoundaryPoint(z2)};
}

/// Axis of a semisimple element, oriented from the repelling to the attracting
/// fixed point for loxodromics.
inline Geodesic axis(const MobiusMap& m, double tol = kClassifyTolerance)
{
  const auto type = classify(m, tol);
  if (!is_semisimple(type))
    throw Error(Stage::geometry, std::string("axis of a ") + type_name(type) + " element");
  auto fp = fixed_points(m);
  // derivative of the boundary action at a finite fixed point z is 1/(cz+d)^2
  auto multiplier = [&](const BoundaryPoint& p) {
    if (p.is_infinite()) return std::norm(m.d) ;  // at infinity the multiplier is d^2
    return 1.0 / std::norm(m.c * p.value() + m.d);
  };
  if (type == MobiusType::loxodromic && multiplier(fp[0]) < multiplier(fp[1]))
    std::swap(fp[0], fp[1]);
  // fp[0] now has multiplier > 1 (repelling)
  return {fp[0], fp[1]};
}

/// Complex translation length 2 acosh(tr/2); real part >= 0.
inline cplx complex_length(const MobiusMap& m)
{
  cplx l = 2.0 * std::acosh(m.trace() / 2.0);
  if (l.real() < 0) l = -l;
  return l;
}

inline double translation_length(const MobiusMap& m, double tol = kClassifyTolerance)
{
  if (classify(m, tol) != MobiusType::loxodromic)
    throw Error(Stage::geometry, "translation length of a non-loxodromic element");
  return std::abs(complex_length(m).real());
}

/// Cross-ratio with the convention cross_ratio(inf, -1, 0, z) = z.
inline cplx cross_ratio(const BoundaryPoint& p1, const BoundaryPoint& p2, const BoundaryPoint& p3,
                        const BoundaryPoint& p4)
{
  const std::array<const BoundaryPoint*, 4> ps{&p1, &p2, &p3, &p4};
  int n_inf = 0;
  for (auto* p : ps) n_inf += p->is_infinite();
  if (n_inf > 1) throw Error(Stage::geometry, "cross-ratio of repeated points");
  auto diff = [](const BoundaryPoint& x, const BoundaryPoint& y) { return x.value() - y.value(); };
  cplx num, den;
  if (p1.is_infinite()) {
    num = diff(p3, p4);
    den = diff(p2, p3);
  } else if (p2.is_infinite()) {
    num = -diff(p3, p4);
    den = diff(p1, p4);
  } else if (p3.is_infinite()) {
    num = -diff(p1, p2);
    den = diff(p1, p4);
  } else if (p4.is_infinite()) {
    num = diff(p1, p2);
    den = diff(p2, p3);
  } else {
    num = diff(p1, p2) * diff(p3, p4);
    den = diff(p1, p4) * diff(p2, p3);
  }
  if (num == cplx{0.0} || den == cplx{0.0})
    throw Error(Stage::geometry, "cross-ratio of repeated points");
  return num / den;
}

/// The Mobius map sending (p1, p2, p3) to (inf, -1, 0).
inline MobiusMap to_standard_triple(const BoundaryPoint& p1, const BoundaryPoint& p2,
                                    const BoundaryPoint& p3)
{
  if (p1.is_infinite()) {
    const cplx k = -1.0 / (p2.value() - p3.value());
    return MobiusMap::normalized(k, -k * p3.value(), 0.0, 1.0);
  }
  if (p2.is_infinite()) return MobiusMap::normalized(-1.0, p3.value(), 1.0, -p1.value());
  if (p3.is_infinite()) {
    const cplx k = -(p2.value() - p1.value());
    return MobiusMap::normalized(0.0, k, 1.0, -p1.value());
  }
  const cplx k = -(p2.value() - p1.value()) / (p2.value() - p3.value());
  return MobiusMap::normalized(k, -k * p3.value(), 1.0, -p1.value());
}

/// The unique Mobius map carrying the triple src to the triple dst.
inline MobiusMap map_triple(const std::array<BoundaryPoint, 3>& src,
                            const std::array<BoundaryPoint, 3>& dst)
{
  return to_standard_triple(dst[0], dst[1], dst[2]).inverse() *
         to_standard_triple(src[0], src[1], src[2]);
}

/// A Mobius map sending g.from to 0 and g.to to infinity.
inline MobiusMap normalize_geodesic(const Geodesic& g)
{
  const auto& p = g.from;
  const auto& q = g.to;
  if (p.is_infinite() && q.is_infinite()) throw Error(Stage::geometry, "degenerate geodesic");
  if (q.is_infinite()) return MobiusMap::normalized(1.0, -p.value(), 0.0, 1.0);
  if (p.is_infinite()) return MobiusMap::normalized(0.0, 1.0, 1.0, -q.value());
  if (std::abs(p.value() - q.value()) == 0.0) throw Error(Stage::geometry, "degenerate geodesic");
  return MobiusMap::normalized(1.0, -p.value(), 1.0, -q.value());
}

/// Loxodromic (or elliptic, for purely imaginary length) element with axis g:
/// translation by Re(length) towards g.to combined with rotation by Im(length).
inline MobiusMap about_axis(const Geodesic& g, cplx length)
{
  const MobiusMap n = normalize_geodesic(g);
  const cplx h = std::exp(length / 2.0);
  const MobiusMap diag{h, 0.0, 0.0, 1.0 / h};
  return n.inverse() * diag * n;
}

inline MobiusMap elliptic_about_axis(const Geodesic& g, double angle)
{
  return about_axis(g, cplx{0.0, angle});
}

/// Hyperbolic distance from a point to a geodesic.
inline double dist_to_geodesic(const H3Point& x, const Geodesic& g)
{
  const H3Point y = normalize_geodesic(g).apply(x);
  return std::asinh(std::abs(y.horizontal()) / y.x3);
}

/// The point on g closest to a fixed reference: with g normalized to (0, inf),
/// the point at height 1 pulled back.
inline H3Point geodesic_point(const Geodesic& g, double arclength)
{
  const MobiusMap n = normalize_geodesic(g);
  return n.inverse().apply(H3Point{0.0, 0.0, std::exp(arclength)});
}

namespace detail {

/// Similarity taking x to (0,0,1): w -> (w - z0)/t0 on the boundary.
inline MobiusMap recenter(const H3Point& x)
{
  const double s = std::sqrt(x.x3);
  return {1.0 / s, -x.horizontal() / s, 0.0, s};
}

}  // namespace detail

/// Geodesic exponential map.
inline H3Point exp_h3(const H3Point& x, const TangentVector& v)
{
  const double ve = v.euclidean_norm();
  if (ve == 0.0) return x;
  const double dist = ve / x.x3;
  const double u1 = v.v1 / ve, u2 = v.v2 / ve, u3 = v.v3 / ve;
  const double h = std::sqrt(u1 * u1 + u2 * u2);
  // walk in the vertical plane through (0,0,1) spanned by (u1,u2) and the x3 axis
  const double beta = 0.5 * std::atan2(-h, u3);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const cplx ied{0.0, std::exp(dist)};
  const cplx w = (cb * ied + sb) / (-sb * ied + cb);
  H3Point local;
  if (h > 0.0) {
    local = {w.real() * u1 / h, w.real() * u2 / h, w.imag()};
  } else {
    local = {0.0, 0.0, w.imag()};
  }
  return detail::recenter(x).inverse().apply(local);
}

/// Inverse of exp_h3: the tangent vector at x pointing to y with norm d(x, y).
inline TangentVector log_h3(const H3Point& x, const H3Point& y)
{
  const H3Point yl = detail::recenter(x).apply(y);
  const double dist = dist_h3(x, y);
  TangentVector out{x, 0.0, 0.0, 0.0};
  if (dist == 0.0) return out;
  const double h = std::hypot(yl.x1, yl.x2);
  // unit tangent at i of the H^2 geodesic towards h + i*x3
  double dx = 2.0 * h, dy = h * h + yl.x3 * yl.x3 - 1.0;
  const double nrm = std::hypot(dx, dy);
  dx /= nrm;
  dy /= nrm;
  const double scale = dist * x.x3;
  if (h > 0.0) {
    out.v1 = scale * dx * yl.x1 / h;
    out.v2 = scale * dx * yl.x2 / h;
  }
  out.v3 = scale * dy;
  return out;
}

}  // namespace hmflow
