#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hmflow/error.hpp"
#include "hmflow/hyperbolic.hpp"
#include "hmflow/surface.hpp"

namespace hmflow {

inline constexpr double kCompatTolerance = 1e-6;

/// Negative-degree Laurent data of sqrt(q) at a pole of order n, up to sign.
/// For n >= 3: z^{-eps} (alpha_r / z^r + ... + alpha_1 / z) dz with
/// r = floor(n/2); coeffs[j-1] = alpha_j. For n <= 2 only leading is used.
struct PrincipalPart {
  int order = 2;
  std::vector<cplx> coeffs;
  cplx leading{0.0, 0.0};

  int r() const { return order / 2; }
  double epsilon() const { return order >= 3 && order % 2 == 1 ? 0.5 : 0.0; }
  cplx alpha(int j) const { return coeffs.at(j - 1); }

  void validate() const
  {
    if (order < 1) throw Error(Stage::differential, "pole order must be >= 1");
    if (order >= 3) {
      if (int(coeffs.size()) != r())
        throw Error(Stage::differential, "order " + std::to_string(order) + " needs " + std::to_string(r()) +
                                             " coefficients, got " + std::to_string(coeffs.size()));
      if (std::abs(coeffs.back()) == 0.0) throw Error(Stage::differential, "leading coefficient alpha_r is zero");
    }
  }

  /// Evaluate the principal differential's coefficient at z (the dz factor omitted).
  cplx evaluate(cplx z) const
  {
    cplx s = 0.0;
    for (int j = 1; j <= r(); ++j) s += coeffs[j - 1] * std::pow(z, -j);
    if (order % 2 == 1) s *= std::pow(z, -0.5);
    return s;
  }
};

inline bool same_up_to_sign(cplx a, cplx b, double tol)
{
  return std::min(std::abs(a - b), std::abs(a + b)) <= tol;
}

inline cplx residue(const PrincipalPart& pp)
{
  pp.validate();
  if (pp.order == 2) return 4.0 * kPi * cplx(0.0, 1.0) * std::sqrt(pp.leading);
  if (pp.order >= 4 && pp.order % 2 == 0) return pp.alpha(1);
  throw Error(Stage::differential, "no residue for a pole of order " + std::to_string(pp.order));
}

/// L^2 = 16 pi^2 |a| sin^2(theta/2), leading = a e^{i theta}.
inline bool compatible_with_boundary(const PrincipalPart& pp, double L, double tol = kCompatTolerance)
{
  if (pp.order > 2) throw Error(Stage::differential, "boundary compatibility is for poles of order <= 2");
  const double a = std::abs(pp.leading);
  const double th = a == 0.0 ? 0.0 : std::arg(pp.leading);
  const double s = std::sin(th / 2.0);
  return std::abs(L * L - 16.0 * kPi * kPi * a * s * s) < tol * std::max(1.0, L * L);
}

/// Principal part of q = z^{-n}(c_0 + c_1 z + ...) dz^2 from its Laurent coefficients.
inline PrincipalPart principal_part_from_laurent(int n, const std::vector<cplx>& c)
{
  PrincipalPart pp;
  pp.order = n;
  if (c.empty() || std::abs(c[0]) == 0.0) throw Error(Stage::differential, "leading Laurent coefficient is zero");
  if (n <= 2) {
    pp.leading = c[0];
    return pp;
  }
  const int r = n / 2;
  if (int(c.size()) < r) throw Error(Stage::differential, "not enough Laurent coefficients");
  // power series square root s^2 = c
  std::vector<cplx> s(r);
  s[0] = std::sqrt(c[0]);
  for (int k = 1; k < r; ++k) {
    cplx acc = c[k];
    for (int j = 1; j < k; ++j) acc -= s[j] * s[k - j];
    s[k] = acc / (2.0 * s[0]);
  }
  pp.coeffs.resize(r);
  for (int j = 0; j < r; ++j) pp.coeffs[r - 1 - j] = s[j];
  return pp;
}

// ------------------------------------------------------------------ chains

struct ChainSpec {
  MobiusMap deck;
  std::vector<BoundaryPoint> base_points;

  int m() const { return int(base_points.size()); }

  /// Point with global index k (0-based): A^{floor(k/m)} p_{k mod m}.
  BoundaryPoint point(long k) const
  {
    const long mm = m();
    long q = k / mm, r = k % mm;
    if (r < 0) {
      r += mm;
      --q;
    }
    return power(deck, q).apply(base_points[r]);
  }

  void validate() const
  {
    if (base_points.empty()) throw Error(Stage::differential, "chain needs at least one point");
    if (classify(deck) != MobiusType::loxodromic) throw Error(Stage::differential, "chain deck must be loxodromic");
    const int mm = m();
    for (int i = 0; i < 2 * mm; ++i)
      for (int j = i + 1; j < 2 * mm; ++j)
        if (chordal_distance(point(i), point(j)) < kCoincidenceTolerance)
          throw Error(Stage::differential, "chain orbit points coincide");
  }
};

inline ChainSpec chain_from_framing(const FramedRepresentation& rep, const IdealTriangulation& tri, int end_id)
{
  const auto es = ends(tri);
  if (end_id < 0 || end_id >= int(es.size())) throw Error(Stage::differential, "no end " + std::to_string(end_id));
  const auto& e = es[end_id];
  if (!e.boundary) throw Error(Stage::differential, "end " + std::to_string(end_id) + " is not a boundary component");
  ChainSpec c;
  c.deck = rep.image(peripheral_word(rep, e));
  if (classify(c.deck) != MobiusType::loxodromic)
    throw Error(Stage::differential, "peripheral monodromy of end " + std::to_string(end_id) + " is not loxodromic");
  c.base_points = end_framing(rep, e);
  return c;
}

/// Horoball decoration as a spinor v: centre v1/v2 (infinity if v2 = 0).
/// For finite centres the Euclidean diameter is 1/|v2|^2; at infinity the
/// horoball is {x3 >= |v1|^2}.
using Spinor = std::array<cplx, 2>;

inline cplx spinor_det(const Spinor& v, const Spinor& w) { return v[0] * w[1] - v[1] * w[0]; }

inline Spinor spinor_apply(const MobiusMap& m, const Spinor& v)
{
  return {m.a * v[0] + m.b * v[1], m.c * v[0] + m.d * v[1]};
}

inline Spinor spinor_of(const BoundaryPoint& p, double scale = 1.0)
{
  if (p.is_infinite()) return {cplx(scale), cplx(0.0)};
  return {scale * p.value(), cplx(scale)};
}

inline BoundaryPoint spinor_point(const Spinor& v)
{
  if (std::abs(v[1]) == 0.0) return BoundaryPoint::infinity();
  return BoundaryPoint(v[0] / v[1]);
}

/// Length of the geodesic between two disjoint horoballs: 2 ln |det(v, w)|.
inline double horoball_distance(const Spinor& v, const Spinor& w) { return 2.0 * std::log(std::abs(spinor_det(v, w))); }

/// Z-invariant decoration: scale i on p_i, transported by the deck.
inline std::vector<Spinor> chain_spinors(const ChainSpec& c, const std::vector<double>& scales, int count)
{
  std::vector<Spinor> base;
  for (int i = 0; i < c.m(); ++i) base.push_back(spinor_of(c.base_points[i], i < int(scales.size()) ? scales[i] : 1.0));
  std::vector<Spinor> out;
  MobiusMap A = MobiusMap::identity();
  for (int k = 0; k < count; ++k) {
    if (k > 0 && k % c.m() == 0) A = A * c.deck;
    out.push_back(spinor_apply(A, base[k % c.m()]));
  }
  return out;
}

/// Truncated lengths l_1..l_m of one period.
inline std::vector<double> chain_lengths(const ChainSpec& c, const std::vector<double>& scales = {})
{
  const auto v = chain_spinors(c, scales, c.m() + 1);
  std::vector<double> l;
  for (int i = 0; i < c.m(); ++i) l.push_back(horoball_distance(v[i], v[i + 1]));
  return l;
}

/// Alternating sum of truncated lengths over one period (defined up to sign).
inline double metric_residue_chain(const ChainSpec& c, const std::vector<double>& scales = {})
{
  if (c.m() % 2 != 0) throw Error(Stage::differential, "metric residue needs an even chain");
  const auto l = chain_lengths(c, scales);
  double a = 0.0;
  for (int i = 0; i < c.m(); ++i) a += (i % 2 == 0 ? -1.0 : 1.0) * l[i];
  return a;
}

struct StraightenedChain {
  ChainSpec chain;
  std::vector<double> scales;  // horoball scales reproducing the input truncated lengths
};

/// Planar chain with the same translation length and the same truncated
/// lengths for the given decoration. Orbit points sit on the positive reals
/// with deck z -> e^L z; even points at e^{2jL/m}, odd points at
/// e^{(2j+t)L/m}. For even m, t in (0, 2) is fixed by the metric residue;
/// for odd m, t = 1.
inline StraightenedChain straighten_chain_decorated(const ChainSpec& c, const std::vector<double>& scales = {})
{
  c.validate();
  const int m = c.m();
  const double L = translation_length(c.deck);
  auto family = [&](double t) {
    ChainSpec out;
    out.deck = MobiusMap{std::exp(L / 2), 0.0, 0.0, std::exp(-L / 2)};
    for (int i = 0; i < m; ++i) {
      const double pos = i % 2 == 0 ? i : i - 1 + t;
      out.base_points.push_back(BoundaryPoint(std::exp(pos * L / m)));
    }
    return out;
  };
  double t = 1.0;
  if (m % 2 == 0) {
    const double target = metric_residue_chain(c);
    double lo = 0.0, hi = 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (metric_residue_chain(family(mid)) > target ? lo : hi) = mid;
    }
    t = 0.5 * (lo + hi);
  }
  StraightenedChain out{family(t), {}};
  // log-scales: sigma_k + sigma_{k+1} = r_k, with sigma_{k+m} = sigma_k - L/2
  const auto l = chain_lengths(c, scales);
  std::vector<double> r(m);
  for (int k = 0; k < m; ++k) {
    const cplx a = out.chain.point(k).value(), b = out.chain.point(k + 1).value();
    r[k] = l[k] / 2 - std::log(std::abs(a - b));
  }
  double alt = 0.0;  // sigma_m = alt + (-1)^m sigma_0
  for (int k = 0; k < m; ++k) alt += ((m - 1 - k) % 2 == 0 ? 1.0 : -1.0) * r[k];
  double sigma = m % 2 == 0 ? 0.0 : (alt + L / 2) / 2;
  // spinor_of scales the finite point (x, 1) by s, so the horoball scale is s
  for (int k = 0; k < m; ++k) {
    out.scales.push_back(std::exp(sigma));
    sigma = r[k] - sigma;
  }
  return out;
}

inline ChainSpec straighten_chain(const ChainSpec& c) { return straighten_chain_decorated(c).chain; }

/// True when the orbit points lie on one circle of CP^1 (all cross-ratios real).
inline double chain_planarity_defect(const ChainSpec& c, int periods = 2)
{
  const int count = periods * c.m() + 3;
  std::vector<BoundaryPoint> pts;
  for (int k = 0; k < count; ++k) pts.push_back(c.point(k));
  double worst = 0.0;
  for (int k = 3; k < count; ++k) {
    const cplx z = cross_ratio(pts[0], pts[1], pts[2], pts[k]);
    worst = std::max(worst, std::abs(z.imag()) / std::max(1.0, std::abs(z)));
  }
  for (const auto& f : fixed_points(c.deck)) {
    if (chordal_distance(f, pts[0]) < 1e-9 || chordal_distance(f, pts[1]) < 1e-9 || chordal_distance(f, pts[2]) < 1e-9)
      continue;
    const cplx z = cross_ratio(pts[0], pts[1], pts[2], f);
    worst = std::max(worst, std::abs(z.imag()) / std::max(1.0, std::abs(z)));
  }
  return worst;
}

inline bool compatible_with_chain(const PrincipalPart& pp, const ChainSpec& c, double tol = kCompatTolerance)
{
  if (pp.order < 3) throw Error(Stage::differential, "chain compatibility is for poles of order >= 3");
  if (c.m() != pp.order - 2) return false;
  if (pp.order % 2 == 1) return true;
  const double re = residue(pp).real();
  const double a = metric_residue_chain(c);
  return std::min(std::abs(re - a), std::abs(re + a)) < tol * std::max(1.0, std::abs(a));
}

/// Angular chart partition around a pole of order n >= 3 in the coordinate
/// where the principal part is alpha_r z^{-n/2}: n-2 horizontal and n-2
/// vertical sectors of opening 2 pi/(n-2), alternating and overlapping in
/// quarter sectors.
struct HalfPlaneDecomposition {
  int horizontal = 0, vertical = 0;
  std::vector<double> horizontal_centres, vertical_centres;
  double opening = 0.0;
};

inline HalfPlaneDecomposition halfplane_decomposition(int n)
{
  if (n < 3) throw Error(Stage::differential, "half-plane decomposition needs a pole of order >= 3");
  HalfPlaneDecomposition d;
  d.horizontal = d.vertical = n - 2;
  d.opening = 2.0 * kPi / (n - 2);
  for (int j = 0; j < n - 2; ++j) {
    d.horizontal_centres.push_back(j * d.opening);
    d.vertical_centres.push_back((j + 0.5) * d.opening);
  }
  return d;
}

// ------------------------------------------------------ model differential

/// Quadratic differential given by its pole/zero divisor on the compact core
/// of a genus-g surface; checks 4g - 4 + sum(pole orders) = sum(zero orders).
struct ModelDifferential {
  int genus = 0;
  struct Pole {
    int order;
    std::vector<cplx> laurent;  // q = z^{-order}(c_0 + c_1 z + ...) dz^2 in the end chart
    std::optional<cplx> position{};  // location in the core chart; unset means off-chart
  };
  std::vector<Pole> poles;
  struct Zero {
    cplx position;
    int order;
  };
  std::vector<Zero> zeros;
  cplx scale{1.0};  // core chart model: q = scale * prod (z - z_j)^{n_j} / prod (z - p_k)^{n_k}

  /// Coefficient of dz^2 in the core chart.
  cplx chart_value(cplx z) const
  {
    cplx q = scale;
    for (const auto& x : zeros) q *= std::pow(z - x.position, x.order);
    for (const auto& x : poles)
      if (x.position) q /= std::pow(z - *x.position, x.order);
    return q;
  }

  /// chart_value with the factor belonging to divisor point `skip` removed.
  cplx chart_value_without(cplx z, cplx skip) const
  {
    cplx q = scale;
    for (const auto& x : zeros)
      if (x.position != skip) q *= std::pow(z - x.position, x.order);
    for (const auto& x : poles)
      if (x.position && *x.position != skip) q /= std::pow(z - *x.position, x.order);
    return q;
  }

  void validate() const
  {
    int p = 0, z = 0;
    for (const auto& x : poles) p += x.order;
    for (const auto& x : zeros) z += x.order;
    if (4 * genus - 4 + p != z)
      throw Error(Stage::differential, "degree relation fails: 4g-4+sum(poles)=" + std::to_string(4 * genus - 4 + p) +
                                           " but sum(zeros)=" + std::to_string(z));
  }

  PrincipalPart principal_part(int pole) const
  {
    const auto& p = poles.at(pole);
    return principal_part_from_laurent(p.order, p.laurent);
  }
};

}  // namespace hmflow
