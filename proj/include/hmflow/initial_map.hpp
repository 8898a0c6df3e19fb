#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hmflow/heat_flow.hpp"
#include "hmflow/quad_diff.hpp"

namespace hmflow {

/// C^2 ramp 6s^5 - 15s^4 + 10s^3, clamped to [0, 1].
inline double ramp(double s)
{
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

inline double ramp_d1(double s) { return s <= 0.0 || s >= 1.0 ? 0.0 : 30.0 * s * s * (1.0 - s) * (1.0 - s); }
inline double ramp_d2(double s) { return s <= 0.0 || s >= 1.0 ? 0.0 : 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s); }

/// Point at weight w along the geodesic from x to y.
inline H3Point geodesic_blend(const H3Point& x, const H3Point& y, double w)
{
  if (w <= 0.0) return x;
  if (w >= 1.0) return y;
  TangentVector v = log_h3(x, y);
  v.v1 *= w;
  v.v2 *= w;
  v.v3 *= w;
  return exp_h3(x, v);
}

// ------------------------------------------------------------------ cusps

struct ParabolicNormal {
  MobiusMap conj;  // P = conj * (z -> z + tau) * conj^-1
  cplx tau;
};

inline ParabolicNormal parabolic_normalizer(const MobiusMap& P)
{
  if (classify(P) != MobiusType::parabolic)
    throw Error(Stage::initial_map, std::string("cusp peripheral is ") + type_name(classify(P)) + ", not parabolic");
  // double root of c z^2 + (d - a) z - b; the discriminant form loses half the digits
  const double scale = std::max({std::abs(P.a), std::abs(P.b), std::abs(P.c), std::abs(P.d)});
  MobiusMap C = MobiusMap::identity();
  if (std::abs(P.c) > 1e-14 * scale) C = {(P.a - P.d) / (2.0 * P.c), -1.0, 1.0, 0.0};
  MobiusMap T = C.inverse() * P * C;
  if (T.a.real() < 0.0) T = T.negated();
  return {C, T.b / T.a};
}

/// Isometric embedding of a horodisk chart (deck x -> x + period) onto a
/// vertical totally geodesic plane, conjugated so that the chart deck goes
/// to the peripheral P.
inline H3Point horodisk_map(cplx z, const MobiusMap& P, double period = 1.0)
{
  const auto n = parabolic_normalizer(P);
  const cplx w = n.tau * (z.real() / period);
  return n.conj.apply(H3Point{w.real(), w.imag(), std::abs(n.tau) * z.imag() / period});
}

// ---------------------------------------------------------- collapsing maps

/// Collapse angle theta with c = tan(theta) from the leading coefficient
/// a e^{i theta'} of an order-two pole: theta = (theta' - pi)/2.
inline double collapse_angle_from_principal_part(const PrincipalPart& pp)
{
  if (pp.order != 2) throw Error(Stage::initial_map, "collapse angle needs a pole of order two");
  if (std::abs(pp.leading) == 0.0) throw Error(Stage::initial_map, "order-two pole with zero leading coefficient");
  return 0.5 * (std::arg(pp.leading) - kPi);
}

/// (x, y) -> axis point at arclength x - y tan(theta), on a chart of
/// circumference translation_length(P) (deck x -> x + L).
inline H3Point collapse_map(cplx z, double theta, const MobiusMap& P)
{
  const double c = std::cos(theta);
  if (std::abs(c) < 1e-12) throw Error(Stage::initial_map, "collapse angle |theta| = pi/2 is degenerate");
  if (classify(P) != MobiusType::loxodromic)
    throw Error(Stage::initial_map, std::string("cylinder peripheral is ") + type_name(classify(P)) + ", not loxodromic");
  return geodesic_point(axis(P), z.real() - z.imag() * std::sin(theta) / c);
}

// ------------------------------------------------------------ crown bending

/// One hinge of a crown end: inside the half-strip the premap is rotated
/// about `hinge` by ramp(s) * angle; `base` is the isometry already applied
/// on the preceding vertical half-plane.
struct CrownHinge {
  Geodesic hinge;
  double angle = 0.0;
};

enum class CrownRegion { vertical, strip };

/// Bent crown end value from the premap value h. On vertical half-planes the
/// cumulative isometry `base` is applied; on a strip with coordinate s in
/// [0, 1] the rotation about the hinge interpolates with the ramp.
inline H3Point crown_map(const H3Point& h, const MobiusMap& base, CrownRegion region, double s = 0.0,
                         const CrownHinge& hinge = {})
{
  if (region == CrownRegion::vertical || hinge.angle == 0.0) return base.apply(h);
  return (base * elliptic_about_axis(hinge.hinge, ramp(s) * hinge.angle)).apply(h);
}

// ------------------------------------------------------------- crown model

/// Explicit model map near a crown end with an odd pole of order n >= 3 and
/// leading coefficient alpha_r, on the log chart w = log z of the end
/// (deck w -> w + 2 pi i). In zeta = -(2 alpha_r / kappa) z^{-kappa},
/// kappa = n/2 - 1, q = dzeta^2/4; zeta-sectors centred at arg = k pi are
/// vertical half-planes sent into the cusp at the tip p_k, those centred at
/// k pi + pi/2 are horizontal half-planes sent by the Fermi-coordinate
/// harmonic map onto a neighbourhood of the chain geodesic (p_k, p_{k+1}).
/// Both pieces are glued by geodesic blending with a ramp in the angle.
class CrownEndModel {
 public:
  CrownEndModel(ChainSpec chain, int order, cplx leading, std::vector<double> scales = {})
      : chain_(std::move(chain)), order_(order), leading_(leading), scales_(std::move(scales))
  {
    chain_.validate();
    if (order_ < 3 || order_ % 2 == 0)
      throw Error(Stage::initial_map, "crown model needs an odd pole order >= 3, got " + std::to_string(order_));
    if (chain_.m() != order_ - 2)
      throw Error(Stage::initial_map, "crown with " + std::to_string(chain_.m()) + " tips per period cannot carry a pole of order " +
                                          std::to_string(order_));
    if (std::abs(leading_) == 0.0) throw Error(Stage::initial_map, "zero leading coefficient");
    kappa_ = 0.5 * order_ - 1.0;
    coeff_ = -2.0 * leading_ / kappa_;
    const int m = chain_.m();
    const auto v = chain_spinors(chain_, scales_, m + 1);
    std::vector<double> l(m);
    for (int k = 0; k < m; ++k) l[k] = horoball_distance(v[k], v[k + 1]);
    // log-heights c_{k+1} = -l_k - c_k, periodic; solvable for odd m
    offset_.assign(m, 0.0);
    double c = 0.0;
    for (int k = 0; k < m; ++k) c = -l[k] - c;
    offset_[0] = 0.5 * c;
    for (int k = 0; k + 1 < m; ++k) offset_[k + 1] = -l[k] - offset_[k];
  }

  const ChainSpec& chain() const { return chain_; }
  int order() const { return order_; }
  cplx leading() const { return leading_; }
  double kappa() const { return kappa_; }

  /// Image of the chart deck w -> w + 2 pi i.
  MobiusMap deck_image() const { return chain_.deck.inverse(); }

  /// zeta modulus and continuous argument at a log-chart point.
  std::pair<double, double> zeta_polar(cplx w) const
  {
    return {std::abs(coeff_) * std::exp(-kappa_ * w.real()), std::arg(coeff_) - kappa_ * w.imag()};
  }

  /// Log chart abscissa where |zeta| = rho.
  double chart_x(double rho) const { return -std::log(rho / std::abs(coeff_)) / kappa_; }

  H3Point operator()(cplx w) const
  {
    const auto [rho, phi] = zeta_polar(w);
    const long kv = std::lround(phi / kPi);
    const double pv = phi - kPi * double(kv);  // in [-pi/2, pi/2]
    const double wh = ramp((std::abs(pv) - blend_lo) / (blend_hi - blend_lo));
    H3Point vert, horiz;
    if (wh < 1.0) vert = vertical(kv, rho * std::cos(pv), rho * std::sin(pv));
    if (wh > 0.0) {
      const long kh = pv >= 0.0 ? kv : kv - 1;
      const double ph = pv >= 0.0 ? pv : pv + kPi;
      horiz = horizontal(kh, rho * std::cos(ph), rho * std::sin(ph));
    }
    if (wh <= 0.0) return vert;
    if (wh >= 1.0) return horiz;
    return geodesic_blend(vert, horiz, wh);
  }

  double blend_lo = 3.0 * kPi / 16.0, blend_hi = 5.0 * kPi / 16.0;

 private:
  struct Frame {
    MobiusMap to_cusp;  // sends p_k to infinity and its horoball to {x3 >= 1}
    cplx next, prev;    // images of p_{k+1} and p_{k-1}
    double c;           // log-height offset of the sector
  };

  Frame frame(long k) const
  {
    const long m = chain_.m();
    long q = k / m, r = k % m;
    if (r < 0) {
      r += m;
      --q;
    }
    const Spinor base = spinor_of(chain_.base_points[r], r < long(scales_.size()) ? scales_[r] : 1.0);
    const Spinor v = spinor_apply(power(chain_.deck, q), base);
    MobiusMap N = std::abs(v[0]) >= std::abs(v[1]) ? MobiusMap{1.0 / v[0], 0.0, -v[1], v[0]}
                                                   : MobiusMap{0.0, 1.0 / v[1], -v[1], v[0]};
    Frame f{N, 0.0, 0.0, offset_[r]};
    const auto pn = N.apply(chain_.point(k + 1)), pp = N.apply(chain_.point(k - 1));
    if (pn.is_infinite() || pp.is_infinite()) throw Error(Stage::initial_map, "crown tips coincide");
    f.next = pn.value();
    f.prev = pp.value();
    return f;
  }

  // cusp sector k: x = prev -> next across the sector, height e^{xi + c}
  H3Point vertical(long k, double xi, double eta) const
  {
    const Frame f = frame(k);
    const double s = 0.5 * (1.0 + std::tanh(eta));
    const cplx x = f.prev + (f.next - f.prev) * s;
    return f.to_cusp.inverse().apply(H3Point::from(x, std::exp(xi + f.c)));
  }

  // Fermi map about the geodesic (p_k, p_{k+1}) on the half-plane eta > 0:
  // arclength xi towards p_k, distance t with tanh(t/2) = e^{-eta}
  H3Point horizontal(long k, double xi, double eta) const
  {
    const Frame f = frame(k);
    const double t = 2.0 * std::atanh(std::exp(-eta));
    const double Y = std::exp(xi + f.c);
    const cplx d = (f.prev - f.next) / std::abs(f.prev - f.next);
    return f.to_cusp.inverse().apply(H3Point::from(f.next + d * (Y * std::tanh(t)), Y / std::cosh(t)));
  }

  ChainSpec chain_;
  int order_;
  cplx leading_;
  std::vector<double> scales_;
  double kappa_ = 0.5;
  cplx coeff_;
  std::vector<double> offset_;
};

// ------------------------------------------------------------ compatibility

/// Prescription at one end: an order <= 2 pole is checked against the
/// boundary length (0 for a cusp), a higher pole against the end's chain.
struct EndPrescription {
  int end = 0;
  PrincipalPart pp;
  double boundary_length = 0.0;
  std::optional<ChainSpec> chain{};
};

inline void check_end_compatibility(const std::vector<EndPrescription>& ends, double tol = kCompatTolerance)
{
  for (const auto& e : ends) {
    e.pp.validate();
    const std::string who = "principal part at end " + std::to_string(e.end);
    if (e.pp.order <= 2) {
      if (e.pp.order == 2 && !compatible_with_boundary(e.pp, e.boundary_length, tol))
        throw Error(Stage::initial_map, who + " violates L^2 = 16 pi^2 |a| sin^2(theta/2) (L = " +
                                            std::to_string(e.boundary_length) + ")");
    } else {
      if (!e.chain) throw Error(Stage::initial_map, who + " has order >= 3 but the end carries no chain");
      if (!compatible_with_chain(e.pp, *e.chain, tol))
        throw Error(Stage::initial_map, who + " is not compatible with its " + std::to_string(e.chain->m()) +
                                            "-chain (needs m = n - 2 and matching residue)");
    }
  }
}

// ----------------------------------------------------------------- premap

struct PremapResult {
  MapState state;
  Diagnostics diag;
  double premap_quality = 0.0;  // final sup |tau|
  double planarity = 0.0;       // max |x2| over the state
};

inline bool is_real_representation(const std::vector<MobiusMap>& rho, double tol = 1e-12)
{
  for (const auto& g : rho)
    for (cplx x : {g.a, g.b, g.c, g.d})
      if (std::abs(x.imag()) > tol * std::max(1.0, std::abs(x))) return false;
  return true;
}

/// Approximates the Fuchsian harmonic diffeomorphism composed with the
/// equatorial embedding by running the flow from a planar start. A real
/// representation preserves {x2 = 0} and so does the flow.
inline PremapResult fuchsian_premap(const EquivariantProblem& p, const MapState& start, const FlowConfig& cfg = {},
                                    const std::vector<EndPrescription>& ends = {})
{
  check_end_compatibility(ends);
  if (!is_real_representation(p.rho())) throw Error(Stage::initial_map, "premap needs a real (Fuchsian) representation");
  for (const auto& x : start.u)
    if (std::abs(x.x2) > 1e-12) throw Error(Stage::initial_map, "premap start is not in the plane x2 = 0");
  PremapResult out;
  auto r = flow(p, start, cfg);
  out.state = std::move(r.state);
  out.diag = std::move(r.diag);
  out.premap_quality = out.diag.sup_tau.back();
  for (const auto& x : out.state.u) out.planarity = std::max(out.planarity, std::abs(x.x2));
  return out;
}

// --------------------------------------------------------------- assembly

/// An end map glued over a collar: weight 0 on the core side, 1 on the end.
struct EndBlend {
  std::string name;
  std::function<double(cplx)> weight;
  std::function<H3Point(cplx)> map;
};

inline double collar_weight(double s, double lo, double hi) { return ramp((s - lo) / (hi - lo)); }

struct InitialMap {
  MapState state;
  double equivariance = 0.0;
};

/// u0 = geodesic blend of the premap towards each end map with its collar
/// weight; collars of different ends must not overlap.
inline InitialMap assemble_u0(const EquivariantProblem& p, const std::function<H3Point(cplx)>& premap,
                              const std::vector<EndBlend>& ends)
{
  auto value = [&](cplx z) {
    const EndBlend* active = nullptr;
    double w = 0.0;
    for (const auto& e : ends) {
      const double we = e.weight(z);
      if (we <= 0.0) continue;
      if (active)
        throw Error(Stage::initial_map, "collars of " + active->name + " and " + e.name + " overlap at chart point (" +
                                            std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
      active = &e;
      w = we;
    }
    if (!active) return premap(z);
    if (w >= 1.0) return active->map(z);
    return geodesic_blend(premap(z), active->map(z), w);
  };
  InitialMap out{make_state(p, value), 0.0};
  out.equivariance = equivariance_residual(p, out.state);
  return out;
}

// ----------------------------------------------------------- tension audit

struct RegionTension {
  std::string name;
  int count = 0;
  double sup = 0.0;
  bool fitted = false;
  double slope = 0.0;  // d log|tau| / d(q-distance)
  double r2 = 0.0;
};

struct TensionAudit {
  std::vector<RegionTension> regions;
  double sup = 0.0;
  const RegionTension& region(const std::string& name) const
  {
    for (const auto& r : regions)
      if (r.name == name) return r;
    throw Error(Stage::initial_map, "no audit region named " + name);
  }
};

/// Tension of a smooth map at a chart point by central differences with
/// step h; lambda2 is the domain conformal factor there.
inline TangentVector pointwise_tension(const std::function<H3Point(cplx)>& f, cplx z, double lambda2, double h = 1e-4)
{
  const H3Point u = f(z);
  const H3Point px = f(z + h), mx = f(z - h), py = f(z + cplx(0.0, h)), my = f(z - cplx(0.0, h));
  const detail::Vec3 c = detail::to_vec(u), a = detail::to_vec(px), b = detail::to_vec(mx), d = detail::to_vec(py),
                     e = detail::to_vec(my);
  detail::Vec3 lap, gx, gy;
  for (int k = 0; k < 3; ++k) {
    lap[k] = (a[k] + b[k] + d[k] + e[k] - 4.0 * c[k]) / (h * h);
    gx[k] = (a[k] - b[k]) / (2.0 * h);
    gy[k] = (d[k] - e[k]) / (2.0 * h);
  }
  auto dot = [&](int i, int j) { return gx[i] * gx[j] + gy[i] * gy[j]; };
  const double t = u.x3;
  TangentVector out{u, 0.0, 0.0, 0.0};
  out.v1 = (lap[0] - 2.0 / t * dot(0, 2)) / lambda2;
  out.v2 = (lap[1] - 2.0 / t * dot(1, 2)) / lambda2;
  out.v3 = (lap[2] + (dot(0, 0) + dot(1, 1) - dot(2, 2)) / t) / lambda2;
  return out;
}

/// Region of the audit: membership of a canonical vertex and, for crown
/// regions, the q-distance used in the decay regression.
struct AuditRegion {
  std::string name;
  std::function<bool(int)> contains;
  std::function<double(int)> distance = nullptr;
  std::function<H3Point(cplx)> analytic = nullptr;  // when set, tension by differences of the analytic end map
};

/// Ordinary least squares y = a + b x; returns {b, R^2}.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y)
{
  const double n = double(x.size());
  if (x.size() < 3) return {0.0, 0.0};
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, 0.0};
  const double b = sxy / sxx;
  return {b, sxy * sxy / (sxx * syy)};
}

/// Per-region sup of |tau| over free canonical vertices; crown regions also
/// get a regression of log|tau| against q-distance, binned by distance so
/// that the fit follows the envelope rather than the angular structure.
inline TensionAudit tension_audit(const EquivariantProblem& p, const MapState& s, const std::vector<AuditRegion>& regions,
                                  int bins = 12)
{
  const auto& m = p.mesh();
  const auto tau = tension_field(p, s);
  TensionAudit out;
  out.sup = sup_tension(m, tau);
  for (const auto& reg : regions) {
    RegionTension r;
    r.name = reg.name;
    std::vector<std::pair<double, double>> pts;
    for (int c : m.canonical) {
      if (m.vertices[c].dirichlet || !reg.contains(c)) continue;
      const double t = reg.analytic ? pointwise_tension(reg.analytic, m.vertices[c].z, m.vertices[c].lambda2).norm()
                                    : tau[c].norm();
      ++r.count;
      r.sup = std::max(r.sup, t);
      if (reg.distance) pts.push_back({reg.distance(c), t});
    }
    if (reg.distance && pts.size() >= 3) {
      double lo = 1e300, hi = -1e300;
      for (const auto& [d, t] : pts) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      std::vector<double> peak(bins, 0.0);
      for (const auto& [d, t] : pts) {
        const int b = std::min(bins - 1, int((d - lo) / (hi - lo + 1e-300) * bins));
        peak[b] = std::max(peak[b], t);
      }
      std::vector<double> x, y;
      for (int b = 0; b < bins; ++b)
        if (peak[b] > 0.0) {
          x.push_back(lo + (b + 0.5) * (hi - lo) / bins);
          y.push_back(std::log(peak[b]));
        }
      std::tie(r.slope, r.r2) = linear_fit(x, y);
      r.fitted = x.size() >= 3;
    }
    out.regions.push_back(r);
  }
  return out;
}

}  // namespace hmflow
