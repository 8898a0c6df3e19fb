#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hmflow/error.hpp"

namespace hmflow {

// Smoothing of the flat metric |z|^n |dz|^2 across a zero of order n by
// psi(r) = a r^{4n} + b r^{2n} + c on r < eps.

struct ZeroInterpCoeffs {
  int n = 1;
  double eps = 0.0;
  double a = 0.0, b = 0.0, c = 0.0;

  double psi(double r) const
  {
    const double r2n = std::pow(r, 2 * n);
    return (a * r2n + b) * r2n + c;
  }
  double dpsi(double r) const
  {
    return 4.0 * n * a * std::pow(r, 4 * n - 1) + 2.0 * n * b * std::pow(r, 2 * n - 1);
  }
  double d2psi(double r) const
  {
    return 4.0 * n * (4 * n - 1) * a * std::pow(r, 4 * n - 2) +
           2.0 * n * (2 * n - 1) * b * std::pow(r, 2 * n - 2);
  }
  // abR^2 + 4acR + bc with R = r^{2n}; its sign is the sign of Delta log psi.
  double p(double r) const
  {
    const double R = std::pow(r, 2 * n);
    return (a * b * R + 4.0 * a * c) * R + b * c;
  }
  double p_critical_value() const { return -(4 * a * c) * (4 * a * c) / (4 * a * b) + b * c; }
  // Conformal factor f_eps: psi inside, r^n outside.
  double factor(double r) const { return r < eps ? psi(r) : std::pow(r, n); }
  double curvature(double r) const
  {
    if (r >= eps) return 0.0;
    const double ps = psi(r);
    const double lap_log = 4.0 * n * n * std::pow(r, 2 * n - 2) * p(r) / (ps * ps);
    return -0.5 * lap_log / ps;
  }
};

inline ZeroInterpCoeffs zero_interp_coeffs(int n, double eps)
{
  if (n < 1) throw Error(Stage::metric, "zero order must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Stage::metric, "zero interpolation needs 0 < eps < 1");
  ZeroInterpCoeffs z;
  z.n = n;
  z.eps = eps;
  const double en = std::pow(eps, n);
  z.a = -1.0 / (8.0 * en * en * en);
  z.b = 3.0 / (4.0 * en);
  z.c = 3.0 / 8.0 * en;
  return z;
}

struct ZeroInterpReport {
  double residual_value = 0.0, residual_d1 = 0.0, residual_d2 = 0.0;  // scaled
  double min_p = 0.0, min_p_at = 0.0;
  double critical_value = 0.0;
  double max_curvature = 0.0, max_curvature_at = 0.0;
  double limit_at_zero = 0.0;
  bool signs_ok = false;
  bool ok = false;
  std::vector<std::string> violations;
};

inline ZeroInterpReport zero_interp_verify(int n, double eps, int samples = 2000)
{
  const auto z = zero_interp_coeffs(n, eps);
  ZeroInterpReport rep;
  const double en = std::pow(eps, n);
  // each equation scaled by the magnitude of its largest term
  rep.residual_value = std::abs(z.psi(eps) - en) /
                       std::max({std::abs(z.a) * std::pow(eps, 4 * n), std::abs(z.b) * std::pow(eps, 2 * n), en});
  const double t1 = 4.0 * n * std::abs(z.a) * std::pow(eps, 4 * n - 1);
  rep.residual_d1 = std::abs(z.dpsi(eps) - n * std::pow(eps, n - 1)) / std::max(t1, n * std::pow(eps, n - 1));
  const double t2 = 4.0 * n * (4 * n - 1) * std::abs(z.a) * std::pow(eps, 4 * n - 2);
  rep.residual_d2 = std::abs(z.d2psi(eps) - n * (n - 1) * std::pow(eps, n - 2)) / std::max(1e-300, t2);
  rep.signs_ok = z.a < 0 && z.b > 0 && z.c > 0;
  if (!rep.signs_ok) rep.violations.push_back("sign pattern a<0<b, c>0 fails");

  const double pscale = std::abs(z.b * z.c);
  rep.min_p = pscale;
  rep.max_curvature = -1e300;
  for (int j = 1; j <= samples; ++j) {
    const double r = eps * j / samples;
    const double pv = z.p(r) / pscale;
    if (pv < rep.min_p) { rep.min_p = pv; rep.min_p_at = r; }
    const double k = z.curvature(r);
    if (k > rep.max_curvature) { rep.max_curvature = k; rep.max_curvature_at = r; }
  }
  rep.critical_value = z.p_critical_value();
  rep.limit_at_zero = z.psi(0.0);
  if (rep.min_p < -1e-12)
    rep.violations.push_back("p(r) negative at r=" + std::to_string(rep.min_p_at));
  if (rep.critical_value < 0) rep.violations.push_back("critical value of p negative");
  if (rep.max_curvature > 1e-10)
    rep.violations.push_back("positive curvature at r=" + std::to_string(rep.max_curvature_at));
  rep.ok = rep.violations.empty();
  return rep;
}

// Interpolation between the hyperbolic cusp factor 1/(r^2 ln^2 r) and the flat
// factor 1/r on the annulus eps <= r <= 2/3, written as e^{2u(r)} |dz|^2.

namespace cusp {

inline constexpr double kOuter = 2.0 / 3.0;

inline double f(double r) { return -std::log(r * std::abs(std::log(r))); }
inline double df(double r) { return -1.0 / r - 1.0 / (r * std::log(r)); }
inline double d2f(double r)
{
  const double l = std::log(r);
  return 1.0 / (r * r) + (l + 1.0) / (r * r * l * l);
}
inline double g(double r) { return -0.5 * std::log(r); }
inline double dg(double r) { return -0.5 / r; }
inline double d2g(double r) { return 0.5 / (r * r); }
inline double kf(double r) { return -1.0 - 1.0 / std::log(r); }
inline double dkf(double r)
{
  const double l = std::log(r);
  return 1.0 / (r * l * l);
}
inline constexpr double kg = -0.5;

inline double target_integral(double eps)
{
  return g(kOuter) - f(eps) - kf(eps) * std::log(kOuter / eps);
}
inline double alpha(double eps) { return (kg - kf(eps)) * std::log(kOuter / eps); }

}  // namespace cusp

enum class Segment { cusp, interpolation, flat };

inline const char* segment_name(Segment s)
{
  switch (s) {
    case Segment::cusp: return "cusp";
    case Segment::interpolation: return "interpolation";
    case Segment::flat: return "flat";
  }
  return "?";
}

// Piecewise-linear v on [eps, 2/3]: a falling ramp on [eps, eps0] and a tent on [a, b].
struct BumpSpec {
  double eps = 0.0;
  double eps0 = 0.0;
  double a = 0.0, b = 0.0;
  double h1 = 0.0;  // v(eps)
  double h2 = 0.0;  // tent peak

  std::vector<double> knots() const { return {eps, eps0, a, 0.5 * (a + b), b, cusp::kOuter}; }
  double v(double s) const
  {
    if (s >= eps && s <= eps0) return h1 * (eps0 - s) / (eps0 - eps);
    const double m = 0.5 * (a + b);
    if (s > a && s <= m) return h2 * (s - a) / (m - a);
    if (s > m && s < b) return h2 * (b - s) / (b - m);
    return 0.0;
  }
};

// k(s) = A + B s + C s^2 on [r0, r1]
struct KPiece {
  double r0, r1;
  double A, B, C;
  double u0;  // u(r0)

  double k(double s) const { return A + (B + C * s) * s; }
  double dk(double s) const { return B + 2 * C * s; }
  double u(double s) const { return u0 + A * std::log(s / r0) + B * (s - r0) + 0.5 * C * (s * s - r0 * r0); }
};

struct PoleInterp {
  BumpSpec bump;
  std::vector<KPiece> pieces;

  Segment segment(double r) const
  {
    if (r <= bump.eps) return Segment::cusp;
    if (r < cusp::kOuter) return Segment::interpolation;
    return Segment::flat;
  }
  const KPiece& piece(double r) const
  {
    for (const auto& p : pieces)
      if (r <= p.r1) return p;
    return pieces.back();
  }
  double u(double r) const
  {
    switch (segment(r)) {
      case Segment::cusp: return cusp::f(r);
      case Segment::flat: return cusp::g(r);
      default: return piece(r).u(r);
    }
  }
  double du(double r) const
  {
    switch (segment(r)) {
      case Segment::cusp: return cusp::df(r);
      case Segment::flat: return cusp::dg(r);
      default: return piece(r).k(r) / r;
    }
  }
  double d2u(double r) const
  {
    switch (segment(r)) {
      case Segment::cusp: return cusp::d2f(r);
      case Segment::flat: return cusp::d2g(r);
      default: {
        const auto& p = piece(r);
        return p.dk(r) / r - p.k(r) / (r * r);
      }
    }
  }
  double k(double r) const { return r * du(r); }
  double curvature(double r) const { return -(d2u(r) + du(r) / r) * std::exp(-2.0 * u(r)); }
  // e^{2u}: the conformal factor relative to |dz|^2
  double factor(double r) const { return std::exp(2.0 * u(r)); }
};

namespace detail {

// Integrate k over the knots of v; returns pieces and the value of u at 2/3.
inline std::vector<KPiece> integrate_bump(const BumpSpec& bs)
{
  std::vector<KPiece> out;
  const auto kn = bs.knots();
  const double vals[] = {bs.h1, 0.0, 0.0, bs.h2, 0.0, 0.0};
  double kcur = cusp::kf(bs.eps);
  double ucur = cusp::f(bs.eps);
  for (std::size_t i = 0; i + 1 < kn.size(); ++i) {
    const double r0 = kn[i], r1 = kn[i + 1];
    if (r1 <= r0) continue;
    const double vl = (i == 1) ? 0.0 : vals[i], vr = vals[i + 1];
    const double q = (vr - vl) / (r1 - r0);
    const double p = vl - q * r0;
    KPiece kp{r0, r1, kcur - p * r0 - 0.5 * q * r0 * r0, p, 0.5 * q, ucur};
    out.push_back(kp);
    kcur = kp.k(r1);
    ucur = kp.u(r1);
  }
  return out;
}

inline double u_outer(const std::vector<KPiece>& pieces) { return pieces.back().u(pieces.back().r1); }

struct BumpFamily {
  double eps, eps0, h1, mass2, width;
};

inline BumpFamily bump_family(double eps)
{
  const double h1 = cusp::dkf(eps);
  const double dk = cusp::kg - cusp::kf(eps);
  const double delta = std::min(eps, dk / h1);
  const double eps0 = eps + delta;
  const double mass2 = dk - 0.5 * h1 * delta;
  const double width = std::min(0.05, (cusp::kOuter - eps0) / 8.0);
  return {eps, eps0, h1, mass2, width};
}

inline BumpSpec bump_at(const BumpFamily& fam, double b)
{
  BumpSpec bs;
  bs.eps = fam.eps;
  bs.eps0 = fam.eps0;
  bs.h1 = fam.h1;
  bs.b = b;
  bs.a = b - fam.width;
  bs.h2 = 2.0 * fam.mass2 / fam.width;
  return bs;
}

// I(b) minus the required value; decreasing in b.
inline double integral_gap(const BumpFamily& fam, double b)
{
  const auto pieces = integrate_bump(bump_at(fam, b));
  return u_outer(pieces) - cusp::g(cusp::kOuter);
}

inline bool pole_feasible(double eps)
{
  if (!(eps > 0.0 && eps < std::exp(-2.0))) return false;
  if (cusp::kf(eps) >= cusp::kg) return false;
  const double rhs = cusp::target_integral(eps);
  if (!(rhs > 0.0 && rhs < cusp::alpha(eps))) return false;
  const auto fam = bump_family(eps);
  if (fam.mass2 <= 0.0) return false;
  const double blo = fam.eps0 + fam.width, bhi = cusp::kOuter;
  return integral_gap(fam, blo) > 0.0 && integral_gap(fam, bhi) < 0.0;
}

}  // namespace detail

// Largest eps for which the two-window construction closes, by bisection.
inline double pole_eps_max()
{
  double lo = 1e-6, hi = std::exp(-2.0);
  if (!detail::pole_feasible(lo)) throw Error(Stage::metric, "pole interpolation infeasible even at eps=1e-6");
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (detail::pole_feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

inline double pole_default_eps() { return std::min(0.01, 0.5 * pole_eps_max()); }

inline PoleInterp pole_interp(double eps)
{
  if (!(eps > 0.0)) throw Error(Stage::metric, "pole interpolation needs eps > 0");
  if (!(cusp::kf(eps) < cusp::kg))
    throw Error(Stage::metric, "k(eps) < k(2/3) fails for eps=" + std::to_string(eps));
  const double rhs = cusp::target_integral(eps);
  if (!(rhs > 0.0)) throw Error(Stage::metric, "right-hand side of the integral condition is not positive");
  if (!(rhs < cusp::alpha(eps))) throw Error(Stage::metric, "right-hand side of the integral condition exceeds alpha");
  const auto fam = detail::bump_family(eps);
  if (fam.mass2 <= 0.0) throw Error(Stage::metric, "first window carries all of k(2/3)-k(eps)");
  double lo = fam.eps0 + fam.width, hi = cusp::kOuter;
  if (!(detail::integral_gap(fam, lo) > 0.0 && detail::integral_gap(fam, hi) < 0.0))
    throw Error(Stage::metric, "tent position cannot match the integral condition for eps=" + std::to_string(eps));
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (detail::integral_gap(fam, mid) > 0.0 ? lo : hi) = mid;
  }
  PoleInterp pi;
  pi.bump = detail::bump_at(fam, 0.5 * (lo + hi));
  pi.pieces = detail::integrate_bump(pi.bump);
  return pi;
}

struct RadialProfile {
  std::vector<double> r, u, du, d2u;
  std::vector<Segment> tag;
  BumpSpec bump;
};

inline RadialProfile pole_interp_profile(double eps, int samples = 4096)
{
  const auto pi = pole_interp(eps);
  RadialProfile prof;
  prof.bump = pi.bump;
  const double rmin = std::min(1e-6, eps / 10.0), rmax = 0.999;
  std::vector<double> grid;
  grid.reserve(samples + 8);
  for (int j = 0; j < samples; ++j) grid.push_back(rmin * std::pow(rmax / rmin, double(j) / (samples - 1)));
  for (double k : pi.bump.knots()) grid.push_back(k);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double r : grid) {
    prof.r.push_back(r);
    prof.u.push_back(pi.u(r));
    prof.du.push_back(pi.du(r));
    prof.d2u.push_back(pi.d2u(r));
    prof.tag.push_back(pi.segment(r));
  }
  return prof;
}

struct EndpointMatch {
  double value = 0.0, d1 = 0.0, d2 = 0.0;
  double worst() const { return std::max({value, d1, d2}); }
};

// C^2 jumps of the interpolant against f at eps and g at 2/3.
inline std::pair<EndpointMatch, EndpointMatch> pole_endpoint_match(const PoleInterp& pi)
{
  const double e = pi.bump.eps, o = cusp::kOuter;
  const auto& first = pi.pieces.front();
  const auto& last = pi.pieces.back();
  EndpointMatch lo{std::abs(first.u(e) - cusp::f(e)), std::abs(first.k(e) / e - cusp::df(e)),
                   std::abs(first.dk(e) / e - first.k(e) / (e * e) - cusp::d2f(e))};
  EndpointMatch hi{std::abs(last.u(o) - cusp::g(o)), std::abs(last.k(o) / o - cusp::dg(o)),
                   std::abs(last.dk(o) / o - last.k(o) / (o * o) - cusp::d2g(o))};
  return {lo, hi};
}

struct CurvatureSample {
  double r;
  double K;
  double K_fd;
  Segment tag;
};

// Pointwise K = -(u'' + u'/r) e^{-2u}; K_fd recomputes u', u'' from u by
// nonuniform central differences (NaN at the ends).
inline std::vector<CurvatureSample> curvature_of_profile(const RadialProfile& p)
{
  const std::size_t n = p.r.size();
  std::vector<CurvatureSample> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = p.r[j];
    out[j].r = r;
    out[j].tag = p.tag[j];
    out[j].K = -(p.d2u[j] + p.du[j] / r) * std::exp(-2.0 * p.u[j]);
    out[j].K_fd = std::nan("");
    if (j == 0 || j + 1 == n) continue;
    const double h0 = r - p.r[j - 1], h1 = p.r[j + 1] - r;
    const double d1 = (p.u[j + 1] * h0 * h0 - p.u[j - 1] * h1 * h1 + p.u[j] * (h1 * h1 - h0 * h0)) /
                      (h0 * h1 * (h0 + h1));
    const double d2 = 2.0 * (p.u[j + 1] * h0 + p.u[j - 1] * h1 - p.u[j] * (h0 + h1)) / (h0 * h1 * (h0 + h1));
    out[j].K_fd = -(d2 + d1 / r) * std::exp(-2.0 * p.u[j]);
  }
  return out;
}

}  // namespace hmflow
