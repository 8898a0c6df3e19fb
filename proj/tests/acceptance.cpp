// One pass/fail line per acceptance criterion. Oracles are computed here,
// independently of the library routines under test.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "hmflow/fixtures.hpp"
#include "hmflow/metric_interp.hpp"
#include "test_util.hpp"

using namespace hmflow;
using hmflow::testing::random_mobius;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail)
{
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* f, double a) { char b[96]; std::snprintf(b, sizeof b, f, a); return b; }
std::string fmt(const char* f, double a, double b2) { char b[128]; std::snprintf(b, sizeof b, f, a, b2); return b; }
std::string fmt(const char* f, double a, double b2, double c) { char b[160]; std::snprintf(b, sizeof b, f, a, b2, c); return b; }

// ---------------------------------------------------------------- oracles

// g . (z + t j) in quaternion form
H3Point act(const MobiusMap& g, const H3Point& p)
{
  const cplx z = p.horizontal();
  const double t2 = p.x3 * p.x3;
  const cplx den = g.c * z + g.d;
  const double D = std::norm(den) + std::norm(g.c) * t2;
  const cplx w = ((g.a * z + g.b) * std::conj(den) + g.a * std::conj(g.c) * t2) / D;
  return {w.real(), w.imag(), p.x3 / D};
}

double h3_distance(const H3Point& p, const H3Point& q)
{
  const double dx = p.x1 - q.x1, dy = p.x2 - q.x2, dz = p.x3 - q.x3;
  return 2.0 * std::asinh(std::sqrt(dx * dx + dy * dy + dz * dz) / (2.0 * std::sqrt(p.x3 * q.x3)));
}

MobiusMap mul(const MobiusMap& A, const MobiusMap& B)
{
  return {A.a * B.a + A.b * B.c, A.a * B.b + A.b * B.d, A.c * B.a + A.d * B.c, A.c * B.b + A.d * B.d};
}

MobiusMap inv(const MobiusMap& A) { return {A.d, -A.b, -A.c, A.a}; }

// max over copies of d(u(copy), rho(word) u(owner))
double equivariance_oracle(const EquivariantMesh& m, const std::vector<MobiusMap>& rho, const MapState& s)
{
  double worst = 0.0;
  for (int v = 0; v < m.size(); ++v) {
    const auto& vx = m.vertices[v];
    MobiusMap g{1.0, 0.0, 0.0, 1.0};
    for (int x : vx.word) g = mul(g, x > 0 ? rho[x - 1] : inv(rho[-x - 1]));
    worst = std::max(worst, h3_distance(s.u[v], act(g, s.u[vx.owner])));
  }
  return worst;
}

// |du|^2 / x3^2 in chart coordinates by central differences
double fd_density(const std::function<H3Point(cplx)>& f, cplx z, double h = 1e-5)
{
  auto d = [&](cplx dz) {
    const H3Point p = f(z + dz), q = f(z - dz);
    const double a = (p.x1 - q.x1) / (2 * h), b = (p.x2 - q.x2) / (2 * h), c = (p.x3 - q.x3) / (2 * h);
    return a * a + b * b + c * c;
  };
  const double t = f(z).x3;
  return (d(h) + d(cplx(0, h))) / (t * t);
}

// distance between horoballs of Euclidean diameters Dp, Dq at finite points p, q
double horoball_gap(cplx p, double Dp, cplx q, double Dq) { return 2.0 * std::log(std::abs(p - q) / std::sqrt(Dp * Dq)); }

// alternating sum of truncated lengths for a chain invariant under z -> e^L z,
// with horoball diameters proportional to the base point modulus
double residue_oracle(const std::vector<cplx>& pts, double L)
{
  const int m = int(pts.size());
  auto point = [&](int k) {
    const int j = (k % m + m) % m, shift = (k - j) / m;
    return pts[j] * std::exp(L * shift);
  };
  double a = 0.0;
  for (int i = 0; i < m; ++i) {
    const cplx p = point(i), q = point(i + 1);
    a += (i % 2 ? -1.0 : 1.0) * horoball_gap(p, 0.3 * std::abs(p), q, 0.3 * std::abs(q));
  }
  return a;
}

ChainSpec dilation_chain(const std::vector<cplx>& pts, double L)
{
  ChainSpec c;
  c.deck = MobiusMap{std::exp(L / 2), 0.0, 0.0, std::exp(-L / 2)};
  for (const auto& p : pts) c.base_points.push_back(BoundaryPoint(p));
  return c;
}

std::vector<cplx> random_chain_points(int m, double L, std::mt19937_64& rng, bool planar)
{
  std::uniform_real_distribution<double> u(0.1, 0.9), th(-1.0, 1.0);
  std::vector<cplx> pts;
  for (int i = 0; i < m; ++i) pts.push_back(std::polar(std::exp(L * (i + u(rng)) / m), planar ? 0.0 : th(rng)));
  return pts;
}

// ---------------------------------------------------------------- criteria

void criterion1()
{
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> nd(1, 4);
  std::uniform_real_distribution<double> ed(0.01, 0.2);
  double worst_res = 0.0, worst_p = 1e300, worst_min = 1e300;
  for (int i = 0; i < 20; ++i) {
    const int n = nd(rng);
    const double e = ed(rng);
    const auto z = zero_interp_coeffs(n, e);
    // psi(r) = a r^{4n} + b r^{2n} + c against r^n to second order at eps
    const double v0 = z.a * std::pow(e, 4 * n) + z.b * std::pow(e, 2 * n) + z.c;
    const double v1 = 4.0 * n * z.a * std::pow(e, 4 * n - 1) + 2.0 * n * z.b * std::pow(e, 2 * n - 1);
    const double v2 = 4.0 * n * (4 * n - 1) * z.a * std::pow(e, 4 * n - 2) + 2.0 * n * (2 * n - 1) * z.b * std::pow(e, 2 * n - 2);
    worst_res = std::max({worst_res, std::abs(v0 / std::pow(e, n) - 1.0), std::abs(v1 / (n * std::pow(e, n - 1)) - 1.0),
                          n > 1 ? std::abs(v2 / (n * (n - 1.0) * std::pow(e, n - 2)) - 1.0)
                                : std::abs(v2) / (4.0 * n * (4 * n - 1) * std::abs(z.a) * std::pow(e, 4 * n - 2))});
    // p(R) = ab R^2 + 4ac R + bc on R in [0, eps^{2n}], normalised by bc
    auto p = [&](double R) { return (z.a * z.b * R * R + 4 * z.a * z.c * R + z.b * z.c) / (z.b * z.c); };
    const double Rmax = std::pow(e, 2 * n);
    for (int j = 0; j <= 4000; ++j) worst_p = std::min(worst_p, p(Rmax * j / 4000.0));
    // closed-form minimum of the quadratic on the interval
    double mn = std::min(p(0.0), p(Rmax));
    const double Rv = -4 * z.a * z.c / (2 * z.a * z.b);
    if (Rv > 0 && Rv < Rmax) mn = std::min(mn, p(Rv));
    worst_min = std::min(worst_min, mn);
  }
  const double secs = seconds_since(t0);
  report(1, worst_res < 1e-12 && worst_p >= -1e-12 && worst_min >= -1e-12 && secs < 1.0,
         fmt("max residual %.2e, min p %.2e, closed-form min %.2e", worst_res, worst_p, worst_min) +
             fmt(", %.3f s", secs));
}

void criterion2()
{
  const auto t0 = Clock::now();
  const double eps = 0.01;
  const auto pi = pole_interp(eps);
  // cusp and flat references written out here
  auto f = [](double r) { return -std::log(r * std::abs(std::log(r))); };
  auto df = [](double r) { return -1.0 / r - 1.0 / (r * std::log(r)); };
  auto d2f = [](double r) { const double l = std::log(r); return 1.0 / (r * r) + (l + 1.0) / (r * r * l * l); };
  auto g = [](double r) { return -0.5 * std::log(r); };
  auto dg = [](double r) { return -0.5 / r; };
  auto d2g = [](double r) { return 0.5 / (r * r); };
  const double o = 2.0 / 3.0;
  const auto& P0 = pi.pieces.front();
  const auto& P1 = pi.pieces.back();
  const double match = std::max(
      {std::abs(P0.u(eps) - f(eps)), std::abs(P0.k(eps) / eps - df(eps)),
       std::abs(P0.dk(eps) / eps - P0.k(eps) / (eps * eps) - d2f(eps)), std::abs(P1.u(o) - g(o)),
       std::abs(P1.k(o) / o - dg(o)), std::abs(P1.dk(o) / o - P1.k(o) / (o * o) - d2g(o))});
  double k_drop = 0.0, k_interp = -1e300, k_cusp = 0.0, prev_k = -1e300;
  for (int j = 0; j <= 20000; ++j) {
    const double r = 1e-5 * std::pow(0.99 / 1e-5, j / 20000.0);
    const double u = pi.u(r), du = pi.du(r), d2u = pi.d2u(r);
    const double K = -(d2u + du / r) * std::exp(-2.0 * u);
    const double k = r * du;
    if (prev_k > -1e299) k_drop = std::max(k_drop, prev_k - k);
    prev_k = k;
    if (r <= eps) k_cusp = std::max(k_cusp, std::abs(K + 1.0));
    else if (r < o) k_interp = std::max(k_interp, K);
  }
  const double secs = seconds_since(t0);
  report(2, match < 1e-8 && k_drop <= 1e-12 && k_interp <= 1e-8 && k_cusp <= 1e-8 && secs < 1.0,
         fmt("C2 mismatch %.2e, k decrease %.2e, ", match, k_drop) +
             fmt("max K interpolation %.2e, |K+1| cusp %.2e", k_interp, k_cusp) + fmt(", %.3f s", secs));
}

void criterion3()
{
  std::mt19937_64 rng(103);
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::uniform_real_distribution<double> x(-3.0, 3.0), y(1.0, 5.0), yy(-2.0, 2.0), l(0.3, 3.0), th(-3.0, 3.0);
  double worst_h = 0.0;
  for (int i = 0; i < 100; ++i) {
    const MobiusMap C = random_mobius(rng);
    const MobiusMap P = mul(mul(C, MobiusMap{1.0, cplx(nrm(rng), nrm(rng)), 0.0, 1.0}), inv(C));
    const double period = 1.0 + (i % 3);
    const cplx z{x(rng), y(rng)};
    worst_h = std::max(worst_h, std::abs(z.imag() * z.imag() * fd_density([&](cplx w) { return horodisk_map(w, P, period); }, z) - 2.0));
  }
  double worst_c = 0.0;
  for (double c : {0.0, 1.0, 2.0})
    for (int i = 0; i < 100; ++i) {
      const MobiusMap C = random_mobius(rng);
      const cplx h = std::exp(cplx(l(rng), th(rng)) / 2.0);
      const MobiusMap P = mul(mul(C, MobiusMap{h, 0.0, 0.0, 1.0 / h}), inv(C));
      const cplx z{x(rng), yy(rng)};
      worst_c = std::max(worst_c, std::abs(fd_density([&](cplx w) { return collapse_map(w, std::atan(c), P); }, z) - (1 + c * c)));
    }
  report(3, worst_h < 1e-6 && worst_c < 1e-6, fmt("horodisk |e-2| %.2e, collapse |e-(1+c^2)| %.2e", worst_h, worst_c));
}

void criterion4()
{
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> mod(0.3, 3.0), arg(-2.5, 2.5);
  double worst_rt = 0.0, worst_rel = 0.0;
  for (const auto& tri : {once_punctured_torus(), one_holed_torus(1)})
    for (int k = 0; k < 100; ++k) {
      FGCoords z{std::vector<cplx>(tri.num_edges(), 1.0)};
      for (int e : tri.interior_edges()) z.z[e] = std::polar(mod(rng), arg(rng));
      const auto rep = holonomy(develop(tri, z));
      const auto back = fg_from_rep(rep, tri);
      for (int e : tri.interior_edges())
        worst_rt = std::max(worst_rt, std::abs(back.z[e] - z.z[e]) / std::max(1.0, std::abs(z.z[e])));
      worst_rel = std::max(worst_rel, relator_residual(rep, tri));
    }
  report(4, worst_rt < 1e-9 && worst_rel < 1e-9, fmt("round trip %.2e, relator %.2e", worst_rt, worst_rel));
}

void criterion5()
{
  std::mt19937_64 rng(105);
  std::normal_distribution<double> nrm(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const MobiusMap C = random_mobius(rng);
    const MobiusMap T{1.0, cplx(nrm(rng), nrm(rng)), 0.0, 1.0};
    const MobiusMap alpha = mul(mul(C, T), inv(C));
    const MobiusMap delta = random_mobius(rng);
    // in the frame where alpha is z -> z + tau: tr(T^n D) = a + d + n tau c
    const MobiusMap D = mul(mul(inv(C), delta), C);
    MobiusMap an{1.0, 0.0, 0.0, 1.0};
    for (int n = 0; n <= 10; ++n) {
      const cplx tr = mul(an, delta).trace();
      const cplx want = D.a + D.d + double(n) * T.b * D.c;
      worst = std::max(worst, std::abs(tr * tr - want * want) / std::max(1.0, std::norm(want)));
      an = mul(an, alpha);
    }
  }
  report(5, worst < 1e-10, fmt("max relative trace-square error %.2e", worst));
}

void criterion6()
{
  const auto t0 = Clock::now();
  std::vector<double> err, h;
  for (int level : {1, 2, 3}) {
    const auto m = modular_torus_mesh(level);
    EquivariantProblem p(m, modular_torus_generators());
    const auto s = make_state(p, [](cplx z) { return bumped(z, {2.5, 1.7}, 0.5, 0.3, {1.0, 1.0, 1.0}); });
    const auto tau = tension_field(p, s);
    double worst = 0.0, scale = 0.0;
    for (int c : m.canonical) {
      const auto& v = m.vertices[c];
      if (v.dirichlet || std::abs(v.z - cplx(2.5, 1.9)) > 0.6) continue;
      bool interior = true;
      for (const auto& st : m.star[c]) interior = interior && m.vertices[st.copy].word.empty();
      if (!interior) continue;
      const double mass = vertex_area(m, c) / (s.u[c].x3 * s.u[c].x3);
      const double dh = 1e-6 * s.u[c].x3;
      const double t[3] = {tau[c].v1, tau[c].v2, tau[c].v3};
      for (int k = 0; k < 3; ++k) {
        auto sp = s, sm = s;
        (&sp.u[c].x1)[k] += dh;
        (&sm.u[c].x1)[k] -= dh;
        const double grad = (core_energy(p, sp) - core_energy(p, sm)) / (2 * dh);
        const double lt = v.lambda2 * t[k] * mass;
        worst = std::max(worst, std::abs(lt + grad));
        scale = std::max(scale, std::abs(lt));
      }
    }
    err.push_back(worst / scale);
    h.push_back(m.h_mesh);
  }
  // least-squares slope of log err against log h
  double mx = 0, my = 0;
  for (int i = 0; i < 3; ++i) mx += std::log(h[i]) / 3, my += std::log(err[i]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (std::log(h[i]) - mx) * (std::log(err[i]) - my);
    sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
  }
  const double order = sxy / sxx;
  const double secs = seconds_since(t0);
  report(6, err[1] < err[0] && err[2] < err[1] && order >= 1.0 && secs < 60.0,
         fmt("relative errors %.2e %.2e %.2e", err[0], err[1], err[2]) + fmt(", fitted order %.2f, %.1f s", order, secs));
}

struct SnapshotAudit {
  double worst_lib = 0.0, worst_oracle = 0.0;
  int snapshots = 0;
};

void criteria7to9()
{
  SnapshotAudit audit7, audit8;
  {
    const auto t0 = Clock::now();
    const auto m = modular_torus_mesh(2);
    const auto rho = modular_torus_generators();
    EquivariantProblem p(m, rho);
    auto premap = [](cplx z) { return bumped(z, {2.5, 1.7}, 0.5, 0.3, {1.0, 1.0, 1.0}); };
    double pert = 0.0;
    for (int c : m.canonical) pert = std::max(pert, h3_distance(premap(m.vertices[c].z), H3Point{m.vertices[c].z.real(), 0.0, m.vertices[c].z.imag()}));
    const auto s0 = make_state(p, premap);
    FlowConfig cfg;
    cfg.monitor_elements = rho;
    auto hook = [&](const MapState& s, const std::vector<TangentVector>&) {
      audit7.worst_oracle = std::max(audit7.worst_oracle, equivariance_oracle(m, rho, s));
      ++audit7.snapshots;
    };
    const auto r = flow(p, s0, cfg, hook);
    for (double e : r.diag.equivariance) audit7.worst_lib = std::max(audit7.worst_lib, e);
    double dist = 0.0;
    for (int c : m.canonical) {
      const cplx z = m.vertices[c].z;
      dist = std::max(dist, h3_distance(r.state.u[c], H3Point{z.real(), 0.0, z.imag()}));
    }
    const double secs = seconds_since(t0);
    const bool pass = pert <= 0.3 + 1e-12 && r.diag.converged && r.diag.sup_tau.back() < 1e-5 && dist < 10 * m.h_mesh &&
                      r.diag.energy_violations == 0 && secs < 300.0;
    report(7, pass,
           fmt("perturbation %.3f, sup tau %.2e, ", pert, r.diag.sup_tau.back()) +
               fmt("distance to identity %.2e < %.2e, ", dist, 10 * m.h_mesh) +
               fmt("energy violations %.0f, steps %.0f, %.1f s", double(r.diag.energy_violations), double(r.diag.steps), secs));
  }
  {
    const double t0 = 0.5;
    std::vector<double> errs;
    bool flagged = true, x_exact = true;
    for (double dt : {1e-3, 5e-4}) {
      const auto m = flat_periodic_mesh(8, 4);
      const std::vector<MobiusMap> rho{MobiusMap{1.0, 1.0, 0.0, 1.0}, MobiusMap{1.0, 0.0, 0.0, 1.0}};
      EquivariantProblem p(m, rho);
      const auto s0 = make_state(p, [&](cplx z) { return H3Point{z.real(), 0.0, t0}; });
      FlowConfig cfg;
      cfg.t_max = 4.0;
      cfg.dt = dt;
      cfg.cadence = 100;
      auto hook = [&](const MapState& s, const std::vector<TangentVector>&) {
        audit8.worst_oracle = std::max(audit8.worst_oracle, equivariance_oracle(m, rho, s));
        ++audit8.snapshots;
      };
      const auto r = flow(p, s0, cfg, hook);
      for (double e : r.diag.equivariance) audit8.worst_lib = std::max(audit8.worst_lib, e);
      double err = 0.0;
      for (int c : m.canonical) {
        err = std::max(err, std::abs(r.state.u[c].x3 - std::sqrt(t0 * t0 + 2 * r.state.t)));
        x_exact = x_exact && std::abs(r.state.u[c].x1 - m.vertices[c].z.real()) < 1e-12 && r.state.u[c].x2 == 0.0;
      }
      errs.push_back(err);
      flagged = flagged && !r.diag.converged && !monitors(r.diag, cfg).distance_bounded;
    }
    // the map stays linear in x, so the spatial error vanishes and halving dt halves the error
    const double ratio = errs[0] / errs[1];
    report(8, flagged && x_exact && errs[1] < 10 * 5e-4 && ratio > 1.6 && ratio < 2.4,
           fmt("max |x3 - sqrt(t0^2+2t)| %.2e (dt 1e-3), %.2e (dt 5e-4), ", errs[0], errs[1]) +
               fmt("ratio %.2f", ratio) + ", non-convergence flagged " + (flagged ? "yes" : "no"));
  }
  const double worst = std::max({audit7.worst_lib, audit7.worst_oracle, audit8.worst_lib, audit8.worst_oracle});
  report(9, worst < 1e-10 && audit7.snapshots > 1 && audit8.snapshots > 1,
         fmt("max equivariance residual %.2e over %.0f snapshots", worst, double(audit7.snapshots + audit8.snapshots)));
}

void criterion10()
{
  const auto t0 = Clock::now();
  const auto fx = crown_end_fixture(2);
  EquivariantProblem p(fx.mesh, {fx.model.deck_image()});
  const auto r = flow(p, make_state(p, [&](cplx w) { return fx.model(w); }));
  const auto fit = fit_principal_part(hopf_on_puncture_chart(p, r.state), 3, 0.0, 3);
  const cplx want = fx.prescribed.alpha(1), got = fit.pp.alpha(1);
  const double rel = std::min(std::abs(got - want), std::abs(got + want)) / std::abs(want);

  // compatibility decisions against the definition, with the residue from horoball lengths
  std::mt19937_64 rng(110);
  int cases = 0, agree = 0;
  for (int m = 1; m <= 4; ++m)
    for (bool planar : {true, false}) {
      const double L = 1.1 + 0.2 * m;
      const auto pts = random_chain_points(m, L, rng, planar);
      const auto chain = dilation_chain(pts, L);
      const double a = m % 2 == 0 ? residue_oracle(pts, L) : 0.0;
      for (int n = 3; n <= 6; ++n)
        for (double re : {a, -a, a + 0.1, 0.7}) {
          PrincipalPart pp;
          pp.order = n;
          pp.coeffs.assign(pp.r(), cplx(1.0, 0.5));
          pp.coeffs.front() = cplx(re, 0.3);
          if (pp.r() == 1) pp.coeffs.front() = cplx(re + 1.0, 0.3);
          const bool expect = n == m + 2 && (n % 2 == 1 || std::abs(std::abs(re) - std::abs(a)) < 1e-9);
          ++cases;
          agree += compatible_with_chain(pp, chain) == expect;
        }
    }
  const bool crown_ok = compatible_with_chain(fx.prescribed, fx.model.chain());
  const double secs = seconds_since(t0);
  report(10, r.diag.converged && rel < 0.05 && agree == cases && crown_ok,
         fmt("alpha_1 relative error %.2e at h %.3f, ", rel, fx.mesh.h_mesh) +
             fmt("compatibility decisions %.0f/%.0f agree, %.1f s", double(agree), double(cases), secs));
}

void criterion11()
{
  const auto t0 = Clock::now();
  const auto m = modular_torus_mesh(2);
  EquivariantProblem p(m, modular_torus_generators());
  auto premap = [](cplx z) { return bumped(z, {2.5, 1.7}, 0.5, 0.3); };
  std::vector<MapState> out;
  bool converged = true;
  for (auto [lo, hi] : {std::pair{1.2, 1.6}, std::pair{1.8, 2.4}}) {
    const auto u0 = assemble_u0(p, premap, {modular_cusp_blend(lo, hi)});
    const auto r = flow(p, u0.state);
    converged = converged && r.diag.converged;
    out.push_back(r.state);
  }
  double d = 0.0;
  for (int c : m.canonical) d = std::max(d, h3_distance(out[0].u[c], out[1].u[c]));
  report(11, converged && d < 10 * m.h_mesh,
         fmt("sup distance %.2e < %.2e, %.1f s", d, 10 * m.h_mesh, seconds_since(t0)));
}

void criterion12()
{
  std::mt19937_64 rng(112);
  std::uniform_real_distribution<double> s(0.2, 5.0);
  double horo = 0.0, straight = 0.0, oracle = 0.0;
  for (int m : {2, 4, 6}) {
    const double L = 1.3;
    const auto pts = random_chain_points(m, L, rng, false);
    const auto c = dilation_chain(pts, L);
    const double base = metric_residue_chain(c);
    oracle = std::max(oracle, std::abs(std::abs(base) - std::abs(residue_oracle(pts, L))));
    for (int k = 0; k < 10; ++k) {
      std::vector<double> sc;
      for (int i = 0; i < m; ++i) sc.push_back(s(rng));
      horo = std::max(horo, std::abs(metric_residue_chain(c, sc) - base));
    }
    straight = std::max(straight, std::abs(metric_residue_chain(straighten_chain(c)) - base));
  }
  // p2 at the geometric midpoint: invariant under a half-period shift
  const double L = 2.0;
  const auto sym = dilation_chain({cplx(1.0), cplx(std::exp(L / 2))}, L);
  const double zero = std::abs(metric_residue_chain(sym));
  report(12, horo < 1e-10 && straight < 1e-9 && zero < 1e-10 && oracle < 1e-9,
         fmt("horoball dependence %.2e, straightening change %.2e, ", horo, straight) +
             fmt("symmetric residue %.2e, oracle gap %.2e", zero, oracle));
}

void guarded(const std::vector<int>& ids, void (*run)())
{
  try {
    run();
  } catch (const std::exception& e) {
    for (int id : ids) report(id, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main()
{
  guarded({1}, criterion1);
  guarded({2}, criterion2);
  guarded({3}, criterion3);
  guarded({4}, criterion4);
  guarded({5}, criterion5);
  guarded({6}, criterion6);
  guarded({7, 8, 9}, criteria7to9);
  guarded({10}, criterion10);
  guarded({11}, criterion11);
  guarded({12}, criterion12);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
