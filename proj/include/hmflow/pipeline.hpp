#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmflow/artifacts.hpp"
#include "hmflow/config.hpp"
#include "hmflow/domain_metric.hpp"
#include "hmflow/fixtures.hpp"

namespace hmflow {

// ------------------------------------------------------------------ check

struct CheckItem {
  std::string name;
  bool ok = true;
  std::string detail;
  std::string requirement;  // hypothesis that a failure violates
};

struct CheckReport {
  std::vector<CheckItem> items;
  std::vector<std::string> warnings;

  bool ok() const
  {
    for (const auto& i : items)
      if (!i.ok) return false;
    return true;
  }

  void add(std::string name, bool ok, std::string detail, std::string requirement)
  {
    items.push_back({std::move(name), ok, std::move(detail), std::move(requirement)});
  }

  Json to_json() const
  {
    Json j;
    j["ok"] = ok();
    j["items"] = Json::array();
    for (const auto& i : items)
      j["items"].push_back({{"name", i.name}, {"ok", i.ok}, {"detail", i.detail}, {"requirement", i.requirement}});
    j["warnings"] = warnings;
    return j;
  }
};

struct BuiltRep {
  IdealTriangulation tri;
  FGCoords coords;
  FramedRepresentation rep;
  std::vector<EndInfo> ends;
};

inline BuiltRep build_representation(const RunConfig& c)
{
  BuiltRep b;
  b.tri = make_triangulation(c);
  b.coords = make_coordinates(c, b.tri);
  b.rep = holonomy(develop(b.tri, b.coords));
  b.ends = ends(b.tri);
  return b;
}

inline double fg_round_trip_error(const BuiltRep& b)
{
  const auto back = fg_from_rep(b.rep, b.tri);
  double err = 0.0;
  for (int e : b.tri.interior_edges()) err = std::max(err, std::abs(back.z[e] - b.coords.z[e]) / std::abs(b.coords.z[e]));
  return err;
}

/// Order of the pole an end of the given kind carries: at most one for a
/// cusp, two for a geodesic boundary, m + 2 for a crown with m tips.
inline int expected_order(const EndInfo& e, EndKind kind)
{
  if (e.boundary) return e.marked_count() + 2;
  return kind == EndKind::cylinder ? 2 : 1;
}

inline CheckReport run_check(const RunConfig& c)
{
  CheckReport r;
  const auto sr = validate_surface(c.surface);
  {
    std::string detail = "chi = " + std::to_string(sr.euler) + ", coordinates = " + std::to_string(sr.coordinate_count);
    for (const auto& v : sr.violations) detail += "; " + v;
    r.add("surface", sr.valid, detail, "negative Euler characteristic and a non-empty marked set");
    if (sr.out_of_scope) r.warnings.push_back("a disk with marked boundary points has no interior: out of scope");
  }
  std::optional<BuiltRep> b;
  try {
    b = build_representation(c);
  } catch (const Error& e) {
    r.add("triangulation", false, e.what(), "ideal triangulation with consistent edge gluing");
    return r;
  }
  {
    const auto top = topology(b->tri);
    const bool same = top.genus == c.surface.genus && top.punctures == c.surface.punctures &&
                      top.boundary_marked == c.surface.boundary_marked;
    std::string detail = "triangulation has genus " + std::to_string(top.genus) + ", " +
                         std::to_string(top.punctures) + " punctures, " + std::to_string(top.boundary_components()) +
                         " boundary components";
    r.add("triangulation", same, detail, "triangulation realises the declared marked bordered surface");
  }
  {
    const double rel = relator_residual(b->rep, b->tri);
    const double rt = fg_round_trip_error(*b);
    r.add("representation", rel < 1e-9 && rt < 1e-9,
          "relator residual " + fmt17(rel) + ", coordinate round trip " + fmt17(rt),
          "framed representation determined by the coordinates");
  }
  const auto kinds = make_puncture_kinds(c);
  const auto tr = type_report(b->rep, b->tri, kinds);
  {
    std::string detail;
    for (std::size_t k = 0; k < tr.kinds.size(); ++k)
      detail += std::string(k ? "; " : "") + "end " + std::to_string(k) + " " + end_kind_name(tr.kinds[k]) + " " +
                type_name(tr.monodromy_types[k]);
    for (const auto& v : tr.violations) detail += "; " + v;
    r.add("type-preserving", tr.type_preserving, detail,
          "peripheral parabolics at cusps, loxodromic peripherals at geodesic and crown ends");
  }
  {
    const auto bad = signing_mismatches(b->rep, b->tri, c.signing);
    std::string detail = bad.empty() ? "framing agrees with the signing" : "mismatched punctures:";
    for (int p : bad) detail += " " + std::to_string(p);
    r.add("signing", bad.empty(), detail, "framing at geodesic ends is the signed fixed point of the monodromy");
  }
  {
    const auto d = classify_degenerate(b->rep, b->tri);
    r.add("non-degeneracy", d == Degeneracy::nondegenerate, degeneracy_name(d),
          "non-degenerate framed representation");
  }
  for (std::size_t i = 0; i < c.principal_parts.size(); ++i) {
    const auto& pc = c.principal_parts[i];
    const std::string name = "principal part " + std::to_string(i);
    if (pc.end < 0 || pc.end >= int(b->ends.size())) {
      r.add(name, false, "end " + std::to_string(pc.end) + " does not exist", "prescription refers to an end");
      continue;
    }
    const auto& end = b->ends[pc.end];
    const EndKind kind = tr.kinds[pc.end];
    const int want = expected_order(end, kind);
    if (kind == EndKind::cusp) {
      r.add(name, pc.pp.order <= 1, "cusp end, order " + std::to_string(pc.pp.order),
            "a cusp carries a pole of order at most one");
      continue;
    }
    if (pc.pp.order != want) {
      r.add(name, false,
            std::string(end_kind_name(kind)) + " end needs order " + std::to_string(want) + ", got " +
                std::to_string(pc.pp.order),
            "pole order matches the end");
      continue;
    }
    if (kind == EndKind::cylinder) {
      const MobiusMap mono = peripheral_monodromy(b->rep, b->tri, pc.end);
      const double L = pc.boundary_length > 0.0 ? pc.boundary_length : translation_length(mono);
      const bool ok = compatible_with_boundary(pc.pp, L);
      r.add(name, ok, "order 2, L = " + fmt17(L) + ", residue " + fmt17(std::abs(residue(pc.pp))),
            "boundary length and order-two principal part satisfy L^2 = 16 pi^2 |a| sin^2(theta/2)");
      continue;
    }
    const auto chain = chain_from_framing(b->rep, b->tri, pc.end);
    const bool ok = compatible_with_chain(pc.pp, chain);
    std::string detail = "order " + std::to_string(pc.pp.order) + ", " + std::to_string(chain.m()) + "-chain";
    if (chain.m() % 2 == 0)
      detail += ", metric residue " + fmt17(metric_residue_chain(chain)) + " vs Re residue " +
                fmt17(residue(pc.pp).real());
    r.add(name, ok, detail, "principal part compatible with the chain of its crown end");
    if (pc.request_residue && pc.pp.order % 2 == 1)
      r.warnings.push_back(name + ": odd order, the residue condition is dropped");
  }
  return r;
}

inline Json rep_json(const BuiltRep& b)
{
  Json j;
  j["edges"] = Json::array();
  for (int e = 0; e < b.tri.num_edges(); ++e)
    j["edges"].push_back({{"id", e}, {"name", b.tri.edge_name(e)}, {"coordinate", cplx_json(b.coords.z[e])}});
  j["generators"] = Json::array();
  for (const auto& g : b.rep.generators)
    j["generators"].push_back({{"a", cplx_json(g.a)}, {"b", cplx_json(g.b)}, {"c", cplx_json(g.c)},
                               {"d", cplx_json(g.d)}, {"trace", cplx_json(g.trace())},
                               {"type", type_name(classify(g))}});
  j["relator_residual"] = relator_residual(b.rep, b.tri);
  j["fg_round_trip_error"] = fg_round_trip_error(b);
  j["degeneracy"] = degeneracy_name(classify_degenerate(b.rep, b.tri));
  j["ends"] = Json::array();
  for (std::size_t k = 0; k < b.ends.size(); ++k) {
    const MobiusMap mono = peripheral_monodromy(b.rep, b.tri, int(k));
    Json e{{"boundary", b.ends[k].boundary},
           {"marked", b.ends[k].marked_count()},
           {"monodromy_type", type_name(classify(mono))},
           {"trace", cplx_json(mono.trace())}};
    if (classify(mono) == MobiusType::loxodromic) e["translation_length"] = translation_length(mono);
    j["ends"].push_back(e);
  }
  return j;
}

// ------------------------------------------------------------------ metric

inline Json interp_checks(const std::vector<double>& eps)
{
  Json j = Json::array();
  for (double e : eps) {
    const auto z = zero_interp_verify(1, e);
    Json item{{"eps", e},
              {"zero", {{"residual", std::max({z.residual_value, z.residual_d1, z.residual_d2})},
                        {"min_p", z.min_p},
                        {"max_curvature", z.max_curvature},
                        {"ok", z.ok}}}};
    if (e <= pole_eps_max()) {
      const auto pi = pole_interp(e);
      const auto [lo, hi] = pole_endpoint_match(pi);
      item["pole"] = {{"endpoint_mismatch", std::max(lo.worst(), hi.worst())}};
    } else {
      item["pole"] = {{"feasible", false}, {"eps_max", pole_eps_max()}};
    }
    j.push_back(item);
  }
  return j;
}

inline Json run_make_metric(const RunConfig& c, const std::filesystem::path& out, bool plots)
{
  Json j;
  if (c.flow.domain == "modular-torus")
    j["domain"] = {{"chart", "upper half-plane"}, {"lambda2", "1/y^2"}, {"y_trunc", c.metric.y_trunc}};
  else if (c.flow.domain == "crown-end")
    j["domain"] = {{"chart", "log chart of the pole"}, {"lambda2", "1"}, {"r_in", c.metric.r_in}, {"r_out", c.metric.r_out}};
  else
    j["domain"] = {{"chart", "flat strip"}, {"lambda2", "1"}};
  j["interpolation"] = interp_checks(c.metric.eps.empty() ? std::vector<double>{0.1, pole_default_eps()} : c.metric.eps);
  if (c.metric.differential) {
    std::vector<FeatureChoice> choices;
    for (double e : c.metric.eps) choices.push_back({e, 0.0});
    const auto g = domain_metric_assemble(*c.metric.differential, choices);
    Json fs = Json::array();
    cplx lo{-1.0, -1.0}, hi{1.0, 1.0};
    for (const auto& f : g.features()) {
      fs.push_back({{"kind", f.kind == MetricFeature::Kind::zero ? "zero" : "simple_pole"},
                    {"center", cplx_json(f.center)},
                    {"order", f.order},
                    {"radius", f.radius},
                    {"eps", f.eps}});
      lo = {std::min(lo.real(), f.center.real() - 2 * f.radius), std::min(lo.imag(), f.center.imag() - 2 * f.radius)};
      hi = {std::max(hi.real(), f.center.real() + 2 * f.radius), std::max(hi.imag(), f.center.imag() + 2 * f.radius)};
    }
    const auto audit = audit_curvature(g, lo, hi);
    j["features"] = fs;
    j["curvature_audit"] = {{"box", {cplx_json(lo), cplx_json(hi)}},
                            {"max_curvature", audit.max_curvature},
                            {"at", cplx_json(audit.max_at)},
                            {"min_lambda2", audit.min_lambda2},
                            {"samples", audit.samples},
                            {"non_positive", audit.max_curvature <= 1e-8}};
    if (plots) {
      const int n = 96;
      auto grid = flat_periodic_mesh(n, n, hi.real() - lo.real(), hi.imag() - lo.imag());
      std::vector<double> v(grid.size());
      for (int i = 0; i < grid.size(); ++i) v[i] = g.lambda2(grid.vertices[i].z + lo);
      write_svg_heatmap(out / "lambda2.svg", grid, v, {"domain metric lambda^2", true});
    }
  }
  write_json(out / "metric.json", j);
  return j;
}

// ------------------------------------------------------------------ domains

/// Conjugator M with M X_k M^-1 = +-Y_k for both pairs, if one exists.
inline std::optional<MobiusMap> conjugator(const std::array<MobiusMap, 2>& X, const std::array<MobiusMap, 2>& Y)
{
  auto mat = [](const MobiusMap& m) {
    Eigen::Matrix2cd a;
    a << m.a, m.b, m.c, m.d;
    return a;
  };
  for (int s0 : {1, -1})
    for (int s1 : {1, -1}) {
      Eigen::Matrix<std::complex<double>, 8, 4> A = Eigen::Matrix<std::complex<double>, 8, 4>::Zero();
      for (int p = 0; p < 2; ++p) {
        const Eigen::Matrix2cd x = mat(X[p]);
        const Eigen::Matrix2cd y = mat(Y[p]) * double(p == 0 ? s0 : s1);
        for (int i = 0; i < 2; ++i)
          for (int jj = 0; jj < 2; ++jj) {
            const int row = 4 * p + 2 * i + jj;
            for (int k = 0; k < 2; ++k) {
              A(row, 2 * i + k) += x(k, jj);   // (M X)_ij
              A(row, 2 * k + jj) -= y(i, k);   // (Y M)_ij
            }
          }
      }
      Eigen::JacobiSVD<Eigen::Matrix<std::complex<double>, 8, 4>> svd(A, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      if (sv(3) > 1e-9 * sv(0) || sv(2) < 1e-6 * sv(0)) continue;
      const auto v = svd.matrixV().col(3);
      try {
        const auto M = MobiusMap::normalized(v(0), v(1), v(2), v(3));
        if (std::abs(M.det() - 1.0) < 1e-9) return M;
      } catch (const Error&) {
      }
    }
  return std::nullopt;
}

struct FlowDomain {
  std::string kind;
  EquivariantMesh mesh;
  std::vector<MobiusMap> rho;
  std::function<H3Point(cplx)> premap;
  std::vector<EndBlend> ends;
  std::function<H3Point(cplx)> reference;  // known harmonic limit, when there is one
  std::optional<CrownFixture> crown;
  std::vector<MobiusMap> monitor_elements;
  std::vector<AuditRegion> audit_regions;
  Json info;
};

/// Matches the holonomy of the configured once-punctured torus with the
/// modular torus group, up to conjugation and a change of free generators.
inline std::pair<std::vector<MobiusMap>, MobiusMap> modular_target(const FramedRepresentation& rep)
{
  if (rep.generators.size() != 2)
    throw Error(Stage::config, "/flow/domain: modular-torus needs a two-generator representation");
  const auto G = modular_torus_generators();
  const auto& g = rep.generators;
  // prefer a conjugator that keeps the cusp at infinity
  std::optional<std::pair<std::vector<MobiusMap>, MobiusMap>> best;
  for (int first = 0; first < 2; ++first)
    for (int e0 : {1, -1})
      for (int e1 : {1, -1}) {
        const MobiusMap X0 = e0 > 0 ? g[first] : g[first].inverse();
        const MobiusMap X1 = e1 > 0 ? g[1 - first] : g[1 - first].inverse();
        if (auto M = conjugator({X0, X1}, {G[0], G[1]}))
          if (!best || std::abs(M->c) < std::abs(best->second.c) - 1e-12) best = {{X0, X1}, *M};
      }
  if (best) return *best;
  throw Error(Stage::config,
              "/coordinates: modular-torus domain needs coordinates whose holonomy is conjugate to the modular torus "
              "group (trace triple 3, 3, 6); all coordinates equal to 1 give it");
}

inline FlowDomain make_domain(const RunConfig& c, const BuiltRep* b)
{
  FlowDomain d;
  d.kind = c.flow.domain;
  const int level = c.flow.refinement;
  if (d.kind == "modular-torus") {
    if (!b) throw Error(Stage::config, "modular-torus domain needs a representation");
    auto [rho, M] = modular_target(b->rep);
    const MobiusMap Mi = M.inverse();
    d.mesh = modular_torus_mesh(level, c.metric.y_trunc);
    d.rho = rho;
    const auto pert = c.flow.perturbation;
    d.premap = [Mi, pert](cplx z) { return Mi.apply(bumped(z, pert.center, pert.radius, pert.amplitude, pert.direction)); };
    const MobiusMap T6{1.0, 6.0, 0.0, 1.0};
    const double lo = c.flow.collar_lo, hi = c.flow.collar_hi;
    d.ends.push_back({"cusp", [lo, hi](cplx z) { return collar_weight(z.imag(), lo, hi); },
                      [Mi, T6](cplx z) { return Mi.apply(horodisk_map(z, T6, 6.0)); }});
    d.reference = [Mi](cplx z) { return Mi.apply(identity_embedding(z)); };
    d.monitor_elements = rho;
    d.audit_regions = {{"cusp", [m = &d.mesh, hi](int v) { return m->vertices[v].z.imag() > hi; }},
                       {"collar", [m = &d.mesh, lo, hi](int v) {
                          const double y = m->vertices[v].z.imag();
                          return y >= lo && y <= hi;
                        }},
                       {"core", [m = &d.mesh, lo](int v) { return m->vertices[v].z.imag() < lo; }}};
    d.info = {{"conjugator", {cplx_json(M.a), cplx_json(M.b), cplx_json(M.c), cplx_json(M.d)}},
              {"peripheral", "T^6"}};
  } else if (d.kind == "crown-end") {
    if (!b) throw Error(Stage::config, "crown-end domain needs a representation");
    if (c.triangulation.preset != "one-holed-torus" || c.triangulation.boundary_marked != 1)
      throw Error(Stage::config, "/triangulation: crown-end domain needs the one-holed torus with one marked point");
    const PrincipalPartConfig* pc = nullptr;
    for (const auto& p : c.principal_parts)
      if (p.end == 0 && p.pp.order == 3) pc = &p;
    if (!pc) throw Error(Stage::config, "/principal_parts: crown-end domain needs an order-3 principal part at end 0");
    d.crown = crown_end_fixture(level, b->coords, pc->pp.alpha(1), c.metric.r_in, c.metric.r_out);
    d.mesh = d.crown->mesh;
    d.rho = {d.crown->model.deck_image()};
    const auto model = d.crown->model;
    d.premap = [model](cplx w) { return model(w); };
    d.audit_regions = {{"crown", [](int) { return true; },
                        [model, m = &d.mesh](int v) { return model.zeta_polar(m->vertices[v].z).first; },
                        [model](cplx w) { return model(w); }}};
    d.info = {{"chart", "w = log z"}, {"kappa", model.kappa()}, {"chain_points", model.chain().m()}};
  } else {
    const int nx = 8 << level, ny = 4 << level;
    d.mesh = flat_periodic_mesh(nx, ny);
    d.rho = {MobiusMap{1.0, 1.0, 0.0, 1.0}, MobiusMap::identity()};
    const double t0 = c.flow.strip_t0;
    d.premap = [t0](cplx z) { return H3Point{z.real(), 0.0, t0}; };
    d.info = {{"closed_form", "x3(t) = sqrt(t0^2 + 2 t)"}, {"t0", t0}};
  }
  return d;
}

inline FlowConfig flow_config(const RunConfig& c, const FlowDomain& d)
{
  FlowConfig f;
  f.cfl = c.flow.cfl;
  f.dt = c.flow.dt;
  f.t_max = c.flow.t_max;
  f.tol_tau = c.flow.tol_tau;
  f.max_steps = c.flow.max_steps;
  f.energy_tol = c.flow.energy_tol;
  f.growth_tol = c.flow.growth_tol;
  f.cadence = c.output.cadence;
  f.monitor_elements = d.monitor_elements;
  return f;
}

// ------------------------------------------------------------------ init

struct InitStage {
  FlowDomain domain;
  MapState u0;
  Json info;
};

inline InitStage run_init(const RunConfig& c, const BuiltRep* b)
{
  InitStage s{make_domain(c, b), {}, {}};
  auto& d = s.domain;
  EquivariantProblem p(d.mesh, d.rho);
  if (d.crown) {
    check_end_compatibility({{0, d.crown->prescribed, 0.0, d.crown->model.chain()}});
    s.u0 = make_state(p, d.premap);
  } else if (d.kind == "modular-torus") {
    std::vector<EndPrescription> pres;
    for (const auto& pc : c.principal_parts) pres.push_back({pc.end, pc.pp, pc.boundary_length});
    for (const auto& e : pres)
      if (e.pp.order > 1) throw Error(Stage::initial_map, "the modular torus cusp carries no pole of order above one");
    s.u0 = assemble_u0(p, d.premap, d.ends).state;
  } else {
    s.u0 = make_state(p, d.premap);
  }
  const auto& m = d.mesh;
  int free = 0;
  for (int v : m.canonical) free += !m.vertices[v].dirichlet;
  s.info = {{"domain", d.kind},
            {"refinement", c.flow.refinement},
            {"vertices", m.size()},
            {"canonical", int(m.canonical.size())},
            {"free", free},
            {"h_mesh", m.h_mesh},
            {"flat_h_min", m.flat_h_min},
            {"equivariance", equivariance_residual(p, s.u0)},
            {"core_energy", core_energy(p, s.u0)},
            {"sup_tau", sup_tension(m, tension_field(p, s.u0))}};
  s.info["domain_info"] = d.info;
  if (!d.audit_regions.empty()) {
    const auto audit = tension_audit(p, s.u0, d.audit_regions);
    Json regions = Json::array();
    for (const auto& r : audit.regions) {
      Json rj{{"name", r.name}, {"count", r.count}, {"sup_tau", r.sup}};
      if (r.fitted) rj["decay"] = {{"slope", r.slope}, {"r2", r.r2}};
      regions.push_back(rj);
    }
    s.info["tension_audit"] = regions;
  }
  double planar = 0.0;
  for (const auto& x : s.u0.u) planar = std::max(planar, std::abs(x.x2));
  s.info["max_abs_x2"] = planar;
  return s;
}

// ------------------------------------------------------------------ report

inline double rel_error_up_to_sign(cplx a, cplx b) { return std::min(std::abs(a - b), std::abs(a + b)) / std::abs(b); }

/// Asymptotic and principal-part statistics of a final state.
inline Json final_report(const FlowDomain& d, const MapState& u0, const MapState& u)
{
  const auto& m = d.mesh;
  EquivariantProblem p(m, d.rho);
  Json j;
  const H3Point p0 = u.u[m.canonical.front()];
  double lem = 0.0;
  for (int v : m.canonical) {
    const H3Point pre = d.premap(m.vertices[v].z);
    lem = std::max(lem, std::abs(dist_h3(pre, p0) - dist_h3(u.u[v], p0)));
  }
  j["premap_distance_gap"] = lem;
  j["sup_distance_to_u0"] = sup_distance(m, u, u0);
  if (d.reference) {
    double ref = 0.0;
    for (int v : m.canonical) ref = std::max(ref, dist_h3(u.u[v], d.reference(m.vertices[v].z)));
    j["sup_distance_to_reference"] = ref;
    j["reference_tolerance"] = 10 * m.h_mesh;
  }
  if (d.kind == "modular-torus") {
    // rays towards the cusp at infinity: distance to the image of the vertical geodesic
    std::map<long, std::vector<std::pair<double, int>>> rays;
    for (int v : m.canonical) {
      const cplx z = m.vertices[v].z;
      if (z.imag() < 1.2) continue;
      rays[std::lround(z.real() * 1e6)].push_back({z.imag(), v});
    }
    int monotone = 0, total = 0;
    double worst_end = 0.0;
    for (auto& [key, pts] : rays) {
      if (pts.size() < 3) continue;
      std::sort(pts.begin(), pts.end());
      const double x = key * 1e-6;
      double prev = 1e300;
      bool mono = true;
      double last = 0.0;
      for (const auto& [y, v] : pts) {
        const double dd = dist_h3(u.u[v], d.reference(cplx(x, y)));
        if (dd > prev + 1e-9) mono = false;
        prev = dd;
        last = dd;
      }
      ++total;
      monotone += mono;
      worst_end = std::max(worst_end, last);
    }
    j["framing_proxy"] = {{"rays", total}, {"non_increasing", monotone}, {"max_distance_at_truncation", worst_end}};
    double hopf = 0.0;
    for (const auto& h : hopf_from_map(p, u))
      if (!m.vertices[h.vertex].dirichlet) hopf = std::max(hopf, std::abs(h.phi) * h.z.imag() * h.z.imag());
    j["hopf"] = {{"max_phi_y2", hopf}, {"prescribed", "none (cusp)"}};
  } else if (d.crown) {
    const auto& model = d.crown->model;
    const auto fit = fit_principal_part(hopf_on_puncture_chart(p, u), 3, 0.0, 3);
    const cplx want = d.crown->prescribed.alpha(1);
    j["hopf_fit"] = {{"order", 3},
                     {"alpha1", cplx_json(fit.pp.alpha(1))},
                     {"prescribed", cplx_json(want)},
                     {"relative_error_up_to_sign", rel_error_up_to_sign(fit.pp.alpha(1), want)},
                     {"std_error", fit.std_errors.empty() ? 0.0 : fit.std_errors.front()},
                     {"condition", fit.condition},
                     {"rms_residual", fit.rms_residual},
                     {"samples", fit.samples},
                     {"well_conditioned", fit.well_conditioned}};
    // chain proxy on the outermost free ring
    double xmin = 1e300;
    for (int v : m.canonical)
      if (!m.vertices[v].dirichlet) xmin = std::min(xmin, m.vertices[v].z.real());
    const int mm = model.chain().m();
    double chain_dist = 0.0;
    for (int v : m.canonical) {
      if (m.vertices[v].dirichlet || std::abs(m.vertices[v].z.real() - xmin) > 1e-12) continue;
      double best = 1e300;
      for (long k = -3 * mm; k <= 3 * mm; ++k)
        best = std::min(best, dist_to_geodesic(u.u[v], Geodesic{model.chain().point(k), model.chain().point(k + 1)}));
      chain_dist = std::max(chain_dist, best);
    }
    j["chain_proxy"] = {{"ring_radius", model.zeta_polar(cplx(xmin, 0.0)).first}, {"max_distance_to_chain", chain_dist}};
  } else {
    double err = 0.0;
    const double t0 = d.premap(0.0).x3;
    for (int v : m.canonical) err = std::max(err, std::abs(u.u[v].x3 - std::sqrt(t0 * t0 + 2 * u.t)));
    j["closed_form"] = {{"t", u.t}, {"max_height_error", err}};
  }
  return j;
}

// ------------------------------------------------------------------ flow

struct FlowStage {
  InitStage init;
  FlowResult result;
  MonitorReport monitors;
  Json summary;
  Json report;
};

inline void write_snapshot(const std::filesystem::path& path, const EquivariantProblem& p, const MapState& s,
                           const std::vector<TangentVector>& tau)
{
  const auto& m = p.mesh();
  const auto e = energy_density(p, s);
  CsvWriter csv(path, {"vertex", "chart_x", "chart_y", "x1", "x2", "x3", "e", "tau"});
  for (int v : m.canonical) {
    csv << v << m.vertices[v].z.real() << m.vertices[v].z.imag() << s.u[v].x1 << s.u[v].x2 << s.u[v].x3 << e[v]
        << tau[v].norm();
    csv.end_row();
  }
}

inline FlowStage run_flow(const RunConfig& c, const BuiltRep* b, const std::filesystem::path& out, bool plots)
{
  FlowStage st{run_init(c, b), {}, {}, {}, {}};
  auto& d = st.init.domain;
  EquivariantProblem p(d.mesh, d.rho);
  const FlowConfig cfg = flow_config(c, d);
  int snap = 0;
  std::filesystem::create_directories(out / "snapshots");
  auto hook = [&](const MapState& s, const std::vector<TangentVector>& tau) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%06d.csv", snap++);
    write_snapshot(out / "snapshots" / name, p, s, tau);
  };
  st.result = flow(p, st.init.u0, cfg, hook);
  const auto& dg = st.result.diag;
  st.monitors = monitors(dg, cfg);
  {
    CsvWriter csv(out / "diagnostics.csv", {"time", "sup_tau", "max_e", "energy", "sup_dist_u0", "equivariance"});
    for (std::size_t i = 0; i < dg.time.size(); ++i) {
      csv << dg.time[i] << dg.sup_tau[i] << dg.max_e[i] << dg.energy[i] << dg.sup_dist_u0[i] << dg.equivariance[i];
      csv.end_row();
    }
  }
  double eq = 0.0;
  for (double q : dg.equivariance) eq = std::max(eq, q);
  st.summary = {{"domain", d.kind},
                {"refinement", c.flow.refinement},
                {"h_mesh", d.mesh.h_mesh},
                {"converged", dg.converged},
                {"steps", dg.steps},
                {"t", st.result.state.t},
                {"sup_tau", dg.sup_tau.back()},
                {"core_energy", dg.energy.back()},
                {"energy_violations", dg.energy_violations},
                {"worst_energy_increase", dg.worst_energy_increase},
                {"max_equivariance", eq},
                {"snapshots", snap},
                {"monitors",
                 {{"displacement_bounded", st.monitors.displacement_bounded},
                  {"axis_bounded", st.monitors.axis_bounded},
                  {"distance_bounded", st.monitors.distance_bounded},
                  {"energy_bound", st.monitors.energy_bound},
                  {"equivariant", st.monitors.equivariant}}}};
  st.summary["init"] = st.init.info;
  st.report = final_report(d, st.init.u0, st.result.state);
  write_json(out / "summary.json", st.summary);
  write_json(out / "report.json", st.report);
  if (plots) {
    const auto e = energy_density(p, st.result.state);
    const auto tau = tension_field(p, st.result.state);
    std::vector<double> tn(d.mesh.size());
    for (int v = 0; v < d.mesh.size(); ++v) tn[v] = tau[d.mesh.vertices[v].owner].norm();
    write_svg_heatmap(out / "energy_density.svg", d.mesh, e, {"energy density e(u)"});
    write_svg_heatmap(out / "tension.svg", d.mesh, tn, {"|tau(u)|", true});
    write_svg_lines(out / "diagnostics.svg", dg.time, {dg.sup_tau, dg.sup_dist_u0}, {"sup |tau|", "sup d(u, u0)"},
                    "flow diagnostics", true);
  }
  return st;
}

/// Loads the artifacts of a finished run directory.
inline Json run_report(const std::filesystem::path& dir)
{
  if (!std::filesystem::is_directory(dir)) throw Error(Stage::io, "run directory " + dir.string() + " does not exist");
  Json j;
  j["summary"] = read_json(dir / "summary.json");
  j["report"] = read_json(dir / "report.json");
  return j;
}

// ------------------------------------------------------------- interp demo

inline Json run_interp_demo(int n, double eps, const std::filesystem::path& out, bool plots)
{
  const auto z = zero_interp_coeffs(n, eps);
  const auto rep = zero_interp_verify(n, eps);
  {
    CsvWriter csv(out / "zero_interp_coeffs.csv", {"a", "b", "c"});
    csv << z.a << z.b << z.c;
    csv.end_row();
  }
  const int samples = 200;
  {
    CsvWriter csv(out / "zero_interp_profile.csv", {"r", "psi", "r_pow_n", "p", "curvature"});
    for (int i = 0; i <= samples; ++i) {
      const double r = 1.5 * eps * i / samples;
      csv << r << z.factor(r) << std::pow(r, n) << (r < eps ? z.p(r) : 0.0) << z.curvature(r);
      csv.end_row();
    }
  }
  if (plots) {
    std::vector<double> r, psi, flat;
    for (int i = 0; i <= samples; ++i) {
      r.push_back(1.5 * eps * i / samples);
      psi.push_back(z.factor(r.back()));
      flat.push_back(std::pow(r.back(), n));
    }
    write_svg_lines(out / "zero_interp.svg", r, {psi, flat}, {"f_eps(r)", "r^n"}, "zero interpolation");
  }
  Json j{{"n", n},
         {"eps", eps},
         {"a", z.a},
         {"b", z.b},
         {"c", z.c},
         {"residuals", {rep.residual_value, rep.residual_d1, rep.residual_d2}},
         {"min_p", rep.min_p},
         {"critical_value", rep.critical_value},
         {"max_curvature", rep.max_curvature},
         {"ok", rep.ok}};
  write_json(out / "interp_demo.json", j);
  return j;
}

}  // namespace hmflow
