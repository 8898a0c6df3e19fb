#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "hmflow/mesh.hpp"

namespace hmflow {

struct MapState {
  std::vector<H3Point> u;  // one value per mesh vertex, copies included
  double t = 0.0;
};

/// Mesh plus target representation; caches rho(word) per vertex.
class EquivariantProblem {
 public:
  EquivariantProblem(const EquivariantMesh& mesh, std::vector<MobiusMap> rho) : mesh_(&mesh), rho_(std::move(rho))
  {
    if (rho_.size() != mesh.domain_generators.size())
      throw Error(Stage::flow, "representation has " + std::to_string(rho_.size()) + " generators, mesh expects " +
                                   std::to_string(mesh.domain_generators.size()));
    const int n = mesh.size();
    map_.resize(n);
    inv_.resize(n);
    trivial_.resize(n);
    for (int v = 0; v < n; ++v) {
      map_[v] = word_image(rho_, mesh.vertices[v].word);
      inv_[v] = map_[v].inverse();
      trivial_[v] = mesh.vertices[v].word.empty();
    }
  }

  const EquivariantMesh& mesh() const { return *mesh_; }
  const std::vector<MobiusMap>& rho() const { return rho_; }
  const MobiusMap& vertex_map(int v) const { return map_[v]; }
  const MobiusMap& vertex_map_inverse(int v) const { return inv_[v]; }
  bool trivial(int v) const { return trivial_[v]; }

  /// Largest mismatch of rho around identification cycles, as matrix distance.
  double representation_defect() const
  {
    double worst = 0.0;
    for (const auto& id : mesh_->identifications) {
      const MobiusMap lhs = map_[id.to];
      const MobiusMap rhs = word_image(rho_, id.word) * map_[id.from];
      worst = std::max(worst, matrix_distance(lhs, rhs));
    }
    return worst;
  }

 private:
  const EquivariantMesh* mesh_;
  std::vector<MobiusMap> rho_;
  std::vector<MobiusMap> map_, inv_;
  std::vector<bool> trivial_;
};

/// Builds a state from a function of the chart coordinate on canonical
/// vertices and pushes it through the deck maps.
inline MapState make_state(const EquivariantProblem& p, const std::function<H3Point(cplx)>& f)
{
  const auto& m = p.mesh();
  MapState s;
  s.u.resize(m.size());
  for (int c : m.canonical) s.u[c] = f(m.vertices[c].z);
  for (int v = 0; v < m.size(); ++v) s.u[v] = p.vertex_map(v).apply(s.u[m.vertices[v].owner]);
  return s;
}

inline void enforce_equivariance(const EquivariantProblem& p, MapState& s)
{
  const auto& m = p.mesh();
  for (int v = 0; v < m.size(); ++v)
    if (!p.trivial(v)) s.u[v] = p.vertex_map(v).apply(s.u[m.vertices[v].owner]);
}

inline double equivariance_residual(const EquivariantProblem& p, const MapState& s)
{
  const auto& m = p.mesh();
  double worst = 0.0;
  for (int v = 0; v < m.size(); ++v)
    if (!p.trivial(v)) worst = std::max(worst, dist_h3(s.u[v], p.vertex_map(v).apply(s.u[m.vertices[v].owner])));
  return worst;
}

namespace detail {

using Vec3 = std::array<double, 3>;

inline Vec3 to_vec(const H3Point& x) { return {x.x1, x.x2, x.x3}; }

/// Gradient of the linear interpolant of the three values: (d/dx, d/dy) per component.
struct TriGrad {
  Vec3 dx{}, dy{};
};

inline TriGrad triangle_gradient(const std::array<cplx, 3>& z, const std::array<Vec3, 3>& p)
{
  const cplx e1 = z[1] - z[0], e2 = z[2] - z[0];
  const double a = e1.real(), b = e1.imag(), c = e2.real(), d = e2.imag();
  const double det = a * d - b * c;
  TriGrad g;
  for (int k = 0; k < 3; ++k) {
    const double f1 = p[1][k] - p[0][k], f2 = p[2][k] - p[0][k];
    g.dx[k] = (d * f1 - b * f2) / det;
    g.dy[k] = (-c * f1 + a * f2) / det;
  }
  return g;
}

inline double cot_at(cplx apex, cplx p, cplx q)
{
  const cplx u = p - apex, v = q - apex;
  const double dot = u.real() * v.real() + u.imag() * v.imag();
  const double cross = u.real() * v.imag() - u.imag() * v.real();
  return dot / std::abs(cross);
}

inline double grad_dot(const TriGrad& g, int i, int j) { return g.dx[i] * g.dx[j] + g.dy[i] * g.dy[j]; }

/// Triangle values pulled back into the frame of the canonical vertex.
inline std::array<Vec3, 3> star_values(const EquivariantProblem& p, const MapState& s, const StarEntry& e)
{
  const auto& tri = p.mesh().triangles[e.triangle];
  std::array<Vec3, 3> out;
  for (int k = 0; k < 3; ++k) {
    const H3Point x = p.trivial(e.copy) ? s.u[tri[k]] : p.vertex_map_inverse(e.copy).apply(s.u[tri[k]]);
    out[k] = to_vec(x);
  }
  return out;
}

inline std::array<cplx, 3> triangle_chart(const EquivariantMesh& m, int t)
{
  const auto& tri = m.triangles[t];
  return {m.vertices[tri[0]].z, m.vertices[tri[1]].z, m.vertices[tri[2]].z};
}

}  // namespace detail

/// Barycentric vertex area of a canonical vertex, in its own chart.
inline double vertex_area(const EquivariantMesh& m, int c)
{
  double a = 0.0;
  for (const auto& e : m.star[c]) a += signed_area(e.z) / 3.0;
  return a;
}

/// Tension at every canonical vertex (zero elsewhere), in ambient coordinates:
/// lambda^-2 (Delta_flat u^k + Gamma^k_ij(u) <grad u^i, grad u^j>).
inline std::vector<TangentVector> tension_field(const EquivariantProblem& p, const MapState& s)
{
  const auto& m = p.mesh();
  std::vector<TangentVector> tau(m.size());
  for (int v = 0; v < m.size(); ++v) tau[v].base = s.u[v];
  for (int c : m.canonical) {
    const double t = s.u[c].x3;
    if (!(t > 0.0)) throw Error(Stage::flow, "state corruption: x3 <= 0 at vertex " + std::to_string(c));
    detail::Vec3 lap{}, chr{};
    double area = 0.0;
    for (const auto& e : m.star[c]) {
      const auto& z = e.z;
      const auto val = detail::star_values(p, s, e);
      const int k = e.corner, k1 = (k + 1) % 3, k2 = (k + 2) % 3;
      const double w1 = 0.5 * detail::cot_at(z[k2], z[k], z[k1]);
      const double w2 = 0.5 * detail::cot_at(z[k1], z[k], z[k2]);
      for (int i = 0; i < 3; ++i) lap[i] += w1 * (val[k1][i] - val[k][i]) + w2 * (val[k2][i] - val[k][i]);
      const auto g = detail::triangle_gradient(z, val);
      const double at = signed_area(z) / 3.0;
      chr[0] += at * (-2.0 / t) * detail::grad_dot(g, 0, 2);
      chr[1] += at * (-2.0 / t) * detail::grad_dot(g, 1, 2);
      chr[2] += at * (detail::grad_dot(g, 0, 0) + detail::grad_dot(g, 1, 1) - detail::grad_dot(g, 2, 2)) / t;
      area += at;
    }
    const double scale = 1.0 / (m.vertices[c].lambda2 * area);
    tau[c].v1 = scale * (lap[0] + chr[0]);
    tau[c].v2 = scale * (lap[1] + chr[1]);
    tau[c].v3 = scale * (lap[2] + chr[2]);
  }
  return tau;
}

/// Largest hyperbolic norm of the tension over free canonical vertices.
inline double sup_tension(const EquivariantMesh& m, const std::vector<TangentVector>& tau)
{
  double worst = 0.0;
  for (int c : m.canonical)
    if (!m.vertices[c].dirichlet) worst = std::max(worst, tau[c].norm());
  return worst;
}

/// e = lambda^-2 |du|^2 at each canonical vertex (area-weighted over its star).
inline std::vector<double> energy_density(const EquivariantProblem& p, const MapState& s)
{
  const auto& m = p.mesh();
  std::vector<double> e(m.size(), 0.0);
  for (int c : m.canonical) {
    const double t = s.u[c].x3;
    double sum = 0.0, area = 0.0;
    for (const auto& st : m.star[c]) {
      const auto g = detail::triangle_gradient(st.z, detail::star_values(p, s, st));
      const double at = signed_area(st.z) / 3.0;
      sum += at * (detail::grad_dot(g, 0, 0) + detail::grad_dot(g, 1, 1) + detail::grad_dot(g, 2, 2));
      area += at;
    }
    e[c] = sum / (t * t) / (m.vertices[c].lambda2 * area);
  }
  for (int v = 0; v < m.size(); ++v) e[v] = e[m.vertices[v].owner];
  return e;
}

/// E = 1/2 sum_T area_T |grad u_T|^2 <1/x3^2>_T; conformally invariant. An
/// optional triangle predicate restricts to a core region.
inline double core_energy(const EquivariantProblem& p, const MapState& s,
                          const std::function<bool(int)>& in_core = nullptr)
{
  const auto& m = p.mesh();
  double E = 0.0;
  for (int t = 0; t < int(m.triangles.size()); ++t) {
    if (in_core && !in_core(t)) continue;
    const auto& tri = m.triangles[t];
    std::array<detail::Vec3, 3> val;
    double inv = 0.0;
    for (int k = 0; k < 3; ++k) {
      val[k] = detail::to_vec(s.u[tri[k]]);
      inv += 1.0 / (3.0 * s.u[tri[k]].x3 * s.u[tri[k]].x3);
    }
    const auto g = detail::triangle_gradient(detail::triangle_chart(m, t), val);
    E += 0.5 * m.triangle_area(t) * inv * (detail::grad_dot(g, 0, 0) + detail::grad_dot(g, 1, 1) + detail::grad_dot(g, 2, 2));
  }
  return E;
}

struct FlowConfig {
  double cfl = 0.2;
  double dt = 0.0;  // 0 picks the largest CFL-admissible step
  bool local_time_stepping = true;  // step dt * lambda^2 * tau, i.e. flow in the flat chart metric
  double t_max = 200.0;
  double tol_tau = 1e-5;
  int cadence = 100;
  long max_steps = std::numeric_limits<long>::max();
  double energy_tol = 1e-8;     // relative per-step energy increase tolerated
  double growth_tol = 1e-3;     // monitor: relative growth allowed in the last quarter
  int trace_vertex = -1;        // canonical vertex followed by the monitors
  std::vector<MobiusMap> monitor_elements;  // rho-images whose displacement/axes are tracked
};

inline double cfl_limit(const EquivariantMesh& m, const FlowConfig& cfg)
{
  const double h2 = m.flat_h_min * m.flat_h_min;
  return cfg.local_time_stepping ? cfg.cfl * h2 : cfg.cfl * m.min_lambda2 * h2;
}

/// One explicit geodesic Euler step; Dirichlet vertices stay fixed.
inline MapState step(const EquivariantProblem& p, const MapState& s, double dt, const FlowConfig& cfg = {},
                     std::vector<TangentVector>* tau_out = nullptr)
{
  const auto& m = p.mesh();
  if (dt > cfl_limit(m, cfg) * (1.0 + 1e-12))
    throw Error(Stage::flow, "time step " + std::to_string(dt) + " violates the CFL bound " + std::to_string(cfl_limit(m, cfg)));
  auto tau = tension_field(p, s);
  MapState out = s;
  for (int c : m.canonical) {
    if (m.vertices[c].dirichlet) continue;
    const double h = cfg.local_time_stepping ? dt * m.vertices[c].lambda2 : dt;
    TangentVector v = tau[c];
    v.v1 *= h;
    v.v2 *= h;
    v.v3 *= h;
    out.u[c] = exp_h3(s.u[c], v);
  }
  enforce_equivariance(p, out);
  out.t = s.t + dt;
  if (tau_out) *tau_out = std::move(tau);
  return out;
}

struct Diagnostics {
  std::vector<double> time, sup_tau, max_e, energy, sup_dist_u0, equivariance;
  std::vector<H3Point> trace;
  std::vector<std::vector<double>> displacement, axis_distance;  // per monitor element
  long steps = 0;
  int energy_violations = 0;
  double worst_energy_increase = 0.0;  // relative
  double max_e0 = 0.0;
  bool converged = false;
};

inline double sup_distance(const EquivariantMesh& m, const MapState& a, const MapState& b, bool free_only = false)
{
  double worst = 0.0;
  for (int c : m.canonical)
    if (!free_only || !m.vertices[c].dirichlet) worst = std::max(worst, dist_h3(a.u[c], b.u[c]));
  return worst;
}

struct FlowResult {
  MapState state;
  Diagnostics diag;
};

inline void record(const EquivariantProblem& p, const MapState& s, const MapState& s0, double sup_tau, double energy,
                   const FlowConfig& cfg, Diagnostics& d)
{
  const auto& m = p.mesh();
  d.time.push_back(s.t);
  d.sup_tau.push_back(sup_tau);
  const auto e = energy_density(p, s);
  double emax = 0.0;
  for (int c : m.canonical) emax = std::max(emax, e[c]);
  d.max_e.push_back(emax);
  d.energy.push_back(energy);
  d.sup_dist_u0.push_back(sup_distance(m, s, s0));
  d.equivariance.push_back(equivariance_residual(p, s));
  const int tv = cfg.trace_vertex >= 0 ? cfg.trace_vertex : m.canonical.front();
  d.trace.push_back(s.u[tv]);
  d.displacement.resize(cfg.monitor_elements.size());
  d.axis_distance.resize(cfg.monitor_elements.size());
  for (std::size_t i = 0; i < cfg.monitor_elements.size(); ++i) {
    const auto& g = cfg.monitor_elements[i];
    d.displacement[i].push_back(dist_h3(g.apply(s.u[tv]), s.u[tv]));
    const auto type = classify(g);
    d.axis_distance[i].push_back(type == MobiusType::loxodromic || type == MobiusType::elliptic
                                     ? dist_to_geodesic(s.u[tv], axis(g))
                                     : 0.0);
  }
}

/// Called with the state and its tension at every recorded snapshot.
using SnapshotHook = std::function<void(const MapState&, const std::vector<TangentVector>&)>;

/// Iterates step until sup|tau| < tol_tau or t >= t_max.
inline FlowResult flow(const EquivariantProblem& p, const MapState& s0, const FlowConfig& cfg = {},
                       const SnapshotHook& hook = {})
{
  const auto& m = p.mesh();
  const double dt = cfg.dt > 0.0 ? cfg.dt : cfl_limit(m, cfg);
  FlowResult r{s0, {}};
  auto& d = r.diag;
  auto tau = tension_field(p, r.state);
  double sup = sup_tension(m, tau);
  double E = core_energy(p, r.state);
  {
    const auto e0 = energy_density(p, s0);
    for (int c : m.canonical) d.max_e0 = std::max(d.max_e0, e0[c]);
  }
  record(p, r.state, s0, sup, E, cfg, d);
  if (hook) hook(r.state, tau);
  while (sup >= cfg.tol_tau && r.state.t < cfg.t_max && d.steps < cfg.max_steps) {
    MapState next = step(p, r.state, dt, cfg);
    ++d.steps;
    const double En = core_energy(p, next);
    if (En > E + cfg.energy_tol * std::abs(E)) {
      ++d.energy_violations;
    }
    if (E != 0.0) d.worst_energy_increase = std::max(d.worst_energy_increase, (En - E) / std::abs(E));
    E = En;
    r.state = std::move(next);
    tau = tension_field(p, r.state);
    sup = sup_tension(m, tau);
    if (d.steps % cfg.cadence == 0) {
      record(p, r.state, s0, sup, E, cfg, d);
      if (hook) hook(r.state, tau);
    }
  }
  if (d.steps % cfg.cadence != 0) {
    record(p, r.state, s0, sup, E, cfg, d);
    if (hook) hook(r.state, tau);
  }
  d.converged = sup < cfg.tol_tau;
  return r;
}

struct MonitorReport {
  bool displacement_bounded = true;
  bool axis_bounded = true;
  bool distance_bounded = true;
  bool energy_bound = true;   // max_t e(u_t) <= e * max e(u_0)
  bool equivariant = true;
  bool ok() const { return displacement_bounded && axis_bounded && distance_bounded && energy_bound && equivariant; }
};

/// True when the series keeps growing in its last quarter beyond the tolerance.
inline bool still_growing(const std::vector<double>& x, double rel_tol)
{
  if (x.size() < 4) return false;
  const std::size_t q = x.size() - x.size() / 4;
  const double early = *std::max_element(x.begin(), x.begin() + q);
  const double late = *std::max_element(x.begin() + q, x.end());
  return late > early + rel_tol * std::max(1.0, std::abs(early));
}

inline MonitorReport monitors(const Diagnostics& d, const FlowConfig& cfg = {})
{
  MonitorReport r;
  for (const auto& s : d.displacement) r.displacement_bounded = r.displacement_bounded && !still_growing(s, cfg.growth_tol);
  for (const auto& s : d.axis_distance) r.axis_bounded = r.axis_bounded && !still_growing(s, cfg.growth_tol);
  r.distance_bounded = !still_growing(d.sup_dist_u0, cfg.growth_tol);
  for (double e : d.max_e) r.energy_bound = r.energy_bound && e <= std::exp(1.0) * d.max_e0 + 1e-12;
  for (double q : d.equivariance) r.equivariant = r.equivariant && q < 1e-10;
  return r;
}

}  // namespace hmflow
