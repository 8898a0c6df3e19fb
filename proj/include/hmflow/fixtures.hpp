#pragma once

#include <array>
#include <cmath>

#include "hmflow/hopf.hpp"
#include "hmflow/initial_map.hpp"

namespace hmflow {

// ------------------------------------------------------- modular torus

inline H3Point identity_embedding(cplx z) { return {z.real(), 0.0, z.imag()}; }

/// Identity embedding moved by a smooth bump (1 - (d/R)^2)^3 of hyperbolic
/// size amp around z0, along the ambient direction dir.
inline H3Point bumped(cplx z, cplx z0 = {2.5, 1.7}, double R = 0.5, double amp = 0.3,
                      std::array<double, 3> dir = {1.0, 1.0, 1.0})
{
  const H3Point x = identity_embedding(z);
  const double d = dist_h3(x, identity_embedding(z0));
  if (d >= R) return x;
  const double phi = std::pow(1.0 - (d / R) * (d / R), 3);
  const double n = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
  const double s = amp * phi * x.x3 / n;
  return exp_h3(x, TangentVector{x, s * dir[0], s * dir[1], s * dir[2]});
}

/// Cusp end of the modular torus: the horodisk map of the peripheral T^6
/// glued to a premap over the collar y in [lo, hi].
inline EndBlend modular_cusp_blend(double lo, double hi)
{
  const MobiusMap T6{1.0, 6.0, 0.0, 1.0};
  return {"cusp", [lo, hi](cplx z) { return collar_weight(z.imag(), lo, hi); },
          [T6](cplx z) { return horodisk_map(z, T6, 6.0); }};
}

// --------------------------------------------------------- crown end

/// End-local fixture for an order-three crown pole: a cylinder in the log
/// chart of the end between zeta-radii r_in and r_out, Dirichlet data from
/// the crown model on both circles, target the Fuchsian representation of
/// the one-holed torus with one marked boundary point.
struct CrownFixture {
  IdealTriangulation tri;
  FramedRepresentation rep;
  CrownEndModel model;
  PrincipalPart prescribed;
  EquivariantMesh mesh;
};

inline CrownFixture crown_end_fixture(int level, const FGCoords& z, cplx alpha1, double r_in = 3.0, double r_out = 8.0)
{
  if (level < 0 || level > 5) throw Error(Stage::geometry, "refinement level out of range");
  if (!(r_out > r_in && r_in > 0.0)) throw Error(Stage::geometry, "crown annulus needs 0 < r_in < r_out");
  auto tri = one_holed_torus(1);
  auto rep = holonomy(develop(tri, z));
  PrincipalPart pp;
  pp.order = 3;
  pp.coeffs = {alpha1};
  CrownEndModel model(chain_from_framing(rep, tri, 0), 3, alpha1);
  const double x0 = model.chart_x(r_out), x1 = model.chart_x(r_in);
  const int ny = 16 << level;
  const int nx = std::max(2, int(std::lround(ny * (x1 - x0) / (2.0 * kPi))));
  auto mesh = cylinder_mesh(nx, ny, x0, x1);
  return {std::move(tri), std::move(rep), std::move(model), std::move(pp), std::move(mesh)};
}

inline CrownFixture crown_end_fixture(int level, cplx alpha1 = {0.8, 0.3}, double shear = 1.5, double r_in = 3.0,
                                      double r_out = 8.0)
{
  return crown_end_fixture(level, FGCoords{std::vector<cplx>(one_holed_torus(1).num_edges(), shear)}, alpha1, r_in,
                           r_out);
}

/// Hopf samples of a state on the log chart w, moved to the puncture chart
/// z = e^w (phi_z = phi_w / z^2), free vertices only.
inline std::vector<HopfSample> hopf_on_puncture_chart(const EquivariantProblem& p, const MapState& s)
{
  std::vector<HopfSample> out;
  for (const auto& h : hopf_from_map(p, s)) {
    if (p.mesh().vertices[h.vertex].dirichlet) continue;
    const cplx z = std::exp(h.z);
    out.push_back({z, h.phi / (z * z), h.vertex});
  }
  return out;
}

}  // namespace hmflow
