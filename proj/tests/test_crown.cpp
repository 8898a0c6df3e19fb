#include <gtest/gtest.h>

#include "hmflow/fixtures.hpp"

using namespace hmflow;

namespace {

double rel_error_up_to_sign(cplx a, cplx b) { return std::min(std::abs(a - b), std::abs(a + b)) / std::abs(b); }

}  // namespace

TEST(CrownModel, EquivariantAndPlanar)
{
  const auto fx = crown_end_fixture(1);
  const auto& M = fx.model;
  const MobiusMap g = M.deck_image();
  for (double x : {fx.mesh.vertices.front().z.real(), 0.5 * fx.mesh.vertices.front().z.real()})
    for (double y = 0.0; y < 2 * kPi; y += 0.37) {
      const cplx w{x, y};
      const H3Point u = M(w);
      EXPECT_LT(std::abs(u.x2), 1e-12);
      EXPECT_LT(dist_h3(M(w + cplx(0.0, 2 * kPi)), g.apply(u)), 1e-8);
    }
}

TEST(CrownModel, DeepLeavesApproachChainGeodesic)
{
  const auto fx = crown_end_fixture(1);
  const auto& M = fx.model;
  // centre of a horizontal sector: arg zeta = pi/2 (mod pi) at fixed chart y
  const double y = (std::arg(M.zeta_polar({0.0, 0.0}).second) , (M.zeta_polar({0.0, 0.0}).second - 0.5 * kPi) / M.kappa());
  const auto [r0, phi0] = M.zeta_polar({0.0, y});
  const long k = std::lround((phi0 - 0.5 * kPi) / kPi);
  ASSERT_NEAR(phi0 - 0.5 * kPi - k * kPi, 0.0, 1e-12);
  const Geodesic g{fx.model.chain().point(k), fx.model.chain().point(k + 1)};
  std::vector<double> rho, logd;
  for (double r = 3.0; r <= 12.0; r += 1.0) {
    const double d = dist_to_geodesic(M({M.chart_x(r), y}), g);
    rho.push_back(r);
    logd.push_back(std::log(d));
  }
  const auto [slope, r2] = linear_fit(rho, logd);
  EXPECT_LT(slope, -0.5);
  EXPECT_GT(r2, 0.99);
}

TEST(CrownModel, RejectsUnsupportedOrders)
{
  const auto fx = crown_end_fixture(0);
  EXPECT_THROW(CrownEndModel(fx.model.chain(), 4, 1.0), Error);
  EXPECT_THROW(CrownEndModel(fx.model.chain(), 5, 1.0), Error);
  EXPECT_THROW(CrownEndModel(fx.model.chain(), 3, 0.0), Error);
}

TEST(CrownModel, TensionDecaysAlongTheEnd)
{
  const auto fx = crown_end_fixture(2);
  EquivariantProblem p(fx.mesh, {fx.model.deck_image()});
  const auto s = make_state(p, [&](cplx w) { return fx.model(w); });
  EXPECT_LT(equivariance_residual(p, s), 1e-10);
  const auto audit = tension_audit(p, s,
                                   {{"crown", [](int) { return true; },
                                     [&](int c) { return fx.model.zeta_polar(fx.mesh.vertices[c].z).first; },
                                     [&](cplx w) { return fx.model(w); }}});
  const auto& r = audit.region("crown");
  EXPECT_TRUE(r.fitted);
  EXPECT_LT(r.slope, 0.0);
  EXPECT_GT(r.r2, 0.9);
}

TEST(CrownModel, InitialHopfMatchesPrescription)
{
  const auto fx = crown_end_fixture(2);
  EquivariantProblem p(fx.mesh, {fx.model.deck_image()});
  const auto s = make_state(p, [&](cplx w) { return fx.model(w); });
  const auto fit = fit_principal_part(hopf_on_puncture_chart(p, s), 3, 0.0, 3);
  EXPECT_TRUE(fit.well_conditioned);
  EXPECT_LT(rel_error_up_to_sign(fit.pp.alpha(1), fx.prescribed.alpha(1)), 0.05);
}

TEST(CrownFlow, RecoversLeadingCoefficientAtLevel2)
{
  const auto fx = crown_end_fixture(2);
  EquivariantProblem p(fx.mesh, {fx.model.deck_image()});
  const auto s0 = make_state(p, [&](cplx w) { return fx.model(w); });
  const auto r = flow(p, s0);
  ASSERT_TRUE(r.diag.converged);
  for (double e : r.diag.equivariance) EXPECT_LT(e, 1e-10);
  const auto fit = fit_principal_part(hopf_on_puncture_chart(p, r.state), 3, 0.0, 3);
  EXPECT_LT(rel_error_up_to_sign(fit.pp.alpha(1), fx.prescribed.alpha(1)), 0.05);
  double planar = 0.0;
  for (const auto& u : r.state.u) planar = std::max(planar, std::abs(u.x2));
  EXPECT_LT(planar, 1e-12);
}

TEST(CrownCompatibility, OddOrdersDropTheResidueCondition)
{
  const auto fx = crown_end_fixture(0);
  const auto& chain = fx.model.chain();
  PrincipalPart p3;
  p3.order = 3;
  p3.coeffs = {cplx(0.8, 0.3)};
  EXPECT_TRUE(compatible_with_chain(p3, chain));
  PrincipalPart p5;
  p5.order = 5;
  p5.coeffs = {cplx(1.0), cplx(2.0)};
  EXPECT_FALSE(compatible_with_chain(p5, chain));
  EXPECT_NO_THROW(check_end_compatibility({{0, p3, 0.0, chain}}));
  EXPECT_THROW(check_end_compatibility({{0, p5, 0.0, chain}}), Error);
  EXPECT_THROW(check_end_compatibility({{0, p3, 0.0, std::nullopt}}), Error);
}
