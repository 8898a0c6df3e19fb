#include <gtest/gtest.h>

#include <random>

#include "hmflow/hopf.hpp"
#include "hmflow/initial_map.hpp"

using namespace hmflow;

namespace {

std::vector<HopfSample> annulus_samples(const std::function<cplx(cplx)>& phi, double r0, double r1, int nr = 12,
                                        int nth = 48)
{
  std::vector<HopfSample> out;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nth; ++j) {
      const cplx z = std::polar(r0 + (r1 - r0) * (i + 0.5) / nr, 2 * kPi * (j + 0.25) / nth);
      out.push_back({z, phi(z)});
    }
  return out;
}

struct CollapseFixture {
  EquivariantMesh mesh;
  std::vector<MobiusMap> rho;
};

CollapseFixture collapse_fixture(int n, double c, double lx = 1.0, double ly = 1.0)
{
  CollapseFixture f{flat_periodic_mesh(n, n, lx, ly), {}};
  const cplx ex = std::exp(0.5 * lx), ey = std::exp(-0.5 * c * ly);
  f.rho = {MobiusMap{ex, 0.0, 0.0, 1.0 / ex}, MobiusMap{ey, 0.0, 0.0, 1.0 / ey}};
  return f;
}

}  // namespace

TEST(FitPrincipalPart, SyntheticOddOrder)
{
  const cplx a1{1.0, 0.5};
  auto phi = [&](cplx z) {
    const cplx s = a1 + 0.3 * z + cplx(0.1, -0.2) * z * z;
    return s * s / (z * z * z);
  };
  const auto fit = fit_principal_part(annulus_samples(phi, 0.2, 0.6), 3);
  ASSERT_EQ(fit.pp.coeffs.size(), 1u);
  EXPECT_TRUE(same_up_to_sign(fit.pp.alpha(1), a1, 1e-6 * std::abs(a1)));
  EXPECT_TRUE(fit.well_conditioned);
  EXPECT_LT(fit.std_errors[0], 1e-8);
}

TEST(FitPrincipalPart, SyntheticEvenOrderWithOffsetCentre)
{
  const std::vector<cplx> alpha{{0.4, -0.1}, {-0.7, 0.2}, {1.5, 1.0}};  // alpha_1..alpha_3
  const cplx c0{0.3, -0.2};
  auto phi = [&](cplx w) {  // sampled on an annulus about 0, then shifted
    cplx s = alpha[2] + alpha[1] * w + alpha[0] * w * w + 0.25 * w * w * w;
    return s * s / std::pow(w, 6);
  };
  auto samples = annulus_samples(phi, 0.1, 0.5);
  for (auto& s : samples) s.z += c0;
  const auto fit = fit_principal_part(samples, 6, c0);
  const double sign = std::abs(fit.pp.alpha(3) - alpha[2]) < std::abs(fit.pp.alpha(3) + alpha[2]) ? 1.0 : -1.0;
  for (int j = 1; j <= 3; ++j) EXPECT_LT(std::abs(sign * fit.pp.alpha(j) - alpha[j - 1]), 1e-6 * std::abs(alpha[j - 1]));
}

TEST(FitPrincipalPart, OrderTwoLeading)
{
  const cplx a{-0.3, 0.8};
  auto phi = [&](cplx z) { return (a + 0.2 * z + 0.05 * z * z) / (z * z); };
  const auto fit = fit_principal_part(annulus_samples(phi, 0.2, 0.6), 2);
  EXPECT_LT(std::abs(fit.pp.leading - a), 1e-6 * std::abs(a));
}

TEST(FitPrincipalPart, RejectsTooFewSamples)
{
  std::vector<HopfSample> s{{{1.0, 0.0}, 1.0}, {{0.0, 1.0}, 1.0}};
  EXPECT_THROW(fit_principal_part(s, 3), Error);
}

TEST(HopfFromMap, CollapseIsConstantWithAngle)
{
  for (double c : {0.0, 1.0, -0.5}) {
    const auto f = collapse_fixture(32, c);
    EquivariantProblem p(f.mesh, f.rho);
    const auto s = make_state(p, [&](cplx z) { return H3Point{0.0, 0.0, std::exp(z.real() - c * z.imag())}; });
    const cplx expect = 0.25 * cplx(1.0, c) * cplx(1.0, c);
    const auto hopf = hopf_from_map(p, s);
    double worst = 0.0;
    for (const auto& h : hopf) worst = std::max(worst, std::abs(h.phi - expect));
    EXPECT_LT(worst, 2e-3 * std::abs(expect)) << c;
    EXPECT_LT(dbar_residual(f.mesh, hopf), 1e-2);

    // the cylinder chart z = exp(2 pi i zeta / L): phi_z = -phi L^2 / (4 pi^2 z^2)
    const double L = 1.0;
    std::vector<HopfSample> disk;
    for (const auto& h : hopf) {
      const cplx w = std::exp(2.0 * kPi * cplx(0.0, 1.0) * h.z / L);
      disk.push_back({w, -h.phi * L * L / (4 * kPi * kPi * w * w), h.vertex});
    }
    const auto fit = fit_principal_part(disk, 2, 0.0, 2);
    EXPECT_NEAR(std::tan(collapse_angle_from_principal_part(fit.pp)), c, 5e-3);
    EXPECT_TRUE(compatible_with_boundary(fit.pp, L, 5e-3));
  }
}

TEST(HopfFromMap, ConformalEmbeddingHasNoHopf)
{
  const auto mesh = modular_torus_mesh(2);
  EquivariantProblem p(mesh, mesh.domain_generators);
  const auto s = make_state(p, [](cplx z) { return H3Point{z.real(), 0.0, z.imag()}; });
  double worst = 0.0;
  for (const auto& h : hopf_from_map(p, s))
    if (!mesh.vertices[h.vertex].dirichlet) worst = std::max(worst, std::abs(h.phi) * h.z.imag() * h.z.imag());
  EXPECT_LT(worst, 0.05);
}

TEST(HopfFromMap, DbarShrinksUnderRefinement)
{
  // a geodesic composed with h = Re e^z is harmonic with phi ~ (h_z)^2 = e^{2z} / 4
  std::vector<double> r;
  for (int n : {12, 24, 48}) {
    const auto mesh = cylinder_mesh(n / 4, n, 0.0, 0.5 * kPi / 2);
    EquivariantProblem p(mesh, {MobiusMap::identity()});
    const auto s = make_state(p, [](cplx z) { return H3Point{0.0, 0.0, std::exp(std::exp(z.real()) * std::cos(z.imag()))}; });
    const auto hopf = hopf_from_map(p, s);
    r.push_back(dbar_residual(mesh, hopf));
    double worst = 0.0;
    for (const auto& h : hopf)
      if (!mesh.vertices[h.vertex].dirichlet) worst = std::max(worst, std::abs(h.phi - 0.25 * std::exp(2.0 * h.z)));
    EXPECT_LT(worst, 0.5) << n;
  }
  EXPECT_LT(r[1], r[0]);
  EXPECT_LT(r[2], r[1]);
  // one-sided gradients on the boundary rows cap the L2 rate near 1/2
  EXPECT_GT(std::log2(r[0] / r[2]) / 2.0, 0.4);
}
