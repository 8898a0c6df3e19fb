#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "hmflow/heat_flow.hpp"
#include "hmflow/quad_diff.hpp"

namespace hmflow {

struct HopfSample {
  cplx z;
  cplx phi;  // <u_z, u_z> in the H^3 metric, coefficient of dz^2
  int vertex = -1;
};

/// Hopf differential at every canonical vertex from star-averaged gradients
/// of the piecewise linear map in the owner's chart.
inline std::vector<HopfSample> hopf_from_map(const EquivariantProblem& p, const MapState& s)
{
  const auto& m = p.mesh();
  std::vector<HopfSample> out;
  out.reserve(m.canonical.size());
  for (int c : m.canonical) {
    detail::Vec3 ux{}, uy{};
    double area = 0.0;
    for (const auto& e : m.star[c]) {
      const auto g = detail::triangle_gradient(e.z, detail::star_values(p, s, e));
      const double a = signed_area(e.z);
      for (int k = 0; k < 3; ++k) {
        ux[k] += a * g.dx[k];
        uy[k] += a * g.dy[k];
      }
      area += a;
    }
    double xx = 0, yy = 0, xy = 0;
    for (int k = 0; k < 3; ++k) {
      ux[k] /= area;
      uy[k] /= area;
      xx += ux[k] * ux[k];
      yy += uy[k] * uy[k];
      xy += ux[k] * uy[k];
    }
    const double t2 = s.u[c].x3 * s.u[c].x3;
    out.push_back({m.vertices[c].z, cplx(xx - yy, -2.0 * xy) / (4.0 * t2), c});
  }
  return out;
}

/// Area-weighted L2 norm of dbar(phi) over triangles whose corners are all
/// canonical, for phi linearly interpolated; samples indexed as returned by
/// hopf_from_map.
inline double dbar_residual(const EquivariantMesh& m, const std::vector<HopfSample>& samples)
{
  std::vector<int> at(m.size(), -1);
  for (int i = 0; i < int(samples.size()); ++i) at[samples[i].vertex] = i;
  double num = 0.0, area = 0.0;
  for (int t = 0; t < int(m.triangles.size()); ++t) {
    const auto& tr = m.triangles[t];
    if (at[tr[0]] < 0 || at[tr[1]] < 0 || at[tr[2]] < 0) continue;
    std::array<cplx, 3> z, f;
    for (int k = 0; k < 3; ++k) {
      z[k] = m.vertices[tr[k]].z;
      f[k] = samples[at[tr[k]]].phi;
    }
    const cplx e1 = z[1] - z[0], e2 = z[2] - z[0];
    const double det = e1.real() * e2.imag() - e1.imag() * e2.real();
    const cplx df1 = f[1] - f[0], df2 = f[2] - f[0];
    const cplx fx = (df1 * e2.imag() - df2 * e1.imag()) / det;
    const cplx fy = (df2 * e1.real() - df1 * e2.real()) / det;
    const cplx dbar = 0.5 * (fx + cplx(0.0, 1.0) * fy);
    const double a = 0.5 * std::abs(det);
    num += a * std::norm(dbar);
    area += a;
  }
  return area > 0.0 ? std::sqrt(num / area) : 0.0;
}

struct PrincipalPartFit {
  PrincipalPart pp;
  std::vector<double> std_errors;  // per alpha_j (or for the leading coefficient when order <= 2)
  double condition = 0.0;
  double rms_residual = 0.0;
  int samples = 0;
  bool well_conditioned = true;
};

namespace detail {

/// Square roots of psi at the samples with the branch continued along a
/// nearest-neighbour spanning tree rooted at the sample nearest to the ray
/// arg(z - center) = 0.
inline std::vector<cplx> continuous_root(const std::vector<HopfSample>& s, const std::vector<cplx>& psi, cplx center)
{
  const int n = int(s.size());
  int root = 0;
  double best = 1e300;
  for (int i = 0; i < n; ++i) {
    const cplx w = s[i].z - center;
    const double score = std::abs(std::arg(w)) * std::abs(w) + 1e-3 * std::abs(w);
    if (score < best) {
      best = score;
      root = i;
    }
  }
  std::vector<cplx> out(n);
  std::vector<bool> done(n, false);
  std::vector<double> dist(n, 1e300);
  std::vector<int> from(n, root);
  out[root] = std::sqrt(psi[root]);
  done[root] = true;
  int last = root;
  for (int step = 1; step < n; ++step) {
    int next = -1;
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      const double d = std::abs(s[i].z - s[last].z);
      if (d < dist[i]) {
        dist[i] = d;
        from[i] = last;
      }
      if (next < 0 || dist[i] < dist[next]) next = i;
    }
    cplx r = std::sqrt(psi[next]);
    if (std::abs(r - out[from[next]]) > std::abs(r + out[from[next]])) r = -r;
    out[next] = r;
    done[next] = true;
    last = next;
  }
  return out;
}

}  // namespace detail

inline constexpr double kFitConditionLimit = 1e10;

/// Least-squares recovery of the principal part of an order-n pole at
/// `center` from Hopf samples on an annulus around it. For n >= 3 the
/// single-valued root of psi = phi (z - c)^n is fitted by a polynomial of
/// degree r - 1 + extra, so alpha_j is the coefficient of (z - c)^{r - j};
/// for n <= 2 psi itself is fitted and its constant term is the leading
/// coefficient.
inline PrincipalPartFit fit_principal_part(const std::vector<HopfSample>& samples, int n, cplx center = 0.0,
                                           int extra = 4)
{
  if (n < 1) throw Error(Stage::differential, "pole order must be >= 1");
  if (samples.size() < 4) throw Error(Stage::differential, "too few Hopf samples for a principal-part fit");
  const int r = n / 2;
  const int cols = (n >= 3 ? r : 1) + extra;
  if (int(samples.size()) <= cols) throw Error(Stage::differential, "fewer Hopf samples than fit unknowns");
  const int rows = int(samples.size());
  std::vector<cplx> y(rows);
  double rho = 0.0;  // scale of the annulus keeps the polynomial columns comparable
  for (int i = 0; i < rows; ++i) {
    y[i] = samples[i].phi * std::pow(samples[i].z - center, n);
    rho = std::max(rho, std::abs(samples[i].z - center));
  }
  if (n >= 3) y = detail::continuous_root(samples, y, center);
  Eigen::MatrixXcd A(rows, cols);
  Eigen::VectorXcd b(rows);
  for (int i = 0; i < rows; ++i) {
    b(i) = y[i];
    const cplx w = (samples[i].z - center) / rho;
    cplx pw = 1.0;
    for (int k = 0; k < cols; ++k) {
      A(i, k) = pw;
      pw *= w;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  PrincipalPartFit out;
  out.samples = rows;
  out.condition = sv(0) / sv(sv.size() - 1);
  out.well_conditioned = out.condition < kFitConditionLimit;
  const Eigen::VectorXcd beta = svd.solve(b);
  const Eigen::VectorXcd res = A * beta - b;
  const double sigma2 = res.squaredNorm() / std::max(1, rows - cols);
  out.rms_residual = std::sqrt(res.squaredNorm() / rows);
  // covariance sigma^2 (A^H A)^{-1} = sigma^2 V S^-2 V^H
  const Eigen::MatrixXcd V = svd.matrixV();
  auto std_error = [&](int k) {
    double v = 0.0;
    for (int j = 0; j < sv.size(); ++j) v += std::norm(V(k, j)) / (sv(j) * sv(j));
    return std::sqrt(sigma2 * v) / std::pow(rho, k);
  };
  out.pp.order = n;
  if (n >= 3) {
    out.pp.coeffs.resize(r);
    for (int j = 1; j <= r; ++j) {
      out.pp.coeffs[j - 1] = beta(r - j) / std::pow(rho, r - j);
      out.std_errors.push_back(std_error(r - j));
    }
  } else {
    out.pp.leading = beta(0);
    out.std_errors.push_back(std_error(0));
  }
  return out;
}

}  // namespace hmflow
