#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "hmflow/metric_interp.hpp"
#include "hmflow/quad_diff.hpp"

namespace hmflow {

/// A disk of the core chart where the flat 4|q| metric is replaced.
struct MetricFeature {
  enum class Kind { zero, simple_pole };
  Kind kind = Kind::zero;
  cplx center;
  int order = 1;
  double radius = 0.0;  // chart radius of the modification disk
  double eps = 0.0;
};

/// Conformal factor lambda^2 on the core chart of a model differential:
/// 4|q| outside the features; inside a zero of order n, 4|q| psi(|w|)/|w|^n
/// with w = eps (z - z0)/R; inside a simple pole, 4|q| r e^{2u(r)} with
/// r = (2/3)|z - p|/R and u the cusp interpolation profile.
class DomainMetric {
 public:
  DomainMetric(ModelDifferential q, std::vector<MetricFeature> features)
      : q_(std::move(q)), features_(std::move(features))
  {
    for (const auto& f : features_) {
      if (f.kind == MetricFeature::Kind::zero) {
        zero_.push_back(zero_interp_coeffs(f.order, f.eps));
        pole_.push_back(std::nullopt);
      } else {
        zero_.push_back(std::nullopt);
        pole_.push_back(pole_interp(f.eps));
      }
    }
  }

  const ModelDifferential& differential() const { return q_; }
  const std::vector<MetricFeature>& features() const { return features_; }

  /// Index of the feature whose disk contains z, or -1.
  int feature_at(cplx z) const
  {
    for (int i = 0; i < int(features_.size()); ++i)
      if (std::abs(z - features_[i].center) < features_[i].radius) return i;
    return -1;
  }

  double flat_factor(cplx z) const { return 4.0 * std::abs(q_.chart_value(z)); }

  double lambda2(cplx z) const
  {
    const int i = feature_at(z);
    if (i < 0) return flat_factor(z);
    const auto& f = features_[i];
    const double h = 4.0 * std::abs(q_.chart_value_without(z, f.center));
    const double d = std::abs(z - f.center);
    if (zero_[i]) {
      const double s = f.radius / f.eps;  // |z - z0| = s |w|
      return h * std::pow(s, f.order) * zero_[i]->psi(d / s);
    }
    const double r = cusp::kOuter * d / f.radius;
    return h * (cusp::kOuter / f.radius) * pole_[i]->factor(r);
  }

  /// Gaussian curvature -1/2 Delta log lambda^2 / lambda^2 from the profiles.
  double curvature(cplx z) const
  {
    const int i = feature_at(z);
    if (i < 0) return 0.0;
    const auto& f = features_[i];
    const double d = std::abs(z - f.center);
    const double l2 = lambda2(z);
    if (zero_[i]) {
      const double k = f.eps / f.radius;  // |dw/dz|
      const double w = k * d;
      return k * k * zero_[i]->curvature(w) * zero_[i]->psi(w) / l2;
    }
    const double k = cusp::kOuter / f.radius;
    const double r = k * d;
    return k * k * pole_[i]->curvature(r) * pole_[i]->factor(r) / l2;
  }

 private:
  ModelDifferential q_;
  std::vector<MetricFeature> features_;
  std::vector<std::optional<ZeroInterpCoeffs>> zero_;
  std::vector<std::optional<PoleInterp>> pole_;
};

struct FeatureChoice {
  double eps = 0.0;     // 0 picks the default for the feature type
  double radius = 0.0;  // 0 picks the default radius
};

/// Modification disks at every zero and every positioned simple pole of the
/// model. Default zero radius is eps; default pole radius 1/(6|h(p)|) makes
/// the metric exactly hyperbolic at the puncture.
inline DomainMetric domain_metric_assemble(const ModelDifferential& q, const std::vector<FeatureChoice>& choices = {})
{
  q.validate();
  std::vector<MetricFeature> fs;
  std::vector<cplx> divisor;
  for (const auto& z : q.zeros) divisor.push_back(z.position);
  for (const auto& p : q.poles)
    if (p.position) divisor.push_back(*p.position);
  auto choice = [&](std::size_t i) { return i < choices.size() ? choices[i] : FeatureChoice{}; };
  for (const auto& z : q.zeros) {
    const auto c = choice(fs.size());
    MetricFeature f;
    f.kind = MetricFeature::Kind::zero;
    f.center = z.position;
    f.order = z.order;
    f.eps = c.eps > 0.0 ? c.eps : 0.1;
    f.radius = c.radius > 0.0 ? c.radius : f.eps;
    fs.push_back(f);
  }
  for (const auto& p : q.poles) {
    if (!p.position || p.order != 1) continue;
    const auto c = choice(fs.size());
    MetricFeature f;
    f.kind = MetricFeature::Kind::simple_pole;
    f.center = *p.position;
    f.order = 1;
    f.eps = c.eps > 0.0 ? c.eps : pole_default_eps();
    if (c.radius > 0.0) {
      f.radius = c.radius;
    } else {
      const double h = std::abs(q.chart_value_without(f.center, f.center));
      f.radius = 1.0 / (6.0 * h);
    }
    fs.push_back(f);
  }
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (!(fs[i].eps > 0.0 && fs[i].eps < 1.0)) throw Error(Stage::metric, "feature eps must lie in (0, 1)");
    for (std::size_t j = i + 1; j < fs.size(); ++j)
      if (std::abs(fs[i].center - fs[j].center) < fs[i].radius + fs[j].radius)
        throw Error(Stage::metric, "modification regions " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    for (const auto& d : divisor)
      if (d != fs[i].center && std::abs(d - fs[i].center) < fs[i].radius)
        throw Error(Stage::metric, "modification region " + std::to_string(i) + " contains another zero or pole");
  }
  return DomainMetric(q, fs);
}

struct CurvatureAudit {
  double max_curvature = -1e300;
  cplx max_at{};
  double min_lambda2 = 1e300;
  int samples = 0;
};

/// Samples curvature and positivity on a grid over a chart box.
inline CurvatureAudit audit_curvature(const DomainMetric& g, cplx lo, cplx hi, int n = 200)
{
  CurvatureAudit a;
  auto visit = [&](cplx z) {
    for (const auto& f : g.features())
      if (z == f.center && f.kind == MetricFeature::Kind::simple_pole) return;
    const double K = g.curvature(z);
    if (K > a.max_curvature) {
      a.max_curvature = K;
      a.max_at = z;
    }
    a.min_lambda2 = std::min(a.min_lambda2, g.lambda2(z));
    ++a.samples;
  };
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      visit({lo.real() + (hi.real() - lo.real()) * i / n, lo.imag() + (hi.imag() - lo.imag()) * j / n});
  // feature disks get their own radial sampling
  for (const auto& f : g.features())
    for (int i = 1; i <= n; ++i)
      for (int k = 0; k < 8; ++k) visit(f.center + std::polar(f.radius * i / n, 2 * kPi * k / 8));
  return a;
}

}  // namespace hmflow
