#include "hyperalign/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hyperalign/error.hpp"
#include "hyperalign/simd/kernels.hpp"

namespace hyperalign {

namespace {

// Below this tangent norm the exponential map uses its first-order limit.
constexpr double kZeroTangent = 1e-12;
constexpr double kOnManifoldRelTol = 1e-6;

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidInput(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                       std::to_string(b) + ")");
  }
}

}  // namespace

void ManifoldConfig::validate() const {
  if (!(curvature > 0.0) || !std::isfinite(curvature)) {
    throw InvalidInput("curvature must be a positive finite number");
  }
  if (!(eps > 0.0 && eps < 1e-3)) throw InvalidInput("eps must lie in (0, 1e-3)");
}

std::vector<double> LorentzPoint::ambient() const {
  std::vector<double> out;
  out.reserve(space.size() + 1);
  out.push_back(time);
  out.insert(out.end(), space.begin(), space.end());
  return out;
}

LorentzPoint LorentzPoint::origin(std::size_t dim, const ManifoldConfig& cfg) {
  return LorentzPoint{1.0 / std::sqrt(cfg.curvature), std::vector<double>(dim, 0.0)};
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double AdaptiveScaler::alpha() const { return logistic(raw) * alpha_max; }

double lorentz_inner(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x.size(), y.size(), "lorentz_inner");
  if (x.size() < 2) throw InvalidInput("lorentz_inner: ambient dimension must be at least 2");
  return -x[0] * y[0] + simd::dot(x.subspan(1), y.subspan(1));
}

double lorentz_inner(const LorentzPoint& x, const LorentzPoint& y) {
  require_same_dim(x.dim(), y.dim(), "lorentz_inner");
  return -x.time * y.time + simd::dot(x.space, y.space);
}

double lorentz_norm(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double q = -v[0] * v[0] + simd::squared_norm(v.subspan(1));
  return std::sqrt(std::abs(q));
}

double manifold_residual(const LorentzPoint& x, const ManifoldConfig& cfg) {
  return std::abs(cfg.curvature * lorentz_inner(x, x) + 1.0);
}

bool on_manifold(const LorentzPoint& x, const ManifoldConfig& cfg) {
  if (!std::isfinite(x.time)) return false;
  const double expected = std::sqrt(1.0 / cfg.curvature + simd::squared_norm(x.space));
  return std::abs(x.time - expected) <= kOnManifoldRelTol * expected;
}

double geodesic_distance(const LorentzPoint& x, const LorentzPoint& y, const ManifoldConfig& cfg) {
  require_same_dim(x.dim(), y.dim(), "geodesic_distance");
  if (!on_manifold(x, cfg) || !on_manifold(y, cfg)) {
    throw InvalidInput("geodesic_distance: point is off the manifold");
  }
  const double arg = std::max(1.0, -cfg.curvature * lorentz_inner(x, y));
  return std::acosh(arg) / std::sqrt(cfg.curvature);
}

TangentAtOrigin lift_to_tangent(std::span<const double> f, const AdaptiveScaler& scaler) {
  const double alpha = scaler.alpha();
  TangentAtOrigin v{std::vector<double>(f.size())};
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) throw InvalidInput("lift_to_tangent: non-finite feature");
    v.space[i] = alpha * f[i];
  }
  return v;
}

LorentzPoint exp_map_origin(const TangentAtOrigin& v, const ManifoldConfig& cfg) {
  const double sqrt_c = std::sqrt(cfg.curvature);
  const double r = std::sqrt(simd::squared_norm(v.space));
  if (r < kZeroTangent) {
    return LorentzPoint{1.0 / sqrt_c, v.space};
  }
  const double t = sqrt_c * r;
  const double ratio = std::sinh(t) / t;
  LorentzPoint p{std::cosh(t) / sqrt_c, std::vector<double>(v.space.size())};
  for (std::size_t i = 0; i < v.space.size(); ++i) p.space[i] = ratio * v.space[i];
  return p;
}

LorentzPoint project_to_manifold(std::span<const double> space, const ManifoldConfig& cfg) {
  LorentzPoint p{0.0, std::vector<double>(space.begin(), space.end())};
  p.time = std::sqrt(1.0 / cfg.curvature + simd::squared_norm(p.space));
  return p;
}

}  // namespace hyperalign
