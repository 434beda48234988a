#pragma once

// Lorentz-model hyperbolic geometry. Points live on the upper sheet of
// <x, x>_L = -1/c in R^{d+1}; only origin-based maps are provided.

#include <cstddef>
#include <span>
#include <vector>

namespace hyperalign {

struct ManifoldConfig {
  double curvature = 1.0;
  double eps = 1e-8;

  /// Throws InvalidInput unless curvature > 0 and 0 < eps < 1e-3.
  void validate() const;
};

/// A point on the hyperboloid, split into time (x0) and space components.
struct LorentzPoint {
  double time = 1.0;
  std::vector<double> space;

  std::size_t dim() const { return space.size(); }

  /// The full (d+1)-vector [time, space...].
  std::vector<double> ambient() const;

  /// The hyperboloid origin [1/sqrt(c), 0, ..., 0].
  static LorentzPoint origin(std::size_t dim, const ManifoldConfig& cfg);
};

/// Tangent vector at the origin; the implied ambient vector is [0, space].
struct TangentAtOrigin {
  std::vector<double> space;
};

/// Learnable feature scale alpha = logistic(raw) * alpha_max.
struct AdaptiveScaler {
  double raw = 0.0;
  double alpha_max = 1.0;

  double alpha() const;
};

double logistic(double x);

/// -x0*y0 + sum_i xi*yi over ambient (d+1)-vectors.
double lorentz_inner(std::span<const double> x, std::span<const double> y);
double lorentz_inner(const LorentzPoint& x, const LorentzPoint& y);

/// sqrt(|<v, v>_L|).
double lorentz_norm(std::span<const double> v);

/// |c * <x, x>_L + 1|, the on-manifold residual.
double manifold_residual(const LorentzPoint& x, const ManifoldConfig& cfg);

/// True when time matches sqrt(1/c + |space|^2) to 1e-6 relative.
bool on_manifold(const LorentzPoint& x, const ManifoldConfig& cfg);

/// Geodesic distance (1/sqrt(c)) * arccosh(max(1, -c <x, y>_L)).
/// Throws InvalidInput for off-manifold points or mismatched dimensions.
double geodesic_distance(const LorentzPoint& x, const LorentzPoint& y, const ManifoldConfig& cfg);

/// [0, alpha * f]. Throws InvalidInput on non-finite features.
TangentAtOrigin lift_to_tangent(std::span<const double> f, const AdaptiveScaler& scaler);

/// Exponential map at the origin. The zero tangent maps exactly to the origin.
LorentzPoint exp_map_origin(const TangentAtOrigin& v, const ManifoldConfig& cfg);

/// Recomputes time = sqrt(1/c + |space|^2) for the given space components.
LorentzPoint project_to_manifold(std::span<const double> space, const ManifoldConfig& cfg);

}  // namespace hyperalign
