#include "hyperalign/entailment.hpp"

#include <algorithm>
#include <cmath>

#include "hyperalign/error.hpp"
#include "hyperalign/simd/kernels.hpp"

namespace hyperalign {

void EntailmentConfig::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidInput("k must be a positive finite number");
  if (!(contraction >= 0.0 && contraction < 1.0)) {
    throw InvalidInput("contraction must lie in [0, 1)");
  }
  if (!(eps > 0.0 && eps < 1e-3)) throw InvalidInput("eps must lie in (0, 1e-3)");
}

double half_aperture(const LorentzPoint& text, const ManifoldConfig& mcfg,
                     const EntailmentConfig& ecfg) {
  const double norm = std::sqrt(simd::squared_norm(text.space));
  const double arg = 2.0 * ecfg.k / std::max(std::sqrt(mcfg.curvature) * norm, ecfg.eps);
  return std::asin(std::min(1.0, arg));
}

double exterior_angle(const LorentzPoint& text, const LorentzPoint& image,
                      const ManifoldConfig& mcfg, const EntailmentConfig& ecfg) {
  const double c = mcfg.curvature;
  const double text_norm = std::sqrt(simd::squared_norm(text.space));
  if (text_norm < ecfg.eps) {
    throw DegenerateGeometry("exterior_angle: text point at the origin has no cone axis");
  }
  const double c_eta = c * lorentz_inner(text, image);
  const double numer = image.time + text.time * c_eta;
  const double denom = text_norm * std::sqrt(std::max(ecfg.eps, c_eta * c_eta - 1.0));
  return std::acos(std::clamp(numer / denom, -1.0, 1.0));
}

double contraction_factor(double score, const EntailmentConfig& ecfg) {
  if (!(score >= 0.0 && score <= 1.0)) throw InvalidInput("score must lie in [0, 1]");
  return 1.0 - ecfg.contraction * score;
}

double dynamic_aperture(const LorentzPoint& text, double score, const ManifoldConfig& mcfg,
                        const EntailmentConfig& ecfg) {
  return contraction_factor(score, ecfg) * half_aperture(text, mcfg, ecfg);
}

double entailment_loss(const LorentzPoint& text, const LorentzPoint& image, double score,
                       const ManifoldConfig& mcfg, const EntailmentConfig& ecfg) {
  const double gamma = contraction_factor(score, ecfg);
  const double phi = exterior_angle(text, image, mcfg, ecfg);
  return std::max(0.0, phi - gamma * half_aperture(text, mcfg, ecfg));
}

GeometricPrimitives geometric_primitives(const LorentzPoint& text, const LorentzPoint& image,
                                         std::optional<double> score, const ManifoldConfig& mcfg,
                                         const EntailmentConfig& ecfg) {
  GeometricPrimitives z;
  z.distance = geodesic_distance(text, image, mcfg);
  z.exterior_angle = exterior_angle(text, image, mcfg, ecfg);
  z.aperture = half_aperture(text, mcfg, ecfg);
  z.dynamic_aperture =
      score ? contraction_factor(*score, ecfg) * z.aperture : z.aperture;
  return z;
}

}  // namespace hyperalign
