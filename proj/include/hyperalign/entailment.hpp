#pragma once

// Entailment cones anchored at text embeddings, and the score-supervised
// hinge that pulls image embeddings inside them.

#include <optional>

#include "hyperalign/manifold.hpp"

namespace hyperalign {

struct EntailmentConfig {
  double k = 0.1;            // aperture boundary constant
  double contraction = 0.8;  // maximum aperture contraction at score 1
  double eps = 1e-8;

  /// Throws InvalidInput unless k > 0 and 0 <= contraction < 1.
  void validate() const;
};

/// The regressor input {d_L, phi, delta} plus the score-contracted aperture.
struct GeometricPrimitives {
  double distance = 0.0;
  double exterior_angle = 0.0;
  double aperture = 0.0;
  double dynamic_aperture = 0.0;
};

/// arcsin(min(1, 2k / max(sqrt(c) |text.space|, eps))).
double half_aperture(const LorentzPoint& text, const ManifoldConfig& mcfg,
                     const EntailmentConfig& ecfg);

/// Exterior angle at the text vertex of the origin-text-image triangle.
/// Throws DegenerateGeometry when the text point sits at the origin.
double exterior_angle(const LorentzPoint& text, const LorentzPoint& image,
                      const ManifoldConfig& mcfg, const EntailmentConfig& ecfg);

/// 1 - contraction * score. Throws InvalidInput for scores outside [0, 1].
double contraction_factor(double score, const EntailmentConfig& ecfg);

double dynamic_aperture(const LorentzPoint& text, double score, const ManifoldConfig& mcfg,
                        const EntailmentConfig& ecfg);

/// max(0, exterior_angle - dynamic_aperture).
double entailment_loss(const LorentzPoint& text, const LorentzPoint& image, double score,
                       const ManifoldConfig& mcfg, const EntailmentConfig& ecfg);

/// Bundles distance, exterior angle and apertures. Without a score the
/// dynamic aperture equals the plain aperture.
GeometricPrimitives geometric_primitives(const LorentzPoint& text, const LorentzPoint& image,
                                         std::optional<double> score, const ManifoldConfig& mcfg,
                                         const EntailmentConfig& ecfg);

}  // namespace hyperalign
