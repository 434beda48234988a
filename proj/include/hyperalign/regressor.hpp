#pragma once

// ModulationNet: maps hyperbolic primitives to (scale, bias, confidence) and
// calibrates the Euclidean cosine similarity with them.

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "hyperalign/entailment.hpp"

namespace hyperalign {

struct ModulationParams {
  double scale = 1.0;
  double bias = 0.0;
  double confidence = 1.0;  // in (0, 1)
};

/// Feed-forward net 3 -> hidden -> hidden -> 3 with tanh hidden activations.
/// Weights are row-major (out x in).
struct ModulationNetParams {
  std::size_t hidden = kDefaultHidden;
  std::vector<double> w1, b1;  // hidden x 3, hidden
  std::vector<double> w2, b2;  // hidden x hidden, hidden
  std::vector<double> w3, b3;  // 3 x hidden, 3

  static constexpr std::size_t kInputs = 3;
  static constexpr std::size_t kOutputs = 3;
  static constexpr std::size_t kDefaultHidden = 32;
  // Added to the confidence logit so a zero output means confidence logistic(4).
  static constexpr double kConfidenceShift = 4.0;

  static ModulationNetParams zeros(std::size_t hidden = kDefaultHidden);

  /// Xavier-uniform hidden layers, zero biases, zero output layer: the net
  /// starts as the constant near-identity modulation.
  static ModulationNetParams initialize(std::mt19937_64& rng, std::size_t hidden = kDefaultHidden);

  void validate() const;
};

/// Fixed affine standardization of {d_L, phi, delta}: (d/2, phi/pi, delta/(pi/2)).
std::array<double, 3> standardize(const GeometricPrimitives& z);

/// Maps raw network outputs to (1 + o0, o1, logistic(o2 + 4)).
ModulationParams modulation_from_outputs(const std::array<double, 3>& raw);

/// dot / (|a| |b|), clamped to [-1, 1]. Throws InvalidInput on zero-norm input.
double cosine_similarity(std::span<const double> image, std::span<const double> text);

/// Throws InvalidInput when any primitive is non-finite.
ModulationParams modulation_params(const GeometricPrimitives& z, const ModulationNetParams& net);

/// confidence * (scale * s_base + bias); unclamped.
double calibrate(double s_base, const ModulationParams& m);

double predict_score(std::span<const double> image, std::span<const double> text,
                     const GeometricPrimitives& z, const ModulationNetParams& net);

}  // namespace hyperalign
