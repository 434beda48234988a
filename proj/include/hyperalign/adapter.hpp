#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace hyperalign {

/// Gated residual bottleneck: g * U relu(D f) + (1 - g) * f.
struct AdapterParams {
  std::size_t dim = 0;
  std::size_t hidden = 0;
  std::vector<double> down;  // hidden x dim, row-major
  std::vector<double> up;    // dim x hidden, row-major
  double gate_raw = -4.0;

  static constexpr std::size_t kReductionRatio = 4;
  static constexpr double kInitialGateRaw = -4.0;

  /// Bottleneck width for a feature dimension: max(1, dim / 4).
  static std::size_t hidden_for(std::size_t dim);

  /// All-zero weights with the given gate logit.
  static AdapterParams zeros(std::size_t dim, double gate_raw = kInitialGateRaw);

  /// Near-identity start: down ~ U(-1/sqrt(dim), 1/sqrt(dim)), up = 0, gate_raw = -4.
  static AdapterParams initialize(std::size_t dim, std::mt19937_64& rng);

  double gate() const;

  /// Throws InvalidInput when array sizes disagree with dim/hidden.
  void validate() const;
};

/// Applies the adapter. Throws InvalidInput on a dimension mismatch.
std::vector<double> adapt(std::span<const double> f, const AdapterParams& params);

}  // namespace hyperalign
