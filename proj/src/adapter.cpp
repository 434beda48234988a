#include "hyperalign/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hyperalign/error.hpp"
#include "hyperalign/manifold.hpp"
#include "hyperalign/simd/kernels.hpp"

namespace hyperalign {

std::size_t AdapterParams::hidden_for(std::size_t dim) {
  return std::max<std::size_t>(1, dim / kReductionRatio);
}

AdapterParams AdapterParams::zeros(std::size_t dim, double gate_raw) {
  const std::size_t hidden = hidden_for(dim);
  return AdapterParams{dim, hidden, std::vector<double>(hidden * dim, 0.0),
                       std::vector<double>(dim * hidden, 0.0), gate_raw};
}

AdapterParams AdapterParams::initialize(std::size_t dim, std::mt19937_64& rng) {
  AdapterParams p = zeros(dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : p.down) w = dist(rng);
  return p;
}

double AdapterParams::gate() const { return logistic(gate_raw); }

void AdapterParams::validate() const {
  if (dim == 0 || hidden == 0) throw InvalidInput("adapter: empty dimensions");
  if (down.size() != hidden * dim || up.size() != dim * hidden) {
    throw InvalidInput("adapter: weight shapes do not match dim=" + std::to_string(dim) +
                       ", hidden=" + std::to_string(hidden));
  }
}

std::vector<double> adapt(std::span<const double> f, const AdapterParams& params) {
  params.validate();
  if (f.size() != params.dim) {
    throw InvalidInput("adapt: feature dimension " + std::to_string(f.size()) +
                       " does not match adapter dimension " + std::to_string(params.dim));
  }
  std::vector<double> hidden(params.hidden);
  simd::gemv(params.down, params.hidden, params.dim, f, hidden);
  for (double& h : hidden) h = std::max(0.0, h);

  std::vector<double> branch(params.dim);
  simd::gemv(params.up, params.dim, params.hidden, hidden, branch);

  const double g = params.gate();
  std::vector<double> out(params.dim);
  for (std::size_t i = 0; i < params.dim; ++i) out[i] = g * branch[i] + (1.0 - g) * f[i];
  return out;
}

}  // namespace hyperalign
