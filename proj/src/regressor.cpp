#include "hyperalign/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hyperalign/error.hpp"
#include "hyperalign/manifold.hpp"
#include "hyperalign/simd/kernels.hpp"

namespace hyperalign {

ModulationNetParams ModulationNetParams::zeros(std::size_t hidden) {
  ModulationNetParams n;
  n.hidden = hidden;
  n.w1.assign(hidden * kInputs, 0.0);
  n.b1.assign(hidden, 0.0);
  n.w2.assign(hidden * hidden, 0.0);
  n.b2.assign(hidden, 0.0);
  n.w3.assign(kOutputs * hidden, 0.0);
  n.b3.assign(kOutputs, 0.0);
  return n;
}

ModulationNetParams ModulationNetParams::initialize(std::mt19937_64& rng, std::size_t hidden) {
  ModulationNetParams n = zeros(hidden);
  auto xavier = [&rng](std::vector<double>& w, std::size_t fan_in, std::size_t fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& x : w) x = dist(rng);
  };
  xavier(n.w1, kInputs, hidden);
  xavier(n.w2, hidden, hidden);
  return n;
}

void ModulationNetParams::validate() const {
  if (hidden == 0 || w1.size() != hidden * kInputs || b1.size() != hidden ||
      w2.size() != hidden * hidden || b2.size() != hidden || w3.size() != kOutputs * hidden ||
      b3.size() != kOutputs) {
    throw InvalidInput("modulation net: weight shapes inconsistent with hidden width " +
                       std::to_string(hidden));
  }
}

std::array<double, 3> standardize(const GeometricPrimitives& z) {
  return {z.distance / 2.0, z.exterior_angle / std::numbers::pi,
          z.aperture / (std::numbers::pi / 2.0)};
}

ModulationParams modulation_from_outputs(const std::array<double, 3>& raw) {
  return ModulationParams{1.0 + raw[0], raw[1],
                          logistic(raw[2] + ModulationNetParams::kConfidenceShift)};
}

double cosine_similarity(std::span<const double> image, std::span<const double> text) {
  const double ni = std::sqrt(simd::squared_norm(image));
  const double nt = std::sqrt(simd::squared_norm(text));
  if (ni == 0.0 || nt == 0.0) throw InvalidInput("cosine_similarity: zero-norm input");
  return std::clamp(simd::dot(image, text) / (ni * nt), -1.0, 1.0);
}

ModulationParams modulation_params(const GeometricPrimitives& z, const ModulationNetParams& net) {
  if (!std::isfinite(z.distance) || !std::isfinite(z.exterior_angle) ||
      !std::isfinite(z.aperture)) {
    throw InvalidInput("modulation_params: non-finite geometric primitive");
  }
  net.validate();
  const auto in = standardize(z);
  const std::size_t h = net.hidden;

  std::vector<double> h1(h), h2(h);
  simd::gemv(net.w1, h, ModulationNetParams::kInputs, in, h1);
  for (std::size_t j = 0; j < h; ++j) h1[j] = std::tanh(h1[j] + net.b1[j]);
  simd::gemv(net.w2, h, h, h1, h2);
  for (std::size_t j = 0; j < h; ++j) h2[j] = std::tanh(h2[j] + net.b2[j]);
  std::array<double, 3> out{};
  simd::gemv(net.w3, ModulationNetParams::kOutputs, h, h2, out);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += net.b3[j];
  return modulation_from_outputs(out);
}

double calibrate(double s_base, const ModulationParams& m) {
  return m.confidence * (m.scale * s_base + m.bias);
}

double predict_score(std::span<const double> image, std::span<const double> text,
                     const GeometricPrimitives& z, const ModulationNetParams& net) {
  return calibrate(cosine_similarity(image, text), modulation_params(z, net));
}

}  // namespace hyperalign
