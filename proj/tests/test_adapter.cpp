#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hyperalign/adapter.hpp"
#include "hyperalign/error.hpp"
#include "hyperalign/manifold.hpp"
#include "hyperalign/regressor.hpp"
#include "test_support.hpp"

using namespace hyperalign;
using hyperalign::testing::Gen;

namespace {

double frobenius(const std::vector<double>& m) {
  double s = 0.0;
  for (double x : m) s += x * x;
  return std::sqrt(s);
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

AdapterParams random_adapter(Gen& g, std::size_t dim) {
  AdapterParams p = AdapterParams::zeros(dim, g.uniform(-6.0, 6.0));
  for (auto& w : p.down) w = g.normal() * 0.5;
  for (auto& w : p.up) w = g.normal() * 0.5;
  return p;
}

}  // namespace

TEST(Adapter, Shapes) {
  EXPECT_EQ(AdapterParams::hidden_for(32), 8u);
  EXPECT_EQ(AdapterParams::hidden_for(3), 1u);
  const auto p = AdapterParams::zeros(32);
  EXPECT_EQ(p.down.size(), 8u * 32u);
  EXPECT_EQ(p.up.size(), 32u * 8u);
  EXPECT_EQ(p.gate_raw, -4.0);
}

TEST(Adapter, ClosedGateIsIdentity) {
  Gen g(31);
  auto p = random_adapter(g, 16);
  p.gate_raw = -30.0;
  const auto f = g.normal_vec(16);
  const auto out = adapt(f, p);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(out[i], f[i], 1e-9 * (1.0 + std::abs(f[i])));
}

TEST(Adapter, ZeroBranchScalesByOpenGate) {
  Gen g(32);
  for (double raw : {-4.0, 0.0, 2.5}) {
    const auto p = AdapterParams::zeros(12, raw);
    const auto f = g.normal_vec(12);
    const auto out = adapt(f, p);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(out[i], (1.0 - logistic(raw)) * f[i]);
  }
}

TEST(Adapter, ZeroInputGivesZero) {
  Gen g(33);
  const auto p = random_adapter(g, 8);
  for (double x : adapt(std::vector<double>(8, 0.0), p)) EXPECT_EQ(x, 0.0);
}

TEST(Adapter, InitializationIsScaledIdentity) {
  std::mt19937_64 rng(7);
  const auto p = AdapterParams::initialize(32, rng);
  for (double w : p.up) EXPECT_EQ(w, 0.0);
  const double bound = 1.0 / std::sqrt(32.0);
  for (double w : p.down) EXPECT_LE(std::abs(w), bound);
  Gen g(34);
  for (int trial = 0; trial < 50; ++trial) {
    const auto fi = g.normal_vec(32), ft = g.normal_vec(32);
    const auto ai = adapt(fi, p);
    for (std::size_t i = 0; i < fi.size(); ++i) EXPECT_EQ(ai[i], (1.0 - p.gate()) * fi[i]);
    EXPECT_NEAR(cosine_similarity(ai, adapt(ft, p)), cosine_similarity(fi, ft), 1e-12);
  }
}

TEST(Adapter, LipschitzBound) {
  Gen g(35);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = g.index(1, 24);
    const auto p = random_adapter(g, dim);
    // Frobenius norms bound the operator norms from above.
    const double lip = 1.0 + frobenius(p.up) * frobenius(p.down);
    const auto f1 = g.normal_vec(dim), f2 = g.normal_vec(dim);
    EXPECT_LE(distance(adapt(f1, p), adapt(f2, p)), lip * distance(f1, f2) * (1.0 + 1e-12));
  }
}

TEST(Adapter, RejectsDimensionMismatch) {
  const auto p = AdapterParams::zeros(8);
  EXPECT_THROW(adapt(std::vector<double>(7, 1.0), p), InvalidInput);
  auto broken = p;
  broken.up.pop_back();
  EXPECT_THROW(adapt(std::vector<double>(8, 1.0), broken), InvalidInput);
}
