#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "hyperalign/error.hpp"
#include "hyperalign/simd/kernels.hpp"
#include "test_support.hpp"

using namespace hyperalign;
using hyperalign::testing::Gen;

namespace {

std::vector<simd::Backend> vector_backends() {
  std::vector<simd::Backend> out;
  for (auto b : {simd::Backend::kAvx2, simd::Backend::kNeon}) {
    if (simd::backend_available(b)) out.push_back(b);
  }
  return out;
}

double naive_dot(const std::vector<double>& x, const std::vector<double>& y) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) acc += static_cast<long double>(x[i]) * y[i];
  return static_cast<double>(acc);
}

}  // namespace

TEST(Simd, ScalarAlwaysAvailable) {
  EXPECT_TRUE(simd::backend_available(simd::Backend::kScalar));
  EXPECT_EQ(simd::kernels_for(simd::Backend::kScalar).backend, simd::Backend::kScalar);
  EXPECT_EQ(simd::backend_name(simd::Backend::kScalar), "scalar");
}

TEST(Simd, ScalarDotMatchesExtendedPrecision) {
  Gen g(1);
  const auto& k = simd::kernels_for(simd::Backend::kScalar);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 33u, 257u}) {
    const auto x = g.normal_vec(n), y = g.normal_vec(n);
    EXPECT_NEAR(k.dot(x.data(), y.data(), n), naive_dot(x, y), 1e-12 * (1.0 + n));
  }
}

TEST(Simd, DotAndAxpyAgreeAcrossBackends) {
  Gen g(2);
  const auto& ref = simd::kernels_for(simd::Backend::kScalar);
  for (auto b : vector_backends()) {
    const auto& k = simd::kernels_for(b);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = g.index(0, 131);
      const auto x = g.normal_vec(n), y = g.normal_vec(n);
      const double want = ref.dot(x.data(), y.data(), n);
      double scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
      EXPECT_NEAR(k.dot(x.data(), y.data(), n), want, 1e-14 * (1.0 + scale));

      const double a = g.normal();
      auto y1 = y, y2 = y;
      ref.axpy(a, x.data(), y1.data(), n);
      k.axpy(a, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(y2[i], y1[i], 1e-15 * (std::abs(a * x[i]) + std::abs(y[i]) + 1.0));
      }
    }
  }
}

TEST(Simd, AdamWBitwiseEqualAcrossBackends) {
  Gen g(3);
  const auto& ref = simd::kernels_for(simd::Backend::kScalar);
  for (auto b : vector_backends()) {
    const auto& k = simd::kernels_for(b);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = g.index(1, 77);
      auto p1 = g.normal_vec(n), m1 = g.normal_vec(n, 0.1), v1 = g.normal_vec(n, 0.1);
      for (auto& x : v1) x = x * x;
      auto p2 = p1, m2 = m1, v2 = v1;
      const auto grad = g.normal_vec(n);
      simd::AdamWArgs args;
      args.lr = g.uniform(1e-5, 1e-2);
      args.weight_decay = g.uniform(0.0, 0.1);
      args.bias_correction1 = 1.0 - std::pow(args.beta1, 1 + trial);
      args.bias_correction2 = 1.0 - std::pow(args.beta2, 1 + trial);
      ref.adamw(args, grad.data(), p1.data(), m1.data(), v1.data(), n);
      k.adamw(args, grad.data(), p2.data(), m2.data(), v2.data(), n);
      EXPECT_EQ(0, std::memcmp(p1.data(), p2.data(), n * sizeof(double)));
      EXPECT_EQ(0, std::memcmp(m1.data(), m2.data(), n * sizeof(double)));
      EXPECT_EQ(0, std::memcmp(v1.data(), v2.data(), n * sizeof(double)));
    }
  }
}

TEST(Simd, GemvFamilyMatchesNaiveLoops) {
  Gen g(4);
  const std::size_t rows = 5, cols = 11;
  const auto a = g.normal_vec(rows * cols), x = g.normal_vec(cols), z = g.normal_vec(rows);

  std::vector<double> y(rows);
  simd::gemv(a, rows, cols, x, y);
  for (std::size_t r = 0; r < rows; ++r) {
    double want = 0.0;
    for (std::size_t c = 0; c < cols; ++c) want += a[r * cols + c] * x[c];
    EXPECT_NEAR(y[r], want, 1e-13);
  }

  std::vector<double> yt(cols, 1.0);
  simd::gemv_t_acc(a, rows, cols, z, yt);
  for (std::size_t c = 0; c < cols; ++c) {
    double want = 1.0;
    for (std::size_t r = 0; r < rows; ++r) want += a[r * cols + c] * z[r];
    EXPECT_NEAR(yt[c], want, 1e-13);
  }

  auto b = a;
  simd::ger(0.5, z, x, b);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      EXPECT_NEAR(b[r * cols + c], a[r * cols + c] + 0.5 * z[r] * x[c], 1e-14);
    }
  }
}

TEST(Simd, WrappersRejectShapeMismatch) {
  std::vector<double> a(6), x(3), y(2), bad(4);
  EXPECT_THROW(simd::dot(x, bad), InvalidInput);
  EXPECT_THROW(simd::axpy(1.0, x, bad), InvalidInput);
  EXPECT_THROW(simd::gemv(a, 2, 3, bad, y), InvalidInput);
  EXPECT_THROW(simd::ger(1.0, y, x, bad), InvalidInput);
}

TEST(Simd, SetBackendSwitchesActiveTable) {
  const auto before = simd::active_backend();
  simd::set_backend(simd::Backend::kScalar);
  EXPECT_EQ(simd::kernels().backend, simd::Backend::kScalar);
  simd::set_backend(before);
  EXPECT_EQ(simd::active_backend(), before);
}
