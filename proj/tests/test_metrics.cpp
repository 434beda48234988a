#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hyperalign/error.hpp"
#include "hyperalign/metrics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace hyperalign;
using hyperalign::testing::Gen;

namespace {

/// Random vector of length n; with `ties`, values come from a small pool.
std::vector<double> random_values(Gen& g, std::size_t n, bool ties) {
  std::vector<double> v(n);
  for (auto& x : v) x = ties ? static_cast<double>(g.index(0, 5)) : g.normal();
  return v;
}

bool constant(const std::vector<double>& v) {
  for (double x : v) {
    if (x != v.front()) return false;
  }
  return true;
}

}  // namespace

TEST(Srcc, Examples) {
  EXPECT_DOUBLE_EQ(srcc(std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(srcc(std::vector<double>{3, 1, 2}, std::vector<double>{1, 2, 3}), -0.5);
}

TEST(Srcc, TiesUseAverageRanks) {
  EXPECT_EQ(average_ranks(std::vector<double>{10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
  const std::vector<double> p{1, 2, 2, 3}, gt{4, 1, 3, 2};
  EXPECT_NEAR(srcc(p, gt), hyperalign::testing::brute_force_spearman(p, gt), 1e-12);
}

TEST(Plcc, Examples) {
  const std::vector<double> gt{0.3, 1.2, -0.7, 2.5};
  EXPECT_DOUBLE_EQ(plcc(gt, gt), 1.0);
  std::vector<double> neg;
  for (double x : gt) neg.push_back(-x + 7);
  EXPECT_DOUBLE_EQ(plcc(neg, gt), -1.0);
}

TEST(Metrics, MatchBruteForceOracles) {
  Gen g(51);
  int checked = 0;
  while (checked < 100) {
    const std::size_t n = g.index(2, 50);
    const bool ties = checked % 2 == 0;
    const auto a = random_values(g, n, ties), b = random_values(g, n, ties);
    if (constant(a) || constant(b)) continue;
    EXPECT_EQ(average_ranks(a), hyperalign::testing::brute_force_ranks(a));
    EXPECT_NEAR(srcc(a, b), hyperalign::testing::brute_force_spearman(a, b), 1e-12);
    EXPECT_NEAR(plcc(a, b), hyperalign::testing::brute_force_pearson(a, b), 1e-12);
    ++checked;
  }
}

TEST(Metrics, InvarianceAndSymmetry) {
  Gen g(52);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = g.index(3, 40);
    const auto a = random_values(g, n, trial % 3 == 0), b = random_values(g, n, false);
    if (constant(a)) continue;
    std::vector<double> mono, affine;
    const double slope = std::exp(g.uniform(-3, 3)), shift = g.uniform(-5, 5);
    for (double x : a) {
      mono.push_back(std::exp(x) * 3.0 + x * x * x);
      affine.push_back(slope * x + shift);
    }
    EXPECT_EQ(srcc(mono, b), srcc(a, b));
    EXPECT_NEAR(plcc(affine, b), plcc(a, b), 1e-12);
    EXPECT_EQ(srcc(a, b), srcc(b, a));
    EXPECT_EQ(plcc(a, b), plcc(b, a));
    const auto r = evaluate_metrics(a, b);
    EXPECT_EQ(r.n, n);
    EXPECT_EQ(r.srcc, srcc(a, b));
    EXPECT_EQ(r.plcc, plcc(a, b));
  }
}

TEST(Metrics, UndefinedCases) {
  const std::vector<double> one{1.0}, flat{2, 2, 2}, ok{1, 2, 3};
  EXPECT_THROW(srcc(one, one), UndefinedMetric);
  EXPECT_THROW(plcc(one, one), UndefinedMetric);
  EXPECT_THROW(srcc(flat, ok), UndefinedMetric);
  EXPECT_THROW(plcc(ok, flat), UndefinedMetric);
  EXPECT_THROW(srcc(ok, std::vector<double>{1, 2}), InvalidInput);
}
