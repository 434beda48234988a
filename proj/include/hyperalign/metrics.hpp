#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hyperalign {

struct MetricReport {
  double srcc = 0.0;
  double plcc = 0.0;
  std::size_t n = 0;
};

/// 1-based fractional ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation. Throws UndefinedMetric for n < 2 or zero variance,
/// InvalidInput for mismatched lengths.
double plcc(std::span<const double> pred, std::span<const double> gt);

/// Spearman correlation: Pearson over average ranks.
double srcc(std::span<const double> pred, std::span<const double> gt);

MetricReport evaluate_metrics(std::span<const double> pred, std::span<const double> gt);

}  // namespace hyperalign
