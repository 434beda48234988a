#include "hyperalign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hyperalign/error.hpp"

namespace hyperalign {

namespace {

void check_inputs(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size()) {
    throw InvalidInput("correlation: length mismatch (" + std::to_string(pred.size()) + " vs " +
                       std::to_string(gt.size()) + ")");
  }
  if (pred.size() < 2) throw UndefinedMetric("correlation needs at least 2 samples");
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) share rank mean((i+1)..j).
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

double plcc(std::span<const double> pred, std::span<const double> gt) {
  check_inputs(pred, gt);
  const double n = static_cast<double>(pred.size());
  double mp = 0.0, mg = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mp += pred[i];
    mg += gt[i];
  }
  mp /= n;
  mg /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = pred[i] - mp;
    const double dy = gt[i] - mg;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedMetric("correlation undefined for zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double srcc(std::span<const double> pred, std::span<const double> gt) {
  check_inputs(pred, gt);
  const auto rp = average_ranks(pred);
  const auto rg = average_ranks(gt);
  return plcc(rp, rg);
}

MetricReport evaluate_metrics(std::span<const double> pred, std::span<const double> gt) {
  return MetricReport{srcc(pred, gt), plcc(pred, gt), pred.size()};
}

}  // namespace hyperalign
