#pragma once

// Command implementations behind the `hyperalign` executable. Kept as a
// library so integration tests exercise exactly what the CLI runs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperalign/metrics.hpp"
#include "hyperalign/training.hpp"

namespace hyperalign::cli {

/// Invalid flag values; mapped to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthOptions {
  std::size_t n = 2000;
  std::size_t dim = 32;
  double noise = 0.05;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct TrainOptions {
  std::filesystem::path data;
  std::filesystem::path model;
  std::optional<std::filesystem::path> history;   // default: <model>.history.csv
  std::optional<std::filesystem::path> manifest;  // default: <model>.manifest.json
  std::optional<std::filesystem::path> test_out;  // optional HALN dump of the test split
  std::vector<std::uint64_t> seeds{0};
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  TrainConfig config;
};

struct SeedRun {
  std::uint64_t seed = 0;
  MetricReport test;
  int epochs_run = 0;
  int best_epoch = -1;
  double best_val_srcc = 0.0;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  std::size_t test_samples = 0;
  std::filesystem::path model_path;
  std::filesystem::path history_path;
  std::optional<std::filesystem::path> test_path;
  TrainHistory history;
};

struct TrainSummary {
  std::vector<SeedRun> runs;
  double mean_srcc = 0.0;
  double std_srcc = 0.0;
  double mean_plcc = 0.0;
  double std_plcc = 0.0;
  std::filesystem::path manifest_path;
};

struct EvalOptions {
  std::filesystem::path model;
  std::filesystem::path data;
  std::optional<std::filesystem::path> out;
};

struct ScoreOptions {
  std::filesystem::path model;
  std::filesystem::path data;
  std::filesystem::path out;
};

/// Parses "3", "1,2,5" or "1..10" (inclusive).
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Path used for one seed's artifact when several seeds are trained:
/// model.json -> model.seed7.json.
std::filesystem::path seed_path(const std::filesystem::path& base, std::uint64_t seed,
                                bool multi);

void run_synth(const SynthOptions& opts);
TrainSummary run_train(const TrainOptions& opts, std::ostream& log);
MetricReport run_eval(const EvalOptions& opts, std::ostream& out);
void run_score(const ScoreOptions& opts);
void run_report(const ScoreOptions& opts);

inline constexpr const char* kHistoryHeader =
    "epoch,lr,loss_total,loss_reg,loss_entail,val_srcc,val_plcc";
inline constexpr const char* kReportHeader =
    "group_id,score,prediction,distance,exterior_angle,aperture,image_space_norm,text_space_norm";

/// Full CLI entry point. Exit codes: 0 success, 1 runtime/data error, 2 usage.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hyperalign::cli
