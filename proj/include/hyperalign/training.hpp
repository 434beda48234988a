#pragma once

// Joint optimization of the adaptive scalers, the two adapters and the
// ModulationNet under L_total = L_reg + lambda * L_entail.
//
// Per-sample pipeline:
//   adapt -> cosine similarity (s_base)
//   adapt -> scale -> exp map at origin -> {d_L, phi, delta} -> ModulationNet
//   prediction = confidence * (scale * s_base + bias)
// The ground-truth score only enters the entailment hinge through the
// contracted aperture; predictions never depend on it.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hyperalign/adapter.hpp"
#include "hyperalign/data.hpp"
#include "hyperalign/entailment.hpp"
#include "hyperalign/manifold.hpp"
#include "hyperalign/metrics.hpp"
#include "hyperalign/regressor.hpp"

namespace hyperalign {

/// Mutable view of one named parameter tensor.
struct TensorRef {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<double> values;
};

struct ConstTensorRef {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<const double> values;
};

struct ParameterSet {
  AdaptiveScaler image_scaler;
  AdaptiveScaler text_scaler;
  AdapterParams image_adapter;
  AdapterParams text_adapter;
  ModulationNetParams modnet;

  /// Seeded initialization: scalers raw = 0, near-identity adapters,
  /// ModulationNet with a zero output layer.
  static ParameterSet initialize(std::size_t dim, std::uint64_t seed,
                                 std::size_t modnet_hidden = ModulationNetParams::kDefaultHidden);

  /// Same shapes as `like`, every entry zero (used for gradient accumulation).
  static ParameterSet zeros_like(const ParameterSet& like);

  std::size_t dim() const { return image_adapter.dim; }

  /// Tensors in the canonical flattening order:
  /// image_scaler.raw, text_scaler.raw, image_adapter.{down,up,gate_raw},
  /// text_adapter.{down,up,gate_raw}, modnet.{w1,b1,w2,b2,w3,b3}.
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;

  std::size_t size() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  void validate() const;
};

struct TrainConfig {
  double lambda = 0.1;
  double lr = 4e-4;
  double weight_decay = 0.005;
  std::size_t batch_size = 8;
  int max_epochs = 20;
  int lr_step = 10;
  double lr_gamma = 0.5;
  int patience = 6;
  double min_improvement = 1e-6;  // val SRCC must beat best by more than this
  std::uint64_t seed = 0;
  std::size_t modnet_hidden = ModulationNetParams::kDefaultHidden;
  ManifoldConfig manifold;
  EntailmentConfig entailment;

  void validate() const;
};

struct BatchLoss {
  std::vector<double> predictions;
  double total = 0.0;
  double reg = 0.0;
  double entail = 0.0;  // unweighted mean hinge
};

struct LossAndGradient {
  BatchLoss loss;
  std::vector<double> gradient;  // flattened, ParameterSet order
};

/// Training-mode forward pass (apertures contracted by ground-truth scores).
/// Errors from a sample are rethrown as SampleError carrying its batch index.
BatchLoss forward_batch(std::span<const Sample> batch, const ParameterSet& params,
                        const TrainConfig& cfg);

/// Exact reverse-mode gradient of forward_batch(...).total. Subgradients at
/// kinks (ReLU, |.|, hinge, clamps) are zero.
std::vector<double> gradients(std::span<const Sample> batch, const ParameterSet& params,
                              const TrainConfig& cfg);

LossAndGradient loss_and_gradients(std::span<const Sample> batch, const ParameterSet& params,
                                   const TrainConfig& cfg);

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerState zeros(std::size_t n);
};

/// One decoupled-weight-decay Adam step, in place.
void adamw_step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
                double lr, double weight_decay);

/// cfg.lr * cfg.lr_gamma ^ floor(epoch / cfg.lr_step).
double lr_at_epoch(int epoch, const TrainConfig& cfg);

/// Patience-based early stopping on a maximized metric.
class EarlyStopping {
 public:
  EarlyStopping(int patience, double min_improvement);

  /// Records one epoch's metric; returns true when it is a new best.
  bool update(double metric);
  bool should_stop() const { return stale_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best() const { return best_; }
  int epochs_seen() const { return seen_; }

 private:
  int patience_;
  double min_improvement_;
  double best_;
  int best_epoch_ = -1;
  int stale_ = 0;
  int seen_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double loss_total = 0.0;
  double loss_reg = 0.0;
  double loss_entail = 0.0;
  double val_srcc = 0.0;
  double val_plcc = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_srcc = 0.0;
  bool stopped_early = false;
};

struct TrainResult {
  ParameterSet params;  // parameters of the best validation epoch
  TrainHistory history;
};

/// Seeded, deterministic training with per-epoch shuffling, StepLR and early
/// stopping on validation SRCC. Throws InvalidInput on empty or
/// dimension-inconsistent datasets (validation needs at least 2 samples).
TrainResult train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg);

/// Everything the inference pipeline computes for one sample.
struct Inference {
  double prediction = 0.0;
  double s_base = 0.0;
  GeometricPrimitives primitives;
  ModulationParams modulation;
  double image_space_norm = 0.0;
  double text_space_norm = 0.0;
};

/// Inference-mode pipeline for one sample; the sample's score is not read.
Inference infer(const Sample& sample, const ParameterSet& params, const ManifoldConfig& mcfg,
                const EntailmentConfig& ecfg);

std::vector<double> predict(const Dataset& ds, const ParameterSet& params,
                            const ManifoldConfig& mcfg, const EntailmentConfig& ecfg);

struct Evaluation {
  MetricReport metrics;
  std::vector<double> predictions;
};

/// Predictions plus SRCC/PLCC against the normalized scores. Throws
/// UndefinedMetric for fewer than 2 samples.
Evaluation evaluate(const Dataset& ds, const ParameterSet& params, const ManifoldConfig& mcfg,
                    const EntailmentConfig& ecfg);

}  // namespace hyperalign
