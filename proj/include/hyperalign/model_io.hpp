#pragma once

// Trained-model documents: JSON text holding geometry constants, shapes, all
// parameter tensors in ParameterSet flattening order (17 significant digits,
// so doubles round-trip exactly) and training metadata.

#include <cstdint>
#include <filesystem>
#include <string>

#include "hyperalign/training.hpp"

namespace hyperalign {

inline constexpr int kModelFormatVersion = 1;

struct TrainingMetadata {
  std::uint64_t seed = 0;
  int epochs_run = 0;
  int best_epoch = -1;
  double best_val_srcc = 0.0;
};

struct Model {
  ParameterSet params;
  ManifoldConfig manifold;
  EntailmentConfig entailment;
  TrainingMetadata training;
};

std::string serialize_model(const Model& model);

/// Throws FormatError (offset into the text) on malformed documents.
Model deserialize_model(const std::string& text);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace hyperalign
