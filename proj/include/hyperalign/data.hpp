#pragma once

// Embedding datasets: the HALN binary format, score normalization,
// prompt-disjoint splitting and the planted synthetic generator.
//
// HALN layout (little-endian, no padding):
//   "HALN" | u32 version=1 | u32 dim | u32 count | f32 scale_min | f32 scale_max
//   count x { u32 group_id | f32 mos_raw | f32[dim] image | f32[dim] text }

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hyperalign {

struct Sample {
  std::uint32_t group_id = 0;
  double mos_raw = 0.0;  // holds an f32-representable value
  double score = 0.0;    // normalized to [0, 1]; NaN when unscored
  std::vector<float> image_emb;
  std::vector<float> text_emb;
};

struct Dataset {
  std::uint32_t dim = 0;
  std::vector<Sample> samples;
  double scale_min = 1.0;
  double scale_max = 5.0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  /// Copy of the selected samples, same header fields.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Throws InvalidInput on shape, scale or finiteness violations.
  void validate() const;
};

/// Whether loading requires every mos_raw to lie on the declared scale.
enum class ScorePolicy { kRequired, kOptional };

inline constexpr std::uint32_t kHalnVersion = 1;
inline constexpr std::size_t kHalnHeaderBytes = 24;

/// (mos - lo) / (hi - lo). Throws InvalidInput unless lo < hi and lo <= mos <= hi.
double normalize_score(double mos, double lo, double hi);

std::vector<std::uint8_t> encode_haln(const Dataset& ds);

/// Parses a HALN byte buffer. Throws FormatError (with byte offset) on a bad
/// header, truncation or trailing bytes; DataError (with record index) on
/// non-finite embeddings or, under kRequired, off-scale scores.
Dataset decode_haln(std::span<const std::uint8_t> bytes,
                    ScorePolicy policy = ScorePolicy::kRequired);

void save_embeddings(const Dataset& ds, const std::filesystem::path& path);
Dataset load_embeddings(const std::filesystem::path& path,
                        ScorePolicy policy = ScorePolicy::kRequired);

struct Split {
  Dataset train;
  Dataset test;
};

/// Partitions by group_id: distinct groups are shuffled with the seed and
/// assigned to train until the train sample count reaches fraction * total.
/// The last remaining group always goes to test. Sample order is preserved.
Split prompt_disjoint_split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Planted-angle generator bounds.
inline constexpr double kPlantedThetaMax = 1.5707963267948966;  // pi / 2
inline constexpr std::size_t kPlantedGroupSize = 10;

/// clamp(1 - theta / theta_max + offset, 0, 1).
double planted_score(double theta, double offset);

/// Synthetic planted-hierarchy dataset. Prompts are unit vectors in the
/// first half of the coordinates; each image rotates its prompt by an angle
/// theta ~ U[0, pi/2] toward a random unit vector in the second half. The
/// score is planted_score(theta, U(-noise, noise)), stored as MOS on [1, 5].
/// Requires n >= 10 and dim >= 4.
Dataset synthetic_dataset(std::size_t n, std::size_t dim, std::uint64_t seed, double noise);

}  // namespace hyperalign
