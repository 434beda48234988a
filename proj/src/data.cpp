#include "hyperalign/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>

#include "hyperalign/error.hpp"

namespace hyperalign {

namespace {

constexpr char kMagic[4] = {'H', 'A', 'L', 'N'};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

  std::uint32_t u32(const char* what) {
    if (remaining() < 4) throw FormatError(std::string("truncated while reading ") + what, pos_);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

bool all_finite(std::span<const float> v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out{dim, {}, scale_min, scale_max};
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) out.samples.push_back(samples.at(i));
  return out;
}

void Dataset::validate() const {
  if (dim == 0) throw InvalidInput("dataset: dimension must be positive");
  if (!(scale_min < scale_max)) throw InvalidInput("dataset: scale_min must be below scale_max");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.image_emb.size() != dim || s.text_emb.size() != dim) {
      throw InvalidInput("dataset: sample " + std::to_string(i) + " has embedding dimension " +
                         std::to_string(s.image_emb.size()) + "/" +
                         std::to_string(s.text_emb.size()) + ", expected " + std::to_string(dim));
    }
    if (!all_finite(s.image_emb) || !all_finite(s.text_emb)) {
      throw InvalidInput("dataset: sample " + std::to_string(i) + " has a non-finite embedding");
    }
  }
}

double normalize_score(double mos, double lo, double hi) {
  if (!(lo < hi)) throw InvalidInput("normalize_score: lower bound must be below upper bound");
  if (!(mos >= lo && mos <= hi)) {
    throw InvalidInput("normalize_score: MOS " + std::to_string(mos) + " outside [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return (mos - lo) / (hi - lo);
}

std::vector<std::uint8_t> encode_haln(const Dataset& ds) {
  ds.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kHalnHeaderBytes + ds.size() * (8 + 8 * std::size_t{ds.dim}));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  Writer w(out);
  w.u32(kHalnVersion);
  w.u32(ds.dim);
  w.u32(static_cast<std::uint32_t>(ds.size()));
  w.f32(static_cast<float>(ds.scale_min));
  w.f32(static_cast<float>(ds.scale_max));
  for (const Sample& s : ds.samples) {
    w.u32(s.group_id);
    w.f32(static_cast<float>(s.mos_raw));
    for (float x : s.image_emb) w.f32(x);
    for (float x : s.text_emb) w.f32(x);
  }
  return out;
}

Dataset decode_haln(std::span<const std::uint8_t> bytes, ScorePolicy policy) {
  if (bytes.size() < 4) throw FormatError("file too short for magic", 0);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic, expected HALN", 0);
  Reader r(bytes.subspan(4));
  auto at = [&r] { return r.offset() + 4; };

  const std::size_t version_at = at();
  const std::uint32_t version = r.u32("version");
  if (version != kHalnVersion) {
    throw FormatError("unsupported version " + std::to_string(version), version_at);
  }
  const std::size_t dim_at = at();
  Dataset ds;
  ds.dim = r.u32("dim");
  if (ds.dim == 0) throw FormatError("dimension must be positive", dim_at);
  const std::uint32_t count = r.u32("count");
  const std::size_t scale_at = at();
  ds.scale_min = r.f32("scale_min");
  ds.scale_max = r.f32("scale_max");
  if (!std::isfinite(ds.scale_min) || !std::isfinite(ds.scale_max) ||
      !(ds.scale_min < ds.scale_max)) {
    throw FormatError("invalid score scale", scale_at);
  }

  const std::size_t record_bytes = 8 + 8 * std::size_t{ds.dim};
  ds.samples.reserve(std::min<std::size_t>(count, r.remaining() / record_bytes + 1));
  for (std::uint32_t i = 0; i < count; ++i) {
    if (r.remaining() < record_bytes) {
      throw FormatError("truncated: expected " + std::to_string(count) + " records, found " +
                            std::to_string(i),
                        at());
    }
    Sample s;
    s.group_id = r.u32("group_id");
    s.mos_raw = r.f32("mos_raw");
    s.image_emb.resize(ds.dim);
    s.text_emb.resize(ds.dim);
    for (auto& x : s.image_emb) x = r.f32("image embedding");
    for (auto& x : s.text_emb) x = r.f32("text embedding");
    if (!all_finite(s.image_emb) || !all_finite(s.text_emb)) {
      throw DataError("non-finite embedding value", i);
    }
    if (std::isfinite(s.mos_raw) && s.mos_raw >= ds.scale_min && s.mos_raw <= ds.scale_max) {
      s.score = normalize_score(s.mos_raw, ds.scale_min, ds.scale_max);
    } else if (policy == ScorePolicy::kRequired) {
      throw DataError("MOS " + std::to_string(s.mos_raw) + " outside the declared scale", i);
    } else {
      s.score = std::nan("");
    }
    ds.samples.push_back(std::move(s));
  }
  if (r.remaining() != 0) {
    throw FormatError(std::to_string(r.remaining()) + " trailing bytes after last record", at());
  }
  return ds;
}

void save_embeddings(const Dataset& ds, const std::filesystem::path& path) {
  const auto bytes = encode_haln(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

Dataset load_embeddings(const std::filesystem::path& path, ScorePolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_haln(bytes, policy);
}

Split prompt_disjoint_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidInput("train fraction must lie in (0, 1)");
  }
  std::map<std::uint32_t, std::size_t> group_sizes;
  for (const Sample& s : ds.samples) ++group_sizes[s.group_id];
  if (group_sizes.size() < 2) throw InvalidInput("split needs at least 2 distinct prompt groups");

  std::vector<std::uint32_t> groups;
  groups.reserve(group_sizes.size());
  for (const auto& [g, _] : group_sizes) groups.push_back(g);
  std::mt19937_64 rng(seed);
  std::shuffle(groups.begin(), groups.end(), rng);

  const double total = static_cast<double>(ds.size());
  const double target = train_fraction * total;
  std::map<std::uint32_t, bool> in_train;
  std::size_t train_count = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const bool last = i + 1 == groups.size();
    const bool take = !last && static_cast<double>(train_count) + 1e-9 * total < target;
    in_train[groups[i]] = take;
    if (take) train_count += group_sizes[groups[i]];
  }

  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (in_train[ds.samples[i].group_id] ? train_idx : test_idx).push_back(i);
  }
  return Split{ds.subset(train_idx), ds.subset(test_idx)};
}

double planted_score(double theta, double offset) {
  return std::clamp(1.0 - theta / kPlantedThetaMax + offset, 0.0, 1.0);
}

Dataset synthetic_dataset(std::size_t n, std::size_t dim, std::uint64_t seed, double noise) {
  if (n < 10) throw InvalidInput("synthetic dataset needs n >= 10");
  if (dim < 4) throw InvalidInput("synthetic dataset needs dim >= 4");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidInput("noise must be non-negative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, kPlantedThetaMax);
  std::uniform_real_distribution<double> jitter(-noise, noise);

  const std::size_t prompt_dims = dim / 2;
  auto random_unit = [&](std::size_t begin, std::size_t end) {
    std::vector<double> v(dim, 0.0);
    double norm2 = 0.0;
    while (norm2 < 1e-12) {
      norm2 = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        v[i] = gauss(rng);
        norm2 += v[i] * v[i];
      }
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t i = begin; i < end; ++i) v[i] *= inv;
    return v;
  };

  Dataset ds;
  ds.dim = static_cast<std::uint32_t>(dim);
  ds.samples.reserve(n);
  std::vector<double> prompt;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % kPlantedGroupSize == 0) prompt = random_unit(0, prompt_dims);
    const auto nuisance = random_unit(prompt_dims, dim);
    const double theta = angle(rng);
    const double offset = noise > 0.0 ? jitter(rng) : 0.0;

    Sample s;
    s.group_id = static_cast<std::uint32_t>(i / kPlantedGroupSize);
    s.image_emb.resize(dim);
    s.text_emb.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      s.text_emb[j] = static_cast<float>(prompt[j]);
      s.image_emb[j] = static_cast<float>(std::cos(theta) * prompt[j] + std::sin(theta) * nuisance[j]);
    }
    const double target = planted_score(theta, offset);
    s.mos_raw = static_cast<float>(ds.scale_min + target * (ds.scale_max - ds.scale_min));
    s.score = normalize_score(s.mos_raw, ds.scale_min, ds.scale_max);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace hyperalign
