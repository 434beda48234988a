#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <set>
#include <vector>

#include "hyperalign/data.hpp"
#include "hyperalign/error.hpp"
#include "test_support.hpp"

using namespace hyperalign;
using hyperalign::testing::Gen;
using hyperalign::testing::random_dataset;

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void expect_same(const Dataset& a, const Dataset& b) {
  ASSERT_EQ(a.dim, b.dim);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a.scale_min, b.scale_min);
  EXPECT_EQ(a.scale_max, b.scale_max);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.samples[i];
    const auto& y = b.samples[i];
    EXPECT_EQ(x.group_id, y.group_id);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(x.mos_raw), std::bit_cast<std::uint64_t>(y.mos_raw));
    EXPECT_EQ(0, std::memcmp(x.image_emb.data(), y.image_emb.data(), a.dim * sizeof(float)));
    EXPECT_EQ(0, std::memcmp(x.text_emb.data(), y.text_emb.data(), a.dim * sizeof(float)));
    if (std::isnan(x.score)) {
      EXPECT_TRUE(std::isnan(y.score));
    } else {
      EXPECT_EQ(x.score, y.score);
    }
  }
}

std::set<std::uint32_t> groups(const Dataset& ds) {
  std::set<std::uint32_t> out;
  for (const auto& s : ds.samples) out.insert(s.group_id);
  return out;
}

Dataset equal_groups(std::size_t n_groups, std::size_t per_group, std::uint32_t dim = 4) {
  Gen g(5);
  Dataset ds = random_dataset(g, n_groups * per_group, dim, 1);
  for (std::size_t i = 0; i < ds.size(); ++i) ds.samples[i].group_id = static_cast<std::uint32_t>(i / per_group);
  return ds;
}

}  // namespace

TEST(Normalize, MapsScaleOntoUnitInterval) {
  EXPECT_EQ(normalize_score(1.0, 1.0, 5.0), 0.0);
  EXPECT_EQ(normalize_score(5.0, 1.0, 5.0), 1.0);
  EXPECT_EQ(normalize_score(3.0, 1.0, 5.0), 0.5);
  EXPECT_THROW(normalize_score(5.5, 1.0, 5.0), InvalidInput);
  EXPECT_THROW(normalize_score(3.0, 5.0, 1.0), InvalidInput);
  double prev = -1.0;
  for (double m = 1.0; m <= 5.0; m += 0.01) {
    const double s = normalize_score(m, 1.0, 5.0);
    EXPECT_GT(s, prev);
    prev = s;
  }
}

TEST(Haln, HeaderLayout) {
  Gen g(61);
  const Dataset ds = random_dataset(g, 3, 5, 2);
  const auto bytes = encode_haln(ds);
  ASSERT_EQ(bytes.size(), kHalnHeaderBytes + 3 * (8 + 8 * 5));
  EXPECT_EQ(0, std::memcmp(bytes.data(), "HALN", 4));
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 5);
  EXPECT_EQ(bytes[12], 3);
  float lo, hi;
  std::memcpy(&lo, bytes.data() + 16, 4);
  std::memcpy(&hi, bytes.data() + 20, 4);
  EXPECT_EQ(lo, 1.0f);
  EXPECT_EQ(hi, 5.0f);
}

TEST(Haln, RoundTripIsBitExact) {
  Gen g(62);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset ds = random_dataset(g, g.index(0, 40), static_cast<std::uint32_t>(g.index(1, 16)), 5);
    const auto bytes = encode_haln(ds);
    const Dataset back = decode_haln(bytes);
    expect_same(ds, back);
    EXPECT_EQ(encode_haln(back), bytes);
  }
}

TEST(Haln, FileRoundTrip) {
  const auto dir = hyperalign::testing::temp_dir("haln_file");
  Gen g(63);
  const Dataset ds = random_dataset(g, 17, 6, 4);
  save_embeddings(ds, dir / "d.haln");
  expect_same(ds, load_embeddings(dir / "d.haln"));
  EXPECT_THROW(load_embeddings(dir / "missing.haln"), Error);
}

TEST(Haln, RejectsCorruptInput) {
  Gen g(64);
  const auto good = encode_haln(random_dataset(g, 4, 3, 2));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  try {
    decode_haln(bad_magic);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }

  auto bad_version = good;
  put_u32(bad_version, 4, 2);
  EXPECT_THROW(decode_haln(bad_version), FormatError);

  auto zero_dim = good;
  put_u32(zero_dim, 8, 0);
  EXPECT_THROW(decode_haln(zero_dim), FormatError);

  auto truncated = good;
  truncated.pop_back();
  EXPECT_THROW(decode_haln(truncated), FormatError);
  EXPECT_THROW(decode_haln(std::span(good).first(10)), FormatError);

  auto trailing = good;
  trailing.push_back(0);
  try {
    decode_haln(trailing);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), good.size());
  }

  auto inverted = good;
  const float five = 5.0f, one = 1.0f;
  std::memcpy(inverted.data() + 16, &five, 4);
  std::memcpy(inverted.data() + 20, &one, 4);
  EXPECT_THROW(decode_haln(inverted), FormatError);
}

TEST(Haln, RecordErrorsCarryIndex) {
  Gen g(65);
  const auto good = encode_haln(random_dataset(g, 4, 3, 2));
  const std::size_t record = 8 + 8 * 3;

  auto nan_emb = good;
  const float nan = std::nanf("");
  std::memcpy(nan_emb.data() + kHalnHeaderBytes + 2 * record + 8, &nan, 4);
  try {
    decode_haln(nan_emb);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.record(), 2u);
  }

  auto bad_mos = good;
  const float seven = 7.0f;
  std::memcpy(bad_mos.data() + kHalnHeaderBytes + record + 4, &seven, 4);
  try {
    decode_haln(bad_mos);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.record(), 1u);
  }
  const Dataset unscored = decode_haln(bad_mos, ScorePolicy::kOptional);
  EXPECT_TRUE(std::isnan(unscored.samples[1].score));
  EXPECT_FALSE(std::isnan(unscored.samples[0].score));
}

TEST(Split, FiveEqualGroupsGoFourToOne) {
  const Dataset ds = equal_groups(5, 6);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Split s = prompt_disjoint_split(ds, 0.8, seed);
    EXPECT_EQ(groups(s.train).size(), 4u);
    EXPECT_EQ(groups(s.test).size(), 1u);
  }
}

TEST(Split, ThreeToOneWithinOneGroup) {
  Gen g(66);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Dataset ds = random_dataset(g, 400, 2, 37);
    const Split s = prompt_disjoint_split(ds, 0.75, seed);
    std::size_t biggest = 0;
    for (auto gid : groups(ds)) {
      std::size_t n = 0;
      for (const auto& x : ds.samples) n += x.group_id == gid;
      biggest = std::max(biggest, n);
    }
    EXPECT_LE(std::abs(static_cast<double>(s.train.size()) - 300.0), static_cast<double>(biggest));
  }
}

TEST(Split, DisjointCompleteAndDeterministic) {
  Gen g(67);
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const Dataset ds = random_dataset(g, g.index(2, 80), 2, g.index(2, 15));
    if (groups(ds).size() < 2) continue;
    const double frac = g.uniform(0.05, 0.95);
    const Split s = prompt_disjoint_split(ds, frac, trial);
    const auto tr = groups(s.train), te = groups(s.test);
    for (auto gid : tr) EXPECT_EQ(te.count(gid), 0u);
    EXPECT_EQ(s.train.size() + s.test.size(), ds.size());
    EXPECT_FALSE(s.test.empty());
    const Split again = prompt_disjoint_split(ds, frac, trial);
    expect_same(s.train, again.train);
    expect_same(s.test, again.test);
  }
}

TEST(Split, Errors) {
  const Dataset one_group = equal_groups(1, 5);
  EXPECT_THROW(prompt_disjoint_split(one_group, 0.8, 0), InvalidInput);
  const Dataset ds = equal_groups(3, 2);
  EXPECT_THROW(prompt_disjoint_split(ds, 0.0, 0), InvalidInput);
  EXPECT_THROW(prompt_disjoint_split(ds, 1.0, 0), InvalidInput);
}

TEST(Synthetic, PlantedRule) {
  EXPECT_EQ(planted_score(0.0, 0.0), 1.0);
  EXPECT_EQ(planted_score(kPlantedThetaMax, 0.0), 0.0);
  EXPECT_EQ(planted_score(0.0, 0.04), 1.0);
  EXPECT_EQ(planted_score(kPlantedThetaMax, -0.04), 0.0);
}

TEST(Synthetic, NoiselessScoreRecoverableFromGeometry) {
  const Dataset ds = synthetic_dataset(200, 16, 3, 0.0);
  ASSERT_EQ(ds.size(), 200u);
  EXPECT_EQ(ds.dim, 16u);
  for (const auto& s : ds.samples) {
    // Prompt lives in the first half of the coordinates, nuisance in the second.
    double along = 0.0, across = 0.0, nt = 0.0;
    for (std::size_t j = 0; j < ds.dim; ++j) {
      if (j < ds.dim / 2) {
        along += double{s.image_emb[j]} * s.text_emb[j];
        nt += double{s.text_emb[j]} * s.text_emb[j];
      } else {
        EXPECT_EQ(s.text_emb[j], 0.0f);
        across += double{s.image_emb[j]} * s.image_emb[j];
      }
    }
    EXPECT_NEAR(nt, 1.0, 1e-6);
    const double theta = std::atan2(std::sqrt(across), along);
    EXPECT_NEAR(s.score, planted_score(theta, 0.0), 1e-5);
  }
}

TEST(Synthetic, GroupsDeterminismAndValidation) {
  const Dataset a = synthetic_dataset(35, 8, 9, 0.05);
  EXPECT_EQ(groups(a).size(), 4u);
  EXPECT_EQ(encode_haln(a), encode_haln(synthetic_dataset(35, 8, 9, 0.05)));
  EXPECT_NE(encode_haln(a), encode_haln(synthetic_dataset(35, 8, 10, 0.05)));
  for (const auto& s : a.samples) {
    EXPECT_GE(s.score, 0.0);
    EXPECT_LE(s.score, 1.0);
  }
  EXPECT_THROW(synthetic_dataset(9, 8, 0, 0.0), InvalidInput);
  EXPECT_THROW(synthetic_dataset(10, 3, 0, 0.0), InvalidInput);
  EXPECT_THROW(synthetic_dataset(10, 4, 0, -0.1), InvalidInput);
}
