#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lifekv/features/features.h"

namespace lifekv {
namespace {

Edwcs Filled(float v) {
  Edwcs e;
  e.fill(v);
  return e;
}

FeatureBlock RandomBlock(std::mt19937_64& rng) {
  FeatureBlock b;
  const int n = static_cast<int>(rng() % 33);
  for (int i = 0; i < n; ++i) b.deltas.push_back(1 + (rng() >> (rng() % 64)) % (~0ull - 1));
  if (n > 0) {
    std::uniform_real_distribution<float> u(0.0f, 33.0f);
    for (int i = 0; i < kNumEdwcs; ++i) b.edwcs.push_back(u(rng));
  }
  return b;
}

TEST(EdwcTest, UpdateFromZero) {
  for (uint64_t d : {0ull, 1ull, 12345ull, 1ull << 40}) {
    for (float v : EdwcUpdateOnWrite(Filled(0), d)) EXPECT_EQ(v, 1.0f);
  }
}

TEST(EdwcTest, UpdateAtWindowGivesOneAndHalf) {
  for (int i = 0; i < kNumEdwcs; ++i) {
    Edwcs out = EdwcUpdateOnWrite(Filled(1.0f), uint64_t{1} << (19 + i));
    EXPECT_NEAR(out[i], 1.5, 1.5e-6);
  }
}

TEST(EdwcTest, ConvergesToTwoAtFixedGap) {
  for (int i = 0; i < kNumEdwcs; ++i) {
    Edwcs e = Filled(0);
    for (int step = 0; step < 200; ++step) e = EdwcUpdateOnWrite(e, uint64_t{1} << (19 + i));
    EXPECT_NEAR(e[i], 2.0, 2e-6);
  }
}

TEST(EdwcTest, DecayExamples) {
  Edwcs in = Filled(2.0f);
  EXPECT_EQ(EdwcDecay(in, 0), in);
  for (int i = 0; i < kNumEdwcs; ++i) {
    EXPECT_NEAR(EdwcDecay(in, uint64_t{1} << (19 + i))[i], 1.0, 1e-6);
  }
}

TEST(EdwcTest, DecayComposes) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    Edwcs e = Filled(0);
    const int k = 1 + static_cast<int>(rng() % 20);
    for (int j = 0; j < k; ++j) e = EdwcUpdateOnWrite(e, rng() % (1ull << 26));
    const uint64_t e1 = rng() % (1ull << 25), e2 = rng() % (1ull << 25);
    Edwcs twice = EdwcDecay(EdwcDecay(e, e1), e2);
    Edwcs once = EdwcDecay(e, e1 + e2);
    for (int i = 0; i < kNumEdwcs; ++i) {
      ASSERT_NEAR(twice[i], once[i], 1e-6 * std::max(1.0f, once[i]));
    }
  }
}

TEST(EdwcTest, MonotoneAcrossWindowsAndBounded) {
  std::mt19937_64 rng(5);
  for (int seq = 0; seq < 10000; ++seq) {
    Edwcs e = Filled(0);
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int step = 1; step <= n; ++step) {
      e = EdwcUpdateOnWrite(e, rng() % (1ull << (rng() % 34)));
      for (int i = 0; i + 1 < kNumEdwcs; ++i) ASSERT_LE(e[i], e[i + 1]);
      for (float v : e) {
        ASSERT_GE(v, 1.0f);
        ASSERT_LT(v, step + 1.0f);
      }
    }
  }
}

TEST(DeltaBucketTest, Examples) {
  EXPECT_EQ(DeltaBucket(3ull << 20), 2);
  EXPECT_EQ(DeltaBucket(0), 0);
  EXPECT_EQ(DeltaBucket((1ull << 20) - 1), 0);
  EXPECT_EQ(DeltaBucket(1ull << 20), 1);
  EXPECT_EQ(DeltaBucket((2ull << 20) - 1), 1);
  EXPECT_EQ(DeltaBucket(2ull << 20), 2);
  EXPECT_EQ(DeltaBucket(~0ull), 44);
}

TEST(DeltaBucketTest, MatchesFloatFormula) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100000; ++i) {
    const uint64_t d = (1ull << 20) + (rng() >> (rng() % 40 + 20));
    const auto expect = static_cast<int>(
        std::floor(std::log2(static_cast<long double>(d) / (1ull << 20)))) + 1;
    ASSERT_EQ(DeltaBucket(d), expect) << d;
  }
}

TEST(FeatureCodecTest, FixedSizesMatchTable) {
  const std::pair<int, size_t> cases[] = {{0, 1}, {1, 49}, {2, 57}, {3, 65}, {32, 297}};
  for (auto [count, size] : cases) {
    FeatureBlock b;
    for (int i = 0; i < count; ++i) b.deltas.push_back(1000 + i);
    if (count > 0) b.edwcs.assign(kNumEdwcs, 1.0f);
    EXPECT_EQ(EncodeFeatures(b, FeatureEncoding::kFixed).size(), size) << count;
    EXPECT_EQ(FixedFeatureSize(count), size);
  }
}

TEST(FeatureCodecTest, TooManyDeltas) {
  FeatureBlock b;
  b.deltas.assign(33, 5);
  b.edwcs.assign(kNumEdwcs, 1.0f);
  std::string out;
  EXPECT_EQ(EncodeFeatures(b, FeatureEncoding::kFixed, &out).code(),
            Status::Code::kTooManyDeltas);
}

TEST(FeatureCodecTest, DecodeErrors) {
  FeatureBlock b;
  size_t n = 0;
  std::string bad(1, static_cast<char>(33));
  bad.append(400, '\0');
  EXPECT_EQ(DecodeFeatures(bad, FeatureEncoding::kFixed, &b, &n).code(),
            Status::Code::kBadCount);
  EXPECT_EQ(DecodeFeatures("", FeatureEncoding::kFixed, &b, &n).code(),
            Status::Code::kTruncated);
  FeatureBlock two;
  two.deltas = {10, 20};
  two.edwcs.assign(kNumEdwcs, 1.25f);
  std::string enc = EncodeFeatures(two, FeatureEncoding::kFixed);
  for (size_t cut = 1; cut < enc.size(); ++cut) {
    EXPECT_EQ(DecodeFeatures(enc.substr(0, cut), FeatureEncoding::kFixed, &b, &n).code(),
              Status::Code::kTruncated);
  }
}

TEST(FeatureCodecTest, RoundTripExamples) {
  FeatureBlock b;
  size_t n = 0;
  ASSERT_TRUE(DecodeFeatures(EncodeFeatures(FeatureBlock{}, FeatureEncoding::kFixed),
                             FeatureEncoding::kFixed, &b, &n)
                  .ok());
  EXPECT_TRUE(b.empty());
  EXPECT_EQ(n, 1u);
  FeatureBlock two;
  two.deltas = {300, 7};
  two.edwcs = {1, 1.5f, 2, 2.5f, 3, 3.5f, 4, 4.5f, 5, 5.5f};
  std::string enc = EncodeFeatures(two, FeatureEncoding::kFixed);
  enc += "trailing";
  ASSERT_TRUE(DecodeFeatures(enc, FeatureEncoding::kFixed, &b, &n).ok());
  EXPECT_EQ(b, two);
  EXPECT_EQ(n, 57u);
}

TEST(FeatureCodecTest, RandomRoundTripProperty) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100000; ++i) {
    FeatureBlock b = RandomBlock(rng);
    for (auto mode : {FeatureEncoding::kFixed, FeatureEncoding::kCompact}) {
      std::string enc = EncodeFeatures(b, mode);
      if (mode == FeatureEncoding::kFixed) {
        ASSERT_EQ(enc.size(), FixedFeatureSize(b.deltas.size()));
      }
      FeatureBlock d;
      size_t n = 0;
      ASSERT_TRUE(DecodeFeatures(enc, mode, &d, &n).ok());
      ASSERT_EQ(n, enc.size());
      ASSERT_EQ(d, b);
    }
  }
}

TEST(MergeOnRewriteTest, Examples) {
  FeatureBlock first = MergeOnRewrite(FeatureBlock{}, 777);
  EXPECT_EQ(first.deltas, std::vector<uint64_t>{777});
  ASSERT_EQ(first.edwcs.size(), 10u);
  for (float v : first.edwcs) EXPECT_EQ(v, 1.0f);

  FeatureBlock full;
  for (int i = 0; i < 32; ++i) full.deltas.push_back(100 + i);
  full.edwcs.assign(kNumEdwcs, 3.0f);
  FeatureBlock next = MergeOnRewrite(full, 5);
  ASSERT_EQ(next.deltas.size(), 32u);
  EXPECT_EQ(next.deltas.front(), 5u);
  EXPECT_EQ(next.deltas.back(), 130u);
}

TEST(MergeOnRewriteTest, ShadowListOrdering) {
  std::mt19937_64 rng(17);
  FeatureBlock b;
  std::vector<uint64_t> shadow;
  for (int i = 0; i < 100; ++i) {
    const uint64_t l = 1 + rng() % 100000;
    b = MergeOnRewrite(b, l);
    shadow.insert(shadow.begin(), l);
    if (shadow.size() > 32) shadow.pop_back();
    ASSERT_EQ(b.deltas, shadow);
  }
}

TEST(FeatureVectorTest, Examples) {
  FeatureBlock empty;
  empty.static_value_size = 4096;
  FeatureVector v = BuildFeatureVector(empty, 0);
  EXPECT_EQ(v.present_count(), 1);
  EXPECT_EQ(v.slots[kValueSizeSlot], 12.0);

  FeatureBlock one;
  one.deltas = {3ull << 20};
  one.edwcs = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  FeatureVector a = BuildFeatureVector(one, 0);
  EXPECT_EQ(a.slots[0], 2.0);
  EXPECT_TRUE(a.missing(1));
  for (int i = 0; i < kNumEdwcs; ++i) EXPECT_EQ(a.slots[kEdwcSlotBegin + i], one.edwcs[i]);
  FeatureVector h = BuildFeatureVector(one, 1ull << 19);
  EXPECT_NEAR(h.slots[kEdwcSlotBegin], a.slots[kEdwcSlotBegin] / 2, 1e-6);
}

TEST(FeatureVectorTest, OptionsControlEdwcSlots) {
  FeatureBlock one;
  one.deltas = {10};
  one.edwcs.assign(kNumEdwcs, 1.0f);
  FeatureVectorOptions opts;
  opts.edwc_plus_one = true;
  opts.edwc_count = 4;
  FeatureVector v = BuildFeatureVector(one, 0, opts);
  EXPECT_EQ(v.slots[kEdwcSlotBegin], 2.0);
  EXPECT_TRUE(v.missing(kEdwcSlotBegin + 4));
  EXPECT_EQ(GroupOfSlot(0), FeatureGroup::kDelta);
  EXPECT_EQ(GroupOfSlot(35), FeatureGroup::kEdwc);
  EXPECT_EQ(GroupOfSlot(42), FeatureGroup::kStatic);
}

}  // namespace
}  // namespace lifekv
