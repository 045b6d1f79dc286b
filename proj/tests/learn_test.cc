#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "lifekv/learn/gbdt.h"
#include "lifekv/learn/samples.h"
#include "test_util.h"

namespace lifekv {
namespace {

FeatureVector VectorWith(int slot, double v) {
  FeatureVector f;
  f.slots[slot] = v;
  return f;
}

FeatureBlock BlockWithEdwc(float e) {
  FeatureBlock b;
  b.deltas = {100};
  b.edwcs.assign(kNumEdwcs, e);
  return b;
}

Dataset RandomDataset(std::mt19937_64& rng, size_t rows, bool random_labels) {
  Dataset d;
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (size_t r = 0; r < rows; ++r) {
    FeatureVector v;
    const int present = static_cast<int>(rng() % kNumFeatureSlots);
    for (int s = 0; s < kNumFeatureSlots; ++s) {
      if (static_cast<int>(rng() % kNumFeatureSlots) < present) v.slots[s] = std::floor(u(rng));
    }
    int label;
    if (random_labels) {
      label = static_cast<int>(rng() % 2);
    } else {
      const double x = v.missing(3) ? 5.0 : v.slots[3];
      label = (x + u(rng) * 0.5 > 6.0) ? 1 : 0;
    }
    d.AddRow(v, label, r % 2 ? SampleSource::kGc : SampleSource::kCompaction);
  }
  return d;
}

TEST(SampleProbabilityTest, Examples) {
  Edwcs e{};
  e[1] = 2;
  e[4] = 4;
  EXPECT_DOUBLE_EQ(CompactionSampleProbability(e, 1, 4), 0.5);
  EXPECT_DOUBLE_EQ(CompactionSampleProbability(Edwcs{}, 2, 7), 1.0);
  e[1] = 8;
  EXPECT_DOUBLE_EQ(CompactionSampleProbability(e, 1, 4), 1.0);
}

TEST(SampleProbabilityTest, MonotoneEdwcsNeverExceedOne) {
  std::mt19937_64 rng(31);
  for (int seq = 0; seq < 10000; ++seq) {
    Edwcs e{};
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int k = 0; k < n; ++k) {
      e = EdwcUpdateOnWrite(e, rng() % (1ull << (rng() % 34)));
      const int s = static_cast<int>(rng() % kNumEdwcs);
      const int l = s + static_cast<int>(rng() % (kNumEdwcs - s));
      const double p = CompactionSampleProbability(e, s, l);
      ASSERT_GE(p, 0.0);
      ASSERT_LE(p, 1.0);
      ASSERT_LE(static_cast<double>(e[s]), static_cast<double>(e[l]));
    }
  }
}

TEST(LabelTest, CompactionExamples) {
  const uint64_t ld = 1000, ls = 400;
  EXPECT_FALSE(LabelCompactionSample(ld / 2, ld, ls).has_value());
  EXPECT_FALSE(LabelCompactionSample(ld, ld, ls).has_value());
  EXPECT_EQ(LabelCompactionSample(ld + ls + 1, ld, ls), 1);
  EXPECT_EQ(LabelCompactionSample(ld + ls, ld, ls), 0);
  EXPECT_EQ(LabelCompactionSample(ld + 1, ld, ls), 0);
}

TEST(LabelTest, GcExamples) {
  EXPECT_EQ(LabelGcSample(FeatureBlock{}, 3), 1);
  EXPECT_EQ(LabelGcSample(BlockWithEdwc(0.4f), 3), 1);
  EXPECT_EQ(LabelGcSample(BlockWithEdwc(1.0f), 3), 1);
  EXPECT_EQ(LabelGcSample(BlockWithEdwc(3.0f), 3), 0);
  EXPECT_EQ(LabelGcSample(BlockWithEdwc(3.0f), 3, /*inverted=*/true), 1);
  EXPECT_EQ(LabelGcSample(BlockWithEdwc(0.4f), 3, /*inverted=*/true), 0);
  EXPECT_EQ(LabelGcSample(FeatureBlock{}, 3, /*inverted=*/true), 1);
}

TEST(SampleQueueTest, DropsWhenFull) {
  SampleQueue q(3);
  for (int i = 0; i < 5; ++i) q.Push(TrainingSample{});
  EXPECT_EQ(q.size(), 3u);
  EXPECT_EQ(q.dropped(), 2u);
  EXPECT_EQ(q.Drain().size(), 3u);
  EXPECT_EQ(q.size(), 0u);
  EXPECT_TRUE(q.Push(TrainingSample{}));
}

TrainingSample Compaction(uint64_t lifetime) {
  TrainingSample s;
  s.source = SampleSource::kCompaction;
  s.observed_lifetime = lifetime;
  s.features = BlockWithEdwc(1.0f);
  return s;
}

TrainingSample Gc(uint64_t age, bool once) {
  TrainingSample s;
  s.source = SampleSource::kGc;
  s.observed_lifetime = age;
  if (!once) s.features = BlockWithEdwc(2.0f);
  return s;
}

TEST(DatasetBuilderTest, EmptyQueuesGiveNothing) {
  DatasetBuilder b({});
  b.Consume({}, LifetimeThresholds{}, nullptr);
  EXPECT_FALSE(b.Build().has_value());
}

TEST(DatasetBuilderTest, CapArithmetic) {
  DatasetBuilderOptions o;
  o.threshold = 128000;
  DatasetBuilder b(o);
  LifetimeThresholds t{1000, 500, 5000, 0, 3};
  LifetimeHistogram hs;
  std::vector<TrainingSample> batch;
  for (int i = 0; i < 200000; ++i) batch.push_back(Compaction(1001 + (i % 2) * 1000));
  for (int i = 0; i < 10000; ++i) batch.push_back(Gc(3000, i % 3 == 0));
  b.Consume(std::move(batch), t, &hs);
  EXPECT_EQ(hs.total(), 200000u);
  ASSERT_TRUE(b.Ready());
  std::optional<Dataset> d = b.Build();
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->count(SampleSource::kCompaction), 64000u);
  EXPECT_EQ(d->count(SampleSource::kGc), 10000u);
  EXPECT_LE(d->rows(), o.threshold);
  EXPECT_FALSE(b.Ready());
}

TEST(DatasetBuilderTest, AllExcludedGivesNothing) {
  DatasetBuilderOptions o;
  o.threshold = 100;
  DatasetBuilder b(o);
  LifetimeThresholds t{1000, 500, 5000, 0, 3};
  std::vector<TrainingSample> batch;
  for (int i = 0; i < 1000; ++i) batch.push_back(Compaction(1 + i % 1000));
  b.Consume(std::move(batch), t, nullptr);
  EXPECT_EQ(b.excluded(), 1000u);
  EXPECT_FALSE(b.Build().has_value());
}

TEST(DatasetBuilderTest, CompactionVectorsDecayByDefaultTtl) {
  DatasetBuilderOptions o;
  o.threshold = 2;
  DatasetBuilder b(o);
  LifetimeThresholds t{1ull << 19, 1, 1ull << 22, 0, 3};
  std::vector<TrainingSample> batch{Compaction((1ull << 19) + 10), Gc(1ull << 20, false)};
  b.Consume(std::move(batch), t, nullptr);
  std::optional<Dataset> d = b.Build();
  ASSERT_TRUE(d.has_value());
  ASSERT_EQ(d->rows(), 2u);
  EXPECT_NEAR(d->Row(0).slots[kEdwcSlotBegin], 0.5, 1e-6);
  EXPECT_NEAR(d->Row(1).slots[kEdwcSlotBegin], 0.5, 1e-6);
  // 2.0 decayed over two windows is 0.5: inactive, so long lived.
  EXPECT_EQ(d->label(1), 1);
}

TEST(DatasetBuilderTest, GcLabelUsesActivityAtCollection) {
  DatasetBuilderOptions o;
  o.threshold = 4;
  DatasetBuilder b(o);
  LifetimeThresholds t{1ull << 19, 1, 1ull << 22, 0, 3};
  // 2.0 decayed over an eighth of a window stays above 1.
  std::vector<TrainingSample> batch{Gc(1ull << 16, false), Gc(1ull << 21, false)};
  b.Consume(std::move(batch), t, nullptr);
  b.Consume({Gc(1ull << 16, false), Gc(1ull << 21, false)}, t, nullptr);
  std::optional<Dataset> d = b.Build();
  ASSERT_TRUE(d.has_value());
  ASSERT_EQ(d->rows(), 2u);
  EXPECT_EQ(d->label(0), 0);
  EXPECT_EQ(d->label(1), 1);
}

TEST(DatasetTest, CsvDump) {
  test::TempDir dir;
  Dataset d;
  d.AddRow(VectorWith(42, 3), 1, SampleSource::kGc);
  ASSERT_TRUE(d.WriteCsv(dir.File("d.csv")).ok());
  std::string text;
  ASSERT_TRUE(Env::Default()->ReadFileToString(dir.File("d.csv"), &text).ok());
  EXPECT_NE(text.find("1,gc"), std::string::npos);
}

TEST(GbdtTest, EmptyModelPredictsHalf) {
  LifetimeModel m;
  EXPECT_EQ(m.Predict(FeatureVector{}), 0.5);
  LifetimeModel back;
  ASSERT_TRUE(LifetimeModel::Parse(m.Serialize(), &back).ok());
  EXPECT_EQ(back.Predict(VectorWith(3, 1)), 0.5);
}

TEST(GbdtTest, TwoRowSeparable) {
  Dataset d;
  d.AddRow(VectorWith(42, 1), 0, SampleSource::kCompaction);
  d.AddRow(VectorWith(42, 9), 1, SampleSource::kGc);
  GbdtParams p;
  p.min_samples_leaf = 1;
  LifetimeModel m;
  ASSERT_TRUE(TrainModel(d, p, &m).ok());
  EXPECT_LT(m.Predict(VectorWith(42, 1)), 0.5);
  EXPECT_GT(m.Predict(VectorWith(42, 9)), 0.5);
}

TEST(GbdtTest, RejectsSingleLabel) {
  Dataset d;
  for (int i = 0; i < 10; ++i) d.AddRow(VectorWith(0, i), 1, SampleSource::kGc);
  LifetimeModel m;
  EXPECT_EQ(TrainModel(d, GbdtParams{}, &m).code(), Status::Code::kDegenerateDataset);
  EXPECT_EQ(TrainModel(Dataset{}, GbdtParams{}, &m).code(), Status::Code::kDegenerateDataset);
}

TEST(GbdtTest, SeparableTwoFeatureReachesFullAccuracy) {
  std::mt19937_64 rng(37);
  Dataset d;
  for (int i = 0; i < 2000; ++i) {
    FeatureVector v;
    v.slots[0] = static_cast<double>(rng() % 20);
    v.slots[32] = static_cast<double>(rng() % 50) / 5.0;
    const int label = (v.slots[0] >= 10 && v.slots[32] < 5.0) ? 1 : 0;
    d.AddRow(v, label, SampleSource::kCompaction);
  }
  LifetimeModel m;
  ASSERT_TRUE(TrainModel(d, GbdtParams{}, &m).ok());
  size_t correct = 0;
  for (size_t r = 0; r < d.rows(); ++r) {
    correct += (LifetimeModel::IsLong(m.Predict(d.Row(r))) ? 1 : 0) == d.label(r);
  }
  EXPECT_EQ(correct, d.rows());
}

TEST(GbdtTest, LossNonIncreasingOnGeneratedDatasets) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset d = RandomDataset(rng, 200 + rng() % 3000, trial % 2 == 0);
    if (d.positives() == 0 || d.positives() == d.rows()) continue;
    GbdtParams p;
    p.num_trees = 30;
    p.min_samples_leaf = 1 + static_cast<int>(rng() % 30);
    LifetimeModel m;
    ASSERT_TRUE(TrainModel(d, p, &m).ok());
    double prev = std::log(2.0);
    ASSERT_EQ(m.loss_trace().size(), 30u);
    for (double l : m.loss_trace()) {
      ASSERT_LE(l, prev + 1e-9);
      prev = l;
    }
    EXPECT_NEAR(LogLoss(d, m), m.loss_trace().back(), 1e-9);
  }
}

TEST(GbdtTest, RandomLabelsRoundOneBelowLn2) {
  std::mt19937_64 rng(43);
  Dataset d = RandomDataset(rng, 4000, true);
  LifetimeModel m;
  GbdtParams p;
  p.num_trees = 1;
  ASSERT_TRUE(TrainModel(d, p, &m).ok());
  EXPECT_LE(m.loss_trace()[0], std::log(2.0));
}

TEST(GbdtTest, SaveLoadBitIdenticalAndDeterministic) {
  std::mt19937_64 rng(47);
  Dataset d = RandomDataset(rng, 3000, false);
  LifetimeModel m, m2;
  ASSERT_TRUE(TrainModel(d, GbdtParams{}, &m).ok());
  ASSERT_TRUE(TrainModel(d, GbdtParams{}, &m2).ok());
  EXPECT_EQ(m.Serialize(), m2.Serialize());
  m.set_version(7);
  test::TempDir dir;
  ASSERT_TRUE(m.Save(Env::Default(), dir.File("MODEL-7.txt")).ok());
  LifetimeModel back;
  ASSERT_TRUE(LifetimeModel::Load(Env::Default(), dir.File("MODEL-7.txt"), &back).ok());
  EXPECT_EQ(back.version(), 7u);
  EXPECT_EQ(back.Serialize(), m.Serialize());
  std::uniform_real_distribution<double> u(-1.0, 12.0);
  for (int i = 0; i < 1000; ++i) {
    FeatureVector v;
    for (int s = 0; s < kNumFeatureSlots; ++s) {
      if (rng() % 3) v.slots[s] = u(rng);
    }
    const double a = m.Predict(v), b = back.Predict(v);
    ASSERT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  }
  EXPECT_LT(m.Serialize().size(), 1u << 20);
}

TEST(GbdtTest, AllMissingVectorIsDeterministic) {
  std::mt19937_64 rng(53);
  Dataset d = RandomDataset(rng, 2000, false);
  LifetimeModel m;
  ASSERT_TRUE(TrainModel(d, GbdtParams{}, &m).ok());
  const double a = m.Predict(FeatureVector{});
  for (int i = 0; i < 10; ++i) EXPECT_EQ(m.Predict(FeatureVector{}), a);
}

TEST(GbdtTest, CorruptFilesRejected) {
  std::mt19937_64 rng(59);
  Dataset d = RandomDataset(rng, 500, false);
  LifetimeModel m, out;
  ASSERT_TRUE(TrainModel(d, GbdtParams{}, &m).ok());
  const std::string text = m.Serialize();
  EXPECT_EQ(LifetimeModel::Parse(text.substr(0, text.size() / 2), &out).code(),
            Status::Code::kCorruptModel);
  EXPECT_EQ(LifetimeModel::Parse("garbage", &out).code(), Status::Code::kCorruptModel);
  // Point the root's left child outside the tree.
  const std::string root = "0 0 S ";
  size_t pos = text.find(root);
  ASSERT_NE(pos, std::string::npos);
  size_t eol = text.find('\n', pos);
  std::string line = text.substr(pos, eol - pos);
  std::vector<std::string> f;
  std::istringstream ls(line);
  for (std::string x; ls >> x;) f.push_back(x);
  f[6] = "9999";
  std::string bad_line;
  for (auto& x : f) bad_line += (bad_line.empty() ? "" : " ") + x;
  std::string bad = text.substr(0, pos) + bad_line + text.substr(eol);
  EXPECT_EQ(LifetimeModel::Parse(bad, &out).code(), Status::Code::kCorruptModel);
  test::TempDir dir;
  EXPECT_TRUE(LifetimeModel::Load(Env::Default(), dir.File("none"), &out).IsNotFound());
}

TEST(GbdtTest, PredictionInvariantUnderFeatureReencoding) {
  std::mt19937_64 rng(61);
  Dataset d = RandomDataset(rng, 2000, false);
  LifetimeModel m;
  ASSERT_TRUE(TrainModel(d, GbdtParams{}, &m).ok());
  for (int i = 0; i < 500; ++i) {
    FeatureBlock b;
    const int n = static_cast<int>(rng() % 33);
    for (int k = 0; k < n; ++k) b.deltas.push_back(1 + rng() % (1ull << 30));
    if (n > 0) {
      for (int k = 0; k < kNumEdwcs; ++k) b.edwcs.push_back(static_cast<float>(rng() % 1000) / 97);
    }
    FeatureBlock back;
    size_t used = 0;
    ASSERT_TRUE(DecodeFeatures(EncodeFeatures(b, FeatureEncoding::kFixed),
                               FeatureEncoding::kFixed, &back, &used)
                    .ok());
    const uint64_t elapsed = rng() % (1ull << 24);
    EXPECT_EQ(m.Predict(BuildFeatureVector(b, elapsed)),
              m.Predict(BuildFeatureVector(back, elapsed)));
  }
}

TEST(GbdtTest, GainsTallied) {
  std::mt19937_64 rng(67);
  Dataset d = RandomDataset(rng, 2000, false);
  LifetimeModel m;
  ASSERT_TRUE(TrainModel(d, GbdtParams{}, &m).ok());
  EXPECT_GT(m.gains()[3], 0.0);
  auto g = m.GroupGains();
  EXPECT_GT(g[0] + g[1] + g[2], 0.0);
}

}  // namespace
}  // namespace lifekv
