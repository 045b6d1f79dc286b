// Acceptance suite. Runs the unit and property tests that back criteria 1-6
// plus the desk-scale benchmark checks for criteria 7-10, then prints one
// verdict line per criterion.

#include <fnmatch.h>
#include <gtest/gtest.h>

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lifekv/bench/bench.h"
#include "test_util.h"

namespace lifekv {
namespace {

constexpr uint64_t kDeskKeys = 500000;
constexpr uint64_t kDeskOps = 2000000;
constexpr uint32_t kDeskValueSize = 4096;
constexpr uint64_t kMaxFeatureBytes = 297;

struct DeskRun {
  bench::BenchReport report;
  Status status;
};

// Each configuration runs once per process; later criteria reuse the report.
const DeskRun& Desk(const std::string& label, bench::PolicyKind policy, double theta,
                    bool inline_values) {
  static std::map<std::string, DeskRun> runs;
  auto it = runs.find(label);
  if (it != runs.end()) return it->second;
  bench::BenchOptions o;
  o.workload.key_count = kDeskKeys;
  o.workload.op_count = kDeskOps;
  o.workload.value_size = kDeskValueSize;
  o.workload.distribution = bench::Distribution::kZipfian;
  o.workload.theta = theta;
  o.policy.kind = policy;
  o.config = bench::DeskConfig(kDeskOps);
  if (inline_values) o.config.min_separated_value_bytes = UINT64_MAX;
  o.report_path = "acceptance_" + label + ".json";
  o.timeline_path = "acceptance_" + label + ".timeline.csv";
  DeskRun run;
  {
    test::TempDir dir;
    o.dir = dir.path() + "/db";
    run.status = bench::RunBench(o, &run.report);
  }
  std::printf("  [desk %s] %s  written=%.1fMB  size=%.1fMB  wa=%.2f  %.0fs\n", label.c_str(),
              run.status.ToString().c_str(), run.report.total_bytes_written / 1e6,
              run.report.final_total_size / 1e6, run.report.write_amplification,
              run.report.seconds);
  return runs.emplace(label, std::move(run)).first->second;
}

const DeskRun& Learned09() { return Desk("learned_t0.9", bench::PolicyKind::kLearned, 0.9, false); }
const DeskRun& NoModel09() { return Desk("nomodel_t0.9", bench::PolicyKind::kNoModel, 0.9, false); }
const DeskRun& Inline09() { return Desk("inline_t0.9", bench::PolicyKind::kLearned, 0.9, true); }
const DeskRun& Learned02() { return Desk("learned_t0.2", bench::PolicyKind::kLearned, 0.2, false); }

double Ratio(uint64_t a, uint64_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

TEST(Desk, LearnedShrinksSpaceAgainstNoModel) {
  const DeskRun& l = Learned09();
  const DeskRun& n = NoModel09();
  ASSERT_TRUE(l.status.ok()) << l.status.ToString();
  ASSERT_TRUE(n.status.ok()) << n.status.ToString();
  const double size = Ratio(l.report.final_total_size, n.report.final_total_size);
  const double written = Ratio(l.report.total_bytes_written, n.report.total_bytes_written);
  std::printf("  size learned/nomodel=%.3f (<= 0.75)  written learned/nomodel=%.3f (<= 1.35)\n",
              size, written);
  EXPECT_LE(size, 0.75);
  EXPECT_LE(written, 1.35);
  EXPECT_LT(l.report.seconds + n.report.seconds, 15 * 60.0);
}

TEST(Desk, SeparationHalvesWritesAgainstInline) {
  const DeskRun& l = Learned09();
  const DeskRun& i = Inline09();
  ASSERT_TRUE(l.status.ok()) << l.status.ToString();
  ASSERT_TRUE(i.status.ok()) << i.status.ToString();
  ASSERT_TRUE(i.report.inline_values);
  EXPECT_EQ(i.report.final_vlog_size, 0u);
  const double written = Ratio(i.report.total_bytes_written, l.report.total_bytes_written);
  std::printf("  written inline/learned=%.3f (>= 2)\n", written);
  EXPECT_GE(written, 2.0);
  EXPECT_LT(l.report.seconds + i.report.seconds, 20 * 60.0);
}

TEST(Desk, ThresholdsFollowSkew) {
  const DeskRun& hi = Learned09();
  const DeskRun& lo = Learned02();
  ASSERT_TRUE(hi.status.ok()) << hi.status.ToString();
  ASSERT_TRUE(lo.status.ok()) << lo.status.ToString();
  const double l_hi = hi.report.SteadyStateLongThreshold();
  const double l_lo = lo.report.SteadyStateLongThreshold();
  const int kDefault = static_cast<int>(ValueClass::kDefault);
  const int kLong = static_cast<int>(ValueClass::kLong);
  std::printf("  steady l_l: theta 0.9=%.0f theta 0.2=%.0f\n", l_hi, l_lo);
  for (const DeskRun* r : {&hi, &lo}) {
    std::printf("  theta %.1f invalid ratio: default=%.3f long=%.3f\n", r->report.theta,
                r->report.class_invalid_ratio[kDefault], r->report.class_invalid_ratio[kLong]);
    EXPECT_GT(r->report.class_scanned[kDefault], 0u);
    EXPECT_GT(r->report.class_invalid_ratio[kDefault], r->report.class_invalid_ratio[kLong]);
  }
  EXPECT_GT(l_hi, l_lo);
}

TEST(Desk, ModelOverheadBounded) {
  const DeskRun& l = Learned09();
  ASSERT_TRUE(l.status.ok()) << l.status.ToString();
  std::printf("  model call=%.2fus over %llu calls  model file=%llu bytes  feature max=%llu\n",
              l.report.model_call_micros,
              static_cast<unsigned long long>(l.report.model_calls),
              static_cast<unsigned long long>(l.report.model_file_bytes),
              static_cast<unsigned long long>(l.report.max_feature_bytes));
  EXPECT_GT(l.report.trainings, 0u);
  EXPECT_GT(l.report.model_calls, 0u);
  EXPECT_LT(l.report.model_call_micros, 50.0);
  EXPECT_GT(l.report.model_file_bytes, 0u);
  EXPECT_LT(l.report.model_file_bytes, 1u << 20);
  EXPECT_LE(l.report.max_feature_bytes, kMaxFeatureBytes);
}

struct Criterion {
  int id;
  const char* title;
  std::vector<const char*> tests;  // gtest name patterns
  double max_seconds;              // 0 leaves timing to the tests
};

const std::vector<Criterion>& Criteria() {
  static const std::vector<Criterion> kCriteria = {
      {1, "formula suite",
       {"EdwcTest.UpdateFromZero", "EdwcTest.UpdateAtWindowGivesOneAndHalf",
        "EdwcTest.ConvergesToTwoAtFixedGap", "EdwcTest.DecayExamples", "EdwcTest.DecayComposes",
        "DeltaBucketTest.*", "FeatureVectorTest.*", "SigmoidTest.*", "HistogramTest.*",
        "LifetimePointTest.*", "DefaultTtlTest.*", "EdwcIndexTest.*", "GcRatioTrackerTest.*",
        "ThresholdsTest.*", "SampleProbabilityTest.Examples", "LabelTest.*",
        "DatasetBuilderTest.*"},
       5.0},
      {2, "feature format", {"FeatureCodecTest.*"}, 10.0},
      {3, "EDWC monotonicity",
       {"EdwcTest.MonotoneAcrossWindowsAndBounded",
        "SampleProbabilityTest.MonotoneEdwcsNeverExceedOne"},
       0.0},
      {4, "shadow-oracle correctness", {"Seeds/ShadowOracleTest.*"}, 120.0},
      {5, "crash safety", {"DbCrashTest.*"}, 120.0},
      {6, "GBDT training",
       {"GbdtTest.LossNonIncreasingOnGeneratedDatasets",
        "GbdtTest.SeparableTwoFeatureReachesFullAccuracy",
        "GbdtTest.SaveLoadBitIdenticalAndDeterministic"},
       30.0},
      {7, "learned vs no-model space", {"Desk.LearnedShrinksSpaceAgainstNoModel"}, 0.0},
      {8, "separation vs inline writes", {"Desk.SeparationHalvesWritesAgainstInline"}, 0.0},
      {9, "dynamic thresholds", {"Desk.ThresholdsFollowSkew"}, 0.0},
      {10, "overhead bounds",
       {"Desk.ModelOverheadBounded", "DbTest.FeatureBlocksStayBounded"}, 0.0},
  };
  return kCriteria;
}

struct Outcome {
  bool passed = false;
  double seconds = 0.0;
};

class Recorder : public ::testing::EmptyTestEventListener {
 public:
  void OnTestEnd(const ::testing::TestInfo& info) override {
    Outcome& o = outcomes_[std::string(info.test_suite_name()) + "." + info.name()];
    o.passed = info.result()->Passed();
    o.seconds = static_cast<double>(info.result()->elapsed_time()) / 1000.0;
  }
  const std::map<std::string, Outcome>& outcomes() const { return outcomes_; }

 private:
  std::map<std::string, Outcome> outcomes_;
};

}  // namespace
}  // namespace lifekv

int main(int argc, char** argv) {
  using lifekv::Criteria;
  ::testing::InitGoogleTest(&argc, argv);
  std::string filter;
  for (const auto& c : Criteria()) {
    for (const char* t : c.tests) filter += (filter.empty() ? "" : ":") + std::string(t);
  }
  ::testing::GTEST_FLAG(filter) = filter;
  auto* recorder = new lifekv::Recorder;
  ::testing::UnitTest::GetInstance()->listeners().Append(recorder);
  const int rc = RUN_ALL_TESTS();

  int failed = 0;
  std::printf("\nacceptance:\n");
  for (const auto& c : Criteria()) {
    size_t matched = 0;
    bool ok = true;
    double seconds = 0.0;
    std::string failures;
    for (const auto& [name, o] : recorder->outcomes()) {
      bool hit = false;
      for (const char* t : c.tests) hit = hit || fnmatch(t, name.c_str(), 0) == 0;
      if (!hit) continue;
      ++matched;
      seconds += o.seconds;
      if (!o.passed) {
        ok = false;
        failures += " " + name;
      }
    }
    if (matched == 0) {
      ok = false;
      failures = " no tests ran";
    }
    if (c.max_seconds > 0 && seconds >= c.max_seconds) {
      ok = false;
      failures += " over time budget";
    }
    if (!ok) ++failed;
    std::printf("criterion %2d %s  %-28s %3zu tests  %7.1fs%s%s\n", c.id, ok ? "PASS" : "FAIL",
                c.title, matched, seconds, failures.empty() ? "" : "  failed:", failures.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failed, Criteria().size());
  return failed == 0 && rc == 0 ? 0 : 1;
}
