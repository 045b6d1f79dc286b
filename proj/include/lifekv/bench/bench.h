#ifndef LIFEKV_BENCH_BENCH_H_
#define LIFEKV_BENCH_BENCH_H_

// Benchmark driver: streams a workload into a fresh database under one GC
// policy and reports write volume, space, and model overhead.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lifekv/bench/workload.h"
#include "lifekv/core/config.h"
#include "lifekv/core/env.h"
#include "lifekv/engine/db.h"

namespace lifekv::bench {

enum class PolicyKind : uint8_t { kLearned, kNoModel, kRatioTrigger };

struct GcPolicy {
  PolicyKind kind = PolicyKind::kLearned;
  // RatioTrigger: collect a sealed file once its estimated garbage ratio
  // reaches `threshold`, judged from `sample_n` sampled records.
  double threshold = 0.5;
  size_t sample_n = 400;
  // RatioTrigger: ops between two estimation sweeps; 0 derives one sweep
  // per value file worth of writes.
  uint64_t check_every_ops = 0;

  std::string Name() const;
};

// learned | nomodel | ratio:<threshold>
Status ParseGcPolicy(const std::string& text, GcPolicy* out);

// Desk-scale engine settings for a run of `op_count` writes: 8 MB memtable,
// 32 MB value files, no WAL, inline maintenance, and an initial default
// lifetime of a fifth of the run.
EngineConfig DeskConfig(uint64_t op_count);

struct BenchOptions {
  EngineConfig config;
  WorkloadSpec workload;
  GcPolicy policy;
  std::string dir;
  std::string report_path;    // JSON; empty skips
  std::string timeline_path;  // CSV; empty skips
  // Fresh POSIX environment when null.
  Env* env = nullptr;
  // Prints a progress line every this many ops; 0 disables.
  uint64_t progress_every = 0;
};

struct BenchReport {
  std::string policy;
  std::string distribution;
  double theta = 0.0;
  uint64_t keys = 0;
  uint64_t ops = 0;
  uint64_t value_size = 0;
  uint64_t seed = 0;
  bool inline_values = false;

  bool completed = false;
  std::string error;

  uint64_t logical_bytes_written = 0;
  uint64_t total_bytes_written = 0;
  std::array<uint64_t, kNumFileKinds> bytes_written_by_kind{};
  double write_amplification = 0.0;
  uint64_t final_total_size = 0;
  uint64_t final_lsm_size = 0;
  uint64_t final_vlog_size = 0;
  double seconds = 0.0;
  double throughput_ops = 0.0;

  uint64_t flushes = 0;
  uint64_t compactions = 0;
  uint64_t gc_jobs = 0;
  uint64_t gc_scanned = 0;
  uint64_t gc_invalid = 0;
  std::array<double, kNumValueClasses> class_invalid_ratio{};
  std::array<uint64_t, kNumValueClasses> class_scanned{};
  std::array<uint64_t, kNumValueClasses> relocated_bytes{};
  uint64_t garbage_estimates = 0;

  uint64_t trainings = 0;
  double model_call_micros = 0.0;
  uint64_t model_calls = 0;
  uint64_t model_file_bytes = 0;
  uint64_t max_feature_bytes = 0;
  uint64_t max_deltas = 0;
  uint64_t compaction_samples = 0;
  uint64_t gc_samples = 0;

  LifetimeThresholds final_thresholds;
  std::vector<TimelinePoint> timeline;

  // Mean l_l over the second half of the threshold rows.
  double SteadyStateLongThreshold() const;
  std::string ToJson() const;
};

Status RunBench(const BenchOptions& options, BenchReport* report);

Status WriteTimelineCsv(Env* env, const std::vector<TimelinePoint>& timeline,
                        const std::string& path);

}  // namespace lifekv::bench

#endif  // LIFEKV_BENCH_BENCH_H_
