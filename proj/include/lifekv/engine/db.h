#ifndef LIFEKV_ENGINE_DB_H_
#define LIFEKV_ENGINE_DB_H_

// Public storage API.
//
// One logical writer (callers serialise Put/Delete), any number of readers.
// Directory layout: CURRENT, MANIFEST-<n>, <n>.wal, <n>.sst, <n>.vlog,
// <n>.vmap, MODEL-<version>.txt.

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lifekv/core/config.h"
#include "lifekv/core/env.h"
#include "lifekv/core/status.h"
#include "lifekv/learn/gbdt.h"
#include "lifekv/lifetime/lifetime.h"
#include "lifekv/vlog/registry.h"
#include "lifekv/vlog/value_file.h"

namespace lifekv {

enum class JobKind : uint8_t { kNone = 0, kFlush, kCompaction, kGc, kTraining };
const char* JobKindName(JobKind k);

// One row of the exported timeline. `cls` is -1 for threshold updates and
// the value class of the GC input files otherwise; `ratio` is then that
// class's invalid fraction in the job, else the smoothed GC invalid ratio.
struct TimelinePoint {
  SequenceNumber seq = 0;
  uint64_t l_d = 0;
  uint64_t l_s = 0;
  uint64_t l_l = 0;
  int cls = -1;
  double ratio = 0.0;
};

struct DbStats {
  SequenceNumber last_seq = 0;
  uint64_t user_writes = 0;
  uint64_t logical_bytes = 0;  // key + value bytes of accepted writes
  // Bytes written through the env since Open, by file kind.
  std::array<uint64_t, kNumFileKinds> written{};
  uint64_t total_written = 0;
  uint64_t flushes = 0;
  uint64_t compactions = 0;
  uint64_t compaction_input_bytes = 0;
  uint64_t compaction_output_bytes = 0;
  uint64_t lsm_writes = 0;  // memtable inserts plus entries written to tables
  uint64_t gc_jobs = 0;
  uint64_t gc_scanned = 0;
  uint64_t gc_valid = 0;
  uint64_t gc_invalid = 0;
  std::array<uint64_t, kNumValueClasses> gc_class_scanned{};
  std::array<uint64_t, kNumValueClasses> gc_class_invalid{};
  std::array<uint64_t, kNumValueClasses> gc_relocated_bytes{};
  std::array<uint64_t, kNumValueClasses> gc_relocated_records{};
  uint64_t trainings = 0;
  uint64_t model_version = 0;
  uint64_t model_calls = 0;
  double model_call_micros = 0.0;  // mean
  uint64_t model_file_bytes = 0;
  uint64_t compaction_samples = 0;
  uint64_t gc_samples = 0;
  uint64_t samples_dropped = 0;
  uint64_t dataset_builds = 0;
  ResolveStats resolve;
  uint64_t index_maps = 0;
  uint64_t value_files = 0;
  std::array<uint64_t, 7> tables_per_level{};
  uint64_t lsm_bytes = 0;
  uint64_t vlog_bytes = 0;
  uint64_t vmap_bytes = 0;
  uint64_t total_size = 0;  // bytes of every file in the directory
  LifetimeThresholds thresholds;
  double gc_ratio = 0.0;
};

struct LsmCheck {
  uint64_t entries = 0;
  uint64_t separated = 0;
  uint64_t max_feature_bytes = 0;
  uint64_t max_deltas = 0;
  bool non_overlap = true;
};

class DB {
 public:
  // `env` defaults to Env::Default() and must outlive the handle.
  static Status Open(const EngineConfig& config, const std::string& dir, std::unique_ptr<DB>* db,
                     Env* env = nullptr);

  virtual ~DB() = default;

  virtual Status Put(std::string_view key, std::string_view value) = 0;
  virtual Status Delete(std::string_view key) = 0;
  // NotFound when absent.
  virtual Status Get(std::string_view key, std::string* value) = 0;
  // Live pairs with start <= key < end in key order.
  virtual Status Scan(std::string_view start, std::string_view end,
                      std::vector<std::pair<std::string, std::string>>* out) = 0;

  // Seals and flushes the memtable.
  virtual Status Flush() = 0;
  // Runs picked compactions until none is due.
  virtual Status CompactUntilQuiet() = 0;
  // Garbage-collects up to `max_files` sealed value files regardless of
  // their ttl, oldest first; 0 means all.
  virtual Status ForceGc(size_t max_files = 0) = 0;
  // Garbage-collects the given sealed value files as one job.
  virtual Status GcFiles(const std::vector<FileNumber>& files) = 0;
  // Runs the highest-priority pending job: flush, compaction, GC of expired
  // files, then training once a dataset is ready.
  virtual Status MaintenanceTick(JobKind* ran) = 0;
  // Runs maintenance until nothing is pending and no training is running.
  virtual Status WaitForIdle() = 0;
  virtual Status SyncWal() = 0;
  // When disabled, expired files are not collected by maintenance.
  virtual void SetTtlGcEnabled(bool enabled) = 0;

  // Fraction of `sample_n` uniformly sampled records of `file` that are
  // no longer live.
  virtual Status EstimateGarbage(FileNumber file, size_t sample_n, uint64_t seed,
                                 double* ratio) = 0;

  virtual DbStats GetStats() = 0;
  virtual std::vector<TimelinePoint> Timeline() const = 0;
  virtual LifetimeThresholds Thresholds() const = 0;
  virtual std::shared_ptr<const LifetimeModel> Model() const = 0;
  virtual std::vector<ValueFileMeta> ValueFiles() const = 0;
  // Decodes every table entry and checks level ordering.
  virtual Status CheckLsm(LsmCheck* check) = 0;

  virtual Status Close() = 0;
};

std::string ModelFileName(const std::string& dir, uint64_t version);

}  // namespace lifekv

#endif  // LIFEKV_ENGINE_DB_H_
