#ifndef LIFEKV_CORE_CONFIG_H_
#define LIFEKV_CORE_CONFIG_H_

#include <cstdint>
#include <string>

#include "lifekv/core/status.h"

namespace lifekv {

// Constants of the threshold transformation functions. Percent values are
// in [0, 100].
struct LifetimeParams {
  double alpha_s = 10.0;
  double alpha_l = 10.0;
  double beta0 = 0.25;
  double beta1 = 0.75;
  double ini_sp0 = 60.0;
  double ini_sp1 = 40.0;
  double ini_lp0 = 80.0;
  double ini_lp1 = 20.0;
  // Quantile answer of an empty histogram, in sequence units.
  uint64_t initial_default_ttl = uint64_t{1} << 22;
  // EWMA weight of the newest GC job in the smoothed invalid ratio.
  double gc_ratio_weight = 0.3;
  // Thresholds are also recomputed after this many dataset batches.
  int recompute_every_batches = 4;
};

struct GbdtParams {
  int num_trees = 64;
  int max_leaves = 31;
  int min_samples_leaf = 20;
  double learning_rate = 0.1;
  int histogram_bins = 64;
  double l2_reg = 1.0;
};

enum class FeatureEncoding : uint8_t {
  kFixed = 0,    // 8-byte little-endian deltas
  kCompact = 1,  // varint deltas
};

enum class MaintenanceMode : uint8_t {
  kInline = 0,      // jobs run on the writing thread; deterministic
  kBackground = 1,  // maintenance and training workers
};

struct EngineConfig {
  uint64_t memtable_bytes = 8ull << 20;
  uint64_t value_file_bytes = 32ull << 20;
  // Values at least this large go to value files; UINT64_MAX keeps every
  // value inline in the LSM-tree.
  uint64_t min_separated_value_bytes = 1024;

  uint64_t sst_target_file_bytes = 2ull << 20;
  // Level n target is level_unit_bytes * level_fanout^n.
  uint64_t level_unit_bytes = 1ull << 20;
  int level_fanout = 10;
  int l0_compaction_trigger = 4;

  int max_deltas = 32;
  int edwc_count = 10;
  uint64_t dataset_threshold = 128000;
  uint64_t sample_queue_capacity = 256 * 1024;
  FeatureEncoding feature_encoding = FeatureEncoding::kFixed;
  // Add the per-write +1 term when refreshing EDWCs at prediction time.
  bool gc_edwc_plus_one = false;
  // Label GC samples 1 when EDWC[s_idx] > 1 instead of <= 1.
  bool gc_label_inverted = false;
  // When false every valid GC record is placed in a long-lifetime file.
  bool use_model = true;

  bool wal_enabled = true;
  bool sync_wal = false;
  MaintenanceMode maintenance = MaintenanceMode::kBackground;
  uint64_t gc_max_files_per_job = 8;
  uint64_t vlog_reader_cache = 256;
  bool dump_dataset_csv = false;

  uint64_t seed = 0x5eed;

  LifetimeParams lifetime;
  GbdtParams gbdt;

  Status Validate() const;

  std::string ToJson() const;
  // Fields absent from the JSON keep their value in *out.
  static Status FromJson(const std::string& text, EngineConfig* out);
  static Status FromJsonFile(const std::string& path, EngineConfig* out);

  // Applies LIFEKV_CONFIG (path of a JSON file) and then any
  // LIFEKV_<FIELD> variables, e.g. LIFEKV_MEMTABLE_BYTES or
  // LIFEKV_LIFETIME_ALPHA_S for nested fields.
  Status ApplyEnvironment();
};

}  // namespace lifekv

#endif  // LIFEKV_CORE_CONFIG_H_
