#ifndef LIFEKV_LSM_COMPACTION_H_
#define LIFEKV_LSM_COMPACTION_H_

// Merging compaction. L0->L1 jobs also enrich feature blocks: every version
// of a key in the job, together with its previous version found in L1 or
// deeper, is replayed oldest to newest through MergeOnRewrite, and each
// observed lifetime may be emitted as a training sample.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lifekv/core/config.h"
#include "lifekv/core/env.h"
#include "lifekv/lifetime/lifetime.h"
#include "lifekv/learn/samples.h"
#include "lifekv/lsm/version.h"
#include "lifekv/vlog/registry.h"

namespace lifekv {

struct CompactionContext {
  Env* env = nullptr;
  std::string dir;
  const EngineConfig* config = nullptr;
  std::function<FileNumber()> new_file_number;
  // Locators are canonicalised through the registry when set.
  const ValueRegistry* registry = nullptr;
  // Compaction samples are pushed here when set.
  SampleQueue* samples = nullptr;
  LifetimeThresholds thresholds;
  std::mt19937_64* rng = nullptr;
};

struct CompactionStats {
  uint64_t input_entries = 0;
  uint64_t output_entries = 0;
  uint64_t dropped_versions = 0;
  uint64_t dropped_tombstones = 0;
  uint64_t lifetimes_observed = 0;
  uint64_t samples_emitted = 0;
  uint64_t enriched = 0;
  uint64_t canonicalized = 0;
  uint64_t input_bytes = 0;
  uint64_t output_bytes = 0;
};

struct CompactionResult {
  std::vector<TableRef> outputs;  // sorted by key, readers open
  CompactionStats stats;
};

// Writes the merged job output. On failure every output file is deleted.
Status RunCompaction(const Version& base, const CompactionJob& job, CompactionContext& ctx,
                     CompactionResult* result);

// Resolves the locator of a separated value part through the registry and
// rewrites it when it moved. DanglingLocator leaves the entry unchanged.
Status CanonicalizeValue(const ValueRegistry& registry, std::string_view value,
                         std::string* out, bool* changed);

}  // namespace lifekv

#endif  // LIFEKV_LSM_COMPACTION_H_
