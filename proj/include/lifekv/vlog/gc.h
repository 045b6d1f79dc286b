#ifndef LIFEKV_VLOG_GC_H_
#define LIFEKV_VLOG_GC_H_

// One garbage-collection job over a set of sealed value files.
//
// Every record is checked against the newest LSM entry of its key; it is
// valid iff that entry is a Put with the same sequence number. Valid records
// are classified, copied to per-class output files and recorded in the job's
// index map. The LSM-tree is never written.

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "lifekv/core/env.h"
#include "lifekv/core/status.h"
#include "lifekv/features/features.h"
#include "lifekv/vlog/index_map.h"
#include "lifekv/vlog/value_file.h"

namespace lifekv {

struct GcLookup {
  bool found = false;  // a live Put exists
  SequenceNumber seq = 0;
  FeatureBlock features;
};

// Services the job needs from the engine.
class GcHost {
 public:
  virtual ~GcHost() = default;
  virtual Status Lookup(std::string_view key, GcLookup* out) = 0;
  // Destination class of a valid record, `elapsed` after it was written.
  virtual ValueClass Classify(const FeatureBlock& features, uint64_t elapsed) = 0;
  // Called once per valid record.
  virtual void OnValid(const FeatureBlock& features, uint64_t elapsed) = 0;
  virtual Status NewOutputFile(ValueClass cls, std::unique_ptr<ValueFileWriter>* writer,
                               ValueFileMeta* meta) = 0;
  virtual Status CrashPoint(std::string_view site) = 0;
};

struct GcJobStats {
  uint64_t scanned = 0;
  uint64_t valid = 0;
  uint64_t invalid = 0;
  std::array<uint64_t, kNumValueClasses> relocated_bytes{};
  std::array<uint64_t, kNumValueClasses> relocated_records{};
  // Per class of the input files.
  std::array<uint64_t, kNumValueClasses> input_scanned{};
  std::array<uint64_t, kNumValueClasses> input_invalid{};
  uint64_t valid_record_bytes = 0;
  uint64_t micros = 0;
};

struct GcJobResult {
  GcJobStats stats;
  std::vector<ValueFileMeta> outputs;  // sealed
  std::vector<IndexMapEntry> entries;  // sorted
};

struct GcOptions {
  uint64_t value_file_bytes = 32ull << 20;
  SequenceNumber now = 0;  // ages are measured against this sequence
};

// Output files are synced and sealed on success and deleted on failure.
Status RunGc(Env* env, const std::string& dir, const std::vector<ValueFileMeta>& inputs,
             const GcOptions& options, GcHost* host, GcJobResult* result);

}  // namespace lifekv

#endif  // LIFEKV_VLOG_GC_H_
