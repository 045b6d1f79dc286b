#ifndef LIFEKV_LSM_VERSION_H_
#define LIFEKV_LSM_VERSION_H_

// Immutable snapshot of the table set.

#include <array>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lifekv/core/config.h"
#include "lifekv/lsm/sstable.h"

namespace lifekv {

inline constexpr int kNumLevels = 7;

using TableRef = std::shared_ptr<const TableMeta>;

struct LookupResult {
  TableEntry entry;
  int level = 0;
  TableRef table;  // keeps the mapping alive while `entry` is used
};

class Version {
 public:
  // L0 is ordered oldest first; deeper levels by smallest key.
  std::array<std::vector<TableRef>, kNumLevels> levels;

  // Newest entry for key with seq <= snapshot, searching levels >= from_level.
  std::optional<LookupResult> Get(std::string_view key, SequenceNumber snapshot,
                                  int from_level = 0) const;
  uint64_t LevelBytes(int level) const;
  uint64_t TotalBytes() const;
  size_t TableCount() const;
  // Value-file ids referenced by any table.
  std::set<FileNumber> ReferencedValueFiles() const;
  // Tables of `level` overlapping [lo, hi].
  std::vector<TableRef> Overlapping(int level, std::string_view lo, std::string_view hi) const;
  // True when the deeper-level key ranges are disjoint and sorted.
  bool CheckNonOverlap() const;
};

uint64_t LevelTargetBytes(const EngineConfig& config, int level);

struct CompactionJob {
  int level = 0;  // inputs come from `level` and `level + 1`
  std::vector<TableRef> inputs;
  std::vector<TableRef> next_inputs;
  int output_level() const { return level + 1; }
};

// L0 job when L0 holds l0_compaction_trigger tables; otherwise the lowest
// level above its target, victim = oldest table, plus overlapping tables of
// the next level.
std::optional<CompactionJob> PickCompaction(const Version& v, const EngineConfig& config);

// Copy of `base` with the job's inputs removed and `outputs` added.
std::shared_ptr<Version> ApplyCompaction(const Version& base, const CompactionJob& job,
                                         const std::vector<TableRef>& outputs);

}  // namespace lifekv

#endif  // LIFEKV_LSM_VERSION_H_
