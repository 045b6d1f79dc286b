#ifndef LIFEKV_VLOG_REGISTRY_H_
#define LIFEKV_VLOG_REGISTRY_H_

// In-memory catalogue of value files and index maps.

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "lifekv/core/status.h"
#include "lifekv/vlog/index_map.h"
#include "lifekv/vlog/value_file.h"

namespace lifekv {

struct ResolveStats {
  uint64_t resolves = 0;
  uint64_t redirected = 0;
  uint64_t total_hops = 0;
  uint64_t max_hops = 0;
};

class ValueRegistry {
 public:
  void PutFile(const ValueFileMeta& meta);
  std::optional<ValueFileMeta> GetFile(FileNumber f) const;
  void MarkDead(FileNumber f);
  void EraseFile(FileNumber f);
  std::vector<ValueFileMeta> Files() const;

  void AddMap(std::shared_ptr<const ValueIndexMap> map);
  void EraseMap(FileNumber id);
  std::vector<std::shared_ptr<const ValueIndexMap>> Maps() const;
  size_t map_count() const;

  // Follows index maps while the locator's file is dead. DanglingLocator
  // when a dead file has no covering entry; FileMissing for unknown files.
  Status Resolve(const ValueLocator& loc, ValueLocator* out, int* hops = nullptr) const;

  // Sealed files whose age reached their ttl, oldest first.
  std::vector<ValueFileMeta> ExpiredFiles(SequenceNumber now) const;

  // Maps no longer needed by any live table or by another map's chain,
  // given the value-file ids referenced by live tables. Computed to a fixed
  // point: retiring one map can release the maps it depended on.
  std::vector<FileNumber> RetirableMaps(const std::set<FileNumber>& referenced) const;

  uint64_t LiveBytes() const;
  ResolveStats resolve_stats() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<FileNumber, ValueFileMeta> files_;
  std::map<FileNumber, std::shared_ptr<const ValueIndexMap>> maps_;
  std::unordered_map<FileNumber, FileNumber> covering_;  // dead input -> map id

  mutable std::atomic<uint64_t> resolves_{0};
  mutable std::atomic<uint64_t> redirected_{0};
  mutable std::atomic<uint64_t> total_hops_{0};
  mutable std::atomic<uint64_t> max_hops_{0};
};

}  // namespace lifekv

#endif  // LIFEKV_VLOG_REGISTRY_H_
