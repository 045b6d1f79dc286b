#ifndef LIFEKV_LSM_MEMTABLE_H_
#define LIFEKV_LSM_MEMTABLE_H_

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "lifekv/core/types.h"

namespace lifekv {

struct MemEntry {
  SequenceNumber seq = 0;
  EntryKind kind = EntryKind::kPut;
  std::string value;  // user value, empty for tombstones
};

// Ordered in-memory write buffer. One writer and any number of readers may
// use it concurrently.
class Memtable {
 public:
  void Add(std::string_view key, SequenceNumber seq, EntryKind kind, std::string_view value);
  // Newest entry for `key` with seq <= snapshot.
  std::optional<MemEntry> Get(std::string_view key,
                              SequenceNumber snapshot = kMaxSequenceNumber) const;

  size_t ApproximateBytes() const;
  size_t entries() const;
  bool empty() const { return entries() == 0; }
  SequenceNumber max_seq() const;

  struct Item {
    std::string_view key;
    const MemEntry* entry;
  };
  // Newest version per key in key order. Only valid once writes stopped.
  std::vector<Item> NewestPerKey() const;
  // Entries with start <= key < end (all versions), for scans.
  void CollectRange(std::string_view start, std::string_view end,
                    std::map<std::string, MemEntry>* newest) const;

 private:
  struct Key {
    std::string user_key;
    SequenceNumber seq;
  };
  struct KeyLess {
    using is_transparent = void;
    bool operator()(const Key& a, const Key& b) const {
      return CompareInternalKey(a.user_key, a.seq, b.user_key, b.seq) < 0;
    }
  };

  mutable std::shared_mutex mu_;
  std::map<Key, MemEntry, KeyLess> table_;
  size_t bytes_ = 0;
  SequenceNumber max_seq_ = 0;
};

}  // namespace lifekv

#endif  // LIFEKV_LSM_MEMTABLE_H_
