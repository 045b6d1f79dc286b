#ifndef LIFEKV_VLOG_INDEX_MAP_H_
#define LIFEKV_VLOG_INDEX_MAP_H_

// Value index maps redirect locators of garbage-collected records to their
// relocated copies, so GC never writes back into the LSM-tree.
//
// File layout, entries sorted by (old_file, old_offset):
//
//     [old_file varint][old_offset varint][new_file varint][new_offset varint][size varint]
//     ...
//     [count fixed64][crc fixed32]
//
// The crc covers the entry bytes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lifekv/core/env.h"
#include "lifekv/core/status.h"
#include "lifekv/core/types.h"

namespace lifekv {

struct IndexMapEntry {
  FileNumber old_file = 0;
  uint64_t old_offset = 0;
  ValueLocator target;
};

std::string IndexMapFileName(const std::string& dir, FileNumber id);

class ValueIndexMap {
 public:
  ValueIndexMap() = default;
  // `entries` must be sorted by (old_file, old_offset) without duplicates.
  ValueIndexMap(FileNumber id, std::vector<FileNumber> inputs,
                std::vector<IndexMapEntry> entries);

  FileNumber id() const { return id_; }
  const std::vector<FileNumber>& inputs() const { return inputs_; }
  const std::vector<IndexMapEntry>& entries() const { return entries_; }
  bool Covers(FileNumber f) const;

  std::optional<ValueLocator> Lookup(FileNumber file, uint64_t offset) const;
  // Linear scan, for cross-checking Lookup.
  std::optional<ValueLocator> LookupLinear(FileNumber file, uint64_t offset) const;

  std::string Encode() const;
  static Status Decode(std::string_view data, FileNumber id, std::vector<FileNumber> inputs,
                       ValueIndexMap* out);

  Status Write(Env* env, const std::string& dir) const;
  static Status Read(Env* env, const std::string& dir, FileNumber id,
                     std::vector<FileNumber> inputs, ValueIndexMap* out);

 private:
  FileNumber id_ = 0;
  std::vector<FileNumber> inputs_;  // sorted
  std::vector<IndexMapEntry> entries_;
};

}  // namespace lifekv

#endif  // LIFEKV_VLOG_INDEX_MAP_H_
