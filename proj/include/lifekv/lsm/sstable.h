#ifndef LIFEKV_LSM_SSTABLE_H_
#define LIFEKV_LSM_SSTABLE_H_

// Sorted table file:
//
//     records : [key_len varint][key][seq fixed64][kind u8][value_len varint][value part]
//     index   : record_count x fixed32 record offset
//     refs    : [n varint] n x [value-file id delta varint], ascending
//     footer  : [index_offset][refs_offset][record_count][min_ref][max_seq][magic]
//               each fixed64
//
// min_ref is the smallest referenced value-file id, or 0 when the table
// references none.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lifekv/core/env.h"
#include "lifekv/core/status.h"
#include "lifekv/core/types.h"

namespace lifekv {

inline constexpr uint64_t kTableMagic = 0x6c6966656b767374ull;  // "lifekvst"
inline constexpr size_t kTableFooterSize = 48;

std::string TableFileName(const std::string& dir, FileNumber n);

struct TableEntry {
  std::string_view key;
  SequenceNumber seq = 0;
  EntryKind kind = EntryKind::kPut;
  std::string_view value;  // encoded value part
};

class TableReader {
 public:
  static Status Open(Env* env, const std::string& path, std::shared_ptr<TableReader>* out);

  size_t size() const { return offsets_count_; }
  TableEntry At(size_t i) const;
  // Newest entry for `key` with seq <= snapshot.
  std::optional<TableEntry> Get(std::string_view key, SequenceNumber snapshot) const;
  // Index of the first entry with user key >= key.
  size_t LowerBound(std::string_view key) const;

  const std::vector<FileNumber>& refs() const { return refs_; }
  FileNumber min_ref() const { return min_ref_; }
  SequenceNumber max_seq() const { return max_seq_; }
  uint64_t file_size() const { return data_.size(); }

 private:
  std::unique_ptr<MappedFile> file_;
  std::string_view data_;
  const char* index_ = nullptr;
  size_t offsets_count_ = 0;
  std::vector<FileNumber> refs_;
  FileNumber min_ref_ = 0;
  SequenceNumber max_seq_ = 0;
};

struct TableMeta {
  FileNumber file_no = 0;
  uint64_t file_size = 0;
  uint64_t entries = 0;
  std::string smallest;
  std::string largest;
  std::vector<FileNumber> refs;
  FileNumber min_ref = 0;
  SequenceNumber max_seq = 0;
  std::shared_ptr<TableReader> reader;

  bool Overlaps(std::string_view lo, std::string_view hi) const {
    return !(largest < lo || hi < smallest);
  }
};

class TableBuilder {
 public:
  static Status Create(Env* env, const std::string& dir, FileNumber file_no,
                       std::unique_ptr<TableBuilder>* out);

  // Entries must arrive in internal-key order.
  Status Add(std::string_view key, SequenceNumber seq, EntryKind kind, std::string_view value);
  uint64_t size() const { return file_->Size(); }
  uint64_t entries() const { return offsets_.size(); }
  // Writes index and footer, syncs and closes; fills `meta` without a reader.
  Status Finish(TableMeta* meta);
  void Abandon();

 private:
  TableBuilder(FileNumber file_no, std::string path, std::unique_ptr<WritableFile> file)
      : file_no_(file_no), path_(std::move(path)), file_(std::move(file)) {}

  FileNumber file_no_;
  std::string path_;
  std::unique_ptr<WritableFile> file_;
  std::vector<uint32_t> offsets_;
  std::vector<FileNumber> refs_;
  std::string smallest_;
  std::string largest_;
  SequenceNumber max_seq_ = 0;
  std::string scratch_;
};

}  // namespace lifekv

#endif  // LIFEKV_LSM_SSTABLE_H_
