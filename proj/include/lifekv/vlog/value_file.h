#ifndef LIFEKV_VLOG_VALUE_FILE_H_
#define LIFEKV_VLOG_VALUE_FILE_H_

// Value files hold separated values as a sequence of records:
//
//     [crc fixed32][key_len varint][key][seq fixed64][value_len varint][value]
//
// The crc covers every byte after the crc field.

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "lifekv/core/env.h"
#include "lifekv/core/status.h"
#include "lifekv/core/types.h"

namespace lifekv {

enum class ValueFileState : uint8_t { kOpen = 0, kSealed = 1, kDead = 2 };

const char* ValueFileStateName(ValueFileState s);

struct ValueFileMeta {
  FileNumber file_no = 0;
  ValueClass cls = ValueClass::kDefault;
  SequenceNumber created_seq = 0;
  uint64_t ttl = 1;
  ValueFileState state = ValueFileState::kOpen;
  uint64_t records = 0;
  uint64_t bytes = 0;
  // Sum of the value payload lengths, for space accounting.
  uint64_t value_bytes = 0;

  bool Expired(SequenceNumber now) const {
    return state == ValueFileState::kSealed && now >= created_seq && now - created_seq >= ttl;
  }
};

struct ValueRecord {
  std::string key;
  SequenceNumber seq = 0;
  std::string value;
};

// View of a record inside a larger buffer.
struct ValueRecordView {
  std::string_view key;
  SequenceNumber seq = 0;
  std::string_view value;
  size_t length = 0;  // full encoded length
};

std::string ValueFileName(const std::string& dir, FileNumber n);

void EncodeValueRecord(std::string_view key, SequenceNumber seq, std::string_view value,
                       std::string* out);
size_t ValueRecordLength(size_t key_len, size_t value_len);
// Payload length of a record with the given key length and full length.
size_t ValueLengthFromRecord(size_t key_len, size_t record_len);

// Decodes the record at the front of `data`; checks the crc.
Status DecodeValueRecord(std::string_view data, ValueRecordView* out);

class ValueFileWriter {
 public:
  ValueFileWriter(FileNumber file_no, std::unique_ptr<WritableFile> file)
      : file_no_(file_no), file_(std::move(file)) {}

  static Status Create(Env* env, const std::string& dir, FileNumber file_no,
                       std::unique_ptr<ValueFileWriter>* out);

  Status Add(std::string_view key, SequenceNumber seq, std::string_view value,
             ValueLocator* loc);
  Status Sync() { return file_->Sync(); }
  Status Close() { return file_->Close(); }

  FileNumber file_no() const { return file_no_; }
  uint64_t size() const { return file_->Size(); }
  uint64_t records() const { return records_; }
  uint64_t value_bytes() const { return value_bytes_; }

 private:
  FileNumber file_no_;
  std::unique_ptr<WritableFile> file_;
  std::string scratch_;
  uint64_t records_ = 0;
  uint64_t value_bytes_ = 0;
};

// LRU cache of open value files for point reads.
class ValueFileCache {
 public:
  ValueFileCache(Env* env, std::string dir, size_t capacity)
      : env_(env), dir_(std::move(dir)), capacity_(capacity == 0 ? 1 : capacity) {}

  // Reads and verifies the record at `loc`. FileMissing when the file does
  // not exist.
  Status Read(const ValueLocator& loc, ValueRecord* out);
  void Evict(FileNumber file_no);

  uint64_t reads() const { return reads_.load(std::memory_order_relaxed); }

 private:
  Status Acquire(FileNumber file_no, std::shared_ptr<RandomAccessFile>* file);

  Env* env_;
  std::string dir_;
  size_t capacity_;
  std::mutex mu_;
  std::list<FileNumber> lru_;
  std::unordered_map<FileNumber,
                     std::pair<std::shared_ptr<RandomAccessFile>, std::list<FileNumber>::iterator>>
      open_;
  std::atomic<uint64_t> reads_{0};
};

}  // namespace lifekv

#endif  // LIFEKV_VLOG_VALUE_FILE_H_
