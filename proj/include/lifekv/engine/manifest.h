#ifndef LIFEKV_ENGINE_MANIFEST_H_
#define LIFEKV_ENGINE_MANIFEST_H_

// Append-only log of file-set edits.
//
//     frame   : [crc fixed32][len fixed32][payload]
//     payload : sequence of [tag u8][fields...]
//
// The crc covers the payload. One frame is one atomic edit. A damaged last
// frame is a torn write and is ignored; damage anywhere else is
// CorruptManifest.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lifekv/core/env.h"
#include "lifekv/core/status.h"
#include "lifekv/lifetime/lifetime.h"
#include "lifekv/lsm/sstable.h"
#include "lifekv/vlog/value_file.h"

namespace lifekv {

enum class ManifestTag : uint8_t {
  kAddTable = 1,
  kDropTable = 2,
  kAddValueFile = 3,
  kValueFileExtent = 4,
  kSealValueFile = 5,
  kDeadValueFile = 6,
  kAddIndexMap = 7,
  kDropIndexMap = 8,
  kThresholds = 9,
  kModelVersion = 10,
  kSeqCheckpoint = 11,
  kLogNumber = 12,
  kNextFileNumbers = 13,
};

class ManifestEdit {
 public:
  void AddTable(int level, const TableMeta& meta);
  void DropTable(FileNumber f);
  void AddValueFile(const ValueFileMeta& meta);
  void ValueFileExtent(FileNumber f, uint64_t records, uint64_t bytes, uint64_t value_bytes);
  void SealValueFile(FileNumber f);
  void DeadValueFile(FileNumber f);
  void AddIndexMap(FileNumber id, const std::vector<FileNumber>& inputs);
  void DropIndexMap(FileNumber id);
  void Thresholds(const LifetimeThresholds& t);
  void ModelVersion(uint64_t v);
  void SeqCheckpoint(SequenceNumber s);
  void LogNumber(FileNumber n);
  void NextFileNumbers(FileNumber next_file, FileNumber next_value_file);

  const std::string& payload() const { return payload_; }
  bool empty() const { return payload_.empty(); }

 private:
  std::string payload_;
};

struct ManifestTable {
  int level = 0;
  TableMeta meta;  // reader not set
};

// Live state reconstructed from the log.
struct ManifestState {
  std::map<FileNumber, ManifestTable> tables;
  std::map<FileNumber, ValueFileMeta> value_files;
  std::map<FileNumber, std::vector<FileNumber>> maps;
  std::optional<LifetimeThresholds> thresholds;
  uint64_t model_version = 0;
  SequenceNumber last_seq = 0;
  FileNumber log_number = 0;
  FileNumber next_file = 1;
  FileNumber next_value_file = 1;

  Status Apply(std::string_view payload);
  // One edit that recreates this state from nothing.
  ManifestEdit Snapshot() const;

  friend bool operator==(const ManifestState& a, const ManifestState& b);
};

std::string ManifestFileName(const std::string& dir, FileNumber n);
std::string CurrentFileName(const std::string& dir);

class ManifestWriter {
 public:
  static Status Create(Env* env, const std::string& path, std::unique_ptr<ManifestWriter>* out);
  // Appends and syncs one frame.
  Status Commit(const ManifestEdit& edit);
  Status Close() { return file_->Close(); }
  uint64_t frames() const { return frames_; }

 private:
  explicit ManifestWriter(std::unique_ptr<WritableFile> f) : file_(std::move(f)) {}
  std::unique_ptr<WritableFile> file_;
  uint64_t frames_ = 0;
};

// Replays a manifest file into `state`.
Status ReadManifest(Env* env, const std::string& path, ManifestState* state);

}  // namespace lifekv

#endif  // LIFEKV_ENGINE_MANIFEST_H_
