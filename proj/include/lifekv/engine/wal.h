#ifndef LIFEKV_ENGINE_WAL_H_
#define LIFEKV_ENGINE_WAL_H_

// Write-ahead log of user writes.
//
//     frame   : [crc fixed32][len fixed32][payload]
//     payload : [seq fixed64][kind u8][key length-prefixed][value length-prefixed]
//
// Replay stops at the first incomplete or damaged frame.

#include <functional>
#include <memory>
#include <string>

#include "lifekv/core/env.h"
#include "lifekv/core/status.h"
#include "lifekv/core/types.h"

namespace lifekv {

std::string WalFileName(const std::string& dir, FileNumber n);

class WalWriter {
 public:
  static Status Create(Env* env, const std::string& dir, FileNumber n,
                       std::unique_ptr<WalWriter>* out);
  Status Add(SequenceNumber seq, EntryKind kind, std::string_view key, std::string_view value,
             bool sync);
  Status Sync() { return file_->Sync(); }
  Status Close() { return file_->Close(); }
  FileNumber number() const { return number_; }

 private:
  WalWriter(FileNumber n, std::unique_ptr<WritableFile> f) : number_(n), file_(std::move(f)) {}
  FileNumber number_;
  std::unique_ptr<WritableFile> file_;
  std::string scratch_;
};

using WalVisitor =
    std::function<void(SequenceNumber, EntryKind, std::string_view, std::string_view)>;

// Calls `visit` for every intact record; returns the number replayed.
Status ReplayWal(Env* env, const std::string& path, const WalVisitor& visit, uint64_t* records);

}  // namespace lifekv

#endif  // LIFEKV_ENGINE_WAL_H_
