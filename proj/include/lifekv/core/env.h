#ifndef LIFEKV_CORE_ENV_H_
#define LIFEKV_CORE_ENV_H_

// File-system layer. Every byte handed to the operating system by a
// WritableFile is counted against the file's kind, which is what the
// write-amplification reports are computed from.

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lifekv/core/status.h"

namespace lifekv {

enum class FileKind : uint8_t {
  kWal = 0,
  kSst,
  kVlog,
  kVmap,
  kManifest,
  kModel,
  kOther,
};

inline constexpr int kNumFileKinds = 7;

const char* FileKindName(FileKind kind);

class IoStats {
 public:
  void AddWritten(FileKind kind, uint64_t n) {
    written_[static_cast<int>(kind)].fetch_add(n, std::memory_order_relaxed);
  }
  uint64_t Written(FileKind kind) const {
    return written_[static_cast<int>(kind)].load(std::memory_order_relaxed);
  }
  uint64_t TotalWritten() const {
    uint64_t sum = 0;
    for (const auto& w : written_) sum += w.load(std::memory_order_relaxed);
    return sum;
  }
  void Reset() {
    for (auto& w : written_) w.store(0, std::memory_order_relaxed);
  }

 private:
  std::array<std::atomic<uint64_t>, kNumFileKinds> written_{};
};

class WritableFile {
 public:
  virtual ~WritableFile() = default;
  virtual Status Append(std::string_view data) = 0;
  // Hands buffered bytes to the operating system.
  virtual Status Flush() = 0;
  virtual Status Sync() = 0;
  virtual Status Close() = 0;
  // Bytes appended so far, buffered or not.
  virtual uint64_t Size() const = 0;
};

class RandomAccessFile {
 public:
  virtual ~RandomAccessFile() = default;
  // Reads exactly `n` bytes at `offset` into `scratch`.
  virtual Status Read(uint64_t offset, size_t n, std::string* scratch) const = 0;
};

// Read-only memory mapping of a whole file.
class MappedFile {
 public:
  virtual ~MappedFile() = default;
  virtual std::string_view data() const = 0;
};

class Env {
 public:
  virtual ~Env() = default;

  // Process-wide POSIX environment. Never deleted.
  static Env* Default();

  virtual Status NewWritableFile(const std::string& path, FileKind kind,
                                 std::unique_ptr<WritableFile>* result) = 0;
  virtual Status NewRandomAccessFile(const std::string& path,
                                     std::unique_ptr<RandomAccessFile>* result) = 0;
  virtual Status NewMappedFile(const std::string& path,
                               std::unique_ptr<MappedFile>* result) = 0;
  virtual Status ReadFileToString(const std::string& path, std::string* out) = 0;
  virtual Status DeleteFile(const std::string& path) = 0;
  virtual Status RenameFile(const std::string& from, const std::string& to) = 0;
  virtual Status TruncateFile(const std::string& path, uint64_t size) = 0;
  virtual Status GetChildren(const std::string& dir, std::vector<std::string>* names) = 0;
  virtual Status GetFileSize(const std::string& path, uint64_t* size) = 0;
  virtual bool FileExists(const std::string& path) = 0;
  // Creates missing parents too.
  virtual Status CreateDirIfMissing(const std::string& dir) = 0;

  // Named point in a multi-step durable operation. Production environments
  // always return OK; fault-injecting environments use it to simulate a crash
  // between two durable steps.
  virtual Status CrashPoint(std::string_view /*site*/) { return Status::OK(); }

  virtual IoStats& io_stats() { return stats_; }

 protected:
  IoStats stats_;
};

// Forwards every call to a target environment. Byte accounting happens in
// the target.
class EnvWrapper : public Env {
 public:
  explicit EnvWrapper(Env* target) : target_(target) {}

  Status NewWritableFile(const std::string& path, FileKind kind,
                         std::unique_ptr<WritableFile>* result) override {
    return target_->NewWritableFile(path, kind, result);
  }
  Status NewRandomAccessFile(const std::string& path,
                             std::unique_ptr<RandomAccessFile>* result) override {
    return target_->NewRandomAccessFile(path, result);
  }
  Status NewMappedFile(const std::string& path,
                       std::unique_ptr<MappedFile>* result) override {
    return target_->NewMappedFile(path, result);
  }
  Status ReadFileToString(const std::string& path, std::string* out) override {
    return target_->ReadFileToString(path, out);
  }
  Status DeleteFile(const std::string& path) override { return target_->DeleteFile(path); }
  Status RenameFile(const std::string& from, const std::string& to) override {
    return target_->RenameFile(from, to);
  }
  Status TruncateFile(const std::string& path, uint64_t size) override {
    return target_->TruncateFile(path, size);
  }
  Status GetChildren(const std::string& dir, std::vector<std::string>* names) override {
    return target_->GetChildren(dir, names);
  }
  Status GetFileSize(const std::string& path, uint64_t* size) override {
    return target_->GetFileSize(path, size);
  }
  bool FileExists(const std::string& path) override { return target_->FileExists(path); }
  Status CreateDirIfMissing(const std::string& dir) override {
    return target_->CreateDirIfMissing(dir);
  }
  Status CrashPoint(std::string_view site) override { return target_->CrashPoint(site); }
  IoStats& io_stats() override { return target_->io_stats(); }

  Env* target() const { return target_; }

 private:
  Env* target_;
};

// Creates a fresh POSIX environment with its own statistics.
std::unique_ptr<Env> NewPosixEnv();

Status WriteStringToFile(Env* env, std::string_view data, const std::string& path,
                         FileKind kind, bool sync);

}  // namespace lifekv

#endif  // LIFEKV_CORE_ENV_H_
