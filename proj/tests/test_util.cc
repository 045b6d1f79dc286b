#include "test_util.h"

#include <stdlib.h>

#include <filesystem>

namespace lifekv::test {

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "lifekv-test-XXXXXX").string();
  char* p = ::mkdtemp(tmpl.data());
  path_ = p != nullptr ? p : tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

namespace {

class FaultWritableFile final : public WritableFile {
 public:
  FaultWritableFile(FaultInjectionEnv* env, std::string path,
                    std::unique_ptr<WritableFile> base)
      : env_(env), path_(std::move(path)), base_(std::move(base)) {}

  Status Append(std::string_view data) override {
    if (env_->crashed()) return Status::IOError("crashed: " + path_);
    return base_->Append(data);
  }
  Status Flush() override {
    if (env_->crashed()) return Status::IOError("crashed: " + path_);
    return base_->Flush();
  }
  Status Sync() override {
    if (env_->crashed()) return Status::IOError("crashed: " + path_);
    LIFEKV_RETURN_IF_ERROR(base_->Sync());
    env_->OnSync(path_, base_->Size());
    return Status::OK();
  }
  Status Close() override { return base_->Close(); }
  uint64_t Size() const override { return base_->Size(); }

 private:
  FaultInjectionEnv* env_;
  std::string path_;
  std::unique_ptr<WritableFile> base_;
};

}  // namespace

void FaultInjectionEnv::CrashAtHit(uint64_t hit) {
  std::lock_guard<std::mutex> l(mu_);
  crash_at_ = hit;
}

void FaultInjectionEnv::Crash() {
  std::lock_guard<std::mutex> l(mu_);
  crashed_ = true;
}

bool FaultInjectionEnv::crashed() const {
  std::lock_guard<std::mutex> l(mu_);
  return crashed_;
}

uint64_t FaultInjectionEnv::hits() const {
  std::lock_guard<std::mutex> l(mu_);
  return hits_;
}

std::vector<std::string> FaultInjectionEnv::sites() const {
  std::lock_guard<std::mutex> l(mu_);
  return sites_;
}

void FaultInjectionEnv::Revive() {
  std::lock_guard<std::mutex> l(mu_);
  crashed_ = false;
  crash_at_ = 0;
  hits_ = 0;
  sites_.clear();
}

Status FaultInjectionEnv::CrashPoint(std::string_view site) {
  std::lock_guard<std::mutex> l(mu_);
  if (crashed_) return Status::IOError("crashed");
  ++hits_;
  sites_.emplace_back(site);
  if (crash_at_ != 0 && hits_ == crash_at_) {
    crashed_ = true;
    return Status::IOError("crash injected at " + std::string(site));
  }
  return Status::OK();
}

void FaultInjectionEnv::OnSync(const std::string& path, uint64_t size) {
  std::lock_guard<std::mutex> l(mu_);
  synced_[path] = size;
}

Status FaultInjectionEnv::NewWritableFile(const std::string& path, FileKind kind,
                                          std::unique_ptr<WritableFile>* result) {
  if (crashed()) return Status::IOError("crashed: " + path);
  std::unique_ptr<WritableFile> base;
  LIFEKV_RETURN_IF_ERROR(target()->NewWritableFile(path, kind, &base));
  {
    std::lock_guard<std::mutex> l(mu_);
    synced_[path] = 0;
  }
  *result = std::make_unique<FaultWritableFile>(this, path, std::move(base));
  return Status::OK();
}

Status FaultInjectionEnv::DeleteFile(const std::string& path) {
  if (crashed()) return Status::IOError("crashed: " + path);
  LIFEKV_RETURN_IF_ERROR(target()->DeleteFile(path));
  std::lock_guard<std::mutex> l(mu_);
  synced_.erase(path);
  return Status::OK();
}

Status FaultInjectionEnv::RenameFile(const std::string& from, const std::string& to) {
  if (crashed()) return Status::IOError("crashed: " + from);
  LIFEKV_RETURN_IF_ERROR(target()->RenameFile(from, to));
  std::lock_guard<std::mutex> l(mu_);
  auto it = synced_.find(from);
  if (it != synced_.end()) {
    synced_[to] = it->second;
    synced_.erase(from);
  }
  return Status::OK();
}

Status FaultInjectionEnv::TruncateFile(const std::string& path, uint64_t size) {
  if (crashed()) return Status::IOError("crashed: " + path);
  LIFEKV_RETURN_IF_ERROR(target()->TruncateFile(path, size));
  std::lock_guard<std::mutex> l(mu_);
  auto it = synced_.find(path);
  if (it != synced_.end()) it->second = std::min(it->second, size);
  return Status::OK();
}

void FaultInjectionEnv::DropUnsyncedData() {
  std::map<std::string, uint64_t> synced;
  {
    std::lock_guard<std::mutex> l(mu_);
    synced = synced_;
  }
  for (const auto& [path, size] : synced) {
    if (!target()->FileExists(path)) continue;
    uint64_t actual = 0;
    if (target()->GetFileSize(path, &actual).ok() && actual > size) {
      target()->TruncateFile(path, size);
    }
  }
}

std::string RandomBytes(std::mt19937_64& rng, size_t n) {
  std::string s(n, '\0');
  for (size_t i = 0; i < n; ++i) s[i] = static_cast<char>(rng() & 0xff);
  return s;
}

}  // namespace lifekv::test
