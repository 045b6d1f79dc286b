#include "lifekv/engine/wal.h"

#include "lifekv/core/coding.h"

namespace lifekv {

std::string WalFileName(const std::string& dir, FileNumber n) {
  return dir + "/" + std::to_string(n) + ".wal";
}

Status WalWriter::Create(Env* env, const std::string& dir, FileNumber n,
                         std::unique_ptr<WalWriter>* out) {
  std::unique_ptr<WritableFile> f;
  LIFEKV_RETURN_IF_ERROR(env->NewWritableFile(WalFileName(dir, n), FileKind::kWal, &f));
  out->reset(new WalWriter(n, std::move(f)));
  return Status::OK();
}

Status WalWriter::Add(SequenceNumber seq, EntryKind kind, std::string_view key,
                      std::string_view value, bool sync) {
  std::string payload;
  PutFixed64(&payload, seq);
  payload.push_back(static_cast<char>(kind));
  PutLengthPrefixed(&payload, key);
  PutLengthPrefixed(&payload, value);
  scratch_.clear();
  PutFixed32(&scratch_, Crc32(payload));
  PutFixed32(&scratch_, static_cast<uint32_t>(payload.size()));
  scratch_ += payload;
  LIFEKV_RETURN_IF_ERROR(file_->Append(scratch_));
  if (sync) return file_->Sync();
  return Status::OK();
}

Status ReplayWal(Env* env, const std::string& path, const WalVisitor& visit, uint64_t* records) {
  *records = 0;
  std::string data;
  LIFEKV_RETURN_IF_ERROR(env->ReadFileToString(path, &data));
  std::string_view in(data);
  while (in.size() >= 8) {
    const uint32_t crc = DecodeFixed32(in.data());
    const uint32_t len = DecodeFixed32(in.data() + 4);
    if (len > in.size() - 8) break;
    std::string_view payload = in.substr(8, len);
    if (Crc32(payload) != crc) break;
    in.remove_prefix(8 + len);
    uint64_t seq = 0;
    std::string_view key, value;
    if (!GetFixed64(&payload, &seq) || payload.empty()) break;
    const auto kind = static_cast<EntryKind>(payload[0]);
    payload.remove_prefix(1);
    if (!GetLengthPrefixed(&payload, &key) || !GetLengthPrefixed(&payload, &value)) break;
    visit(seq, kind, key, value);
    ++*records;
  }
  return Status::OK();
}

}  // namespace lifekv
