#include "lifekv/vlog/value_file.h"

#include "lifekv/core/coding.h"

namespace lifekv {

const char* ValueFileStateName(ValueFileState s) {
  switch (s) {
    case ValueFileState::kOpen: return "open";
    case ValueFileState::kSealed: return "sealed";
    case ValueFileState::kDead: return "dead";
  }
  return "unknown";
}

std::string ValueFileName(const std::string& dir, FileNumber n) {
  return dir + "/" + std::to_string(n) + ".vlog";
}

void EncodeValueRecord(std::string_view key, SequenceNumber seq, std::string_view value,
                       std::string* out) {
  const size_t start = out->size();
  out->append(4, '\0');
  PutVarint64(out, key.size());
  out->append(key.data(), key.size());
  PutFixed64(out, seq);
  PutVarint64(out, value.size());
  out->append(value.data(), value.size());
  const uint32_t crc = Crc32(std::string_view(*out).substr(start + 4));
  EncodeFixed32(out->data() + start, crc);
}

size_t ValueRecordLength(size_t key_len, size_t value_len) {
  return 4 + VarintLength(key_len) + key_len + 8 + VarintLength(value_len) + value_len;
}

size_t ValueLengthFromRecord(size_t key_len, size_t record_len) {
  const size_t fixed = 4 + VarintLength(key_len) + key_len + 8;
  if (record_len <= fixed) return 0;
  for (int n = 1; n <= 10; ++n) {
    if (record_len < fixed + n) break;
    const size_t v = record_len - fixed - n;
    if (static_cast<int>(VarintLength(v)) == n) return v;
  }
  return 0;
}

Status DecodeValueRecord(std::string_view data, ValueRecordView* out) {
  if (data.size() < 4) return Status::Truncated("value record header");
  const uint32_t expect = DecodeFixed32(data.data());
  std::string_view in = data.substr(4);
  uint64_t key_len = 0, value_len = 0;
  if (!GetVarint64(&in, &key_len) || in.size() < key_len + 8) {
    return Status::Truncated("value record key");
  }
  out->key = in.substr(0, key_len);
  in.remove_prefix(key_len);
  out->seq = DecodeFixed64(in.data());
  in.remove_prefix(8);
  if (!GetVarint64(&in, &value_len) || in.size() < value_len) {
    return Status::Truncated("value record value");
  }
  out->value = in.substr(0, value_len);
  in.remove_prefix(value_len);
  out->length = data.size() - in.size();
  if (Crc32(data.substr(4, out->length - 4)) != expect) {
    return Status::ChecksumMismatch("value record crc");
  }
  return Status::OK();
}

Status ValueFileWriter::Create(Env* env, const std::string& dir, FileNumber file_no,
                               std::unique_ptr<ValueFileWriter>* out) {
  std::unique_ptr<WritableFile> f;
  LIFEKV_RETURN_IF_ERROR(env->NewWritableFile(ValueFileName(dir, file_no), FileKind::kVlog, &f));
  *out = std::make_unique<ValueFileWriter>(file_no, std::move(f));
  return Status::OK();
}

Status ValueFileWriter::Add(std::string_view key, SequenceNumber seq, std::string_view value,
                            ValueLocator* loc) {
  scratch_.clear();
  EncodeValueRecord(key, seq, value, &scratch_);
  const uint64_t offset = file_->Size();
  LIFEKV_RETURN_IF_ERROR(file_->Append(scratch_));
  loc->file_no = file_no_;
  loc->offset = offset;
  loc->size = static_cast<uint32_t>(scratch_.size());
  ++records_;
  value_bytes_ += value.size();
  return Status::OK();
}

Status ValueFileCache::Acquire(FileNumber file_no, std::shared_ptr<RandomAccessFile>* file) {
  std::lock_guard<std::mutex> l(mu_);
  auto it = open_.find(file_no);
  if (it != open_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second.second);
    *file = it->second.first;
    return Status::OK();
  }
  const std::string path = ValueFileName(dir_, file_no);
  if (!env_->FileExists(path)) return Status::FileMissing(path);
  std::unique_ptr<RandomAccessFile> raw;
  LIFEKV_RETURN_IF_ERROR(env_->NewRandomAccessFile(path, &raw));
  std::shared_ptr<RandomAccessFile> shared(std::move(raw));
  lru_.push_front(file_no);
  open_.emplace(file_no, std::make_pair(shared, lru_.begin()));
  while (open_.size() > capacity_) {
    open_.erase(lru_.back());
    lru_.pop_back();
  }
  *file = std::move(shared);
  return Status::OK();
}

Status ValueFileCache::Read(const ValueLocator& loc, ValueRecord* out) {
  std::shared_ptr<RandomAccessFile> file;
  LIFEKV_RETURN_IF_ERROR(Acquire(loc.file_no, &file));
  std::string buf;
  LIFEKV_RETURN_IF_ERROR(file->Read(loc.offset, loc.size, &buf));
  reads_.fetch_add(1, std::memory_order_relaxed);
  ValueRecordView view;
  LIFEKV_RETURN_IF_ERROR(DecodeValueRecord(buf, &view));
  if (view.length != loc.size) return Status::Corruption("record length mismatch");
  out->key.assign(view.key);
  out->seq = view.seq;
  out->value.assign(view.value);
  return Status::OK();
}

void ValueFileCache::Evict(FileNumber file_no) {
  std::lock_guard<std::mutex> l(mu_);
  auto it = open_.find(file_no);
  if (it == open_.end()) return;
  lru_.erase(it->second.second);
  open_.erase(it);
}

}  // namespace lifekv
