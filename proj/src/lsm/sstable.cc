#include "lifekv/lsm/sstable.h"

#include <algorithm>

#include "lifekv/core/coding.h"
#include "lifekv/lsm/lsm_value.h"

namespace lifekv {

std::string TableFileName(const std::string& dir, FileNumber n) {
  return dir + "/" + std::to_string(n) + ".sst";
}

namespace {

// Parses the record at `p`; the table was validated on open.
TableEntry ParseRecord(const char* p, const char* limit) {
  std::string_view in(p, static_cast<size_t>(limit - p));
  TableEntry e;
  uint64_t klen = 0, vlen = 0;
  GetVarint64(&in, &klen);
  e.key = in.substr(0, klen);
  in.remove_prefix(klen);
  e.seq = DecodeFixed64(in.data());
  e.kind = static_cast<EntryKind>(in[8]);
  in.remove_prefix(9);
  GetVarint64(&in, &vlen);
  e.value = in.substr(0, vlen);
  return e;
}

}  // namespace

Status TableReader::Open(Env* env, const std::string& path, std::shared_ptr<TableReader>* out) {
  auto r = std::shared_ptr<TableReader>(new TableReader);
  LIFEKV_RETURN_IF_ERROR(env->NewMappedFile(path, &r->file_));
  r->data_ = r->file_->data();
  const std::string_view d = r->data_;
  if (d.size() < kTableFooterSize) return Status::Corruption("table too small: " + path);
  const char* f = d.data() + d.size() - kTableFooterSize;
  const uint64_t index_offset = DecodeFixed64(f);
  const uint64_t refs_offset = DecodeFixed64(f + 8);
  const uint64_t count = DecodeFixed64(f + 16);
  r->min_ref_ = DecodeFixed64(f + 24);
  r->max_seq_ = DecodeFixed64(f + 32);
  if (DecodeFixed64(f + 40) != kTableMagic) return Status::Corruption("bad table magic: " + path);
  if (index_offset + 4 * count != refs_offset || refs_offset > d.size() - kTableFooterSize) {
    return Status::Corruption("bad table layout: " + path);
  }
  r->index_ = d.data() + index_offset;
  r->offsets_count_ = count;
  for (uint64_t i = 0; i < count; ++i) {
    if (DecodeFixed32(r->index_ + 4 * i) >= index_offset) {
      return Status::Corruption("bad record offset: " + path);
    }
  }
  std::string_view refs = d.substr(refs_offset, d.size() - kTableFooterSize - refs_offset);
  uint64_t n = 0, prev = 0;
  if (!GetVarint64(&refs, &n)) return Status::Corruption("bad table refs: " + path);
  for (uint64_t i = 0; i < n; ++i) {
    uint64_t delta = 0;
    if (!GetVarint64(&refs, &delta)) return Status::Corruption("bad table refs: " + path);
    prev += delta;
    r->refs_.push_back(prev);
  }
  *out = std::move(r);
  return Status::OK();
}

TableEntry TableReader::At(size_t i) const {
  const char* limit = index_;
  return ParseRecord(data_.data() + DecodeFixed32(index_ + 4 * i), limit);
}

size_t TableReader::LowerBound(std::string_view key) const {
  size_t lo = 0, hi = offsets_count_;
  while (lo < hi) {
    const size_t mid = lo + (hi - lo) / 2;
    if (At(mid).key < key) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::optional<TableEntry> TableReader::Get(std::string_view key, SequenceNumber snapshot) const {
  size_t lo = 0, hi = offsets_count_;
  while (lo < hi) {
    const size_t mid = lo + (hi - lo) / 2;
    const TableEntry e = At(mid);
    if (CompareInternalKey(e.key, e.seq, key, snapshot) < 0) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == offsets_count_) return std::nullopt;
  TableEntry e = At(lo);
  if (e.key != key) return std::nullopt;
  return e;
}

Status TableBuilder::Create(Env* env, const std::string& dir, FileNumber file_no,
                            std::unique_ptr<TableBuilder>* out) {
  std::unique_ptr<WritableFile> f;
  const std::string path = TableFileName(dir, file_no);
  LIFEKV_RETURN_IF_ERROR(env->NewWritableFile(path, FileKind::kSst, &f));
  out->reset(new TableBuilder(file_no, path, std::move(f)));
  return Status::OK();
}

Status TableBuilder::Add(std::string_view key, SequenceNumber seq, EntryKind kind,
                         std::string_view value) {
  if (offsets_.empty()) smallest_.assign(key);
  largest_.assign(key);
  if (seq > max_seq_) max_seq_ = seq;
  offsets_.push_back(static_cast<uint32_t>(file_->Size()));
  scratch_.clear();
  PutVarint64(&scratch_, key.size());
  scratch_.append(key.data(), key.size());
  PutFixed64(&scratch_, seq);
  scratch_.push_back(static_cast<char>(kind));
  PutVarint64(&scratch_, value.size());
  scratch_.append(value.data(), value.size());
  if (kind == EntryKind::kPut && IsSeparated(value)) {
    SeparatedView view;
    LIFEKV_RETURN_IF_ERROR(DecodeSeparatedView(value, &view));
    refs_.push_back(view.locator.file_no);
  }
  return file_->Append(scratch_);
}

Status TableBuilder::Finish(TableMeta* meta) {
  std::sort(refs_.begin(), refs_.end());
  refs_.erase(std::unique(refs_.begin(), refs_.end()), refs_.end());
  std::string tail;
  const uint64_t index_offset = file_->Size();
  for (uint32_t o : offsets_) PutFixed32(&tail, o);
  const uint64_t refs_offset = index_offset + tail.size();
  PutVarint64(&tail, refs_.size());
  FileNumber prev = 0;
  for (FileNumber f : refs_) {
    PutVarint64(&tail, f - prev);
    prev = f;
  }
  PutFixed64(&tail, index_offset);
  PutFixed64(&tail, refs_offset);
  PutFixed64(&tail, offsets_.size());
  PutFixed64(&tail, refs_.empty() ? 0 : refs_.front());
  PutFixed64(&tail, max_seq_);
  PutFixed64(&tail, kTableMagic);
  LIFEKV_RETURN_IF_ERROR(file_->Append(tail));
  LIFEKV_RETURN_IF_ERROR(file_->Sync());
  LIFEKV_RETURN_IF_ERROR(file_->Close());
  meta->file_no = file_no_;
  meta->file_size = file_->Size();
  meta->entries = offsets_.size();
  meta->smallest = smallest_;
  meta->largest = largest_;
  meta->refs = refs_;
  meta->min_ref = refs_.empty() ? 0 : refs_.front();
  meta->max_seq = max_seq_;
  return Status::OK();
}

void TableBuilder::Abandon() { file_->Close(); }

}  // namespace lifekv
