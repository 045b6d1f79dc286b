#include "lifekv/vlog/index_map.h"

#include <algorithm>

#include "lifekv/core/coding.h"

namespace lifekv {

namespace {

bool EntryLess(const IndexMapEntry& e, std::pair<FileNumber, uint64_t> k) {
  return std::make_pair(e.old_file, e.old_offset) < k;
}

}  // namespace

std::string IndexMapFileName(const std::string& dir, FileNumber id) {
  return dir + "/" + std::to_string(id) + ".vmap";
}

ValueIndexMap::ValueIndexMap(FileNumber id, std::vector<FileNumber> inputs,
                             std::vector<IndexMapEntry> entries)
    : id_(id), inputs_(std::move(inputs)), entries_(std::move(entries)) {
  std::sort(inputs_.begin(), inputs_.end());
}

bool ValueIndexMap::Covers(FileNumber f) const {
  return std::binary_search(inputs_.begin(), inputs_.end(), f);
}

std::optional<ValueLocator> ValueIndexMap::Lookup(FileNumber file, uint64_t offset) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(file, offset),
                             EntryLess);
  if (it == entries_.end() || it->old_file != file || it->old_offset != offset) {
    return std::nullopt;
  }
  return it->target;
}

std::optional<ValueLocator> ValueIndexMap::LookupLinear(FileNumber file,
                                                        uint64_t offset) const {
  for (const IndexMapEntry& e : entries_) {
    if (e.old_file == file && e.old_offset == offset) return e.target;
  }
  return std::nullopt;
}

std::string ValueIndexMap::Encode() const {
  std::string out;
  for (const IndexMapEntry& e : entries_) {
    PutVarint64(&out, e.old_file);
    PutVarint64(&out, e.old_offset);
    PutVarint64(&out, e.target.file_no);
    PutVarint64(&out, e.target.offset);
    PutVarint64(&out, e.target.size);
  }
  const uint32_t crc = Crc32(out);
  PutFixed64(&out, entries_.size());
  PutFixed32(&out, crc);
  return out;
}

Status ValueIndexMap::Decode(std::string_view data, FileNumber id,
                             std::vector<FileNumber> inputs, ValueIndexMap* out) {
  if (data.size() < 12) return Status::Truncated("index map footer");
  const std::string_view body = data.substr(0, data.size() - 12);
  const uint64_t count = DecodeFixed64(data.data() + body.size());
  const uint32_t crc = DecodeFixed32(data.data() + body.size() + 8);
  if (Crc32(body) != crc) return Status::ChecksumMismatch("index map crc");
  std::vector<IndexMapEntry> entries;
  entries.reserve(count);
  std::string_view in = body;
  for (uint64_t i = 0; i < count; ++i) {
    IndexMapEntry e;
    uint64_t size = 0;
    if (!GetVarint64(&in, &e.old_file) || !GetVarint64(&in, &e.old_offset) ||
        !GetVarint64(&in, &e.target.file_no) || !GetVarint64(&in, &e.target.offset) ||
        !GetVarint64(&in, &size)) {
      return Status::Corruption("index map entry");
    }
    e.target.size = static_cast<uint32_t>(size);
    if (!entries.empty() && !EntryLess(entries.back(), {e.old_file, e.old_offset})) {
      return Status::Corruption("index map entries not sorted");
    }
    entries.push_back(e);
  }
  if (!in.empty()) return Status::Corruption("index map trailing bytes");
  *out = ValueIndexMap(id, std::move(inputs), std::move(entries));
  return Status::OK();
}

Status ValueIndexMap::Write(Env* env, const std::string& dir) const {
  return WriteStringToFile(env, Encode(), IndexMapFileName(dir, id_), FileKind::kVmap,
                           /*sync=*/true);
}

Status ValueIndexMap::Read(Env* env, const std::string& dir, FileNumber id,
                           std::vector<FileNumber> inputs, ValueIndexMap* out) {
  std::string data;
  LIFEKV_RETURN_IF_ERROR(env->ReadFileToString(IndexMapFileName(dir, id), &data));
  return Decode(data, id, std::move(inputs), out);
}

}  // namespace lifekv
