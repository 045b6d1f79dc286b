#include "lifekv/engine/manifest.h"

#include "lifekv/core/coding.h"

namespace lifekv {

namespace {

void PutTag(std::string* s, ManifestTag t) { s->push_back(static_cast<char>(t)); }

}  // namespace

void ManifestEdit::AddTable(int level, const TableMeta& m) {
  PutTag(&payload_, ManifestTag::kAddTable);
  PutVarint64(&payload_, static_cast<uint64_t>(level));
  PutVarint64(&payload_, m.file_no);
  PutVarint64(&payload_, m.file_size);
  PutVarint64(&payload_, m.entries);
  PutLengthPrefixed(&payload_, m.smallest);
  PutLengthPrefixed(&payload_, m.largest);
  PutVarint64(&payload_, m.min_ref);
  PutVarint64(&payload_, m.max_seq);
}

void ManifestEdit::DropTable(FileNumber f) {
  PutTag(&payload_, ManifestTag::kDropTable);
  PutVarint64(&payload_, f);
}

void ManifestEdit::AddValueFile(const ValueFileMeta& m) {
  PutTag(&payload_, ManifestTag::kAddValueFile);
  PutVarint64(&payload_, m.file_no);
  payload_.push_back(static_cast<char>(m.cls));
  PutVarint64(&payload_, m.created_seq);
  PutVarint64(&payload_, m.ttl);
  payload_.push_back(static_cast<char>(m.state));
  PutVarint64(&payload_, m.records);
  PutVarint64(&payload_, m.bytes);
  PutVarint64(&payload_, m.value_bytes);
}

void ManifestEdit::ValueFileExtent(FileNumber f, uint64_t records, uint64_t bytes,
                                   uint64_t value_bytes) {
  PutTag(&payload_, ManifestTag::kValueFileExtent);
  PutVarint64(&payload_, f);
  PutVarint64(&payload_, records);
  PutVarint64(&payload_, bytes);
  PutVarint64(&payload_, value_bytes);
}

void ManifestEdit::SealValueFile(FileNumber f) {
  PutTag(&payload_, ManifestTag::kSealValueFile);
  PutVarint64(&payload_, f);
}

void ManifestEdit::DeadValueFile(FileNumber f) {
  PutTag(&payload_, ManifestTag::kDeadValueFile);
  PutVarint64(&payload_, f);
}

void ManifestEdit::AddIndexMap(FileNumber id, const std::vector<FileNumber>& inputs) {
  PutTag(&payload_, ManifestTag::kAddIndexMap);
  PutVarint64(&payload_, id);
  PutVarint64(&payload_, inputs.size());
  for (FileNumber f : inputs) PutVarint64(&payload_, f);
}

void ManifestEdit::DropIndexMap(FileNumber id) {
  PutTag(&payload_, ManifestTag::kDropIndexMap);
  PutVarint64(&payload_, id);
}

void ManifestEdit::Thresholds(const LifetimeThresholds& t) {
  PutTag(&payload_, ManifestTag::kThresholds);
  PutVarint64(&payload_, t.l_d);
  PutVarint64(&payload_, t.l_s);
  PutVarint64(&payload_, t.l_l);
  PutVarint64(&payload_, static_cast<uint64_t>(t.s_idx));
  PutVarint64(&payload_, static_cast<uint64_t>(t.l_idx));
}

void ManifestEdit::ModelVersion(uint64_t v) {
  PutTag(&payload_, ManifestTag::kModelVersion);
  PutVarint64(&payload_, v);
}

void ManifestEdit::SeqCheckpoint(SequenceNumber s) {
  PutTag(&payload_, ManifestTag::kSeqCheckpoint);
  PutVarint64(&payload_, s);
}

void ManifestEdit::LogNumber(FileNumber n) {
  PutTag(&payload_, ManifestTag::kLogNumber);
  PutVarint64(&payload_, n);
}

void ManifestEdit::NextFileNumbers(FileNumber next_file, FileNumber next_value_file) {
  PutTag(&payload_, ManifestTag::kNextFileNumbers);
  PutVarint64(&payload_, next_file);
  PutVarint64(&payload_, next_value_file);
}

namespace {

bool GetVarints(std::string_view* in, std::initializer_list<uint64_t*> outs) {
  for (uint64_t* o : outs) {
    if (!GetVarint64(in, o)) return false;
  }
  return true;
}

bool GetByte(std::string_view* in, uint8_t* b) {
  if (in->empty()) return false;
  *b = static_cast<uint8_t>((*in)[0]);
  in->remove_prefix(1);
  return true;
}

}  // namespace

Status ManifestState::Apply(std::string_view in) {
  auto bad = [](const char* what) { return Status::CorruptManifest(what); };
  while (!in.empty()) {
    uint8_t tag = 0;
    GetByte(&in, &tag);
    switch (static_cast<ManifestTag>(tag)) {
      case ManifestTag::kAddTable: {
        ManifestTable t;
        uint64_t level = 0;
        std::string_view lo, hi;
        if (!GetVarints(&in, {&level, &t.meta.file_no, &t.meta.file_size, &t.meta.entries}) ||
            !GetLengthPrefixed(&in, &lo) || !GetLengthPrefixed(&in, &hi) ||
            !GetVarints(&in, {&t.meta.min_ref, &t.meta.max_seq}) || level >= 64) {
          return bad("AddTable");
        }
        t.level = static_cast<int>(level);
        t.meta.smallest.assign(lo);
        t.meta.largest.assign(hi);
        tables[t.meta.file_no] = std::move(t);
        break;
      }
      case ManifestTag::kDropTable: {
        uint64_t f = 0;
        if (!GetVarint64(&in, &f)) return bad("DropTable");
        tables.erase(f);
        break;
      }
      case ManifestTag::kAddValueFile: {
        ValueFileMeta m;
        uint8_t cls = 0, state = 0;
        if (!GetVarint64(&in, &m.file_no) || !GetByte(&in, &cls) ||
            !GetVarints(&in, {&m.created_seq, &m.ttl}) || !GetByte(&in, &state) ||
            !GetVarints(&in, {&m.records, &m.bytes, &m.value_bytes}) || cls > 2 || state > 2) {
          return bad("AddValueFile");
        }
        m.cls = static_cast<ValueClass>(cls);
        m.state = static_cast<ValueFileState>(state);
        value_files[m.file_no] = m;
        break;
      }
      case ManifestTag::kValueFileExtent: {
        uint64_t f = 0, records = 0, bytes = 0, vb = 0;
        if (!GetVarints(&in, {&f, &records, &bytes, &vb})) return bad("ValueFileExtent");
        auto it = value_files.find(f);
        if (it == value_files.end()) return bad("ValueFileExtent for unknown file");
        it->second.records = records;
        it->second.bytes = bytes;
        it->second.value_bytes = vb;
        break;
      }
      case ManifestTag::kSealValueFile:
      case ManifestTag::kDeadValueFile: {
        uint64_t f = 0;
        if (!GetVarint64(&in, &f)) return bad("value file state");
        auto it = value_files.find(f);
        if (it == value_files.end()) return bad("state change for unknown value file");
        it->second.state = static_cast<ManifestTag>(tag) == ManifestTag::kSealValueFile
                               ? ValueFileState::kSealed
                               : ValueFileState::kDead;
        break;
      }
      case ManifestTag::kAddIndexMap: {
        uint64_t id = 0, n = 0;
        if (!GetVarints(&in, {&id, &n}) || n > in.size()) return bad("AddIndexMap");
        std::vector<FileNumber> inputs(n);
        for (auto& f : inputs) {
          if (!GetVarint64(&in, &f)) return bad("AddIndexMap input");
        }
        maps[id] = std::move(inputs);
        break;
      }
      case ManifestTag::kDropIndexMap: {
        uint64_t id = 0;
        if (!GetVarint64(&in, &id)) return bad("DropIndexMap");
        auto it = maps.find(id);
        if (it != maps.end()) {
          for (FileNumber f : it->second) {
            auto v = value_files.find(f);
            if (v != value_files.end() && v->second.state == ValueFileState::kDead) {
              value_files.erase(v);
            }
          }
          maps.erase(it);
        }
        break;
      }
      case ManifestTag::kThresholds: {
        LifetimeThresholds t;
        uint64_t s = 0, l = 0;
        if (!GetVarints(&in, {&t.l_d, &t.l_s, &t.l_l, &s, &l}) || s > 9 || l > 9) {
          return bad("Thresholds");
        }
        t.s_idx = static_cast<int>(s);
        t.l_idx = static_cast<int>(l);
        thresholds = t;
        break;
      }
      case ManifestTag::kModelVersion:
        if (!GetVarint64(&in, &model_version)) return bad("ModelVersion");
        break;
      case ManifestTag::kSeqCheckpoint: {
        uint64_t s = 0;
        if (!GetVarint64(&in, &s)) return bad("SeqCheckpoint");
        if (s > last_seq) last_seq = s;
        break;
      }
      case ManifestTag::kLogNumber:
        if (!GetVarint64(&in, &log_number)) return bad("LogNumber");
        break;
      case ManifestTag::kNextFileNumbers:
        if (!GetVarints(&in, {&next_file, &next_value_file})) return bad("NextFileNumbers");
        break;
      default:
        return bad("unknown manifest tag");
    }
  }
  return Status::OK();
}

ManifestEdit ManifestState::Snapshot() const {
  ManifestEdit e;
  for (const auto& [f, m] : value_files) e.AddValueFile(m);
  for (const auto& [id, inputs] : maps) e.AddIndexMap(id, inputs);
  for (const auto& [f, t] : tables) e.AddTable(t.level, t.meta);
  if (thresholds.has_value()) e.Thresholds(*thresholds);
  if (model_version != 0) e.ModelVersion(model_version);
  e.SeqCheckpoint(last_seq);
  e.LogNumber(log_number);
  e.NextFileNumbers(next_file, next_value_file);
  return e;
}

bool operator==(const ManifestState& a, const ManifestState& b) {
  return a.Snapshot().payload() == b.Snapshot().payload();
}

std::string ManifestFileName(const std::string& dir, FileNumber n) {
  return dir + "/MANIFEST-" + std::to_string(n);
}

std::string CurrentFileName(const std::string& dir) { return dir + "/CURRENT"; }

Status ManifestWriter::Create(Env* env, const std::string& path,
                              std::unique_ptr<ManifestWriter>* out) {
  std::unique_ptr<WritableFile> f;
  LIFEKV_RETURN_IF_ERROR(env->NewWritableFile(path, FileKind::kManifest, &f));
  out->reset(new ManifestWriter(std::move(f)));
  return Status::OK();
}

Status ManifestWriter::Commit(const ManifestEdit& edit) {
  std::string frame;
  PutFixed32(&frame, Crc32(edit.payload()));
  PutFixed32(&frame, static_cast<uint32_t>(edit.payload().size()));
  frame += edit.payload();
  LIFEKV_RETURN_IF_ERROR(file_->Append(frame));
  LIFEKV_RETURN_IF_ERROR(file_->Sync());
  ++frames_;
  return Status::OK();
}

Status ReadManifest(Env* env, const std::string& path, ManifestState* state) {
  std::string data;
  Status s = env->ReadFileToString(path, &data);
  if (!s.ok()) return Status::CorruptManifest("cannot read " + path + ": " + s.ToString());
  std::string_view in(data);
  while (!in.empty()) {
    if (in.size() < 8) break;  // torn header
    const uint32_t crc = DecodeFixed32(in.data());
    const uint32_t len = DecodeFixed32(in.data() + 4);
    if (len > in.size() - 8) break;  // torn payload
    const std::string_view payload = in.substr(8, len);
    const bool last = in.size() == 8 + static_cast<size_t>(len);
    if (Crc32(payload) != crc) {
      if (last) break;
      return Status::CorruptManifest("frame crc mismatch in " + path);
    }
    LIFEKV_RETURN_IF_ERROR(state->Apply(payload));
    in.remove_prefix(8 + len);
  }
  return Status::OK();
}

}  // namespace lifekv
