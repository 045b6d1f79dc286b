#include "lifekv/vlog/gc.h"

#include <algorithm>
#include <chrono>

namespace lifekv {

namespace {

struct Output {
  std::unique_ptr<ValueFileWriter> writer;
  ValueFileMeta meta;
};

}  // namespace

Status RunGc(Env* env, const std::string& dir, const std::vector<ValueFileMeta>& inputs_in,
             const GcOptions& options, GcHost* host, GcJobResult* result) {
  const auto start = std::chrono::steady_clock::now();
  *result = GcJobResult{};
  std::vector<ValueFileMeta> inputs = inputs_in;
  std::sort(inputs.begin(), inputs.end(),
            [](const ValueFileMeta& a, const ValueFileMeta& b) { return a.file_no < b.file_no; });
  std::array<Output, kNumValueClasses> open;
  std::vector<FileNumber> created;
  GcJobStats& stats = result->stats;

  auto seal = [&](Output* o) -> Status {
    LIFEKV_RETURN_IF_ERROR(o->writer->Sync());
    LIFEKV_RETURN_IF_ERROR(o->writer->Close());
    o->meta.state = ValueFileState::kSealed;
    o->meta.bytes = o->writer->size();
    o->meta.records = o->writer->records();
    o->meta.value_bytes = o->writer->value_bytes();
    result->outputs.push_back(o->meta);
    o->writer.reset();
    return Status::OK();
  };

  auto relocate = [&](ValueClass cls, const ValueRecordView& rec, ValueLocator* loc) -> Status {
    Output& o = open[static_cast<int>(cls)];
    if (o.writer == nullptr) {
      LIFEKV_RETURN_IF_ERROR(host->NewOutputFile(cls, &o.writer, &o.meta));
      created.push_back(o.meta.file_no);
    }
    LIFEKV_RETURN_IF_ERROR(o.writer->Add(rec.key, rec.seq, rec.value, loc));
    stats.relocated_bytes[static_cast<int>(cls)] += loc->size;
    ++stats.relocated_records[static_cast<int>(cls)];
    if (o.writer->size() >= options.value_file_bytes) LIFEKV_RETURN_IF_ERROR(seal(&o));
    return Status::OK();
  };

  auto body = [&]() -> Status {
    for (const ValueFileMeta& in : inputs) {
      if (in.state != ValueFileState::kSealed) {
        return Status::InvalidArgument("gc input not sealed: " + std::to_string(in.file_no));
      }
      std::unique_ptr<MappedFile> mapped;
      LIFEKV_RETURN_IF_ERROR(env->NewMappedFile(ValueFileName(dir, in.file_no), &mapped));
      const std::string_view data =
          mapped->data().substr(0, std::min<uint64_t>(in.bytes, mapped->data().size()));
      uint64_t offset = 0;
      while (offset < data.size()) {
        ValueRecordView rec;
        LIFEKV_RETURN_IF_ERROR(DecodeValueRecord(data.substr(offset), &rec));
        const int in_cls = static_cast<int>(in.cls);
        ++stats.scanned;
        ++stats.input_scanned[in_cls];
        GcLookup look;
        LIFEKV_RETURN_IF_ERROR(host->Lookup(rec.key, &look));
        if (!look.found || look.seq != rec.seq) {
          ++stats.invalid;
          ++stats.input_invalid[in_cls];
        } else {
          ++stats.valid;
          stats.valid_record_bytes += rec.length;
          const uint64_t elapsed = options.now >= rec.seq ? options.now - rec.seq : 0;
          look.features.static_value_size = static_cast<uint32_t>(rec.value.size());
          const ValueClass cls = host->Classify(look.features, elapsed);
          ValueLocator loc;
          LIFEKV_RETURN_IF_ERROR(relocate(cls, rec, &loc));
          result->entries.push_back(IndexMapEntry{in.file_no, offset, loc});
          host->OnValid(look.features, elapsed);
        }
        offset += rec.length;
      }
      LIFEKV_RETURN_IF_ERROR(host->CrashPoint("gc.after_input"));
    }
    for (Output& o : open) {
      if (o.writer != nullptr) LIFEKV_RETURN_IF_ERROR(seal(&o));
    }
    return Status::OK();
  };

  Status s = body();
  if (!s.ok()) {
    for (Output& o : open) {
      if (o.writer != nullptr) o.writer->Close();
      o.writer.reset();
    }
    for (FileNumber f : created) env->DeleteFile(ValueFileName(dir, f));
    result->outputs.clear();
    result->entries.clear();
    return s;
  }
  stats.micros = static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                           std::chrono::steady_clock::now() - start)
                                           .count());
  return Status::OK();
}

}  // namespace lifekv
