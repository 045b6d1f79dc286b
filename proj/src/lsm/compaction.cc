#include "lifekv/lsm/compaction.h"

#include <algorithm>
#include <queue>

#include "lifekv/lsm/lsm_value.h"
#include "lifekv/vlog/value_file.h"

namespace lifekv {

Status CanonicalizeValue(const ValueRegistry& registry, std::string_view value,
                         std::string* out, bool* changed) {
  *changed = false;
  SeparatedView view;
  LIFEKV_RETURN_IF_ERROR(DecodeSeparatedView(value, &view));
  ValueLocator resolved;
  Status s = registry.Resolve(view.locator, &resolved);
  if (s.code() == Status::Code::kDanglingLocator) return Status::OK();
  LIFEKV_RETURN_IF_ERROR(s);
  if (resolved == view.locator) return Status::OK();
  out->clear();
  ReplaceLocator(view, resolved, out);
  *changed = true;
  return Status::OK();
}

namespace {

struct Cursor {
  const TableReader* reader;
  size_t pos;
  bool from_l0;
  TableEntry entry;
};

struct CursorGreater {
  bool operator()(const Cursor* a, const Cursor* b) const {
    return CompareInternalKey(a->entry.key, a->entry.seq, b->entry.key, b->entry.seq) > 0;
  }
};

struct KeyVersion {
  SequenceNumber seq;
  EntryKind kind;
  std::string_view value;
  bool from_l0;
};

// History of the previous write while replaying a key's versions.
struct Previous {
  bool put = false;
  SequenceNumber seq = 0;
  FeatureBlock features;
};

Status LoadPrevious(std::string_view key, SequenceNumber seq, EntryKind kind,
                    std::string_view value, FeatureEncoding mode, Previous* prev) {
  prev->put = kind == EntryKind::kPut;
  prev->seq = seq;
  prev->features = FeatureBlock{};
  if (!prev->put) return Status::OK();
  if (IsSeparated(value)) {
    LsmValue v;
    LIFEKV_RETURN_IF_ERROR(DecodeLsmValue(value, mode, &v));
    prev->features = std::move(v.features);
    prev->features.static_value_size =
        static_cast<uint32_t>(ValueLengthFromRecord(key.size(), v.locator.size));
  } else if (!value.empty()) {
    prev->features.static_value_size = static_cast<uint32_t>(value.size() - 1);
  }
  return Status::OK();
}

class OutputWriter {
 public:
  OutputWriter(CompactionContext& ctx, CompactionResult* result) : ctx_(ctx), result_(result) {}

  Status Add(std::string_view key, SequenceNumber seq, EntryKind kind, std::string_view value) {
    if (builder_ == nullptr) {
      LIFEKV_RETURN_IF_ERROR(TableBuilder::Create(ctx_.env, ctx_.dir, ctx_.new_file_number(),
                                                  &builder_));
    }
    LIFEKV_RETURN_IF_ERROR(builder_->Add(key, seq, kind, value));
    ++result_->stats.output_entries;
    if (builder_->size() >= ctx_.config->sst_target_file_bytes) return FinishTable();
    return Status::OK();
  }

  Status FinishTable() {
    if (builder_ == nullptr) return Status::OK();
    auto meta = std::make_shared<TableMeta>();
    Status s = builder_->Finish(meta.get());
    builder_.reset();
    if (!s.ok()) return s;
    created_.push_back(meta->file_no);
    LIFEKV_RETURN_IF_ERROR(
        TableReader::Open(ctx_.env, TableFileName(ctx_.dir, meta->file_no), &meta->reader));
    result_->stats.output_bytes += meta->file_size;
    result_->outputs.push_back(std::move(meta));
    return Status::OK();
  }

  void Discard() {
    if (builder_ != nullptr) {
      builder_->Abandon();
      builder_.reset();
    }
    result_->outputs.clear();
    for (FileNumber f : created_) ctx_.env->DeleteFile(TableFileName(ctx_.dir, f));
  }

 private:
  CompactionContext& ctx_;
  CompactionResult* result_;
  std::unique_ptr<TableBuilder> builder_;
  std::vector<FileNumber> created_;
};

class Merger {
 public:
  Merger(const Version& base, const CompactionJob& job, CompactionContext& ctx,
         CompactionResult* result)
      : base_(base), job_(job), ctx_(ctx), result_(result), out_(ctx, result) {
    mode_ = ctx.config->feature_encoding;
    bottommost_ = true;
    for (int l = job.output_level() + 1; l < kNumLevels; ++l) {
      if (!base.levels[l].empty()) bottommost_ = false;
    }
  }

  Status Run() {
    std::vector<Cursor> cursors;
    auto add = [&](const std::vector<TableRef>& tables, bool from_l0) {
      for (const auto& t : tables) {
        result_->stats.input_bytes += t->file_size;
        if (t->reader->size() > 0) cursors.push_back(Cursor{t->reader.get(), 0, from_l0, {}});
      }
    };
    add(job_.inputs, job_.level == 0);
    add(job_.next_inputs, false);
    std::priority_queue<Cursor*, std::vector<Cursor*>, CursorGreater> heap;
    for (auto& c : cursors) {
      c.entry = c.reader->At(0);
      heap.push(&c);
    }
    std::string current;
    std::vector<KeyVersion> versions;
    while (!heap.empty()) {
      Cursor* c = heap.top();
      heap.pop();
      ++result_->stats.input_entries;
      if (!versions.empty() && c->entry.key != current) {
        LIFEKV_RETURN_IF_ERROR(EmitKey(current, versions));
        versions.clear();
      }
      if (versions.empty()) current.assign(c->entry.key);
      versions.push_back(KeyVersion{c->entry.seq, c->entry.kind, c->entry.value, c->from_l0});
      if (++c->pos < c->reader->size()) {
        c->entry = c->reader->At(c->pos);
        heap.push(c);
      }
    }
    if (!versions.empty()) LIFEKV_RETURN_IF_ERROR(EmitKey(current, versions));
    return out_.FinishTable();
  }

  void Discard() { out_.Discard(); }

 private:
  // `versions` is newest first.
  Status EmitKey(const std::string& key, const std::vector<KeyVersion>& versions) {
    result_->stats.dropped_versions += versions.size() - 1;
    const KeyVersion& newest = versions.front();
    std::string_view value = newest.value;
    if (job_.level == 0 && newest.from_l0) {
      LIFEKV_RETURN_IF_ERROR(Enrich(key, versions, &value));
    }
    if (newest.kind == EntryKind::kDelete) {
      if (bottommost_) {
        ++result_->stats.dropped_tombstones;
        return Status::OK();
      }
      return out_.Add(key, newest.seq, newest.kind, newest.value);
    }
    if (ctx_.registry != nullptr && IsSeparated(value)) {
      bool changed = false;
      LIFEKV_RETURN_IF_ERROR(CanonicalizeValue(*ctx_.registry, value, &canonical_, &changed));
      if (changed) {
        ++result_->stats.canonicalized;
        value = canonical_;
      }
    }
    return out_.Add(key, newest.seq, newest.kind, value);
  }

  Status Enrich(const std::string& key, const std::vector<KeyVersion>& versions,
                std::string_view* value) {
    Previous prev;
    size_t oldest_l0 = versions.size();
    if (!versions.back().from_l0) {
      const KeyVersion& b = versions.back();
      LIFEKV_RETURN_IF_ERROR(LoadPrevious(key, b.seq, b.kind, b.value, mode_, &prev));
      oldest_l0 = versions.size() - 1;
    } else if (auto found = base_.Get(key, kMaxSequenceNumber, 2)) {
      LIFEKV_RETURN_IF_ERROR(LoadPrevious(key, found->entry.seq, found->entry.kind,
                                          found->entry.value, mode_, &prev));
    }
    FeatureBlock features;
    bool have_features = false;
    for (size_t i = oldest_l0; i-- > 0;) {
      const KeyVersion& v = versions[i];
      if (prev.put) {
        const uint64_t lifetime = v.seq - prev.seq;
        ++result_->stats.lifetimes_observed;
        MaybeSample(prev.features, lifetime);
        if (v.kind == EntryKind::kPut) {
          features = MergeOnRewrite(prev.features, lifetime, ctx_.config->max_deltas);
          have_features = true;
        }
      }
      if (i == 0) break;
      if (v.kind == EntryKind::kPut && have_features && IsSeparated(v.value)) {
        prev.put = true;
        prev.seq = v.seq;
        prev.features = std::move(features);
        SeparatedView view;
        LIFEKV_RETURN_IF_ERROR(DecodeSeparatedView(v.value, &view));
        prev.features.static_value_size =
            static_cast<uint32_t>(ValueLengthFromRecord(key.size(), view.locator.size));
      } else {
        LIFEKV_RETURN_IF_ERROR(LoadPrevious(key, v.seq, v.kind, v.value, mode_, &prev));
      }
      features = FeatureBlock{};
      have_features = false;
    }
    if (!have_features || !IsSeparated(*value)) return Status::OK();
    SeparatedView view;
    LIFEKV_RETURN_IF_ERROR(DecodeSeparatedView(*value, &view));
    enriched_.clear();
    LIFEKV_RETURN_IF_ERROR(EncodeSeparatedValue(view.locator, features, mode_, &enriched_));
    ++result_->stats.enriched;
    *value = enriched_;
    return Status::OK();
  }

  void MaybeSample(const FeatureBlock& features, uint64_t lifetime) {
    if (ctx_.samples == nullptr) return;
    const double p = CompactionSampleProbability(features.edwc_array(), ctx_.thresholds.s_idx,
                                                 ctx_.thresholds.l_idx);
    if (ctx_.rng != nullptr && p < 1.0) {
      if (std::uniform_real_distribution<double>(0.0, 1.0)(*ctx_.rng) >= p) return;
    }
    TrainingSample s;
    s.features = features;
    s.observed_lifetime = lifetime;
    s.source = SampleSource::kCompaction;
    if (ctx_.samples->Push(std::move(s))) ++result_->stats.samples_emitted;
  }

  const Version& base_;
  const CompactionJob& job_;
  CompactionContext& ctx_;
  CompactionResult* result_;
  OutputWriter out_;
  FeatureEncoding mode_;
  bool bottommost_;
  std::string canonical_;
  std::string enriched_;
};

}  // namespace

Status RunCompaction(const Version& base, const CompactionJob& job, CompactionContext& ctx,
                     CompactionResult* result) {
  *result = CompactionResult{};
  Merger merger(base, job, ctx, result);
  Status s = merger.Run();
  if (!s.ok()) merger.Discard();
  return s;
}

}  // namespace lifekv
