#include "db_impl.h"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include "lifekv/lsm/lsm_value.h"

namespace lifekv {

const char* JobKindName(JobKind k) {
  switch (k) {
    case JobKind::kNone: return "none";
    case JobKind::kFlush: return "flush";
    case JobKind::kCompaction: return "compaction";
    case JobKind::kGc: return "gc";
    case JobKind::kTraining: return "training";
  }
  return "unknown";
}

std::string ModelFileName(const std::string& dir, uint64_t version) {
  return dir + "/MODEL-" + std::to_string(version) + ".txt";
}

namespace {

enum class NameType { kUnknown, kSst, kVlog, kVmap, kWal, kManifest, kModel, kCurrent, kTemp };

NameType ParseFileName(const std::string& name, uint64_t* number) {
  auto numeric = [](std::string_view s, uint64_t* n) {
    if (s.empty() || s.size() > 19) return false;
    uint64_t v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') return false;
      v = v * 10 + static_cast<uint64_t>(c - '0');
    }
    *n = v;
    return true;
  };
  std::string_view s(name);
  if (s == "CURRENT") return NameType::kCurrent;
  if (s == "CURRENT.tmp") return NameType::kTemp;
  if (s.rfind("MANIFEST-", 0) == 0) {
    return numeric(s.substr(9), number) ? NameType::kManifest : NameType::kUnknown;
  }
  if (s.rfind("MODEL-", 0) == 0 && s.size() > 10 && s.substr(s.size() - 4) == ".txt") {
    return numeric(s.substr(6, s.size() - 10), number) ? NameType::kModel : NameType::kUnknown;
  }
  const size_t dot = s.find('.');
  if (dot == std::string_view::npos || !numeric(s.substr(0, dot), number)) {
    return NameType::kUnknown;
  }
  const std::string_view ext = s.substr(dot);
  if (ext == ".sst") return NameType::kSst;
  if (ext == ".vlog") return NameType::kVlog;
  if (ext == ".vmap") return NameType::kVmap;
  if (ext == ".wal") return NameType::kWal;
  return NameType::kUnknown;
}

void SortLevels(Version* v) {
  std::sort(v->levels[0].begin(), v->levels[0].end(),
            [](const TableRef& a, const TableRef& b) { return a->file_no < b->file_no; });
  for (int l = 1; l < kNumLevels; ++l) {
    std::sort(v->levels[l].begin(), v->levels[l].end(),
              [](const TableRef& a, const TableRef& b) { return a->smallest < b->smallest; });
  }
}

}  // namespace

class DBImpl::GcHostImpl final : public GcHost {
 public:
  GcHostImpl(DBImpl* db, SequenceNumber now)
      : db_(db),
        now_(now),
        thresholds_(db->monitor_.Current()),
        model_(db->Model()),
        valid_ratio_(db->monitor_.valid_ratio()),
        vopt_{db->config_.gc_edwc_plus_one, db->config_.edwc_count} {}

  Status Lookup(std::string_view key, GcLookup* out) override {
    NewestEntry e;
    db_->LookupNewest(db_->View(), key, /*with_value=*/false, &e);
    out->found = e.found && e.kind == EntryKind::kPut;
    out->seq = e.seq;
    out->features = FeatureBlock{};
    if (out->found && !e.raw && IsSeparated(e.value_part)) {
      LsmValue v;
      LIFEKV_RETURN_IF_ERROR(DecodeLsmValue(e.value_part, db_->config_.feature_encoding, &v));
      out->features = std::move(v.features);
    }
    return Status::OK();
  }

  ValueClass Classify(const FeatureBlock& features, uint64_t elapsed) override {
    if (!db_->config_.use_model || model_ == nullptr || model_->num_trees() == 0) {
      return ValueClass::kLong;
    }
    const auto start = std::chrono::steady_clock::now();
    const FeatureVector v = BuildFeatureVector(features, elapsed, vopt_);
    const double score = model_->Predict(v);
    const auto nanos = std::chrono::duration_cast<std::chrono::nanoseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    db_->model_calls_.fetch_add(1, std::memory_order_relaxed);
    db_->model_call_nanos_.fetch_add(static_cast<uint64_t>(nanos), std::memory_order_relaxed);
    return LifetimeModel::IsLong(score) ? ValueClass::kLong : ValueClass::kShort;
  }

  void OnValid(const FeatureBlock& features, uint64_t elapsed) override {
    db_->monitor_.long_histogram().Record(elapsed);
    if (unit_(db_->rng_) >= valid_ratio_) return;
    TrainingSample s;
    s.features = features;
    s.observed_lifetime = elapsed;
    s.source = SampleSource::kGc;
    if (db_->gc_q_.Push(std::move(s))) db_->gc_samples_.fetch_add(1, std::memory_order_relaxed);
  }

  Status NewOutputFile(ValueClass cls, std::unique_ptr<ValueFileWriter>* writer,
                       ValueFileMeta* meta) override {
    *meta = ValueFileMeta{};
    meta->file_no = db_->next_value_file_.fetch_add(1);
    meta->cls = cls;
    meta->created_seq = now_;
    meta->ttl = std::max<uint64_t>(1, cls == ValueClass::kShort ? thresholds_.l_s : thresholds_.l_l);
    meta->state = ValueFileState::kOpen;
    return ValueFileWriter::Create(db_->env_, db_->dir_, meta->file_no, writer);
  }

  Status CrashPoint(std::string_view site) override { return db_->CrashPoint(site); }

 private:
  DBImpl* db_;
  SequenceNumber now_;
  LifetimeThresholds thresholds_;
  std::shared_ptr<const LifetimeModel> model_;
  double valid_ratio_;
  FeatureVectorOptions vopt_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

DBImpl::DBImpl(const EngineConfig& config, std::string dir, Env* env)
    : env_(env),
      dir_(std::move(dir)),
      config_(config),
      builder_(DatasetBuilderOptions{config.dataset_threshold, config.gc_label_inverted,
                                     FeatureVectorOptions{config.gc_edwc_plus_one,
                                                          config.edwc_count}}),
      rng_(config.seed),
      cache_(env, dir_, config.vlog_reader_cache),
      monitor_(config.lifetime),
      compaction_q_(config.sample_queue_capacity),
      gc_q_(config.sample_queue_capacity) {
  for (int k = 0; k < kNumFileKinds; ++k) {
    io_base_[k] = env_->io_stats().Written(static_cast<FileKind>(k));
  }
}

DBImpl::~DBImpl() { Close(); }

Status DB::Open(const EngineConfig& config, const std::string& dir, std::unique_ptr<DB>* db,
                Env* env) {
  LIFEKV_RETURN_IF_ERROR(config.Validate());
  auto impl = std::make_unique<DBImpl>(config, dir, env != nullptr ? env : Env::Default());
  LIFEKV_RETURN_IF_ERROR(impl->Recover());
  *db = std::move(impl);
  return Status::OK();
}

Status DBImpl::Recover() {
  LIFEKV_RETURN_IF_ERROR(env_->CreateDirIfMissing(dir_));
  ManifestState state;
  FileNumber old_manifest = 0;
  if (env_->FileExists(CurrentFileName(dir_))) {
    std::string current;
    LIFEKV_RETURN_IF_ERROR(env_->ReadFileToString(CurrentFileName(dir_), &current));
    while (!current.empty() && (current.back() == '\n' || current.back() == '\r')) {
      current.pop_back();
    }
    uint64_t n = 0;
    if (ParseFileName(current, &n) != NameType::kManifest) {
      return Status::CorruptManifest("bad CURRENT: " + current);
    }
    old_manifest = n;
    LIFEKV_RETURN_IF_ERROR(ReadManifest(env_, dir_ + "/" + current, &state));
  }

  // Open value files are cut back to their committed extent and sealed.
  for (auto it = state.value_files.begin(); it != state.value_files.end();) {
    ValueFileMeta& m = it->second;
    if (m.state == ValueFileState::kOpen) {
      const std::string path = ValueFileName(dir_, m.file_no);
      if (m.records == 0) {
        if (env_->FileExists(path)) LIFEKV_RETURN_IF_ERROR(env_->DeleteFile(path));
        it = state.value_files.erase(it);
        continue;
      }
      uint64_t size = 0;
      if (env_->GetFileSize(path, &size).ok() && size > m.bytes) {
        LIFEKV_RETURN_IF_ERROR(env_->TruncateFile(path, m.bytes));
      }
      m.state = ValueFileState::kSealed;
    }
    ++it;
  }

  // Remove files the manifest does not reference.
  std::vector<std::string> names;
  LIFEKV_RETURN_IF_ERROR(env_->GetChildren(dir_, &names));
  FileNumber max_file = old_manifest;
  FileNumber max_value_file = 0;
  std::vector<FileNumber> logs;
  for (const std::string& name : names) {
    uint64_t n = 0;
    bool keep = true;
    switch (ParseFileName(name, &n)) {
      case NameType::kSst:
        max_file = std::max(max_file, n);
        keep = state.tables.count(n) > 0;
        break;
      case NameType::kVlog: {
        max_value_file = std::max(max_value_file, n);
        auto v = state.value_files.find(n);
        keep = v != state.value_files.end() && v->second.state != ValueFileState::kDead;
        break;
      }
      case NameType::kVmap:
        max_file = std::max(max_file, n);
        keep = state.maps.count(n) > 0;
        break;
      case NameType::kWal:
        max_file = std::max(max_file, n);
        keep = n >= state.log_number;
        if (keep) logs.push_back(n);
        break;
      case NameType::kManifest:
        max_file = std::max(max_file, n);
        keep = n == old_manifest;
        break;
      case NameType::kModel:
        keep = n == state.model_version;
        break;
      case NameType::kTemp:
        keep = false;
        break;
      default:
        break;
    }
    if (!keep) LIFEKV_RETURN_IF_ERROR(env_->DeleteFile(dir_ + "/" + name));
  }
  next_file_ = std::max<FileNumber>(state.next_file, max_file + 1);
  next_value_file_ = std::max<FileNumber>(state.next_value_file, max_value_file + 1);
  for (const auto& [f, m] : state.value_files) {
    if (f >= next_value_file_) next_value_file_ = f + 1;
  }

  auto version = std::make_shared<Version>();
  for (const auto& [f, t] : state.tables) {
    if (t.level >= kNumLevels) return Status::CorruptManifest("table level out of range");
    auto meta = std::make_shared<TableMeta>(t.meta);
    LIFEKV_RETURN_IF_ERROR(TableReader::Open(env_, TableFileName(dir_, f), &meta->reader));
    meta->refs = meta->reader->refs();
    meta->file_size = meta->reader->file_size();
    version->levels[t.level].push_back(std::move(meta));
  }
  SortLevels(version.get());
  version_ = version;

  for (const auto& [f, m] : state.value_files) registry_.PutFile(m);
  for (const auto& [id, inputs] : state.maps) {
    auto map = std::make_shared<ValueIndexMap>();
    LIFEKV_RETURN_IF_ERROR(ValueIndexMap::Read(env_, dir_, id, inputs, map.get()));
    registry_.AddMap(std::move(map));
  }
  if (state.thresholds.has_value()) monitor_.Restore(*state.thresholds);
  model_version_ = state.model_version;
  if (state.model_version != 0 && env_->FileExists(ModelFileName(dir_, state.model_version))) {
    LifetimeModel model;
    if (LifetimeModel::Load(env_, ModelFileName(dir_, state.model_version), &model).ok() &&
        model.version() == state.model_version) {
      model_ = std::make_shared<const LifetimeModel>(std::move(model));
    }
  }
  last_seq_ = state.last_seq;

  // Fresh manifest holding a snapshot of the recovered state.
  const FileNumber manifest_no = NewFileNumber();
  state.next_file = next_file_;
  state.next_value_file = next_value_file_;
  LIFEKV_RETURN_IF_ERROR(
      ManifestWriter::Create(env_, ManifestFileName(dir_, manifest_no), &manifest_));
  LIFEKV_RETURN_IF_ERROR(manifest_->Commit(state.Snapshot()));
  LIFEKV_RETURN_IF_ERROR(CrashPoint("open.after_manifest"));
  const std::string tmp = dir_ + "/CURRENT.tmp";
  LIFEKV_RETURN_IF_ERROR(WriteStringToFile(env_, "MANIFEST-" + std::to_string(manifest_no) + "\n",
                                           tmp, FileKind::kManifest, true));
  LIFEKV_RETURN_IF_ERROR(env_->RenameFile(tmp, CurrentFileName(dir_)));
  LIFEKV_RETURN_IF_ERROR(CrashPoint("open.after_current"));
  if (old_manifest != 0) LIFEKV_RETURN_IF_ERROR(env_->DeleteFile(ManifestFileName(dir_, old_manifest)));

  // Replay unflushed writes.
  std::sort(logs.begin(), logs.end());
  auto replayed = std::make_shared<Memtable>();
  for (FileNumber log : logs) {
    uint64_t records = 0;
    LIFEKV_RETURN_IF_ERROR(ReplayWal(
        env_, WalFileName(dir_, log),
        [&](SequenceNumber seq, EntryKind kind, std::string_view key, std::string_view value) {
          replayed->Add(key, seq, kind, value);
          if (seq > last_seq_) last_seq_ = seq;
        },
        &records));
  }
  mem_ = std::make_shared<Memtable>();
  if (config_.wal_enabled) {
    LIFEKV_RETURN_IF_ERROR(WalWriter::Create(env_, dir_, NewFileNumber(), &wal_));
  }
  if (!replayed->empty()) {
    std::lock_guard<std::mutex> m(maint_mu_);
    {
      std::lock_guard<std::mutex> l(mu_);
      imm_ = replayed;
      imm_log_ = 0;
    }
    LIFEKV_RETURN_IF_ERROR(FlushImm());
  }
  for (FileNumber log : logs) LIFEKV_RETURN_IF_ERROR(env_->DeleteFile(WalFileName(dir_, log)));

  if (config_.maintenance == MaintenanceMode::kBackground) {
    maint_thread_ = std::thread([this] { MaintenanceLoop(); });
    train_thread_ = std::thread([this] { TrainerLoop(); });
  }
  return Status::OK();
}

Status DBImpl::Close() {
  {
    std::lock_guard<std::mutex> l(mu_);
    if (closed_) return Status::OK();
    closed_ = true;
    shutting_down_ = true;
    cv_.notify_all();
  }
  if (maint_thread_.joinable()) maint_thread_.join();
  if (train_thread_.joinable()) train_thread_.join();
  Status s;
  std::lock_guard<std::mutex> m(maint_mu_);
  std::lock_guard<std::mutex> l(mu_);
  if (wal_ != nullptr) {
    s = wal_->Sync();
    Status c = wal_->Close();
    if (s.ok()) s = c;
    wal_.reset();
  }
  if (default_writer_ != nullptr) {
    default_writer_->Close();
    default_writer_.reset();
  }
  if (manifest_ != nullptr) {
    Status c = manifest_->Close();
    if (s.ok()) s = c;
    manifest_.reset();
  }
  return s;
}

// ---------------------------------------------------------------------------
// Write path

Status DBImpl::Put(std::string_view key, std::string_view value) {
  return Write(EntryKind::kPut, key, value);
}

Status DBImpl::Delete(std::string_view key) { return Write(EntryKind::kDelete, key, {}); }

Status DBImpl::Write(EntryKind kind, std::string_view key, std::string_view value) {
  bool run_inline = false;
  {
    std::unique_lock<std::mutex> l(mu_);
    if (closed_) return Status::InvalidArgument("database closed");
    if (!bg_error_.ok()) return bg_error_;
    const SequenceNumber seq = last_seq_.load() + 1;
    if (wal_ != nullptr) {
      LIFEKV_RETURN_IF_ERROR(wal_->Add(seq, kind, key, value, config_.sync_wal));
    }
    mem_->Add(key, seq, kind, value);
    last_seq_.store(seq);
    user_writes_.fetch_add(1, std::memory_order_relaxed);
    logical_bytes_.fetch_add(key.size() + value.size(), std::memory_order_relaxed);
    lsm_writes_.fetch_add(1, std::memory_order_relaxed);
    if (mem_->ApproximateBytes() >= config_.memtable_bytes) {
      if (config_.maintenance == MaintenanceMode::kBackground) {
        cv_.wait(l, [&] { return imm_ == nullptr || !bg_error_.ok() || shutting_down_; });
        if (!bg_error_.ok()) return bg_error_;
        if (imm_ == nullptr) {
          LIFEKV_RETURN_IF_ERROR(SwitchMemtable());
          cv_.notify_all();
        }
      } else {
        if (imm_ == nullptr) LIFEKV_RETURN_IF_ERROR(SwitchMemtable());
        run_inline = true;
      }
    }
  }
  if (run_inline) {
    RunInlineMaintenance();
    std::lock_guard<std::mutex> l(mu_);
    return bg_error_;
  }
  return Status::OK();
}

Status DBImpl::SwitchMemtable() {
  std::unique_ptr<WalWriter> next;
  if (config_.wal_enabled) {
    LIFEKV_RETURN_IF_ERROR(WalWriter::Create(env_, dir_, NewFileNumber(), &next));
  }
  if (wal_ != nullptr) LIFEKV_RETURN_IF_ERROR(wal_->Close());
  imm_log_ = wal_ != nullptr ? wal_->number() : 0;
  imm_ = std::move(mem_);
  mem_ = std::make_shared<Memtable>();
  wal_ = std::move(next);
  return Status::OK();
}

Status DBImpl::SyncWal() {
  std::lock_guard<std::mutex> l(mu_);
  if (wal_ == nullptr) return Status::OK();
  return wal_->Sync();
}

void DBImpl::RecordBackgroundError(const Status& s) {
  std::lock_guard<std::mutex> l(mu_);
  if (bg_error_.ok()) bg_error_ = s;
  cv_.notify_all();
}

void DBImpl::RunInlineMaintenance() {
  std::lock_guard<std::mutex> m(maint_mu_);
  while (true) {
    JobKind ran = JobKind::kNone;
    Status s = TickLocked(&ran);
    if (!s.ok()) {
      RecordBackgroundError(s);
      return;
    }
    if (ran == JobKind::kNone) return;
  }
}

// ---------------------------------------------------------------------------
// Read path

DBImpl::ReadView DBImpl::View() const {
  std::lock_guard<std::mutex> l(mu_);
  return ReadView{mem_, imm_, version_};
}

void DBImpl::LookupNewest(const ReadView& view, std::string_view key, bool with_value,
                          NewestEntry* out) const {
  *out = NewestEntry{};
  for (const auto& mem : {view.mem, view.imm}) {
    if (mem == nullptr) continue;
    if (auto e = mem->Get(key)) {
      out->found = true;
      out->raw = true;
      out->seq = e->seq;
      out->kind = e->kind;
      if (with_value) out->value_part = std::move(e->value);
      return;
    }
  }
  if (auto r = view.version->Get(key, kMaxSequenceNumber)) {
    out->found = true;
    out->seq = r->entry.seq;
    out->kind = r->entry.kind;
    out->value_part.assign(r->entry.value);
  }
}

Status DBImpl::ReadValue(std::string_view key, const NewestEntry& e, std::string* value) {
  if (e.raw) {
    *value = e.value_part;
    return Status::OK();
  }
  if (!IsSeparated(e.value_part)) {
    if (e.value_part.empty()) return Status::Corruption("empty value part");
    value->assign(e.value_part.substr(1));
    return Status::OK();
  }
  SeparatedView view;
  LIFEKV_RETURN_IF_ERROR(DecodeSeparatedView(e.value_part, &view));
  Status s;
  for (int attempt = 0; attempt < 3; ++attempt) {
    ValueLocator loc;
    s = registry_.Resolve(view.locator, &loc);
    if (!s.ok()) return s;
    ValueRecord rec;
    s = cache_.Read(loc, &rec);
    if (s.code() == Status::Code::kFileMissing) continue;  // collected meanwhile
    if (!s.ok()) return s;
    if (rec.key != key || rec.seq != e.seq) {
      return Status::Corruption("value record does not belong to key");
    }
    *value = std::move(rec.value);
    return Status::OK();
  }
  return s;
}

Status DBImpl::Get(std::string_view key, std::string* value) {
  // The view stays pinned until the value is read.
  const ReadView view = View();
  NewestEntry e;
  LookupNewest(view, key, /*with_value=*/true, &e);
  if (!e.found || e.kind == EntryKind::kDelete) return Status::NotFound();
  return ReadValue(key, e, value);
}

void DBImpl::InstallVersionLocked(std::shared_ptr<const Version> v) {
  if (version_ != nullptr) old_versions_.push_back(version_);
  version_ = std::move(v);
}

Status DBImpl::Scan(std::string_view start, std::string_view end,
                    std::vector<std::pair<std::string, std::string>>* out) {
  out->clear();
  if (!(start < end)) return Status::OK();
  const ReadView view = View();
  std::map<std::string, NewestEntry, std::less<>> newest;
  for (int level = 0; level < kNumLevels; ++level) {
    for (const auto& t : view.version->levels[level]) {
      if (!(t->smallest < end) || t->largest < start) continue;
      const TableReader& r = *t->reader;
      for (size_t i = r.LowerBound(start); i < r.size(); ++i) {
        const TableEntry e = r.At(i);
        if (!(e.key < end)) break;
        auto it = newest.find(e.key);
        if (it != newest.end() && it->second.seq >= e.seq) continue;
        NewestEntry& n = newest[std::string(e.key)];
        n.found = true;
        n.raw = false;
        n.seq = e.seq;
        n.kind = e.kind;
        n.value_part.assign(e.value);
      }
    }
  }
  for (const auto& mem : {view.imm, view.mem}) {
    if (mem == nullptr) continue;
    std::map<std::string, MemEntry> entries;
    mem->CollectRange(start, end, &entries);
    for (auto& [k, m] : entries) {
      NewestEntry& n = newest[k];
      if (n.found && n.seq >= m.seq) continue;
      n.found = true;
      n.raw = true;
      n.seq = m.seq;
      n.kind = m.kind;
      n.value_part = std::move(m.value);
    }
  }
  for (const auto& [k, n] : newest) {
    if (n.kind == EntryKind::kDelete) continue;
    std::string value;
    LIFEKV_RETURN_IF_ERROR(ReadValue(k, n, &value));
    out->emplace_back(k, std::move(value));
  }
  return Status::OK();
}

// ---------------------------------------------------------------------------
// Maintenance

Status DBImpl::CommitEdit(ManifestEdit* edit) {
  edit->NextFileNumbers(next_file_.load(), next_value_file_.load());
  return manifest_->Commit(*edit);
}

void DBImpl::AddTimeline(int cls, double ratio) {
  const LifetimeThresholds t = monitor_.Current();
  std::lock_guard<std::mutex> l(mu_);
  timeline_.push_back(TimelinePoint{last_seq_.load(), t.l_d, t.l_s, t.l_l, cls, ratio});
}

Status DBImpl::MaintenanceTick(JobKind* ran) {
  std::lock_guard<std::mutex> m(maint_mu_);
  {
    std::lock_guard<std::mutex> l(mu_);
    if (!bg_error_.ok()) return bg_error_;
  }
  Status s = TickLocked(ran);
  if (!s.ok()) RecordBackgroundError(s);
  return s;
}

Status DBImpl::TickLocked(JobKind* ran) {
  *ran = JobKind::kNone;
  bool has_imm = false;
  {
    std::lock_guard<std::mutex> l(mu_);
    has_imm = imm_ != nullptr;
  }
  if (has_imm) {
    *ran = JobKind::kFlush;
    return FlushImm();
  }
  bool compacted = false;
  LIFEKV_RETURN_IF_ERROR(RunCompactionJob(&compacted));
  if (compacted) {
    *ran = JobKind::kCompaction;
    return Status::OK();
  }
  std::vector<ValueFileMeta> expired = PickExpired();
  if (!expired.empty()) {
    *ran = JobKind::kGc;
    return RunGcJob(std::move(expired));
  }
  LIFEKV_RETURN_IF_ERROR(ConsumeSamples());
  if (!builder_.Ready()) return Status::OK();
  std::optional<Dataset> dataset = builder_.Build();
  if (dataset.has_value() && config_.dump_dataset_csv) {
    LIFEKV_RETURN_IF_ERROR(dataset->WriteCsv(
        dir_ + "/DATASET-" + std::to_string(builder_.builds()) + ".csv"));
  }
  if (!config_.use_model || !dataset.has_value()) return Status::OK();
  *ran = JobKind::kTraining;
  if (config_.maintenance == MaintenanceMode::kBackground) {
    std::lock_guard<std::mutex> l(mu_);
    if (!training_busy_) {
      pending_dataset_ = std::move(dataset);
      training_busy_ = true;
      cv_.notify_all();
    }
    return Status::OK();
  }
  LifetimeModel model;
  Status s = TrainModel(*dataset, config_.gbdt, &model);
  if (s.code() == Status::Code::kDegenerateDataset) return Status::OK();
  LIFEKV_RETURN_IF_ERROR(s);
  return InstallModel(std::move(model));
}

std::vector<ValueFileMeta> DBImpl::PickExpired() {
  if (!ttl_gc_enabled_) return {};
  std::vector<ValueFileMeta> expired = registry_.ExpiredFiles(last_seq_.load());
  if (config_.gc_max_files_per_job > 0 && expired.size() > config_.gc_max_files_per_job) {
    expired.resize(config_.gc_max_files_per_job);
  }
  return expired;
}

Status DBImpl::FlushImm() {
  std::shared_ptr<Memtable> imm;
  FileNumber imm_log = 0;
  FileNumber current_log = 0;
  {
    std::lock_guard<std::mutex> l(mu_);
    imm = imm_;
    imm_log = imm_log_;
    current_log = wal_ != nullptr ? wal_->number() : 0;
  }
  if (imm == nullptr) return Status::OK();
  const LifetimeThresholds t = monitor_.Current();
  const SequenceNumber now = last_seq_.load();
  ManifestEdit edit;
  std::vector<ValueFileMeta> sealed;

  std::unique_ptr<TableBuilder> table;
  LIFEKV_RETURN_IF_ERROR(TableBuilder::Create(env_, dir_, NewFileNumber(), &table));
  std::string part;
  auto seal_default = [&]() -> Status {
    LIFEKV_RETURN_IF_ERROR(default_writer_->Sync());
    LIFEKV_RETURN_IF_ERROR(default_writer_->Close());
    default_meta_.records = default_writer_->records();
    default_meta_.bytes = default_writer_->size();
    default_meta_.value_bytes = default_writer_->value_bytes();
    default_meta_.state = ValueFileState::kSealed;
    edit.ValueFileExtent(default_meta_.file_no, default_meta_.records, default_meta_.bytes,
                         default_meta_.value_bytes);
    edit.SealValueFile(default_meta_.file_no);
    sealed.push_back(default_meta_);
    default_writer_.reset();
    return Status::OK();
  };
  for (const Memtable::Item& item : imm->NewestPerKey()) {
    const MemEntry& e = *item.entry;
    part.clear();
    if (e.kind == EntryKind::kPut && e.value.size() >= config_.min_separated_value_bytes) {
      if (default_writer_ == nullptr) {
        const FileNumber f = next_value_file_.fetch_add(1);
        LIFEKV_RETURN_IF_ERROR(ValueFileWriter::Create(env_, dir_, f, &default_writer_));
        default_meta_ = ValueFileMeta{};
        default_meta_.file_no = f;
        default_meta_.cls = ValueClass::kDefault;
        default_meta_.created_seq = now;
        default_meta_.ttl = std::max<uint64_t>(1, t.l_d);
        default_meta_.state = ValueFileState::kOpen;
        edit.AddValueFile(default_meta_);
      }
      ValueLocator loc;
      LIFEKV_RETURN_IF_ERROR(default_writer_->Add(item.key, e.seq, e.value, &loc));
      LIFEKV_RETURN_IF_ERROR(
          EncodeSeparatedValue(loc, FeatureBlock{}, config_.feature_encoding, &part));
      if (default_writer_->size() >= config_.value_file_bytes) {
        LIFEKV_RETURN_IF_ERROR(seal_default());
      }
    } else if (e.kind == EntryKind::kPut) {
      EncodeInlineValue(e.value, &part);
    }
    LIFEKV_RETURN_IF_ERROR(table->Add(item.key, e.seq, e.kind, part));
  }
  if (default_writer_ != nullptr) {
    LIFEKV_RETURN_IF_ERROR(default_writer_->Sync());
    default_meta_.records = default_writer_->records();
    default_meta_.bytes = default_writer_->size();
    default_meta_.value_bytes = default_writer_->value_bytes();
    edit.ValueFileExtent(default_meta_.file_no, default_meta_.records, default_meta_.bytes,
                         default_meta_.value_bytes);
  }
  LIFEKV_RETURN_IF_ERROR(CrashPoint("flush.after_vlog"));
  auto meta = std::make_shared<TableMeta>();
  LIFEKV_RETURN_IF_ERROR(table->Finish(meta.get()));
  LIFEKV_RETURN_IF_ERROR(
      TableReader::Open(env_, TableFileName(dir_, meta->file_no), &meta->reader));
  LIFEKV_RETURN_IF_ERROR(CrashPoint("flush.after_sst"));
  edit.AddTable(0, *meta);
  edit.LogNumber(current_log);
  edit.SeqCheckpoint(imm->max_seq());
  LIFEKV_RETURN_IF_ERROR(CommitEdit(&edit));
  LIFEKV_RETURN_IF_ERROR(CrashPoint("flush.after_manifest"));

  for (const ValueFileMeta& m : sealed) registry_.PutFile(m);
  if (default_writer_ != nullptr) registry_.PutFile(default_meta_);
  lsm_writes_.fetch_add(meta->entries, std::memory_order_relaxed);
  {
    std::lock_guard<std::mutex> l(mu_);
    auto v = std::make_shared<Version>(*version_);
    v->levels[0].push_back(meta);
    InstallVersionLocked(std::move(v));
    imm_ = nullptr;
    cv_.notify_all();
  }
  flushes_.fetch_add(1, std::memory_order_relaxed);
  if (imm_log != 0) LIFEKV_RETURN_IF_ERROR(env_->DeleteFile(WalFileName(dir_, imm_log)));
  return Status::OK();
}

Status DBImpl::RunCompactionJob(bool* ran) {
  *ran = false;
  std::shared_ptr<const Version> base;
  {
    std::lock_guard<std::mutex> l(mu_);
    base = version_;
  }
  std::optional<CompactionJob> job = PickCompaction(*base, config_);
  if (!job.has_value()) return Status::OK();
  *ran = true;
  CompactionContext ctx;
  ctx.env = env_;
  ctx.dir = dir_;
  ctx.config = &config_;
  ctx.new_file_number = [this] { return NewFileNumber(); };
  ctx.registry = &registry_;
  ctx.samples = &compaction_q_;
  ctx.thresholds = monitor_.Current();
  ctx.rng = &rng_;
  CompactionResult res;
  LIFEKV_RETURN_IF_ERROR(RunCompaction(*base, *job, ctx, &res));
  LIFEKV_RETURN_IF_ERROR(CrashPoint("compaction.after_output"));
  ManifestEdit edit;
  for (const auto& t : res.outputs) edit.AddTable(job->output_level(), *t);
  for (const auto& t : job->inputs) edit.DropTable(t->file_no);
  for (const auto& t : job->next_inputs) edit.DropTable(t->file_no);
  LIFEKV_RETURN_IF_ERROR(CommitEdit(&edit));
  LIFEKV_RETURN_IF_ERROR(CrashPoint("compaction.after_manifest"));
  {
    std::lock_guard<std::mutex> l(mu_);
    InstallVersionLocked(ApplyCompaction(*version_, *job, res.outputs));
  }
  for (const auto& t : job->inputs) env_->DeleteFile(TableFileName(dir_, t->file_no));
  for (const auto& t : job->next_inputs) env_->DeleteFile(TableFileName(dir_, t->file_no));
  compactions_.fetch_add(1, std::memory_order_relaxed);
  compaction_in_.fetch_add(res.stats.input_bytes, std::memory_order_relaxed);
  compaction_out_.fetch_add(res.stats.output_bytes, std::memory_order_relaxed);
  compaction_samples_.fetch_add(res.stats.samples_emitted, std::memory_order_relaxed);
  lsm_writes_.fetch_add(res.stats.output_entries, std::memory_order_relaxed);
  return RetireMaps();
}

Status DBImpl::RunGcJob(std::vector<ValueFileMeta> inputs) {
  if (inputs.empty()) return Status::OK();
  const SequenceNumber now = last_seq_.load();
  GcHostImpl host(this, now);
  GcJobResult res;
  LIFEKV_RETURN_IF_ERROR(
      RunGc(env_, dir_, inputs, GcOptions{config_.value_file_bytes, now}, &host, &res));
  auto discard = [&] {
    for (const ValueFileMeta& m : res.outputs) env_->DeleteFile(ValueFileName(dir_, m.file_no));
  };
  std::vector<FileNumber> ids;
  for (const ValueFileMeta& m : inputs) ids.push_back(m.file_no);
  std::sort(ids.begin(), ids.end());
  auto map = std::make_shared<ValueIndexMap>(NewFileNumber(), ids, res.entries);
  Status s = map->Write(env_, dir_);
  if (s.ok()) s = CrashPoint("gc.after_map");
  if (!s.ok()) {
    discard();
    env_->DeleteFile(IndexMapFileName(dir_, map->id()));
    return s;
  }
  monitor_.RecordGcJob(res.stats.invalid, res.stats.scanned);
  const LifetimeThresholds t = monitor_.Recompute();
  ManifestEdit edit;
  for (const ValueFileMeta& m : res.outputs) edit.AddValueFile(m);
  edit.AddIndexMap(map->id(), ids);
  for (FileNumber f : ids) edit.DeadValueFile(f);
  edit.Thresholds(t);
  LIFEKV_RETURN_IF_ERROR(CommitEdit(&edit));
  LIFEKV_RETURN_IF_ERROR(CrashPoint("gc.after_manifest"));

  for (const ValueFileMeta& m : res.outputs) registry_.PutFile(m);
  registry_.AddMap(map);
  for (FileNumber f : ids) registry_.MarkDead(f);
  for (FileNumber f : ids) {
    cache_.Evict(f);
    env_->DeleteFile(ValueFileName(dir_, f));
  }
  {
    std::lock_guard<std::mutex> l(mu_);
    ++gc_totals_.gc_jobs;
    gc_totals_.gc_scanned += res.stats.scanned;
    gc_totals_.gc_valid += res.stats.valid;
    gc_totals_.gc_invalid += res.stats.invalid;
    for (int c = 0; c < kNumValueClasses; ++c) {
      gc_totals_.gc_class_scanned[c] += res.stats.input_scanned[c];
      gc_totals_.gc_class_invalid[c] += res.stats.input_invalid[c];
      gc_totals_.gc_relocated_bytes[c] += res.stats.relocated_bytes[c];
      gc_totals_.gc_relocated_records[c] += res.stats.relocated_records[c];
    }
  }
  for (int c = 0; c < kNumValueClasses; ++c) {
    if (res.stats.input_scanned[c] == 0) continue;
    AddTimeline(c, static_cast<double>(res.stats.input_invalid[c]) /
                       static_cast<double>(res.stats.input_scanned[c]));
  }
  AddTimeline(-1, monitor_.gc_ratio());
  return RetireMaps();
}

Status DBImpl::RetireMaps() {
  std::set<FileNumber> referenced;
  {
    std::lock_guard<std::mutex> l(mu_);
    referenced = version_->ReferencedValueFiles();
    std::erase_if(old_versions_, [&](const std::weak_ptr<const Version>& w) {
      std::shared_ptr<const Version> v = w.lock();
      if (v == nullptr) return true;
      const std::set<FileNumber> refs = v->ReferencedValueFiles();
      referenced.insert(refs.begin(), refs.end());
      return false;
    });
  }
  const std::vector<FileNumber> ids = registry_.RetirableMaps(referenced);
  if (ids.empty()) return Status::OK();
  ManifestEdit edit;
  for (FileNumber id : ids) edit.DropIndexMap(id);
  LIFEKV_RETURN_IF_ERROR(CommitEdit(&edit));
  for (FileNumber id : ids) {
    registry_.EraseMap(id);
    env_->DeleteFile(IndexMapFileName(dir_, id));
  }
  return Status::OK();
}

Status DBImpl::ConsumeSamples() {
  std::vector<TrainingSample> samples = compaction_q_.Drain();
  std::vector<TrainingSample> gc = gc_q_.Drain();
  if (samples.empty() && gc.empty()) return Status::OK();
  samples.insert(samples.end(), std::make_move_iterator(gc.begin()),
                 std::make_move_iterator(gc.end()));
  builder_.Consume(std::move(samples), monitor_.Current(), &monitor_.short_histogram());
  ++consume_batches_;
  const int every = std::max(1, config_.lifetime.recompute_every_batches);
  if (consume_batches_ % static_cast<uint64_t>(every) != 0) return Status::OK();
  const LifetimeThresholds before = monitor_.Current();
  const LifetimeThresholds after = monitor_.Recompute();
  if (after == before) return Status::OK();
  LIFEKV_RETURN_IF_ERROR(CommitThresholds(after));
  AddTimeline(-1, monitor_.gc_ratio());
  return Status::OK();
}

Status DBImpl::CommitThresholds(const LifetimeThresholds& t) {
  ManifestEdit edit;
  edit.Thresholds(t);
  return CommitEdit(&edit);
}

Status DBImpl::InstallModel(LifetimeModel model) {
  const uint64_t version = model_version_ + 1;
  model.set_version(version);
  model.set_trained_at_seq(last_seq_.load());
  LIFEKV_RETURN_IF_ERROR(model.Save(env_, ModelFileName(dir_, version)));
  LIFEKV_RETURN_IF_ERROR(CrashPoint("model.after_save"));
  ManifestEdit edit;
  edit.ModelVersion(version);
  LIFEKV_RETURN_IF_ERROR(CommitEdit(&edit));
  LIFEKV_RETURN_IF_ERROR(CrashPoint("model.after_manifest"));
  const uint64_t old = model_version_;
  model_version_ = version;
  {
    std::lock_guard<std::mutex> l(mu_);
    model_ = std::make_shared<const LifetimeModel>(std::move(model));
  }
  trainings_.fetch_add(1, std::memory_order_relaxed);
  if (old != 0 && env_->FileExists(ModelFileName(dir_, old))) {
    env_->DeleteFile(ModelFileName(dir_, old));
  }
  return Status::OK();
}

std::shared_ptr<const LifetimeModel> DBImpl::Model() const {
  std::lock_guard<std::mutex> l(mu_);
  return model_;
}

void DBImpl::MaintenanceLoop() {
  while (true) {
    {
      std::lock_guard<std::mutex> l(mu_);
      if (shutting_down_ || !bg_error_.ok()) return;
    }
    JobKind ran = JobKind::kNone;
    if (!MaintenanceTick(&ran).ok()) return;
    if (ran != JobKind::kNone) continue;
    std::unique_lock<std::mutex> l(mu_);
    cv_.wait_for(l, std::chrono::milliseconds(20),
                 [&] { return shutting_down_ || imm_ != nullptr; });
  }
}

void DBImpl::TrainerLoop() {
  while (true) {
    Dataset dataset;
    {
      std::unique_lock<std::mutex> l(mu_);
      cv_.wait(l, [&] { return shutting_down_ || pending_dataset_.has_value(); });
      if (shutting_down_) return;
      dataset = std::move(*pending_dataset_);
      pending_dataset_.reset();
    }
    LifetimeModel model;
    Status s = TrainModel(dataset, config_.gbdt, &model);
    if (s.ok()) {
      std::lock_guard<std::mutex> m(maint_mu_);
      s = InstallModel(std::move(model));
      if (!s.ok()) RecordBackgroundError(s);
    }
    std::lock_guard<std::mutex> l(mu_);
    training_busy_ = false;
    cv_.notify_all();
  }
}

Status DBImpl::WaitForIdle() {
  while (true) {
    JobKind ran = JobKind::kNone;
    LIFEKV_RETURN_IF_ERROR(MaintenanceTick(&ran));
    if (ran != JobKind::kNone) continue;
    std::unique_lock<std::mutex> l(mu_);
    if (!training_busy_) return bg_error_;
    cv_.wait_for(l, std::chrono::milliseconds(5));
  }
}

Status DBImpl::Flush() {
  {
    std::lock_guard<std::mutex> l(mu_);
    if (!bg_error_.ok()) return bg_error_;
  }
  std::lock_guard<std::mutex> m(maint_mu_);
  LIFEKV_RETURN_IF_ERROR(FlushImm());
  {
    std::lock_guard<std::mutex> l(mu_);
    if (mem_->empty()) return Status::OK();
    LIFEKV_RETURN_IF_ERROR(SwitchMemtable());
  }
  Status s = FlushImm();
  if (!s.ok()) RecordBackgroundError(s);
  return s;
}

Status DBImpl::CompactUntilQuiet() {
  std::lock_guard<std::mutex> m(maint_mu_);
  while (true) {
    bool ran = false;
    Status s = RunCompactionJob(&ran);
    if (!s.ok()) {
      RecordBackgroundError(s);
      return s;
    }
    if (!ran) return Status::OK();
  }
}

Status DBImpl::ForceGc(size_t max_files) {
  std::vector<ValueFileMeta> files;
  for (const ValueFileMeta& m : registry_.Files()) {
    if (m.state == ValueFileState::kSealed) files.push_back(m);
  }
  if (max_files > 0 && files.size() > max_files) files.resize(max_files);
  std::lock_guard<std::mutex> m(maint_mu_);
  Status s = RunGcJob(std::move(files));
  if (!s.ok()) RecordBackgroundError(s);
  return s;
}

Status DBImpl::GcFiles(const std::vector<FileNumber>& ids) {
  std::vector<ValueFileMeta> files;
  for (FileNumber f : ids) {
    auto m = registry_.GetFile(f);
    if (!m.has_value() || m->state != ValueFileState::kSealed) {
      return Status::InvalidArgument("not a sealed value file: " + std::to_string(f));
    }
    files.push_back(*m);
  }
  std::lock_guard<std::mutex> m(maint_mu_);
  Status s = RunGcJob(std::move(files));
  if (!s.ok()) RecordBackgroundError(s);
  return s;
}

Status DBImpl::EstimateGarbage(FileNumber file, size_t sample_n, uint64_t seed, double* ratio) {
  *ratio = 0.0;
  auto meta = registry_.GetFile(file);
  if (!meta.has_value() || meta->state == ValueFileState::kDead) {
    return Status::NotFound("value file " + std::to_string(file));
  }
  std::unique_ptr<MappedFile> mapped;
  LIFEKV_RETURN_IF_ERROR(env_->NewMappedFile(ValueFileName(dir_, file), &mapped));
  const std::string_view data =
      mapped->data().substr(0, std::min<uint64_t>(meta->bytes, mapped->data().size()));
  std::vector<uint64_t> offsets;
  for (uint64_t off = 0; off < data.size();) {
    ValueRecordView rec;
    LIFEKV_RETURN_IF_ERROR(DecodeValueRecord(data.substr(off), &rec));
    offsets.push_back(off);
    off += rec.length;
  }
  if (offsets.empty() || sample_n == 0) return Status::OK();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, offsets.size() - 1);
  const ReadView view = View();
  size_t invalid = 0;
  for (size_t i = 0; i < sample_n; ++i) {
    ValueRecordView rec;
    LIFEKV_RETURN_IF_ERROR(DecodeValueRecord(data.substr(offsets[pick(rng)]), &rec));
    NewestEntry e;
    LookupNewest(view, rec.key, /*with_value=*/false, &e);
    if (!e.found || e.kind != EntryKind::kPut || e.seq != rec.seq) ++invalid;
  }
  *ratio = static_cast<double>(invalid) / static_cast<double>(sample_n);
  return Status::OK();
}

// ---------------------------------------------------------------------------
// Introspection

DbStats DBImpl::GetStats() {
  DbStats s;
  std::shared_ptr<const Version> version;
  {
    std::lock_guard<std::mutex> l(mu_);
    s = gc_totals_;
    version = version_;
  }
  s.last_seq = last_seq_.load();
  s.user_writes = user_writes_.load();
  s.logical_bytes = logical_bytes_.load();
  const IoStats& io = env_->io_stats();
  for (int k = 0; k < kNumFileKinds; ++k) {
    s.written[k] = io.Written(static_cast<FileKind>(k)) - io_base_[k];
    s.total_written += s.written[k];
  }
  s.flushes = flushes_.load();
  s.compactions = compactions_.load();
  s.compaction_input_bytes = compaction_in_.load();
  s.compaction_output_bytes = compaction_out_.load();
  s.lsm_writes = lsm_writes_.load();
  s.trainings = trainings_.load();
  s.model_version = model_version_;
  s.model_calls = model_calls_.load();
  s.model_call_micros =
      s.model_calls == 0 ? 0.0
                         : static_cast<double>(model_call_nanos_.load()) / 1000.0 /
                               static_cast<double>(s.model_calls);
  s.compaction_samples = compaction_samples_.load();
  s.gc_samples = gc_samples_.load();
  s.samples_dropped = compaction_q_.dropped() + gc_q_.dropped();
  s.dataset_builds = builder_.builds();
  s.resolve = registry_.resolve_stats();
  s.index_maps = registry_.map_count();
  for (const auto& m : registry_.Files()) {
    if (m.state != ValueFileState::kDead) ++s.value_files;
  }
  for (int l = 0; l < kNumLevels; ++l) s.tables_per_level[l] = version->levels[l].size();
  s.thresholds = monitor_.Current();
  s.gc_ratio = monitor_.gc_ratio();
  std::vector<std::string> names;
  if (env_->GetChildren(dir_, &names).ok()) {
    for (const std::string& name : names) {
      uint64_t size = 0;
      if (!env_->GetFileSize(dir_ + "/" + name, &size).ok()) continue;
      uint64_t n = 0;
      switch (ParseFileName(name, &n)) {
        case NameType::kSst: s.lsm_bytes += size; break;
        case NameType::kVlog: s.vlog_bytes += size; break;
        case NameType::kVmap: s.vmap_bytes += size; break;
        case NameType::kModel: s.model_file_bytes = size; break;
        default: break;
      }
      s.total_size += size;
    }
  }
  return s;
}

std::vector<TimelinePoint> DBImpl::Timeline() const {
  std::lock_guard<std::mutex> l(mu_);
  return timeline_;
}

Status DBImpl::CheckLsm(LsmCheck* check) {
  *check = LsmCheck{};
  const ReadView view = View();
  check->non_overlap = view.version->CheckNonOverlap();
  for (const auto& level : view.version->levels) {
    for (const auto& t : level) {
      const TableReader& r = *t->reader;
      for (size_t i = 0; i < r.size(); ++i) {
        const TableEntry e = r.At(i);
        ++check->entries;
        if (e.kind != EntryKind::kPut || !IsSeparated(e.value)) continue;
        ++check->separated;
        SeparatedView sv;
        LIFEKV_RETURN_IF_ERROR(DecodeSeparatedView(e.value, &sv));
        LsmValue v;
        LIFEKV_RETURN_IF_ERROR(DecodeLsmValue(e.value, config_.feature_encoding, &v));
        check->max_feature_bytes = std::max<uint64_t>(check->max_feature_bytes,
                                                      sv.feature_bytes.size());
        check->max_deltas = std::max<uint64_t>(check->max_deltas, v.features.deltas.size());
      }
    }
  }
  return Status::OK();
}

}  // namespace lifekv
