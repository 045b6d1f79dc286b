#ifndef LIFEKV_ENGINE_DB_IMPL_H_
#define LIFEKV_ENGINE_DB_IMPL_H_

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include "lifekv/engine/db.h"
#include "lifekv/engine/manifest.h"
#include "lifekv/engine/wal.h"
#include "lifekv/learn/samples.h"
#include "lifekv/lsm/compaction.h"
#include "lifekv/lsm/memtable.h"
#include "lifekv/lsm/version.h"
#include "lifekv/vlog/gc.h"

namespace lifekv {

class DBImpl final : public DB {
 public:
  DBImpl(const EngineConfig& config, std::string dir, Env* env);
  ~DBImpl() override;

  Status Recover();

  Status Put(std::string_view key, std::string_view value) override;
  Status Delete(std::string_view key) override;
  Status Get(std::string_view key, std::string* value) override;
  Status Scan(std::string_view start, std::string_view end,
              std::vector<std::pair<std::string, std::string>>* out) override;

  Status Flush() override;
  Status CompactUntilQuiet() override;
  Status ForceGc(size_t max_files) override;
  Status GcFiles(const std::vector<FileNumber>& files) override;
  Status MaintenanceTick(JobKind* ran) override;
  Status WaitForIdle() override;
  Status SyncWal() override;
  void SetTtlGcEnabled(bool enabled) override { ttl_gc_enabled_ = enabled; }
  Status EstimateGarbage(FileNumber file, size_t sample_n, uint64_t seed,
                         double* ratio) override;

  DbStats GetStats() override;
  std::vector<TimelinePoint> Timeline() const override;
  LifetimeThresholds Thresholds() const override { return monitor_.Current(); }
  std::shared_ptr<const LifetimeModel> Model() const override;
  std::vector<ValueFileMeta> ValueFiles() const override { return registry_.Files(); }
  Status CheckLsm(LsmCheck* check) override;

  Status Close() override;

 private:
  class GcHostImpl;

  struct ReadView {
    std::shared_ptr<Memtable> mem;
    std::shared_ptr<Memtable> imm;
    std::shared_ptr<const Version> version;
  };

  // Newest entry of `key`, from any source. When `with_value` is false,
  // memtable values are not copied.
  struct NewestEntry {
    bool found = false;
    bool raw = false;  // value_part holds the user value itself
    SequenceNumber seq = 0;
    EntryKind kind = EntryKind::kPut;
    std::string value_part;
  };

  ReadView View() const;
  // Requires mu_.
  void InstallVersionLocked(std::shared_ptr<const Version> v);
  void LookupNewest(const ReadView& view, std::string_view key, bool with_value,
                    NewestEntry* out) const;
  Status ReadValue(std::string_view key, const NewestEntry& e, std::string* value);

  Status Write(EntryKind kind, std::string_view key, std::string_view value);
  // Requires mu_.
  Status SwitchMemtable();
  void RunInlineMaintenance();
  void RecordBackgroundError(const Status& s);

  // Maintenance jobs; require maint_mu_.
  Status TickLocked(JobKind* ran);
  Status FlushImm();
  Status RunCompactionJob(bool* ran);
  Status RunGcJob(std::vector<ValueFileMeta> inputs);
  Status RetireMaps();
  Status ConsumeSamples();
  Status InstallModel(LifetimeModel model);
  Status CommitThresholds(const LifetimeThresholds& t);
  Status CommitEdit(ManifestEdit* edit);
  void AddTimeline(int cls, double ratio);

  std::vector<ValueFileMeta> PickExpired();
  FileNumber NewFileNumber() { return next_file_.fetch_add(1); }
  Status CrashPoint(std::string_view site) { return env_->CrashPoint(site); }

  void MaintenanceLoop();
  void TrainerLoop();

  Env* const env_;
  const std::string dir_;
  const EngineConfig config_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::shared_ptr<Memtable> mem_;
  std::shared_ptr<Memtable> imm_;
  FileNumber imm_log_ = 0;
  std::unique_ptr<WalWriter> wal_;
  std::shared_ptr<const Version> version_;
  // Replaced versions that readers may still hold; their value references
  // keep index maps alive.
  std::vector<std::weak_ptr<const Version>> old_versions_;
  std::shared_ptr<const LifetimeModel> model_;
  Status bg_error_;
  bool closed_ = false;
  bool shutting_down_ = false;
  std::vector<TimelinePoint> timeline_;
  std::optional<Dataset> pending_dataset_;
  bool training_busy_ = false;

  std::atomic<SequenceNumber> last_seq_{0};
  std::atomic<FileNumber> next_file_{1};
  std::atomic<FileNumber> next_value_file_{1};
  std::atomic<bool> ttl_gc_enabled_{true};

  // Serialises maintenance jobs and manifest commits.
  std::mutex maint_mu_;
  std::unique_ptr<ManifestWriter> manifest_;
  std::unique_ptr<ValueFileWriter> default_writer_;
  ValueFileMeta default_meta_;
  DatasetBuilder builder_;
  uint64_t consume_batches_ = 0;
  uint64_t model_version_ = 0;
  std::mt19937_64 rng_;

  ValueRegistry registry_;
  ValueFileCache cache_;
  LifetimeMonitor monitor_;
  SampleQueue compaction_q_;
  SampleQueue gc_q_;

  // Counters.
  std::array<uint64_t, kNumFileKinds> io_base_{};
  std::atomic<uint64_t> user_writes_{0};
  std::atomic<uint64_t> logical_bytes_{0};
  std::atomic<uint64_t> lsm_writes_{0};
  std::atomic<uint64_t> flushes_{0};
  std::atomic<uint64_t> compactions_{0};
  std::atomic<uint64_t> compaction_in_{0};
  std::atomic<uint64_t> compaction_out_{0};
  std::atomic<uint64_t> trainings_{0};
  std::atomic<uint64_t> model_calls_{0};
  std::atomic<uint64_t> model_call_nanos_{0};
  std::atomic<uint64_t> compaction_samples_{0};
  std::atomic<uint64_t> gc_samples_{0};
  DbStats gc_totals_;  // gc fields only; guarded by mu_

  std::thread maint_thread_;
  std::thread train_thread_;
};

}  // namespace lifekv

#endif  // LIFEKV_ENGINE_DB_IMPL_H_
