#include "lifekv/bench/bench.h"

#include <chrono>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace lifekv::bench {

std::string GcPolicy::Name() const {
  switch (kind) {
    case PolicyKind::kLearned: return "learned";
    case PolicyKind::kNoModel: return "nomodel";
    case PolicyKind::kRatioTrigger: {
      std::ostringstream os;
      os << "ratio:" << threshold;
      return os.str();
    }
  }
  return "unknown";
}

Status ParseGcPolicy(const std::string& text, GcPolicy* out) {
  *out = GcPolicy{};
  if (text == "learned") {
    out->kind = PolicyKind::kLearned;
    return Status::OK();
  }
  if (text == "nomodel") {
    out->kind = PolicyKind::kNoModel;
    return Status::OK();
  }
  if (text.rfind("ratio:", 0) == 0) {
    const std::string arg = text.substr(6);
    char* end = nullptr;
    const double t = std::strtod(arg.c_str(), &end);
    if (arg.empty() || end != arg.c_str() + arg.size() || !(t > 0.0 && t <= 1.0)) {
      return Status::InvalidArgument("ratio threshold must be in (0, 1]: " + arg);
    }
    out->kind = PolicyKind::kRatioTrigger;
    out->threshold = t;
    return Status::OK();
  }
  return Status::InvalidArgument("unknown policy: " + text);
}

EngineConfig DeskConfig(uint64_t op_count) {
  EngineConfig c;
  c.memtable_bytes = 8ull << 20;
  c.value_file_bytes = 32ull << 20;
  c.wal_enabled = false;
  c.maintenance = MaintenanceMode::kInline;
  c.lifetime.initial_default_ttl = std::max<uint64_t>(1, op_count / 5);
  return c;
}

double BenchReport::SteadyStateLongThreshold() const {
  std::vector<uint64_t> rows;
  for (const TimelinePoint& p : timeline) {
    if (p.cls == -1) rows.push_back(p.l_l);
  }
  if (rows.empty()) return static_cast<double>(final_thresholds.l_l);
  const size_t begin = rows.size() / 2;
  double sum = 0.0;
  for (size_t i = begin; i < rows.size(); ++i) sum += static_cast<double>(rows[i]);
  return sum / static_cast<double>(rows.size() - begin);
}

std::string BenchReport::ToJson() const {
  nlohmann::ordered_json j;
  j["policy"] = policy;
  j["workload"] = {{"distribution", distribution}, {"theta", theta},       {"keys", keys},
                   {"ops", ops},                   {"value_size", value_size}, {"seed", seed}};
  j["inline_values"] = inline_values;
  j["completed"] = completed;
  if (!error.empty()) j["error"] = error;
  j["logical_bytes_written"] = logical_bytes_written;
  j["total_bytes_written"] = total_bytes_written;
  nlohmann::ordered_json kinds;
  for (int k = 0; k < kNumFileKinds; ++k) {
    kinds[FileKindName(static_cast<FileKind>(k))] = bytes_written_by_kind[k];
  }
  j["bytes_written_by_kind"] = kinds;
  j["write_amplification"] = write_amplification;
  j["final_total_size"] = final_total_size;
  j["final_lsm_size"] = final_lsm_size;
  j["final_vlog_size"] = final_vlog_size;
  j["seconds"] = seconds;
  j["throughput_ops"] = throughput_ops;
  j["flushes"] = flushes;
  j["compactions"] = compactions;
  j["gc"] = {{"jobs", gc_jobs}, {"scanned", gc_scanned}, {"invalid", gc_invalid},
             {"garbage_estimates", garbage_estimates}};
  nlohmann::ordered_json classes;
  for (int c = 0; c < kNumValueClasses; ++c) {
    classes[ValueClassName(static_cast<ValueClass>(c))] = {
        {"scanned", class_scanned[c]},
        {"invalid_ratio", class_invalid_ratio[c]},
        {"relocated_bytes", relocated_bytes[c]}};
  }
  j["gc_classes"] = classes;
  j["model"] = {{"trainings", trainings},
                {"calls", model_calls},
                {"mean_call_micros", model_call_micros},
                {"file_bytes", model_file_bytes},
                {"compaction_samples", compaction_samples},
                {"gc_samples", gc_samples}};
  j["features"] = {{"max_bytes", max_feature_bytes}, {"max_deltas", max_deltas}};
  j["thresholds"] = {{"l_d", final_thresholds.l_d},
                     {"l_s", final_thresholds.l_s},
                     {"l_l", final_thresholds.l_l},
                     {"steady_state_l_l", SteadyStateLongThreshold()}};
  j["timeline_rows"] = timeline.size();
  return j.dump(2) + "\n";
}

Status WriteTimelineCsv(Env* env, const std::vector<TimelinePoint>& timeline,
                        const std::string& path) {
  std::string out = "seq,l_d,l_s,l_l,class,gc_invalid_ratio\n";
  char line[160];
  for (const TimelinePoint& p : timeline) {
    const char* cls = p.cls < 0 ? "thresholds" : ValueClassName(static_cast<ValueClass>(p.cls));
    std::snprintf(line, sizeof(line), "%llu,%llu,%llu,%llu,%s,%.6f\n",
                  static_cast<unsigned long long>(p.seq),
                  static_cast<unsigned long long>(p.l_d),
                  static_cast<unsigned long long>(p.l_s),
                  static_cast<unsigned long long>(p.l_l), cls, p.ratio);
    out += line;
  }
  return WriteStringToFile(env, out, path, FileKind::kOther, false);
}

namespace {

Status RatioSweep(DB* db, const GcPolicy& policy, uint64_t seed, uint64_t max_files,
                  BenchReport* report) {
  std::vector<FileNumber> picked;
  for (const ValueFileMeta& m : db->ValueFiles()) {
    if (m.state != ValueFileState::kSealed) continue;
    double ratio = 0.0;
    LIFEKV_RETURN_IF_ERROR(db->EstimateGarbage(m.file_no, policy.sample_n, seed + m.file_no,
                                               &ratio));
    ++report->garbage_estimates;
    if (ratio >= policy.threshold) picked.push_back(m.file_no);
    if (picked.size() >= max_files) break;
  }
  if (picked.empty()) return Status::OK();
  return db->GcFiles(picked);
}

void FillFromStats(const DbStats& s, BenchReport* r) {
  r->logical_bytes_written = s.logical_bytes;
  r->total_bytes_written = s.total_written;
  r->bytes_written_by_kind = s.written;
  r->write_amplification =
      s.logical_bytes == 0 ? 0.0
                           : static_cast<double>(s.total_written) /
                                 static_cast<double>(s.logical_bytes);
  r->final_total_size = s.total_size;
  r->final_lsm_size = s.lsm_bytes;
  r->final_vlog_size = s.vlog_bytes;
  r->flushes = s.flushes;
  r->compactions = s.compactions;
  r->gc_jobs = s.gc_jobs;
  r->gc_scanned = s.gc_scanned;
  r->gc_invalid = s.gc_invalid;
  for (int c = 0; c < kNumValueClasses; ++c) {
    r->class_scanned[c] = s.gc_class_scanned[c];
    r->class_invalid_ratio[c] =
        s.gc_class_scanned[c] == 0 ? 0.0
                                   : static_cast<double>(s.gc_class_invalid[c]) /
                                         static_cast<double>(s.gc_class_scanned[c]);
    r->relocated_bytes[c] = s.gc_relocated_bytes[c];
  }
  r->trainings = s.trainings;
  r->model_calls = s.model_calls;
  r->model_call_micros = s.model_call_micros;
  r->model_file_bytes = s.model_file_bytes;
  r->compaction_samples = s.compaction_samples;
  r->gc_samples = s.gc_samples;
  r->final_thresholds = s.thresholds;
}

}  // namespace

Status RunBench(const BenchOptions& options, BenchReport* report) {
  *report = BenchReport{};
  const WorkloadSpec& w = options.workload;
  LIFEKV_RETURN_IF_ERROR(w.Validate());
  report->policy = options.policy.Name();
  report->distribution = w.distribution == Distribution::kZipfian ? "zipfian" : "uniform";
  report->theta = w.theta;
  report->keys = w.key_count;
  report->ops = w.op_count;
  report->value_size = w.value_size;
  report->seed = w.seed;

  std::unique_ptr<Env> owned;
  Env* env = options.env;
  if (env == nullptr) {
    owned = NewPosixEnv();
    env = owned.get();
  }
  if (env->FileExists(options.dir)) {
    std::vector<std::string> names;
    LIFEKV_RETURN_IF_ERROR(env->GetChildren(options.dir, &names));
    if (!names.empty()) return Status::InvalidArgument("bench dir not empty: " + options.dir);
  }

  EngineConfig config = options.config;
  if (options.policy.kind != PolicyKind::kLearned) config.use_model = false;
  report->inline_values = config.min_separated_value_bytes == UINT64_MAX;

  std::unique_ptr<DB> db;
  LIFEKV_RETURN_IF_ERROR(DB::Open(config, options.dir, &db, env));
  const bool ratio = options.policy.kind == PolicyKind::kRatioTrigger;
  if (ratio) db->SetTtlGcEnabled(false);
  const uint64_t check_every =
      options.policy.check_every_ops != 0
          ? options.policy.check_every_ops
          : std::max<uint64_t>(1, config.value_file_bytes / std::max<uint32_t>(1, w.value_size));

  const auto start = std::chrono::steady_clock::now();
  WorkloadGenerator gen(w);
  Op op;
  Status s;
  while (s.ok() && gen.Next(&op)) {
    s = db->Put(op.key, op.value);
    if (s.ok() && ratio && (op.index + 1) % check_every == 0) {
      s = RatioSweep(db.get(), options.policy, w.seed, config.gc_max_files_per_job, report);
    }
    if (options.progress_every != 0 && (op.index + 1) % options.progress_every == 0) {
      const DbStats p = db->GetStats();
      std::fprintf(stderr, "  %llu ops  wa=%.2f  size=%.1fMB  gc=%llu  trn=%llu\n",
                   static_cast<unsigned long long>(op.index + 1),
                   p.logical_bytes == 0 ? 0.0
                                        : static_cast<double>(p.total_written) /
                                              static_cast<double>(p.logical_bytes),
                   static_cast<double>(p.total_size) / 1048576.0,
                   static_cast<unsigned long long>(p.gc_jobs),
                   static_cast<unsigned long long>(p.trainings));
    }
  }
  if (s.ok()) s = db->Flush();
  if (s.ok()) s = db->WaitForIdle();
  const auto end = std::chrono::steady_clock::now();
  report->seconds = std::chrono::duration<double>(end - start).count();
  report->throughput_ops =
      report->seconds > 0 ? static_cast<double>(gen.produced()) / report->seconds : 0.0;

  FillFromStats(db->GetStats(), report);
  report->timeline = db->Timeline();
  LsmCheck check;
  if (s.ok()) s = db->CheckLsm(&check);
  report->max_feature_bytes = check.max_feature_bytes;
  report->max_deltas = check.max_deltas;
  Status c = db->Close();
  if (s.ok()) s = c;
  report->completed = s.ok();
  if (!s.ok()) report->error = s.ToString();

  if (!options.report_path.empty()) {
    Status r = WriteStringToFile(env, report->ToJson(), options.report_path, FileKind::kOther,
                                 false);
    if (s.ok()) s = r;
  }
  if (!options.timeline_path.empty()) {
    Status r = WriteTimelineCsv(env, report->timeline, options.timeline_path);
    if (s.ok()) s = r;
  }
  return s;
}

}  // namespace lifekv::bench
