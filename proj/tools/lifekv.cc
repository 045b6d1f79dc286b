// Command line front end: benchmark runs and database inspection.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lifekv/bench/bench.h"
#include "lifekv/engine/db.h"
#include "lifekv/engine/manifest.h"
#include "lifekv/learn/gbdt.h"

namespace {

using namespace lifekv;

int Fail(const Status& s) {
  std::fprintf(stderr, "error: %s\n", s.ToString().c_str());
  return 1;
}

struct BenchArgs {
  std::string workload = "zipfian";
  double theta = 0.9;
  uint64_t keys = 500000;
  uint64_t ops = 2000000;
  uint32_t value_size = 4096;
  std::string policy = "learned";
  uint64_t seed = 1;
  std::string dir;
  std::string out = "report.json";
  std::string timeline;
  std::string config;
  bool inline_values = false;
  uint64_t progress = 0;
};

int RunBenchCommand(const BenchArgs& a) {
  bench::BenchOptions o;
  Status s = bench::ParseDistribution(a.workload, &o.workload.distribution);
  if (!s.ok()) return Fail(s);
  o.workload.theta = a.theta;
  o.workload.key_count = a.keys;
  o.workload.op_count = a.ops;
  o.workload.value_size = a.value_size;
  o.workload.seed = a.seed;
  s = bench::ParseGcPolicy(a.policy, &o.policy);
  if (!s.ok()) return Fail(s);
  o.config = bench::DeskConfig(a.ops);
  if (!a.config.empty()) {
    s = EngineConfig::FromJsonFile(a.config, &o.config);
    if (!s.ok()) return Fail(s);
  }
  s = o.config.ApplyEnvironment();
  if (!s.ok()) return Fail(s);
  if (a.inline_values) o.config.min_separated_value_bytes = UINT64_MAX;
  o.dir = a.dir;
  o.report_path = a.out;
  o.timeline_path = a.timeline.empty() ? a.out + ".timeline.csv" : a.timeline;
  o.progress_every = a.progress;
  bench::BenchReport r;
  s = bench::RunBench(o, &r);
  std::fputs(r.ToJson().c_str(), stdout);
  return s.ok() ? 0 : Fail(s);
}

int DbStatsCommand(const std::string& dir) {
  EngineConfig c;
  c.maintenance = MaintenanceMode::kInline;
  c.wal_enabled = false;
  std::unique_ptr<DB> db;
  Status s = DB::Open(c, dir, &db);
  if (!s.ok()) return Fail(s);
  const DbStats st = db->GetStats();
  nlohmann::ordered_json j;
  j["last_seq"] = st.last_seq;
  j["tables_per_level"] = st.tables_per_level;
  j["lsm_bytes"] = st.lsm_bytes;
  j["vlog_bytes"] = st.vlog_bytes;
  j["vmap_bytes"] = st.vmap_bytes;
  j["total_size"] = st.total_size;
  j["value_files"] = st.value_files;
  j["index_maps"] = st.index_maps;
  j["model_version"] = st.model_version;
  j["model_file_bytes"] = st.model_file_bytes;
  j["thresholds"] = {{"l_d", st.thresholds.l_d},
                     {"l_s", st.thresholds.l_s},
                     {"l_l", st.thresholds.l_l},
                     {"s_idx", st.thresholds.s_idx},
                     {"l_idx", st.thresholds.l_idx}};
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const ValueFileMeta& m : db->ValueFiles()) {
    if (m.state == ValueFileState::kDead) continue;
    files.push_back({{"file", m.file_no},
                     {"class", ValueClassName(m.cls)},
                     {"created_seq", m.created_seq},
                     {"ttl", m.ttl},
                     {"records", m.records},
                     {"bytes", m.bytes}});
  }
  j["value_file_list"] = files;
  LsmCheck check;
  s = db->CheckLsm(&check);
  if (!s.ok()) return Fail(s);
  j["lsm_entries"] = check.entries;
  j["separated_entries"] = check.separated;
  j["max_feature_bytes"] = check.max_feature_bytes;
  j["levels_ordered"] = check.non_overlap;
  std::cout << j.dump(2) << "\n";
  return db->Close().ok() ? 0 : 1;
}

int ModelDumpCommand(const std::string& dir, bool full) {
  Env* env = Env::Default();
  std::string current;
  Status s = env->ReadFileToString(dir + "/CURRENT", &current);
  if (!s.ok()) return Fail(s);
  while (!current.empty() && (current.back() == '\n' || current.back() == '\r')) {
    current.pop_back();
  }
  ManifestState state;
  s = ReadManifest(env, dir + "/" + current, &state);
  if (!s.ok()) return Fail(s);
  if (state.model_version == 0) {
    std::cout << "{\"model_version\": 0}\n";
    return 0;
  }
  LifetimeModel model;
  s = LifetimeModel::Load(env, ModelFileName(dir, state.model_version), &model);
  if (!s.ok()) return Fail(s);
  if (full) {
    std::cout << model.Serialize();
    return 0;
  }
  const auto groups = model.GroupGains();
  nlohmann::ordered_json j;
  j["model_version"] = model.version();
  j["trained_at_seq"] = model.trained_at_seq();
  j["trees"] = model.num_trees();
  j["base_score"] = model.base_score();
  j["learning_rate"] = model.learning_rate();
  j["gain_by_group"] = {{"deltas", groups[0]}, {"edwcs", groups[1]}, {"value_size", groups[2]}};
  j["loss_trace"] = model.loss_trace();
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lifekv: key-value store with lifetime-aware value garbage collection"};
  app.require_subcommand(1);

  CLI::App* bench_cmd = app.add_subcommand("bench", "Benchmarks");
  bench_cmd->require_subcommand(1);
  CLI::App* run = bench_cmd->add_subcommand("run", "Stream a workload into a fresh database");
  BenchArgs ba;
  run->add_option("--workload", ba.workload, "zipfian | uniform")->capture_default_str();
  run->add_option("--theta", ba.theta, "Zipfian skew in [0, 1)")->capture_default_str();
  run->add_option("--keys", ba.keys, "Key space size")->capture_default_str();
  run->add_option("--ops", ba.ops, "Number of writes")->capture_default_str();
  run->add_option("--value-size", ba.value_size, "Value bytes")->capture_default_str();
  run->add_option("--policy", ba.policy, "learned | nomodel | ratio:<t>")->capture_default_str();
  run->add_option("--seed", ba.seed, "Workload seed")->capture_default_str();
  run->add_option("--dir", ba.dir, "Database directory (must be empty)")->required();
  run->add_option("--out", ba.out, "JSON report path")->capture_default_str();
  run->add_option("--timeline", ba.timeline, "CSV timeline path (default <out>.timeline.csv)");
  run->add_option("--config", ba.config, "Engine config JSON");
  run->add_flag("--inline-values", ba.inline_values, "Keep every value in the LSM-tree");
  run->add_option("--progress", ba.progress, "Print progress every N ops");

  CLI::App* db_cmd = app.add_subcommand("db", "Database inspection");
  db_cmd->require_subcommand(1);
  CLI::App* stats = db_cmd->add_subcommand("stats", "Print sizes, files and thresholds");
  std::string stats_dir;
  stats->add_option("--dir", stats_dir, "Database directory")->required();

  CLI::App* model_cmd = app.add_subcommand("model", "Model inspection");
  model_cmd->require_subcommand(1);
  CLI::App* dump = model_cmd->add_subcommand("dump", "Print the current model");
  std::string dump_dir;
  bool full = false;
  dump->add_option("--dir", dump_dir, "Database directory")->required();
  dump->add_flag("--full", full, "Print every tree");

  CLI11_PARSE(app, argc, argv);
  if (run->parsed()) return RunBenchCommand(ba);
  if (stats->parsed()) return DbStatsCommand(stats_dir);
  if (dump->parsed()) return ModelDumpCommand(dump_dir, full);
  return 1;
}
