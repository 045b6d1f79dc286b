#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <thread>

#include "lifekv/engine/db.h"
#include "lifekv/engine/manifest.h"
#include "test_util.h"

namespace lifekv {
namespace {

using test::FaultInjectionEnv;
using test::TempDir;

EngineConfig SmallConfig() {
  EngineConfig c;
  c.memtable_bytes = 64 << 10;
  c.value_file_bytes = 128 << 10;
  c.min_separated_value_bytes = 64;
  c.sst_target_file_bytes = 32 << 10;
  c.level_unit_bytes = 64 << 10;
  c.maintenance = MaintenanceMode::kInline;
  c.dataset_threshold = 400;
  c.gbdt.num_trees = 6;
  c.gbdt.min_samples_leaf = 5;
  c.lifetime.initial_default_ttl = 3000;
  return c;
}

std::string Key(uint64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "key%08llu", static_cast<unsigned long long>(i));
  return buf;
}

std::string Value(uint64_t key, uint64_t version, size_t size) {
  std::string v = Key(key) + "@" + std::to_string(version) + ":";
  v.resize(std::max(size, v.size()), static_cast<char>('a' + (key + version) % 26));
  return v;
}

using Shadow = std::map<std::string, std::string>;

void ExpectMatches(DB* db, const Shadow& shadow, uint64_t key_space,
                   const std::optional<std::string>& uncertain = std::nullopt,
                   const std::optional<std::string>& uncertain_new = std::nullopt) {
  for (uint64_t i = 0; i < key_space; ++i) {
    const std::string k = Key(i);
    std::string got;
    Status s = db->Get(k, &got);
    auto it = shadow.find(k);
    if (uncertain.has_value() && *uncertain == k) {
      const bool old_ok = it == shadow.end() ? s.IsNotFound() : (s.ok() && got == it->second);
      const bool new_ok = uncertain_new.has_value() ? (s.ok() && got == *uncertain_new)
                                                    : s.IsNotFound();
      EXPECT_TRUE(old_ok || new_ok) << k << " " << s.ToString();
      continue;
    }
    if (it == shadow.end()) {
      EXPECT_TRUE(s.IsNotFound()) << k << " " << s.ToString();
    } else {
      ASSERT_TRUE(s.ok()) << k << " " << s.ToString();
      EXPECT_EQ(got, it->second) << k;
    }
  }
}

TEST(DbTest, PutGetDeleteScan) {
  TempDir dir;
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(SmallConfig(), dir.path(), &db).ok());
  ASSERT_TRUE(db->Put("a", "1").ok());
  ASSERT_TRUE(db->Put("b", std::string(500, 'b')).ok());
  ASSERT_TRUE(db->Put("c", "3").ok());
  ASSERT_TRUE(db->Delete("c").ok());
  std::string v;
  EXPECT_TRUE(db->Get("a", &v).ok());
  EXPECT_EQ(v, "1");
  EXPECT_TRUE(db->Get("c", &v).IsNotFound());
  EXPECT_TRUE(db->Get("zz", &v).IsNotFound());
  ASSERT_TRUE(db->Flush().ok());
  ASSERT_TRUE(db->Put("a", "11").ok());
  EXPECT_TRUE(db->Get("b", &v).ok());
  EXPECT_EQ(v, std::string(500, 'b'));
  std::vector<std::pair<std::string, std::string>> out;
  ASSERT_TRUE(db->Scan("a", "z", &out).ok());
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].first, "a");
  EXPECT_EQ(out[0].second, "11");
  EXPECT_EQ(out[1].first, "b");
  ASSERT_TRUE(db->Scan("b", "c", &out).ok());
  EXPECT_EQ(out.size(), 1u);
}

TEST(DbTest, LargeMemtableNeverFlushes) {
  TempDir dir;
  EngineConfig c = SmallConfig();
  c.memtable_bytes = 100ull << 20;
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
  for (uint64_t i = 0; i < 10000; ++i) ASSERT_TRUE(db->Put(Key(i), Value(i, 0, 100)).ok());
  const DbStats s = db->GetStats();
  EXPECT_EQ(s.flushes, 0u);
  EXPECT_EQ(s.tables_per_level[0], 0u);
  std::string v;
  ASSERT_TRUE(db->Get(Key(1234), &v).ok());
  EXPECT_EQ(v, Value(1234, 0, 100));
}

TEST(DbTest, SmallValuesStayInline) {
  TempDir dir;
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(SmallConfig(), dir.path(), &db).ok());
  for (uint64_t i = 0; i < 2000; ++i) ASSERT_TRUE(db->Put(Key(i), Value(i, 0, 32)).ok());
  ASSERT_TRUE(db->Flush().ok());
  const DbStats s = db->GetStats();
  EXPECT_EQ(s.written[static_cast<int>(FileKind::kVlog)], 0u);
  EXPECT_EQ(s.vlog_bytes, 0u);
  std::string v;
  ASSERT_TRUE(db->Get(Key(7), &v).ok());
  EXPECT_EQ(v, Value(7, 0, 32));
}

TEST(DbTest, GcKeepsReadsAndNeverWritesBack) {
  TempDir dir;
  EngineConfig c = SmallConfig();
  c.lifetime.initial_default_ttl = uint64_t{1} << 40;
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
  Shadow shadow;
  for (int round = 0; round < 3; ++round) {
    for (uint64_t i = 0; i < 1500; ++i) {
      if (round > 0 && i % 3 != 0) continue;
      const std::string v = Value(i, round, 300);
      ASSERT_TRUE(db->Put(Key(i), v).ok());
      shadow[Key(i)] = v;
    }
  }
  ASSERT_TRUE(db->Flush().ok());
  ExpectMatches(db.get(), shadow, 1500);
  const DbStats before = db->GetStats();
  ASSERT_TRUE(db->ForceGc().ok());
  const DbStats after = db->GetStats();
  EXPECT_GT(after.gc_jobs, before.gc_jobs);
  EXPECT_GT(after.gc_invalid, 0u);
  EXPECT_GT(after.gc_valid, 0u);
  EXPECT_EQ(after.lsm_writes, before.lsm_writes);
  EXPECT_EQ(after.written[static_cast<int>(FileKind::kSst)],
            before.written[static_cast<int>(FileKind::kSst)]);
  ExpectMatches(db.get(), shadow, 1500);
  // Reads keep resolving after the tables are rewritten and maps retire.
  ASSERT_TRUE(db->CompactUntilQuiet().ok());
  ExpectMatches(db.get(), shadow, 1500);
  ASSERT_TRUE(db->Close().ok());
  db.reset();
  ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
  ExpectMatches(db.get(), shadow, 1500);
}

TEST(DbTest, MaintenanceTickPriority) {
  TempDir dir;
  EngineConfig c = SmallConfig();
  c.memtable_bytes = 1ull << 30;
  c.lifetime.initial_default_ttl = 100;
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
  uint64_t version = 0;
  for (int batch = 0; batch < 6; ++batch) {
    for (uint64_t i = 0; i < 800; ++i) {
      ASSERT_TRUE(db->Put(Key(i % 400), Value(i, ++version, 200)).ok());
    }
    ASSERT_TRUE(db->Flush().ok());
  }
  auto rank = [](JobKind k) {
    switch (k) {
      case JobKind::kFlush: return 0;
      case JobKind::kCompaction: return 1;
      case JobKind::kGc: return 2;
      case JobKind::kTraining: return 3;
      default: return 4;
    }
  };
  std::vector<JobKind> ran;
  for (int i = 0; i < 1000; ++i) {
    JobKind k = JobKind::kNone;
    ASSERT_TRUE(db->MaintenanceTick(&k).ok());
    ran.push_back(k);
    if (k == JobKind::kNone) break;
  }
  ASSERT_EQ(ran.back(), JobKind::kNone);
  EXPECT_EQ(ran.front(), JobKind::kCompaction);
  EXPECT_NE(std::find(ran.begin(), ran.end(), JobKind::kGc), ran.end());
  for (size_t i = 1; i < ran.size(); ++i) {
    EXPECT_LE(rank(ran[i - 1]), rank(ran[i])) << i;
  }
}

std::set<std::string> ListDir(const std::string& dir) {
  std::vector<std::string> names;
  EXPECT_TRUE(Env::Default()->GetChildren(dir, &names).ok());
  std::set<std::string> out;
  for (const std::string& n : names) {
    if (n.rfind("MANIFEST-", 0) == 0 || n.find(".wal") != std::string::npos) continue;
    out.insert(n);
  }
  return out;
}

TEST(DbTest, RecoveryIsIdempotent) {
  TempDir dir;
  EngineConfig c = SmallConfig();
  Shadow shadow;
  {
    std::unique_ptr<DB> db;
    ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
    std::mt19937_64 rng(3);
    for (uint64_t op = 0; op < 8000; ++op) {
      const uint64_t k = rng() % 700;
      if (rng() % 10 == 0) {
        ASSERT_TRUE(db->Delete(Key(k)).ok());
        shadow.erase(Key(k));
      } else {
        const std::string v = Value(k, op, 40 + rng() % 400);
        ASSERT_TRUE(db->Put(Key(k), v).ok());
        shadow[Key(k)] = v;
      }
    }
    ASSERT_TRUE(db->Close().ok());
  }
  std::set<std::string> files;
  std::vector<ValueFileMeta> metas;
  for (int round = 0; round < 4; ++round) {
    std::unique_ptr<DB> db;
    ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
    ExpectMatches(db.get(), shadow, 700);
    ASSERT_TRUE(db->Close().ok());
    std::vector<ValueFileMeta> m = db->ValueFiles();
    db.reset();
    // The first reopen flushes the replayed log; later ones change nothing.
    if (round >= 2) {
      EXPECT_EQ(ListDir(dir.path()), files) << round;
      ASSERT_EQ(m.size(), metas.size());
      for (size_t i = 0; i < m.size(); ++i) {
        EXPECT_EQ(m[i].file_no, metas[i].file_no);
        EXPECT_EQ(m[i].bytes, metas[i].bytes);
        EXPECT_EQ(m[i].state, metas[i].state);
      }
    }
    files = ListDir(dir.path());
    metas = m;
  }
}

TEST(DbTest, WalReplayWithoutClose) {
  TempDir dir;
  EngineConfig c = SmallConfig();
  c.sync_wal = true;
  FaultInjectionEnv env(Env::Default());
  Shadow shadow;
  {
    std::unique_ptr<DB> db;
    ASSERT_TRUE(DB::Open(c, dir.path(), &db, &env).ok());
    for (uint64_t i = 0; i < 3000; ++i) {
      const std::string v = Value(i % 900, i, 100);
      ASSERT_TRUE(db->Put(Key(i % 900), v).ok());
      shadow[Key(i % 900)] = v;
    }
    env.Crash();
  }
  env.DropUnsyncedData();
  env.Revive();
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(c, dir.path(), &db, &env).ok());
  ExpectMatches(db.get(), shadow, 900);
}

// Deterministic workload used by the crash tests. Returns the index of the
// failing op, or ops when everything succeeded.
struct CrashWorkload {
  static constexpr uint64_t kKeys = 300;
  static constexpr uint64_t kOps = 6000;

  static EngineConfig Config() {
    EngineConfig c = SmallConfig();
    c.sync_wal = true;
    c.memtable_bytes = 24 << 10;
    c.value_file_bytes = 48 << 10;
    c.dataset_threshold = 300;
    c.lifetime.initial_default_ttl = 800;
    return c;
  }

  // Applies ops until one fails. `shadow` holds acknowledged writes.
  static uint64_t Run(DB* db, Shadow* shadow, std::string* failed_key,
                      std::optional<std::string>* failed_value) {
    std::mt19937_64 rng(11);
    for (uint64_t op = 0; op < kOps; ++op) {
      const uint64_t k = rng() % kKeys;
      const bool del = rng() % 8 == 0;
      const std::string v = Value(k, op, 32 + rng() % 300);
      Status s = del ? db->Delete(Key(k)) : db->Put(Key(k), v);
      if (!s.ok()) {
        *failed_key = Key(k);
        if (del) {
          failed_value->reset();
        } else {
          *failed_value = v;
        }
        return op;
      }
      if (del) {
        shadow->erase(Key(k));
      } else {
        (*shadow)[Key(k)] = v;
      }
      if (op % 1500 == 1499) {
        s = db->ForceGc(2);
        if (!s.ok()) return op + 1;
      }
    }
    return kOps;
  }
};

TEST(DbCrashTest, EveryCrashPointRecovers) {
  FaultInjectionEnv probe_env(Env::Default());
  std::vector<std::string> sites;
  {
    TempDir dir;
    std::unique_ptr<DB> db;
    ASSERT_TRUE(DB::Open(CrashWorkload::Config(), dir.path(), &db, &probe_env).ok());
    Shadow shadow;
    std::string key;
    std::optional<std::string> value;
    ASSERT_EQ(CrashWorkload::Run(db.get(), &shadow, &key, &value), CrashWorkload::kOps);
    sites = probe_env.sites();
  }
  std::set<std::string> distinct(sites.begin(), sites.end());
  for (const char* need : {"flush.after_vlog", "flush.after_sst", "flush.after_manifest",
                           "compaction.after_output", "compaction.after_manifest",
                           "gc.after_map", "gc.after_manifest", "model.after_save",
                           "model.after_manifest", "open.after_manifest",
                           "open.after_current"}) {
    EXPECT_TRUE(distinct.count(need)) << need;
  }
  // First two hits of every site plus an even sample of the rest.
  std::set<uint64_t> hits;
  std::map<std::string, int> seen;
  for (size_t i = 0; i < sites.size(); ++i) {
    if (seen[sites[i]]++ < 2) hits.insert(i + 1);
  }
  const uint64_t stride = std::max<uint64_t>(1, sites.size() / 40);
  for (uint64_t h = 1; h <= sites.size(); h += stride) hits.insert(h);

  for (uint64_t hit : hits) {
    SCOPED_TRACE("crash at hit " + std::to_string(hit) + " " + sites[hit - 1]);
    TempDir dir;
    FaultInjectionEnv env(Env::Default());
    env.CrashAtHit(hit);
    Shadow shadow;
    std::string key;
    std::optional<std::string> value;
    {
      std::unique_ptr<DB> db;
      Status s = DB::Open(CrashWorkload::Config(), dir.path(), &db, &env);
      if (s.ok()) {
        (void)CrashWorkload::Run(db.get(), &shadow, &key, &value);
      }
      ASSERT_TRUE(env.crashed());
    }
    env.DropUnsyncedData();
    env.Revive();
    std::unique_ptr<DB> db;
    Status s = DB::Open(CrashWorkload::Config(), dir.path(), &db, &env);
    ASSERT_TRUE(s.ok()) << s.ToString();
    ExpectMatches(db.get(), shadow, CrashWorkload::kKeys,
                  key.empty() ? std::nullopt : std::optional<std::string>(key), value);
    LsmCheck check;
    ASSERT_TRUE(db->CheckLsm(&check).ok());
    EXPECT_TRUE(check.non_overlap);
    // Every value file on disk is known to the registry.
    std::set<FileNumber> live;
    for (const auto& m : db->ValueFiles()) {
      if (m.state != ValueFileState::kDead) live.insert(m.file_no);
    }
    std::vector<std::string> names;
    ASSERT_TRUE(Env::Default()->GetChildren(dir.path(), &names).ok());
    size_t vmaps = 0;
    for (const std::string& n : names) {
      if (n.size() > 5 && n.substr(n.size() - 5) == ".vlog") {
        EXPECT_TRUE(live.count(std::stoull(n))) << n;
      }
      if (n.size() > 5 && n.substr(n.size() - 5) == ".vmap") ++vmaps;
    }
    EXPECT_EQ(vmaps, db->GetStats().index_maps);
  }
}

TEST(DbCrashTest, OrphanGcOutputsAreDeleted) {
  FaultInjectionEnv probe_env(Env::Default());
  uint64_t gc_hit = 0;
  {
    TempDir dir;
    std::unique_ptr<DB> db;
    ASSERT_TRUE(DB::Open(CrashWorkload::Config(), dir.path(), &db, &probe_env).ok());
    Shadow shadow;
    std::string key;
    std::optional<std::string> value;
    CrashWorkload::Run(db.get(), &shadow, &key, &value);
    const auto sites = probe_env.sites();
    for (size_t i = 0; i < sites.size(); ++i) {
      if (sites[i] == "gc.after_map") {
        gc_hit = i + 1;
        break;
      }
    }
  }
  ASSERT_GT(gc_hit, 0u);
  TempDir dir;
  FaultInjectionEnv env(Env::Default());
  env.CrashAtHit(gc_hit);
  std::set<std::string> before;
  {
    std::unique_ptr<DB> db;
    ASSERT_TRUE(DB::Open(CrashWorkload::Config(), dir.path(), &db, &env).ok());
    Shadow shadow;
    std::string key;
    std::optional<std::string> value;
    CrashWorkload::Run(db.get(), &shadow, &key, &value);
    ASSERT_TRUE(env.crashed());
  }
  std::vector<std::string> names;
  ASSERT_TRUE(Env::Default()->GetChildren(dir.path(), &names).ok());
  size_t vmaps_before = 0;
  for (const auto& n : names) vmaps_before += n.find(".vmap") != std::string::npos;
  EXPECT_GE(vmaps_before, 1u);
  env.DropUnsyncedData();
  env.Revive();
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(CrashWorkload::Config(), dir.path(), &db, &env).ok());
  std::set<FileNumber> live;
  for (const auto& m : db->ValueFiles()) live.insert(m.file_no);
  ASSERT_TRUE(Env::Default()->GetChildren(dir.path(), &names).ok());
  size_t vmaps = 0;
  for (const auto& n : names) {
    if (n.find(".vlog") != std::string::npos) {
      EXPECT_TRUE(live.count(std::stoull(n))) << n;
    }
    vmaps += n.find(".vmap") != std::string::npos;
  }
  EXPECT_EQ(vmaps, db->GetStats().index_maps);
  EXPECT_LT(vmaps, vmaps_before);
}

TEST(DbTest, ModelSurvivesReopen) {
  TempDir dir;
  EngineConfig c = SmallConfig();
  Shadow shadow;
  uint64_t version = 0;
  std::string serialized;
  {
    std::unique_ptr<DB> db;
    ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
    std::mt19937_64 rng(5);
    for (uint64_t op = 0; op < 40000 && db->GetStats().trainings == 0; ++op) {
      const uint64_t k = rng() % 100 < 80 ? rng() % 50 : 50 + rng() % 2000;
      ASSERT_TRUE(db->Put(Key(k), Value(k, op, 200)).ok());
    }
    ASSERT_GE(db->GetStats().trainings, 1u);
    auto model = db->Model();
    ASSERT_NE(model, nullptr);
    version = model->version();
    serialized = model->Serialize();
    EXPECT_GE(version, 1u);
    EXPECT_TRUE(Env::Default()->FileExists(ModelFileName(dir.path(), version)));
    ASSERT_TRUE(db->Close().ok());
  }
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
  auto model = db->Model();
  ASSERT_NE(model, nullptr);
  EXPECT_EQ(model->version(), version);
  EXPECT_EQ(model->Serialize(), serialized);
  EXPECT_EQ(db->GetStats().model_version, version);
}

TEST(DbTest, FeatureBlocksStayBounded) {
  TempDir dir;
  EngineConfig c = SmallConfig();
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
  for (uint64_t op = 0; op < 30000; ++op) {
    ASSERT_TRUE(db->Put(Key(op % 20), Value(op % 20, op, 100)).ok());
    if (op % 500 == 499) {
      ASSERT_TRUE(db->Flush().ok());
    }
  }
  ASSERT_TRUE(db->CompactUntilQuiet().ok());
  LsmCheck check;
  ASSERT_TRUE(db->CheckLsm(&check).ok());
  EXPECT_TRUE(check.non_overlap);
  EXPECT_GT(check.separated, 0u);
  EXPECT_GT(check.max_deltas, 0u);
  EXPECT_LE(check.max_deltas, 32u);
  EXPECT_LE(check.max_feature_bytes, 1u + 8 * 32 + 40);
}

class ShadowOracleTest : public ::testing::TestWithParam<uint64_t> {};

TEST_P(ShadowOracleTest, MatchesMap) {
  const uint64_t seed = GetParam();
  TempDir dir;
  EngineConfig c = SmallConfig();
  c.seed = seed;
  const uint64_t kKeys = 2000;
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
  Shadow shadow;
  std::mt19937_64 rng(seed);
  for (uint64_t op = 0; op < 100000; ++op) {
    const uint64_t k = rng() % 4 == 0 ? rng() % kKeys : rng() % (kKeys / 20);
    const uint64_t r = rng() % 100;
    if (r < 8) {
      ASSERT_TRUE(db->Delete(Key(k)).ok());
      shadow.erase(Key(k));
    } else if (r < 20) {
      std::string got;
      const Status st = db->Get(Key(k), &got);
      auto it = shadow.find(Key(k));
      if (it == shadow.end()) {
        ASSERT_TRUE(st.IsNotFound()) << Key(k) << " " << st.ToString();
      } else {
        ASSERT_TRUE(st.ok()) << Key(k) << " " << st.ToString();
        ASSERT_EQ(got, it->second) << Key(k);
      }
    } else {
      // One put in five is large enough to be separated.
      const size_t size = rng() % 5 == 0 ? 64 + rng() % 2048 : 16 + rng() % 40;
      const std::string v = Value(k, op, size);
      ASSERT_TRUE(db->Put(Key(k), v).ok());
      shadow[Key(k)] = v;
    }
    if (op % 7919 == 7918) {
      ASSERT_TRUE(db->Flush().ok());
    }
    if (op % 20000 == 19999) {
      ASSERT_TRUE(db->ForceGc(3).ok());
    }
    if (op % 45000 == 44999) {
      ASSERT_TRUE(db->CompactUntilQuiet().ok());
    }
    if (op == 60000) {
      ASSERT_TRUE(db->Close().ok());
      db.reset();
      ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
    }
  }
  ExpectMatches(db.get(), shadow, kKeys);
  std::vector<std::pair<std::string, std::string>> scanned;
  ASSERT_TRUE(db->Scan("", "\xff", &scanned).ok());
  ASSERT_EQ(scanned.size(), shadow.size());
  size_t i = 0;
  for (const auto& [k, v] : shadow) {
    EXPECT_EQ(scanned[i].first, k);
    EXPECT_EQ(scanned[i].second, v);
    ++i;
  }
  const DbStats s = db->GetStats();
  EXPECT_GT(s.gc_jobs, 0u);
  EXPECT_GT(s.compactions, 0u);
}

INSTANTIATE_TEST_SUITE_P(Seeds, ShadowOracleTest, ::testing::Range<uint64_t>(1, 11));

TEST(DbTest, BackgroundTrainingDuringWrites) {
  TempDir dir;
  EngineConfig c = SmallConfig();
  c.maintenance = MaintenanceMode::kBackground;
  c.dataset_threshold = 2000;
  c.gbdt.num_trees = 16;
  std::unique_ptr<DB> db;
  ASSERT_TRUE(DB::Open(c, dir.path(), &db).ok());
  std::atomic<bool> stop{false};
  std::atomic<uint64_t> read_errors{0};
  std::thread reader([&] {
    std::mt19937_64 rng(9);
    while (!stop) {
      std::string v;
      Status s = db->Get(Key(rng() % 3000), &v);
      if (!s.ok() && !s.IsNotFound()) {
        if (read_errors++ == 0) ADD_FAILURE() << s.ToString();
      }
    }
  });
  Shadow shadow;
  std::mt19937_64 rng(8);
  for (uint64_t op = 0; op < 120000; ++op) {
    const uint64_t k = rng() % 100 < 70 ? rng() % 100 : rng() % 3000;
    const std::string v = Value(k, op, 150);
    ASSERT_TRUE(db->Put(Key(k), v).ok());
    shadow[Key(k)] = v;
  }
  ASSERT_TRUE(db->WaitForIdle().ok());
  stop = true;
  reader.join();
  EXPECT_EQ(read_errors.load(), 0u);
  EXPECT_GE(db->GetStats().trainings, 1u);
  ExpectMatches(db.get(), shadow, 3000);
}

}  // namespace
}  // namespace lifekv
