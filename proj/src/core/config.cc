#include "lifekv/core/config.h"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lifekv {

NLOHMANN_JSON_SERIALIZE_ENUM(FeatureEncoding, {
                                                  {FeatureEncoding::kFixed, "fixed"},
                                                  {FeatureEncoding::kCompact, "compact"},
                                              })

NLOHMANN_JSON_SERIALIZE_ENUM(MaintenanceMode, {
                                                  {MaintenanceMode::kInline, "inline"},
                                                  {MaintenanceMode::kBackground, "background"},
                                              })

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LifetimeParams, alpha_s, alpha_l, beta0,
                                                beta1, ini_sp0, ini_sp1, ini_lp0, ini_lp1,
                                                initial_default_ttl, gc_ratio_weight,
                                                recompute_every_batches)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GbdtParams, num_trees, max_leaves,
                                                min_samples_leaf, learning_rate,
                                                histogram_bins, l2_reg)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    EngineConfig, memtable_bytes, value_file_bytes, min_separated_value_bytes,
    sst_target_file_bytes, level_unit_bytes, level_fanout, l0_compaction_trigger,
    max_deltas, edwc_count, dataset_threshold, sample_queue_capacity, feature_encoding,
    gc_edwc_plus_one, gc_label_inverted, use_model, wal_enabled, sync_wal,
    maintenance, gc_max_files_per_job, vlog_reader_cache, dump_dataset_csv, seed,
    lifetime, gbdt)

Status EngineConfig::Validate() const {
  if (memtable_bytes == 0 || value_file_bytes == 0 || min_separated_value_bytes == 0 ||
      sst_target_file_bytes == 0 || level_unit_bytes == 0) {
    return Status::InvalidArgument("byte sizes must be positive");
  }
  if (max_deltas < 0 || max_deltas > 32) {
    return Status::InvalidArgument("max_deltas must be in [0, 32]");
  }
  if (edwc_count < 1 || edwc_count > 10) {
    return Status::InvalidArgument("edwc_count must be in [1, 10]");
  }
  if (level_fanout < 2) return Status::InvalidArgument("level_fanout must be >= 2");
  if (l0_compaction_trigger < 1) {
    return Status::InvalidArgument("l0_compaction_trigger must be >= 1");
  }
  if (dataset_threshold < 2) return Status::InvalidArgument("dataset_threshold too small");
  if (sample_queue_capacity == 0) return Status::InvalidArgument("empty sample queue");
  if (gc_max_files_per_job == 0) return Status::InvalidArgument("gc job needs files");
  const LifetimeParams& lp = lifetime;
  if (!(0.0 < lp.beta0 && lp.beta0 < lp.beta1 && lp.beta1 < 1.0)) {
    return Status::InvalidArgument("need 0 < beta0 < beta1 < 1");
  }
  if (lp.ini_sp0 < 0 || lp.ini_sp1 < 0 || lp.ini_sp0 + lp.ini_sp1 > 100 ||
      lp.ini_lp0 < 0 || lp.ini_lp1 < 0 || lp.ini_lp0 + lp.ini_lp1 > 100) {
    return Status::InvalidArgument("initial percentages must sum to <= 100");
  }
  if (lp.initial_default_ttl == 0) return Status::InvalidArgument("zero initial ttl");
  if (!(lp.gc_ratio_weight > 0.0 && lp.gc_ratio_weight <= 1.0)) {
    return Status::InvalidArgument("gc_ratio_weight must be in (0, 1]");
  }
  if (lp.recompute_every_batches < 1) {
    return Status::InvalidArgument("recompute_every_batches must be >= 1");
  }
  const GbdtParams& gp = gbdt;
  if (gp.num_trees < 1 || gp.max_leaves < 2 || gp.min_samples_leaf < 1 ||
      !(gp.learning_rate > 0) || gp.histogram_bins < 2 || gp.histogram_bins > 255 ||
      !(gp.l2_reg > 0)) {
    return Status::InvalidArgument("gbdt parameters must be positive");
  }
  return Status::OK();
}

std::string EngineConfig::ToJson() const {
  nlohmann::json j = *this;
  return j.dump(2);
}

Status EngineConfig::FromJson(const std::string& text, EngineConfig* out) {
  try {
    nlohmann::json merged = *out;
    merged.merge_patch(nlohmann::json::parse(text));
    *out = merged.get<EngineConfig>();
  } catch (const nlohmann::json::exception& e) {
    return Status::InvalidArgument(std::string("bad config json: ") + e.what());
  }
  return out->Validate();
}

Status EngineConfig::FromJsonFile(const std::string& path, EngineConfig* out) {
  std::ifstream in(path);
  if (!in) return Status::IOError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str(), out);
}

namespace {

std::string EnvName(const std::string& prefix, const std::string& key) {
  std::string name = prefix;
  for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

// Overwrites scalar members of `obj` from LIFEKV_* variables, recursing into
// nested objects with the member name appended to the prefix.
void ApplyOverrides(nlohmann::json& obj, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (it->is_object()) {
      ApplyOverrides(*it, EnvName(prefix, it.key()) + "_");
      continue;
    }
    const char* raw = std::getenv(EnvName(prefix, it.key()).c_str());
    if (raw == nullptr) continue;
    std::string text = raw;
    if (it->is_string()) {
      *it = text;
    } else if (it->is_boolean()) {
      *it = (text == "1" || text == "true" || text == "on");
    } else {
      *it = nlohmann::json::parse(text);
    }
  }
}

}  // namespace

Status EngineConfig::ApplyEnvironment() {
  if (const char* path = std::getenv("LIFEKV_CONFIG")) {
    LIFEKV_RETURN_IF_ERROR(FromJsonFile(path, this));
  }
  try {
    nlohmann::json j = *this;
    ApplyOverrides(j, "LIFEKV_");
    *this = j.get<EngineConfig>();
  } catch (const nlohmann::json::exception& e) {
    return Status::InvalidArgument(std::string("bad LIFEKV_ override: ") + e.what());
  }
  return Validate();
}

}  // namespace lifekv
