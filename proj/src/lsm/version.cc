#include "lifekv/lsm/version.h"

#include <algorithm>
#include <limits>

namespace lifekv {

std::optional<LookupResult> Version::Get(std::string_view key, SequenceNumber snapshot,
                                         int from_level) const {
  for (int level = from_level; level < kNumLevels; ++level) {
    const auto& tables = levels[level];
    if (level == 0) {
      for (auto it = tables.rbegin(); it != tables.rend(); ++it) {
        const TableRef& t = *it;
        if (key < t->smallest || t->largest < key) continue;
        if (auto e = t->reader->Get(key, snapshot)) return LookupResult{*e, 0, t};
      }
      continue;
    }
    auto it = std::lower_bound(tables.begin(), tables.end(), key,
                               [](const TableRef& t, std::string_view k) { return t->largest < k; });
    if (it == tables.end() || key < (*it)->smallest) continue;
    if (auto e = (*it)->reader->Get(key, snapshot)) return LookupResult{*e, level, *it};
  }
  return std::nullopt;
}

uint64_t Version::LevelBytes(int level) const {
  uint64_t sum = 0;
  for (const auto& t : levels[level]) sum += t->file_size;
  return sum;
}

uint64_t Version::TotalBytes() const {
  uint64_t sum = 0;
  for (int l = 0; l < kNumLevels; ++l) sum += LevelBytes(l);
  return sum;
}

size_t Version::TableCount() const {
  size_t n = 0;
  for (const auto& l : levels) n += l.size();
  return n;
}

std::set<FileNumber> Version::ReferencedValueFiles() const {
  std::set<FileNumber> out;
  for (const auto& l : levels) {
    for (const auto& t : l) out.insert(t->refs.begin(), t->refs.end());
  }
  return out;
}

std::vector<TableRef> Version::Overlapping(int level, std::string_view lo,
                                           std::string_view hi) const {
  std::vector<TableRef> out;
  for (const auto& t : levels[level]) {
    if (t->Overlaps(lo, hi)) out.push_back(t);
  }
  return out;
}

bool Version::CheckNonOverlap() const {
  for (int level = 1; level < kNumLevels; ++level) {
    const auto& tables = levels[level];
    for (size_t i = 0; i < tables.size(); ++i) {
      if (tables[i]->largest < tables[i]->smallest) return false;
      if (i > 0 && !(tables[i - 1]->largest < tables[i]->smallest)) return false;
    }
  }
  return true;
}

uint64_t LevelTargetBytes(const EngineConfig& config, int level) {
  long double target = static_cast<long double>(config.level_unit_bytes);
  for (int i = 0; i < level; ++i) target *= config.level_fanout;
  if (target > static_cast<long double>(std::numeric_limits<uint64_t>::max())) {
    return std::numeric_limits<uint64_t>::max();
  }
  return static_cast<uint64_t>(target);
}

namespace {

void KeyRange(const std::vector<TableRef>& tables, std::string* lo, std::string* hi) {
  for (size_t i = 0; i < tables.size(); ++i) {
    if (i == 0 || tables[i]->smallest < *lo) *lo = tables[i]->smallest;
    if (i == 0 || *hi < tables[i]->largest) *hi = tables[i]->largest;
  }
}

}  // namespace

std::optional<CompactionJob> PickCompaction(const Version& v, const EngineConfig& config) {
  if (static_cast<int>(v.levels[0].size()) >= config.l0_compaction_trigger) {
    CompactionJob job;
    job.level = 0;
    job.inputs = v.levels[0];
    std::string lo, hi;
    KeyRange(job.inputs, &lo, &hi);
    job.next_inputs = v.Overlapping(1, lo, hi);
    return job;
  }
  for (int level = 1; level + 1 < kNumLevels; ++level) {
    if (v.levels[level].empty() || v.LevelBytes(level) <= LevelTargetBytes(config, level)) {
      continue;
    }
    const auto& tables = v.levels[level];
    TableRef victim = *std::min_element(
        tables.begin(), tables.end(),
        [](const TableRef& a, const TableRef& b) { return a->file_no < b->file_no; });
    CompactionJob job;
    job.level = level;
    job.inputs = {victim};
    job.next_inputs = v.Overlapping(level + 1, victim->smallest, victim->largest);
    return job;
  }
  return std::nullopt;
}

std::shared_ptr<Version> ApplyCompaction(const Version& base, const CompactionJob& job,
                                         const std::vector<TableRef>& outputs) {
  auto v = std::make_shared<Version>(base);
  std::set<FileNumber> removed;
  for (const auto& t : job.inputs) removed.insert(t->file_no);
  for (const auto& t : job.next_inputs) removed.insert(t->file_no);
  for (int level : {job.level, job.output_level()}) {
    auto& tables = v->levels[level];
    tables.erase(std::remove_if(tables.begin(), tables.end(),
                                [&](const TableRef& t) { return removed.count(t->file_no) > 0; }),
                 tables.end());
  }
  auto& out = v->levels[job.output_level()];
  out.insert(out.end(), outputs.begin(), outputs.end());
  std::sort(out.begin(), out.end(),
            [](const TableRef& a, const TableRef& b) { return a->smallest < b->smallest; });
  return v;
}

}  // namespace lifekv
