#include "lifekv/vlog/registry.h"

#include <algorithm>
#include <mutex>

namespace lifekv {

void ValueRegistry::PutFile(const ValueFileMeta& meta) {
  std::unique_lock l(mu_);
  files_[meta.file_no] = meta;
}

std::optional<ValueFileMeta> ValueRegistry::GetFile(FileNumber f) const {
  std::shared_lock l(mu_);
  auto it = files_.find(f);
  if (it == files_.end()) return std::nullopt;
  return it->second;
}

void ValueRegistry::MarkDead(FileNumber f) {
  std::unique_lock l(mu_);
  auto it = files_.find(f);
  if (it != files_.end()) it->second.state = ValueFileState::kDead;
}

void ValueRegistry::EraseFile(FileNumber f) {
  std::unique_lock l(mu_);
  files_.erase(f);
}

std::vector<ValueFileMeta> ValueRegistry::Files() const {
  std::shared_lock l(mu_);
  std::vector<ValueFileMeta> out;
  out.reserve(files_.size());
  for (const auto& [n, m] : files_) out.push_back(m);
  return out;
}

void ValueRegistry::AddMap(std::shared_ptr<const ValueIndexMap> map) {
  std::unique_lock l(mu_);
  for (FileNumber f : map->inputs()) covering_[f] = map->id();
  maps_[map->id()] = std::move(map);
}

void ValueRegistry::EraseMap(FileNumber id) {
  std::unique_lock l(mu_);
  auto it = maps_.find(id);
  if (it == maps_.end()) return;
  for (FileNumber f : it->second->inputs()) {
    auto c = covering_.find(f);
    if (c != covering_.end() && c->second == id) covering_.erase(c);
    auto file = files_.find(f);
    if (file != files_.end() && file->second.state == ValueFileState::kDead) files_.erase(file);
  }
  maps_.erase(it);
}

std::vector<std::shared_ptr<const ValueIndexMap>> ValueRegistry::Maps() const {
  std::shared_lock l(mu_);
  std::vector<std::shared_ptr<const ValueIndexMap>> out;
  for (const auto& [id, m] : maps_) out.push_back(m);
  return out;
}

size_t ValueRegistry::map_count() const {
  std::shared_lock l(mu_);
  return maps_.size();
}

Status ValueRegistry::Resolve(const ValueLocator& loc, ValueLocator* out, int* hops) const {
  std::shared_lock l(mu_);
  ValueLocator cur = loc;
  int n = 0;
  while (true) {
    auto it = files_.find(cur.file_no);
    if (it != files_.end() && it->second.state != ValueFileState::kDead) break;
    auto c = covering_.find(cur.file_no);
    if (c == covering_.end()) {
      if (it == files_.end()) {
        return Status::FileMissing("value file " + std::to_string(cur.file_no));
      }
      return Status::DanglingLocator("dead value file " + std::to_string(cur.file_no));
    }
    std::optional<ValueLocator> next = maps_.at(c->second)->Lookup(cur.file_no, cur.offset);
    if (!next.has_value()) {
      return Status::DanglingLocator("no map entry for " + std::to_string(cur.file_no) + "@" +
                                     std::to_string(cur.offset));
    }
    cur = *next;
    ++n;
  }
  resolves_.fetch_add(1, std::memory_order_relaxed);
  if (n > 0) {
    redirected_.fetch_add(1, std::memory_order_relaxed);
    total_hops_.fetch_add(static_cast<uint64_t>(n), std::memory_order_relaxed);
    uint64_t prev = max_hops_.load(std::memory_order_relaxed);
    while (static_cast<uint64_t>(n) > prev &&
           !max_hops_.compare_exchange_weak(prev, static_cast<uint64_t>(n))) {
    }
  }
  if (hops != nullptr) *hops = n;
  *out = cur;
  return Status::OK();
}

std::vector<ValueFileMeta> ValueRegistry::ExpiredFiles(SequenceNumber now) const {
  std::shared_lock l(mu_);
  std::vector<ValueFileMeta> out;
  for (const auto& [n, m] : files_) {
    if (m.Expired(now)) out.push_back(m);
  }
  std::sort(out.begin(), out.end(), [](const ValueFileMeta& a, const ValueFileMeta& b) {
    return a.created_seq + a.ttl != b.created_seq + b.ttl
               ? a.created_seq + a.ttl < b.created_seq + b.ttl
               : a.file_no < b.file_no;
  });
  return out;
}

std::vector<FileNumber> ValueRegistry::RetirableMaps(
    const std::set<FileNumber>& referenced) const {
  std::shared_lock l(mu_);
  std::set<FileNumber> alive;
  for (const auto& [id, m] : maps_) alive.insert(id);
  std::vector<FileNumber> retired;
  bool changed = true;
  while (changed) {
    changed = false;
    // Files that remaining maps redirect into.
    std::set<FileNumber> targeted;
    for (FileNumber id : alive) {
      for (const IndexMapEntry& e : maps_.at(id)->entries()) targeted.insert(e.target.file_no);
    }
    for (auto it = alive.begin(); it != alive.end();) {
      const ValueIndexMap& m = *maps_.at(*it);
      bool needed = false;
      for (FileNumber f : m.inputs()) {
        if (referenced.count(f) != 0 || targeted.count(f) != 0) {
          needed = true;
          break;
        }
      }
      if (!needed) {
        retired.push_back(*it);
        it = alive.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  std::sort(retired.begin(), retired.end());
  return retired;
}

uint64_t ValueRegistry::LiveBytes() const {
  std::shared_lock l(mu_);
  uint64_t sum = 0;
  for (const auto& [n, m] : files_) {
    if (m.state != ValueFileState::kDead) sum += m.bytes;
  }
  return sum;
}

ResolveStats ValueRegistry::resolve_stats() const {
  ResolveStats s;
  s.resolves = resolves_.load(std::memory_order_relaxed);
  s.redirected = redirected_.load(std::memory_order_relaxed);
  s.total_hops = total_hops_.load(std::memory_order_relaxed);
  s.max_hops = max_hops_.load(std::memory_order_relaxed);
  return s;
}

}  // namespace lifekv
