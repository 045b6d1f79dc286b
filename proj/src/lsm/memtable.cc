#include "lifekv/lsm/memtable.h"

#include <mutex>

namespace lifekv {

void Memtable::Add(std::string_view key, SequenceNumber seq, EntryKind kind,
                   std::string_view value) {
  std::unique_lock l(mu_);
  table_.emplace(Key{std::string(key), seq}, MemEntry{seq, kind, std::string(value)});
  bytes_ += key.size() + value.size() + 48;
  if (seq > max_seq_) max_seq_ = seq;
}

std::optional<MemEntry> Memtable::Get(std::string_view key, SequenceNumber snapshot) const {
  std::shared_lock l(mu_);
  auto it = table_.lower_bound(Key{std::string(key), snapshot});
  if (it == table_.end() || it->first.user_key != key) return std::nullopt;
  return it->second;
}

size_t Memtable::ApproximateBytes() const {
  std::shared_lock l(mu_);
  return bytes_;
}

size_t Memtable::entries() const {
  std::shared_lock l(mu_);
  return table_.size();
}

SequenceNumber Memtable::max_seq() const {
  std::shared_lock l(mu_);
  return max_seq_;
}

std::vector<Memtable::Item> Memtable::NewestPerKey() const {
  std::shared_lock l(mu_);
  std::vector<Item> out;
  out.reserve(table_.size());
  for (const auto& [k, e] : table_) {
    if (!out.empty() && out.back().key == k.user_key) continue;
    out.push_back(Item{k.user_key, &e});
  }
  return out;
}

void Memtable::CollectRange(std::string_view start, std::string_view end,
                            std::map<std::string, MemEntry>* newest) const {
  std::shared_lock l(mu_);
  auto it = table_.lower_bound(Key{std::string(start), kMaxSequenceNumber});
  std::string_view last;
  bool have_last = false;
  for (; it != table_.end() && it->first.user_key < end; ++it) {
    if (have_last && it->first.user_key == last) continue;
    last = it->first.user_key;
    have_last = true;
    newest->emplace(it->first.user_key, it->second);
  }
}

}  // namespace lifekv
