#include "lifekv/learn/samples.h"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace lifekv {

const char* SampleSourceName(SampleSource s) {
  return s == SampleSource::kCompaction ? "compaction" : "gc";
}

bool SampleQueue::Push(TrainingSample sample) {
  std::lock_guard<std::mutex> l(mu_);
  if (items_.size() >= capacity_) {
    ++dropped_;
    return false;
  }
  items_.push_back(std::move(sample));
  ++pushed_;
  return true;
}

std::vector<TrainingSample> SampleQueue::Drain() {
  std::deque<TrainingSample> taken;
  {
    std::lock_guard<std::mutex> l(mu_);
    taken.swap(items_);
  }
  return {std::make_move_iterator(taken.begin()), std::make_move_iterator(taken.end())};
}

size_t SampleQueue::size() const {
  std::lock_guard<std::mutex> l(mu_);
  return items_.size();
}

uint64_t SampleQueue::dropped() const {
  std::lock_guard<std::mutex> l(mu_);
  return dropped_;
}

uint64_t SampleQueue::pushed() const {
  std::lock_guard<std::mutex> l(mu_);
  return pushed_;
}

double CompactionSampleProbability(const Edwcs& edwcs, int s_idx, int l_idx) {
  const double den = edwcs[l_idx];
  if (den == 0.0) return 1.0;
  return std::clamp(static_cast<double>(edwcs[s_idx]) / den, 0.0, 1.0);
}

std::optional<int> LabelCompactionSample(uint64_t lifetime, uint64_t l_d, uint64_t l_s) {
  if (lifetime <= l_d) return std::nullopt;
  return lifetime - l_d > l_s ? 1 : 0;
}

int LabelGcSample(const FeatureBlock& block, int s_idx, bool inverted) {
  if (block.deltas.empty()) return 1;
  const float e = block.edwc_array()[s_idx];
  if (inverted) return e > 1.0f ? 1 : 0;
  return e <= 1.0f ? 1 : 0;
}

void Dataset::AddRow(const FeatureVector& v, int label, SampleSource source) {
  for (int s = 0; s < kNumFeatureSlots; ++s) {
    if (v.missing(s)) continue;
    slots_.push_back(static_cast<uint8_t>(s));
    values_.push_back(v.slots[s]);
  }
  row_offsets_.push_back(static_cast<uint32_t>(slots_.size()));
  labels_.push_back(label);
  sources_.push_back(source);
  ++counts_[static_cast<int>(source)];
  positives_ += label == 1 ? 1 : 0;
}

FeatureVector Dataset::Row(size_t row) const {
  FeatureVector v;
  for (uint32_t i = row_offsets_[row]; i < row_offsets_[row + 1]; ++i) {
    v.slots[slots_[i]] = values_[i];
  }
  return v;
}

Status Dataset::WriteCsv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) return Status::IOError("cannot write " + path);
  out << "label,source";
  for (int s = 0; s < kNumFeatureSlots; ++s) out << ",f" << s;
  out << '\n';
  char buf[32];
  for (size_t r = 0; r < rows(); ++r) {
    const FeatureVector v = Row(r);
    out << labels_[r] << ',' << SampleSourceName(sources_[r]);
    for (int s = 0; s < kNumFeatureSlots; ++s) {
      out << ',';
      if (v.missing(s)) continue;
      auto res = std::to_chars(buf, buf + sizeof(buf), v.slots[s]);
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  return out ? Status::OK() : Status::IOError("short write " + path);
}

void DatasetBuilder::Consume(std::vector<TrainingSample> samples,
                             const LifetimeThresholds& t, LifetimeHistogram* short_hist) {
  for (TrainingSample& s : samples) {
    std::optional<int> label;
    uint64_t elapsed = 0;
    if (s.source == SampleSource::kCompaction) {
      if (short_hist != nullptr) short_hist->Record(s.observed_lifetime);
      label = LabelCompactionSample(s.observed_lifetime, t.l_d, t.l_s);
      // The model is consulted when the first GC reaches a value, i.e. at
      // an age of about l_d.
      elapsed = t.l_d;
    } else {
      elapsed = s.observed_lifetime;
      // Write activity as seen at collection time.
      FeatureBlock now = s.features;
      if (now.edwcs.size() == static_cast<size_t>(kNumEdwcs)) {
        const Edwcs decayed = EdwcDecay(now.edwc_array(), elapsed);
        now.edwcs.assign(decayed.begin(), decayed.end());
      }
      label = LabelGcSample(now, t.s_idx, options_.gc_label_inverted);
    }
    if (!label.has_value()) {
      ++excluded_;
      continue;
    }
    s.label = label;
    auto& rows = rows_[static_cast<int>(s.source)];
    rows.push_back(Row{BuildFeatureVector(s.features, elapsed, options_.vector_options),
                       *label});
    while (rows.size() > cap()) rows.pop_front();
    ++labelled_since_build_;
  }
}

std::optional<Dataset> DatasetBuilder::Build() {
  if (!Ready()) return std::nullopt;
  Dataset d;
  for (int src = 0; src < 2; ++src) {
    for (const Row& r : rows_[src]) d.AddRow(r.vector, r.label, static_cast<SampleSource>(src));
    rows_[src].clear();
  }
  labelled_since_build_ = 0;
  ++builds_;
  return d;
}

}  // namespace lifekv
