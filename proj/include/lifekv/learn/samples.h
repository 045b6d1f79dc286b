#ifndef LIFEKV_LEARN_SAMPLES_H_
#define LIFEKV_LEARN_SAMPLES_H_

// Training-sample collection and labelling.
//
// Compaction samples carry the ground-truth lifetime of a key's previous
// version; GC samples carry the age of a still-valid value. Both are buffered
// in bounded queues, labelled by the maintenance worker and collected into a
// balanced dataset.

#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lifekv/core/status.h"
#include "lifekv/features/features.h"
#include "lifekv/lifetime/lifetime.h"

namespace lifekv {

enum class SampleSource : uint8_t { kCompaction = 0, kGc = 1 };

const char* SampleSourceName(SampleSource s);

struct TrainingSample {
  FeatureBlock features;
  uint64_t observed_lifetime = 0;
  SampleSource source = SampleSource::kCompaction;
  std::optional<int> label;
};

// Bounded FIFO. Push never blocks: when full the sample is dropped and
// counted.
class SampleQueue {
 public:
  explicit SampleQueue(size_t capacity) : capacity_(capacity) {}

  bool Push(TrainingSample sample);
  std::vector<TrainingSample> Drain();

  size_t size() const;
  uint64_t dropped() const;
  uint64_t pushed() const;
  size_t capacity() const { return capacity_; }

 private:
  const size_t capacity_;
  mutable std::mutex mu_;
  std::deque<TrainingSample> items_;
  uint64_t dropped_ = 0;
  uint64_t pushed_ = 0;
};

// p = edwcs[s_idx] / edwcs[l_idx]; 1 when the denominator is zero; clamped
// to [0, 1].
double CompactionSampleProbability(const Edwcs& edwcs, int s_idx, int l_idx);

// Empty when lifetime <= l_d; otherwise 1 iff lifetime - l_d > l_s.
std::optional<int> LabelCompactionSample(uint64_t lifetime, uint64_t l_d, uint64_t l_s);

// Once-written keys are long lived. Otherwise 1 iff edwcs[s_idx] <= 1, or
// iff edwcs[s_idx] > 1 when `inverted` is set.
int LabelGcSample(const FeatureBlock& block, int s_idx, bool inverted = false);

// Sparse row-major dataset. Only present slots are stored.
class Dataset {
 public:
  void AddRow(const FeatureVector& v, int label, SampleSource source);

  size_t rows() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  int label(size_t row) const { return labels_[row]; }
  SampleSource source(size_t row) const { return sources_[row]; }
  FeatureVector Row(size_t row) const;
  size_t count(SampleSource s) const { return counts_[static_cast<int>(s)]; }
  size_t positives() const { return positives_; }

  // Per-row slot/value ranges, for column-oriented consumers.
  const std::vector<uint32_t>& row_offsets() const { return row_offsets_; }
  const std::vector<uint8_t>& slots() const { return slots_; }
  const std::vector<double>& values() const { return values_; }

  // label,source,slot0..slot42 with empty cells for missing slots.
  Status WriteCsv(const std::string& path) const;

 private:
  std::vector<uint32_t> row_offsets_{0};
  std::vector<uint8_t> slots_;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::vector<SampleSource> sources_;
  size_t counts_[2] = {0, 0};
  size_t positives_ = 0;
};

struct DatasetBuilderOptions {
  uint64_t threshold = 128000;
  bool gc_label_inverted = false;
  FeatureVectorOptions vector_options;
};

// Labels drained samples and assembles a dataset once enough labelled rows
// have been observed. Each source contributes at most threshold/2 rows,
// newest first.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(const DatasetBuilderOptions& options) : options_(options) {}

  // Labels the samples against `thresholds` and records compaction
  // lifetimes in `short_hist` when it is not null.
  void Consume(std::vector<TrainingSample> samples, const LifetimeThresholds& thresholds,
               LifetimeHistogram* short_hist);

  bool Ready() const { return labelled_since_build_ >= options_.threshold; }
  std::optional<Dataset> Build();

  uint64_t labelled_since_build() const { return labelled_since_build_; }
  uint64_t excluded() const { return excluded_; }
  size_t pending(SampleSource s) const { return rows_[static_cast<int>(s)].size(); }
  uint64_t builds() const { return builds_; }

 private:
  struct Row {
    FeatureVector vector;
    int label;
  };

  size_t cap() const { return static_cast<size_t>(options_.threshold / 2); }

  DatasetBuilderOptions options_;
  std::deque<Row> rows_[2];
  uint64_t labelled_since_build_ = 0;
  uint64_t excluded_ = 0;
  uint64_t builds_ = 0;
};

}  // namespace lifekv

#endif  // LIFEKV_LEARN_SAMPLES_H_
