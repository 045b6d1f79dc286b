#ifndef LIFEKV_LIFETIME_LIFETIME_H_
#define LIFEKV_LIFETIME_LIFETIME_H_

// Lifetime distribution monitoring and dynamic TTL thresholds.
//
// Two log2-bucketed histograms are kept: H_s holds ground-truth lifetimes
// observed when a key is rewritten, H_l holds the ages of values still valid
// when garbage collection reaches them. From the smoothed GC invalid ratio g
// the short and long points are
//
//     p  = ini_p0 * sigmoid(alpha * (1 - g - beta0))
//        + ini_p1 * sigmoid(alpha * (1 - g - beta1))
//     l  = H(p)            (H = quantile of the histogram at p percent)
//
// and the default TTL of freshly flushed value files is
//
//     l_d = l_s + (l_l - l_s) * sigmoid(1 - g - beta1).

#include <array>
#include <atomic>
#include <cstdint>
#include <mutex>

#include "lifekv/core/config.h"
#include "lifekv/core/status.h"

namespace lifekv {

double Sigmoid(double x);

inline constexpr int kHistogramBuckets = 64;

// Plain-value copy of a histogram.
struct HistogramSnapshot {
  std::array<uint64_t, kHistogramBuckets> buckets{};
  uint64_t total = 0;

  // Smallest bucket upper bound 2^(b+1) whose cumulative count reaches
  // percent/100 of the total; `empty_value` when nothing was recorded.
  uint64_t Quantile(double percent, uint64_t empty_value) const;
};

// Bucket b counts lifetimes in [2^b, 2^(b+1)); lifetime 0 lands in bucket 0.
// Record() is lock-free and may be called from any thread; concurrent
// snapshots can observe a total that is off by in-flight increments.
class LifetimeHistogram {
 public:
  static int BucketOf(uint64_t lifetime);

  void Record(uint64_t lifetime);
  HistogramSnapshot Snapshot() const;
  uint64_t total() const { return total_.load(std::memory_order_relaxed); }
  uint64_t Quantile(double percent, uint64_t empty_value) const {
    return Snapshot().Quantile(percent, empty_value);
  }
  void Reset();

 private:
  std::array<std::atomic<uint64_t>, kHistogramBuckets> buckets_{};
  std::atomic<uint64_t> total_{0};
};

// Percentage handed to the histogram quantile for a lifetime point.
double LifetimePercent(double gc_ratio, double alpha, double beta0, double beta1,
                       double ini_p0, double ini_p1);

uint64_t ComputeLifetimePoint(const HistogramSnapshot& h, double gc_ratio, double alpha,
                              double beta0, double beta1, double ini_p0, double ini_p1,
                              uint64_t empty_value);

uint64_t ComputeDefaultTtl(uint64_t l_s, uint64_t l_l, double gc_ratio, double beta1);

// Smallest EDWC window index i with 2^(19+i) >= point, clamped to 9.
int EdwcIndexFor(uint64_t point);

struct LifetimeThresholds {
  uint64_t l_d = 0;
  uint64_t l_s = 0;
  uint64_t l_l = 0;
  int s_idx = 0;
  int l_idx = 0;

  friend bool operator==(const LifetimeThresholds&, const LifetimeThresholds&) = default;
};

// Exponentially weighted invalid fraction over GC jobs.
class GcRatioTracker {
 public:
  explicit GcRatioTracker(double weight = 0.3, double prior = 0.5)
      : weight_(weight), invalid_(prior) {}

  // EmptyJob when total == 0; the tracker is unchanged in that case.
  Status Update(uint64_t invalid_count, uint64_t total_count);

  double invalid_ratio() const { return invalid_; }
  double valid_ratio() const { return 1.0 - invalid_; }

 private:
  double weight_;
  double invalid_;
};

// Thresholds derived from the current histograms and ratio. l_s is clamped
// to l_l so the short TTL never exceeds the long one.
LifetimeThresholds ComputeThresholds(const HistogramSnapshot& short_hist,
                                     const HistogramSnapshot& long_hist, double gc_ratio,
                                     const LifetimeParams& params);

// Initial thresholds before any lifetime has been observed.
LifetimeThresholds InitialThresholds(const LifetimeParams& params);

// Owns both histograms, the ratio tracker, and the published thresholds.
// Histograms accept records from any thread; Recompute() and the tracker are
// meant for the single maintenance worker. Published thresholds are swapped
// as a unit under a small lock.
class LifetimeMonitor {
 public:
  explicit LifetimeMonitor(const LifetimeParams& params);

  LifetimeHistogram& short_histogram() { return short_hist_; }
  LifetimeHistogram& long_histogram() { return long_hist_; }
  const LifetimeHistogram& short_histogram() const { return short_hist_; }
  const LifetimeHistogram& long_histogram() const { return long_hist_; }

  Status RecordGcJob(uint64_t invalid_count, uint64_t total_count);
  double gc_ratio() const;
  double valid_ratio() const;

  LifetimeThresholds Recompute();
  LifetimeThresholds Current() const;
  void Restore(const LifetimeThresholds& t);

  const LifetimeParams& params() const { return params_; }

 private:
  LifetimeParams params_;
  LifetimeHistogram short_hist_;
  LifetimeHistogram long_hist_;
  mutable std::mutex mu_;
  GcRatioTracker tracker_;
  LifetimeThresholds current_;
};

}  // namespace lifekv

#endif  // LIFEKV_LIFETIME_LIFETIME_H_
