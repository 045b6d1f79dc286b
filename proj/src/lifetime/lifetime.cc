#include "lifekv/lifetime/lifetime.h"

#include <algorithm>
#include <bit>
#include <cmath>

#include "lifekv/features/features.h"

namespace lifekv {

double Sigmoid(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

uint64_t HistogramSnapshot::Quantile(double percent, uint64_t empty_value) const {
  uint64_t sum = 0;
  for (uint64_t b : buckets) sum += b;
  if (sum == 0) return empty_value;
  const double target = std::clamp(percent, 0.0, 100.0) / 100.0 * static_cast<double>(sum);
  uint64_t cumulative = 0;
  for (int b = 0; b < kHistogramBuckets; ++b) {
    cumulative += buckets[b];
    if (buckets[b] > 0 && static_cast<double>(cumulative) >= target) {
      return b >= 63 ? ~uint64_t{0} : uint64_t{1} << (b + 1);
    }
  }
  return ~uint64_t{0};
}

int LifetimeHistogram::BucketOf(uint64_t lifetime) {
  return std::bit_width(std::max<uint64_t>(lifetime, 1)) - 1;
}

void LifetimeHistogram::Record(uint64_t lifetime) {
  buckets_[BucketOf(lifetime)].fetch_add(1, std::memory_order_relaxed);
  total_.fetch_add(1, std::memory_order_relaxed);
}

HistogramSnapshot LifetimeHistogram::Snapshot() const {
  HistogramSnapshot s;
  for (int b = 0; b < kHistogramBuckets; ++b) {
    s.buckets[b] = buckets_[b].load(std::memory_order_relaxed);
  }
  s.total = total_.load(std::memory_order_relaxed);
  return s;
}

void LifetimeHistogram::Reset() {
  for (auto& b : buckets_) b.store(0, std::memory_order_relaxed);
  total_.store(0, std::memory_order_relaxed);
}

double LifetimePercent(double gc_ratio, double alpha, double beta0, double beta1,
                       double ini_p0, double ini_p1) {
  const double p0 = ini_p0 * Sigmoid(alpha * (1.0 - gc_ratio - beta0));
  const double p1 = ini_p1 * Sigmoid(alpha * (1.0 - gc_ratio - beta1));
  return p0 + p1;
}

uint64_t ComputeLifetimePoint(const HistogramSnapshot& h, double gc_ratio, double alpha,
                              double beta0, double beta1, double ini_p0, double ini_p1,
                              uint64_t empty_value) {
  return h.Quantile(LifetimePercent(gc_ratio, alpha, beta0, beta1, ini_p0, ini_p1),
                    empty_value);
}

uint64_t ComputeDefaultTtl(uint64_t l_s, uint64_t l_l, double gc_ratio, double beta1) {
  if (l_l <= l_s) return l_s;
  const double span = static_cast<double>(l_l - l_s);
  const double shift = span * Sigmoid(1.0 - gc_ratio - beta1);
  return l_s + static_cast<uint64_t>(std::llround(std::min(shift, span)));
}

int EdwcIndexFor(uint64_t point) {
  for (int i = 0; i < kNumEdwcs; ++i) {
    if ((uint64_t{1} << (kEdwcBaseLog2 + i)) >= point) return i;
  }
  return kNumEdwcs - 1;
}

Status GcRatioTracker::Update(uint64_t invalid_count, uint64_t total_count) {
  if (total_count == 0) return Status::EmptyJob();
  const double job = static_cast<double>(std::min(invalid_count, total_count)) /
                     static_cast<double>(total_count);
  invalid_ = (1.0 - weight_) * invalid_ + weight_ * job;
  return Status::OK();
}

LifetimeThresholds ComputeThresholds(const HistogramSnapshot& short_hist,
                                     const HistogramSnapshot& long_hist, double gc_ratio,
                                     const LifetimeParams& p) {
  LifetimeThresholds t;
  t.l_s = ComputeLifetimePoint(short_hist, gc_ratio, p.alpha_s, p.beta0, p.beta1,
                               p.ini_sp0, p.ini_sp1, p.initial_default_ttl);
  t.l_l = ComputeLifetimePoint(long_hist, gc_ratio, p.alpha_l, p.beta0, p.beta1, p.ini_lp0,
                               p.ini_lp1, p.initial_default_ttl);
  t.l_s = std::min(t.l_s, t.l_l);
  t.l_d = ComputeDefaultTtl(t.l_s, t.l_l, gc_ratio, p.beta1);
  t.s_idx = EdwcIndexFor(t.l_s);
  t.l_idx = EdwcIndexFor(t.l_l);
  return t;
}

LifetimeThresholds InitialThresholds(const LifetimeParams& params) {
  return ComputeThresholds(HistogramSnapshot{}, HistogramSnapshot{}, 0.5, params);
}

LifetimeMonitor::LifetimeMonitor(const LifetimeParams& params)
    : params_(params),
      tracker_(params.gc_ratio_weight),
      current_(InitialThresholds(params)) {}

Status LifetimeMonitor::RecordGcJob(uint64_t invalid_count, uint64_t total_count) {
  std::lock_guard<std::mutex> l(mu_);
  return tracker_.Update(invalid_count, total_count);
}

double LifetimeMonitor::gc_ratio() const {
  std::lock_guard<std::mutex> l(mu_);
  return tracker_.invalid_ratio();
}

double LifetimeMonitor::valid_ratio() const {
  std::lock_guard<std::mutex> l(mu_);
  return tracker_.valid_ratio();
}

LifetimeThresholds LifetimeMonitor::Recompute() {
  const HistogramSnapshot hs = short_hist_.Snapshot();
  const HistogramSnapshot hl = long_hist_.Snapshot();
  std::lock_guard<std::mutex> l(mu_);
  current_ = ComputeThresholds(hs, hl, tracker_.invalid_ratio(), params_);
  return current_;
}

LifetimeThresholds LifetimeMonitor::Current() const {
  std::lock_guard<std::mutex> l(mu_);
  return current_;
}

void LifetimeMonitor::Restore(const LifetimeThresholds& t) {
  std::lock_guard<std::mutex> l(mu_);
  current_ = t;
}

}  // namespace lifekv
