#ifndef LIFEKV_BENCH_WORKLOAD_H_
#define LIFEKV_BENCH_WORKLOAD_H_

// Deterministic write workloads.
//
// Zipfian ranks come from the rejection-free generator of Gray et al. used by
// YCSB; rank r has probability (r+1)^-theta / H(n, theta). Ranks are mapped
// to keys through a seeded permutation so hot keys are spread over the key
// space.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lifekv/core/status.h"

namespace lifekv::bench {

enum class Distribution : uint8_t { kZipfian, kUniform };

struct WorkloadSpec {
  uint64_t key_count = 500000;
  uint64_t op_count = 2000000;
  uint32_t value_size = 4096;
  // When non-zero, sizes are drawn uniformly from [value_size, value_size_max].
  uint32_t value_size_max = 0;
  Distribution distribution = Distribution::kZipfian;
  double theta = 0.9;
  uint32_t key_size = 16;
  uint64_t seed = 1;

  Status Validate() const;
};

Status ParseDistribution(const std::string& name, Distribution* out);

// Generalized harmonic number H(n, theta) = sum_{i=1..n} i^-theta.
double Zeta(uint64_t n, double theta);

// Analytic probability of rank r (0-based).
double ZipfianMass(uint64_t rank, uint64_t n, double theta);

class ZipfianGenerator {
 public:
  // theta in [0, 1).
  ZipfianGenerator(uint64_t n, double theta);

  uint64_t Next(std::mt19937_64& rng);
  uint64_t n() const { return n_; }

 private:
  uint64_t n_;
  double theta_;
  double zetan_;
  double alpha_;
  double eta_;
  double half_pow_theta_;
};

struct Op {
  uint64_t index = 0;
  uint64_t key_id = 0;
  std::string key;
  std::string value;
};

class WorkloadGenerator {
 public:
  explicit WorkloadGenerator(const WorkloadSpec& spec);

  // False once op_count operations have been produced.
  bool Next(Op* op);
  // Rank drawn from the distribution, before the key permutation.
  uint64_t NextRank();

  std::string KeyOf(uint64_t key_id) const;
  uint64_t produced() const { return produced_; }
  const WorkloadSpec& spec() const { return spec_; }

 private:
  WorkloadSpec spec_;
  std::mt19937_64 rng_;
  ZipfianGenerator zipf_;
  std::vector<uint32_t> permutation_;
  uint64_t produced_ = 0;
};

}  // namespace lifekv::bench

#endif  // LIFEKV_BENCH_WORKLOAD_H_
