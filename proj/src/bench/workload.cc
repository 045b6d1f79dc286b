#include "lifekv/bench/workload.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace lifekv::bench {

Status WorkloadSpec::Validate() const {
  if (key_count == 0 || key_count > UINT32_MAX) return Status::InvalidArgument("key_count");
  if (distribution == Distribution::kZipfian && !(theta >= 0.0 && theta < 1.0)) {
    return Status::InvalidArgument("theta must be in [0, 1)");
  }
  if (value_size_max != 0 && value_size_max < value_size) {
    return Status::InvalidArgument("value_size_max < value_size");
  }
  if (key_size < 8) return Status::InvalidArgument("key_size must be at least 8");
  return Status::OK();
}

Status ParseDistribution(const std::string& name, Distribution* out) {
  if (name == "zipfian") {
    *out = Distribution::kZipfian;
  } else if (name == "uniform") {
    *out = Distribution::kUniform;
  } else {
    return Status::InvalidArgument("unknown distribution: " + name);
  }
  return Status::OK();
}

double Zeta(uint64_t n, double theta) {
  double sum = 0.0;
  for (uint64_t i = n; i >= 1; --i) sum += std::pow(static_cast<double>(i), -theta);
  return sum;
}

double ZipfianMass(uint64_t rank, uint64_t n, double theta) {
  return std::pow(static_cast<double>(rank + 1), -theta) / Zeta(n, theta);
}

ZipfianGenerator::ZipfianGenerator(uint64_t n, double theta)
    : n_(n), theta_(theta), zetan_(Zeta(n, theta)), alpha_(1.0 / (1.0 - theta)) {
  const double zeta2 = Zeta(std::min<uint64_t>(n, 2), theta);
  eta_ = n <= 2 ? 1.0
                : (1.0 - std::pow(2.0 / static_cast<double>(n), 1.0 - theta)) /
                      (1.0 - zeta2 / zetan_);
  half_pow_theta_ = std::pow(0.5, theta);
}

uint64_t ZipfianGenerator::Next(std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double uz = u * zetan_;
  if (uz < 1.0) return 0;
  if (n_ >= 2 && uz < 1.0 + half_pow_theta_) return 1;
  const double r = static_cast<double>(n_) * std::pow(eta_ * u - eta_ + 1.0, alpha_);
  return std::min<uint64_t>(static_cast<uint64_t>(r), n_ - 1);
}

WorkloadGenerator::WorkloadGenerator(const WorkloadSpec& spec)
    : spec_(spec),
      rng_(spec.seed),
      zipf_(spec.key_count, spec.distribution == Distribution::kZipfian ? spec.theta : 0.0),
      permutation_(spec.key_count) {
  std::iota(permutation_.begin(), permutation_.end(), 0u);
  std::mt19937_64 perm_rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle.
  for (size_t i = permutation_.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(perm_rng() % i);
    std::swap(permutation_[i - 1], permutation_[j]);
  }
}

uint64_t WorkloadGenerator::NextRank() {
  if (spec_.distribution == Distribution::kUniform) return rng_() % spec_.key_count;
  return zipf_.Next(rng_);
}

std::string WorkloadGenerator::KeyOf(uint64_t key_id) const {
  char digits[24];
  std::snprintf(digits, sizeof(digits), "%llu", static_cast<unsigned long long>(key_id));
  std::string key = "user";
  const size_t n = std::char_traits<char>::length(digits);
  if (key.size() + n < spec_.key_size) key.append(spec_.key_size - key.size() - n, '0');
  key.append(digits);
  return key;
}

bool WorkloadGenerator::Next(Op* op) {
  if (produced_ >= spec_.op_count) return false;
  op->index = produced_++;
  op->key_id = permutation_[NextRank()];
  op->key = KeyOf(op->key_id);
  uint32_t size = spec_.value_size;
  if (spec_.value_size_max > spec_.value_size) {
    size += static_cast<uint32_t>(rng_() % (spec_.value_size_max - spec_.value_size + 1));
  }
  op->value.assign(size, static_cast<char>('a' + op->index % 26));
  const std::string tag = op->key + "#" + std::to_string(op->index);
  op->value.replace(0, std::min<size_t>(tag.size(), size), tag, 0,
                    std::min<size_t>(tag.size(), size));
  return true;
}

}  // namespace lifekv::bench
