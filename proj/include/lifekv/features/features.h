#ifndef LIFEKV_FEATURES_FEATURES_H_
#define LIFEKV_FEATURES_FEATURES_H_

// Per-key write-history features and their storage format.
//
// Deltas are the intervals between consecutive writes of a key, newest
// first. EDWC_i is an exponentially decayed write counter whose half-life is
// 2^(19+i) sequence units; on every write
//
//     EDWC_i = 1 + EDWC_i * 2^(-delta / 2^(19+i)).
//
// Encoded layout, stored after the value locator in the LSM value part:
//
//     delta_count : 1 byte, in [0, 32]
//     deltas      : delta_count x fixed64 LE (fixed) or varint (compact)
//     edwcs       : 10 x float32 LE, present iff delta_count >= 1
//
// In fixed mode the size is 1 + 8*count + 40*[count >= 1].

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "lifekv/core/config.h"
#include "lifekv/core/status.h"
#include "lifekv/core/types.h"

namespace lifekv {

inline constexpr int kMaxDeltas = 32;
inline constexpr int kNumEdwcs = 10;
inline constexpr int kEdwcBaseLog2 = 19;
// Delta bucket unit: intervals of 1M, 2M, 4M, ... sequence units.
inline constexpr uint64_t kDeltaBucketUnit = uint64_t{1} << 20;

using Edwcs = std::array<float, kNumEdwcs>;

struct FeatureBlock {
  std::vector<uint64_t> deltas;  // newest first
  std::vector<float> edwcs;      // empty or exactly kNumEdwcs entries
  // Size of the associated value. Not part of the encoded features; the
  // LSM entry carries it in the locator.
  uint32_t static_value_size = 0;

  bool empty() const { return deltas.empty(); }
  // EDWCs as a fixed array; all zero when the block has none.
  Edwcs edwc_array() const;

  friend bool operator==(const FeatureBlock&, const FeatureBlock&) = default;
};

// Decay window of EDWC_i in sequence units.
inline double EdwcWindow(int i) { return std::ldexp(1.0, kEdwcBaseLog2 + i); }

// Applies one write arriving `delta0` after the previous one.
Edwcs EdwcUpdateOnWrite(const Edwcs& in, uint64_t delta0);

// Decays the counters by `elapsed` without counting a write.
Edwcs EdwcDecay(const Edwcs& in, uint64_t elapsed);

// 0 below 2^20, then floor(log2(delta / 2^20)) + 1, capped at 63.
uint8_t DeltaBucket(uint64_t delta);

size_t FixedFeatureSize(size_t delta_count);

Status EncodeFeatures(const FeatureBlock& block, FeatureEncoding mode, std::string* out);
std::string EncodeFeatures(const FeatureBlock& block, FeatureEncoding mode);

// Decodes a block from the front of `in`. static_value_size is left zero.
Status DecodeFeatures(std::string_view in, FeatureEncoding mode, FeatureBlock* block,
                      size_t* consumed);

// Folds one more write into the history: `lifetime` is the interval between
// the write described by `old` and the new one.
FeatureBlock MergeOnRewrite(const FeatureBlock& old, uint64_t lifetime,
                            int max_deltas = kMaxDeltas);

// Model input layout.
inline constexpr int kDeltaSlotBegin = 0;
inline constexpr int kEdwcSlotBegin = kMaxDeltas;                  // 32
inline constexpr int kValueSizeSlot = kEdwcSlotBegin + kNumEdwcs;  // 42
inline constexpr int kNumFeatureSlots = kValueSizeSlot + 1;        // 43

enum class FeatureGroup : uint8_t { kDelta, kEdwc, kStatic };
FeatureGroup GroupOfSlot(int slot);

// Dense view of the sparse model input. Missing slots hold NaN.
struct FeatureVector {
  std::array<double, kNumFeatureSlots> slots;

  FeatureVector() { slots.fill(std::numeric_limits<double>::quiet_NaN()); }

  static bool IsMissing(double v) { return std::isnan(v); }
  bool missing(int slot) const { return IsMissing(slots[slot]); }
  int present_count() const;
};

struct FeatureVectorOptions {
  bool edwc_plus_one = false;  // add the write term when refreshing EDWCs
  int edwc_count = kNumEdwcs;  // EDWC slots beyond this stay missing
};

// Slots 0-31: DeltaBucket(deltas[i]); 32-41: EDWCs decayed by `elapsed`;
// 42: floor(log2(static_value_size + 1)).
FeatureVector BuildFeatureVector(const FeatureBlock& block, uint64_t elapsed,
                                 const FeatureVectorOptions& options = {});

}  // namespace lifekv

#endif  // LIFEKV_FEATURES_FEATURES_H_
