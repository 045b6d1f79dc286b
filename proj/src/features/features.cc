#include "lifekv/features/features.h"

#include <bit>

#include "lifekv/core/coding.h"

namespace lifekv {

Edwcs FeatureBlock::edwc_array() const {
  Edwcs out{};
  for (size_t i = 0; i < edwcs.size() && i < out.size(); ++i) out[i] = edwcs[i];
  return out;
}

Edwcs EdwcUpdateOnWrite(const Edwcs& in, uint64_t delta0) {
  Edwcs out;
  const double d = static_cast<double>(delta0);
  for (int i = 0; i < kNumEdwcs; ++i) {
    out[i] = static_cast<float>(1.0 + static_cast<double>(in[i]) *
                                          std::exp2(-d / EdwcWindow(i)));
  }
  return out;
}

Edwcs EdwcDecay(const Edwcs& in, uint64_t elapsed) {
  Edwcs out;
  const double d = static_cast<double>(elapsed);
  for (int i = 0; i < kNumEdwcs; ++i) {
    out[i] = static_cast<float>(static_cast<double>(in[i]) * std::exp2(-d / EdwcWindow(i)));
  }
  return out;
}

uint8_t DeltaBucket(uint64_t delta) {
  if (delta < kDeltaBucketUnit) return 0;
  // floor(log2(delta / U)) for the integer quotient equals the float form.
  const int b = std::bit_width(delta / kDeltaBucketUnit);  // floor(log2(q)) + 1
  return static_cast<uint8_t>(b > 63 ? 63 : b);
}

size_t FixedFeatureSize(size_t delta_count) {
  return 1 + 8 * delta_count + (delta_count >= 1 ? 4 * kNumEdwcs : 0);
}

Status EncodeFeatures(const FeatureBlock& block, FeatureEncoding mode, std::string* out) {
  if (block.deltas.size() > static_cast<size_t>(kMaxDeltas)) {
    return Status::TooManyDeltas(std::to_string(block.deltas.size()) + " deltas");
  }
  if (!block.deltas.empty() && block.edwcs.size() != static_cast<size_t>(kNumEdwcs)) {
    return Status::InvalidArgument("non-empty block needs 10 edwcs");
  }
  out->push_back(static_cast<char>(block.deltas.size()));
  for (uint64_t d : block.deltas) {
    if (mode == FeatureEncoding::kFixed) {
      PutFixed64(out, d);
    } else {
      PutVarint64(out, d);
    }
  }
  if (!block.deltas.empty()) {
    for (float e : block.edwcs) PutFloat32(out, e);
  }
  return Status::OK();
}

std::string EncodeFeatures(const FeatureBlock& block, FeatureEncoding mode) {
  std::string out;
  Status s = EncodeFeatures(block, mode, &out);
  if (!s.ok()) out.clear();
  return out;
}

Status DecodeFeatures(std::string_view in, FeatureEncoding mode, FeatureBlock* block,
                      size_t* consumed) {
  const size_t start = in.size();
  if (in.empty()) return Status::Truncated("missing delta count");
  const auto count = static_cast<unsigned char>(in[0]);
  if (count > kMaxDeltas) return Status::BadCount(std::to_string(count) + " deltas");
  in.remove_prefix(1);
  block->deltas.clear();
  block->edwcs.clear();
  block->static_value_size = 0;
  block->deltas.reserve(count);
  for (unsigned i = 0; i < count; ++i) {
    uint64_t d = 0;
    if (mode == FeatureEncoding::kFixed) {
      if (!GetFixed64(&in, &d)) return Status::Truncated("delta");
    } else {
      size_t n = 0;
      LIFEKV_RETURN_IF_ERROR(DecodeVarint64(in, &d, &n));
      in.remove_prefix(n);
    }
    block->deltas.push_back(d);
  }
  if (count > 0) {
    if (in.size() < 4 * static_cast<size_t>(kNumEdwcs)) return Status::Truncated("edwcs");
    block->edwcs.resize(kNumEdwcs);
    for (int i = 0; i < kNumEdwcs; ++i) block->edwcs[i] = DecodeFloat32(in.data() + 4 * i);
    in.remove_prefix(4 * kNumEdwcs);
  }
  *consumed = start - in.size();
  return Status::OK();
}

FeatureBlock MergeOnRewrite(const FeatureBlock& old, uint64_t lifetime, int max_deltas) {
  FeatureBlock out;
  out.static_value_size = old.static_value_size;
  const size_t keep = static_cast<size_t>(max_deltas);
  out.deltas.reserve(keep);
  if (keep > 0) out.deltas.push_back(lifetime);
  for (size_t i = 0; i < old.deltas.size() && out.deltas.size() < keep; ++i) {
    out.deltas.push_back(old.deltas[i]);
  }
  if (out.deltas.empty()) return out;
  Edwcs updated = EdwcUpdateOnWrite(old.edwc_array(), lifetime);
  out.edwcs.assign(updated.begin(), updated.end());
  return out;
}

FeatureGroup GroupOfSlot(int slot) {
  if (slot < kEdwcSlotBegin) return FeatureGroup::kDelta;
  if (slot < kValueSizeSlot) return FeatureGroup::kEdwc;
  return FeatureGroup::kStatic;
}

int FeatureVector::present_count() const {
  int n = 0;
  for (double v : slots) n += IsMissing(v) ? 0 : 1;
  return n;
}

FeatureVector BuildFeatureVector(const FeatureBlock& block, uint64_t elapsed,
                                 const FeatureVectorOptions& options) {
  FeatureVector v;
  for (size_t i = 0; i < block.deltas.size() && i < static_cast<size_t>(kMaxDeltas); ++i) {
    v.slots[kDeltaSlotBegin + i] = DeltaBucket(block.deltas[i]);
  }
  if (block.edwcs.size() == static_cast<size_t>(kNumEdwcs)) {
    Edwcs decayed = EdwcDecay(block.edwc_array(), elapsed);
    for (int i = 0; i < kNumEdwcs && i < options.edwc_count; ++i) {
      double e = decayed[i];
      if (options.edwc_plus_one) e += 1.0;
      v.slots[kEdwcSlotBegin + i] = e;
    }
  }
  v.slots[kValueSizeSlot] =
      std::floor(std::log2(static_cast<double>(block.static_value_size) + 1.0));
  return v;
}

}  // namespace lifekv
