#include "lifekv/lsm/lsm_value.h"

#include "lifekv/core/coding.h"

namespace lifekv {

void EncodeInlineValue(std::string_view value, std::string* out) {
  out->push_back(static_cast<char>(LsmValueKind::kInline));
  out->append(value.data(), value.size());
}

Status EncodeSeparatedValue(const ValueLocator& loc, const FeatureBlock& features,
                            FeatureEncoding mode, std::string* out) {
  out->push_back(static_cast<char>(LsmValueKind::kSeparated));
  PutVarint64(out, loc.file_no);
  PutVarint64(out, loc.offset);
  PutVarint64(out, loc.size);
  return EncodeFeatures(features, mode, out);
}

bool IsSeparated(std::string_view value_part) {
  return !value_part.empty() && value_part[0] == static_cast<char>(LsmValueKind::kSeparated);
}

Status DecodeSeparatedView(std::string_view in, SeparatedView* out) {
  if (!IsSeparated(in)) return Status::Corruption("not a separated value");
  in.remove_prefix(1);
  uint64_t size = 0;
  if (!GetVarint64(&in, &out->locator.file_no) || !GetVarint64(&in, &out->locator.offset) ||
      !GetVarint64(&in, &size)) {
    return Status::Corruption("bad value locator");
  }
  out->locator.size = static_cast<uint32_t>(size);
  out->feature_bytes = in;
  return Status::OK();
}

void ReplaceLocator(const SeparatedView& view, const ValueLocator& loc, std::string* out) {
  out->push_back(static_cast<char>(LsmValueKind::kSeparated));
  PutVarint64(out, loc.file_no);
  PutVarint64(out, loc.offset);
  PutVarint64(out, loc.size);
  out->append(view.feature_bytes.data(), view.feature_bytes.size());
}

Status DecodeLsmValue(std::string_view in, FeatureEncoding mode, LsmValue* out) {
  if (in.empty()) return Status::Corruption("empty value part");
  if (in[0] == static_cast<char>(LsmValueKind::kInline)) {
    out->kind = LsmValueKind::kInline;
    out->inline_value.assign(in.substr(1));
    out->features = FeatureBlock{};
    return Status::OK();
  }
  SeparatedView view;
  LIFEKV_RETURN_IF_ERROR(DecodeSeparatedView(in, &view));
  out->kind = LsmValueKind::kSeparated;
  out->inline_value.clear();
  out->locator = view.locator;
  size_t used = 0;
  Status s = DecodeFeatures(view.feature_bytes, mode, &out->features, &used);
  if (!s.ok()) return Status::Corruption("feature block: " + s.ToString());
  if (used != view.feature_bytes.size()) return Status::Corruption("feature trailing bytes");
  return Status::OK();
}

}  // namespace lifekv
