#ifndef LIFEKV_LSM_LSM_VALUE_H_
#define LIFEKV_LSM_LSM_VALUE_H_

// Value part of an LSM entry:
//
//     inline:    [0x00][value bytes...]
//     separated: [0x01][file_no varint][offset varint][size varint][features]
//
// Tombstones have an empty value part.

#include <string>
#include <string_view>

#include "lifekv/core/config.h"
#include "lifekv/core/status.h"
#include "lifekv/core/types.h"
#include "lifekv/features/features.h"

namespace lifekv {

enum class LsmValueKind : uint8_t { kInline = 0, kSeparated = 1 };

struct LsmValue {
  LsmValueKind kind = LsmValueKind::kInline;
  std::string inline_value;
  ValueLocator locator;
  FeatureBlock features;
};

void EncodeInlineValue(std::string_view value, std::string* out);
Status EncodeSeparatedValue(const ValueLocator& loc, const FeatureBlock& features,
                            FeatureEncoding mode, std::string* out);
Status DecodeLsmValue(std::string_view in, FeatureEncoding mode, LsmValue* out);

// Cheap view of a separated value part without decoding the features.
struct SeparatedView {
  ValueLocator locator;
  std::string_view feature_bytes;
};
bool IsSeparated(std::string_view value_part);
Status DecodeSeparatedView(std::string_view in, SeparatedView* out);
// Rewrites the locator of a separated value part, keeping its features.
void ReplaceLocator(const SeparatedView& view, const ValueLocator& loc, std::string* out);

}  // namespace lifekv

#endif  // LIFEKV_LSM_LSM_VALUE_H_
