#include "lifekv/core/types.h"

namespace lifekv {

int CompareInternalKey(std::string_view a_key, SequenceNumber a_seq,
                       std::string_view b_key, SequenceNumber b_seq) {
  int r = a_key.compare(b_key);
  if (r != 0) return r < 0 ? -1 : 1;
  if (a_seq == b_seq) return 0;
  return a_seq > b_seq ? -1 : 1;
}

const char* ValueClassName(ValueClass c) {
  switch (c) {
    case ValueClass::kDefault: return "default";
    case ValueClass::kShort: return "short";
    case ValueClass::kLong: return "long";
  }
  return "unknown";
}

}  // namespace lifekv
