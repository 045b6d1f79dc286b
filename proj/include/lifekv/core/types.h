#ifndef LIFEKV_CORE_TYPES_H_
#define LIFEKV_CORE_TYPES_H_

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace lifekv {

// One unit per accepted user write (Put or Delete). Internal rewrites by
// flush, compaction and garbage collection never consume sequence numbers,
// so every lifetime in the system is measured in user-write units.
using SequenceNumber = uint64_t;

inline constexpr SequenceNumber kMaxSequenceNumber = ~SequenceNumber{0};

using FileNumber = uint64_t;

enum class EntryKind : uint8_t { kDelete = 0, kPut = 1 };

struct InternalKey {
  std::string user_key;
  SequenceNumber seq = 0;
  EntryKind kind = EntryKind::kPut;
};

// Orders by user key ascending, then sequence descending so the newest
// version of a key sorts first. Kind only breaks ties between entries that
// share key and sequence, which never happens for accepted writes.
int CompareInternalKey(std::string_view a_key, SequenceNumber a_seq,
                       std::string_view b_key, SequenceNumber b_seq);

inline int CompareInternalKey(const InternalKey& a, const InternalKey& b) {
  int r = CompareInternalKey(a.user_key, a.seq, b.user_key, b.seq);
  if (r != 0) return r;
  if (a.kind == b.kind) return 0;
  return a.kind > b.kind ? -1 : 1;
}

struct InternalKeyLess {
  using is_transparent = void;
  bool operator()(const InternalKey& a, const InternalKey& b) const {
    return CompareInternalKey(a, b) < 0;
  }
};

// Reference from an LSM entry to a record in a value file. `size` is the
// full encoded record length so a single read fetches the record.
struct ValueLocator {
  FileNumber file_no = 0;
  uint64_t offset = 0;
  uint32_t size = 0;

  friend bool operator==(const ValueLocator&, const ValueLocator&) = default;
  friend auto operator<=>(const ValueLocator&, const ValueLocator&) = default;
};

// Lifetime category of a value file.
enum class ValueClass : uint8_t { kDefault = 0, kShort = 1, kLong = 2 };

inline constexpr int kNumValueClasses = 3;

const char* ValueClassName(ValueClass c);

}  // namespace lifekv

#endif  // LIFEKV_CORE_TYPES_H_
