#ifndef LIFEKV_CORE_CODING_H_
#define LIFEKV_CORE_CODING_H_

// Byte codecs shared by every on-disk structure.
//
// Varints are LEB128: base-128 groups, least significant group first, the
// high bit of each byte set on all but the last byte. A 64-bit value takes
// at most 10 bytes. Fixed-width integers and floats are little-endian.

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "lifekv/core/status.h"

namespace lifekv {

inline constexpr int kMaxVarint64Bytes = 10;

void PutVarint64(std::string* dst, uint64_t value);
std::string EncodeVarint64(uint64_t value);
int VarintLength(uint64_t value);

// Decodes a varint from the front of `in`. On success stores the value and
// the number of bytes consumed. Returns Truncated when `in` ends before the
// terminating byte and Overflow when the encoding is longer than 10 bytes or
// carries bits beyond 64.
Status DecodeVarint64(std::string_view in, uint64_t* value, size_t* consumed);

// Parses a varint and advances `in` past it. Returns false on any error.
bool GetVarint64(std::string_view* in, uint64_t* value);

// Length-prefixed byte string: varint length followed by the bytes.
void PutLengthPrefixed(std::string* dst, std::string_view value);
bool GetLengthPrefixed(std::string_view* in, std::string_view* value);

inline void EncodeFixed32(char* buf, uint32_t value) {
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>(value >> (8 * i));
}

inline void EncodeFixed64(char* buf, uint64_t value) {
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>(value >> (8 * i));
}

inline uint32_t DecodeFixed32(const char* ptr) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(ptr[i])) << (8 * i);
  }
  return v;
}

inline uint64_t DecodeFixed64(const char* ptr) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<uint64_t>(static_cast<unsigned char>(ptr[i])) << (8 * i);
  }
  return v;
}

inline void PutFixed32(std::string* dst, uint32_t value) {
  char buf[4];
  EncodeFixed32(buf, value);
  dst->append(buf, 4);
}

inline void PutFixed64(std::string* dst, uint64_t value) {
  char buf[8];
  EncodeFixed64(buf, value);
  dst->append(buf, 8);
}

// IEEE-754 binary32, bit-exact.
inline void PutFloat32(std::string* dst, float value) {
  uint32_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  PutFixed32(dst, bits);
}

inline float DecodeFloat32(const char* ptr) {
  uint32_t bits = DecodeFixed32(ptr);
  float value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

bool GetFixed32(std::string_view* in, uint32_t* value);
bool GetFixed64(std::string_view* in, uint64_t* value);

// CRC-32 (zlib polynomial) of `data`, optionally continuing from `init`.
uint32_t Crc32(std::string_view data, uint32_t init = 0);

}  // namespace lifekv

#endif  // LIFEKV_CORE_CODING_H_
