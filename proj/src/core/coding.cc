#include "lifekv/core/coding.h"

#include <zlib.h>

namespace lifekv {

void PutVarint64(std::string* dst, uint64_t value) {
  char buf[kMaxVarint64Bytes];
  int n = 0;
  while (value >= 0x80) {
    buf[n++] = static_cast<char>((value & 0x7f) | 0x80);
    value >>= 7;
  }
  buf[n++] = static_cast<char>(value);
  dst->append(buf, n);
}

std::string EncodeVarint64(uint64_t value) {
  std::string out;
  PutVarint64(&out, value);
  return out;
}

int VarintLength(uint64_t value) {
  int len = 1;
  while (value >= 0x80) {
    value >>= 7;
    ++len;
  }
  return len;
}

Status DecodeVarint64(std::string_view in, uint64_t* value, size_t* consumed) {
  uint64_t result = 0;
  for (size_t i = 0; i < static_cast<size_t>(kMaxVarint64Bytes); ++i) {
    if (i >= in.size()) return Status::Truncated("varint ends mid-group");
    const uint64_t byte = static_cast<unsigned char>(in[i]);
    const uint64_t group = byte & 0x7f;
    // The tenth byte may only contribute the single remaining bit.
    if (i == kMaxVarint64Bytes - 1 && group > 1) return Status::Overflow();
    result |= group << (7 * i);
    if ((byte & 0x80) == 0) {
      *value = result;
      *consumed = i + 1;
      return Status::OK();
    }
  }
  return Status::Overflow("more than 10 varint bytes");
}

bool GetVarint64(std::string_view* in, uint64_t* value) {
  size_t n = 0;
  if (!DecodeVarint64(*in, value, &n).ok()) return false;
  in->remove_prefix(n);
  return true;
}

void PutLengthPrefixed(std::string* dst, std::string_view value) {
  PutVarint64(dst, value.size());
  dst->append(value.data(), value.size());
}

bool GetLengthPrefixed(std::string_view* in, std::string_view* value) {
  uint64_t len = 0;
  if (!GetVarint64(in, &len) || in->size() < len) return false;
  *value = in->substr(0, len);
  in->remove_prefix(len);
  return true;
}

bool GetFixed32(std::string_view* in, uint32_t* value) {
  if (in->size() < 4) return false;
  *value = DecodeFixed32(in->data());
  in->remove_prefix(4);
  return true;
}

bool GetFixed64(std::string_view* in, uint64_t* value) {
  if (in->size() < 8) return false;
  *value = DecodeFixed64(in->data());
  in->remove_prefix(8);
  return true;
}

uint32_t Crc32(std::string_view data, uint32_t init) {
  uLong crc = init;
  const auto* p = reinterpret_cast<const Bytef*>(data.data());
  size_t left = data.size();
  // zlib takes a uInt length; feed large buffers in chunks.
  while (left > 0) {
    const uInt chunk = left > (1u << 30) ? (1u << 30) : static_cast<uInt>(left);
    crc = crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<uint32_t>(crc);
}

}  // namespace lifekv
