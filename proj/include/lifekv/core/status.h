#ifndef LIFEKV_CORE_STATUS_H_
#define LIFEKV_CORE_STATUS_H_

#include <string>
#include <string_view>
#include <utility>

namespace lifekv {

// A Status encapsulates the result of an operation. It may indicate success,
// or it may indicate an error with an associated code and message.
class Status {
 public:
  enum class Code : unsigned char {
    kOk = 0,
    kNotFound,
    kInvalidArgument,
    kIoError,
    kCorruption,
    // Codec errors.
    kTruncated,
    kOverflow,
    kBadCount,
    kTooManyDeltas,
    // Value file / locator errors.
    kChecksumMismatch,
    kFileMissing,
    kDanglingLocator,
    // Persistence errors.
    kCorruptManifest,
    kCorruptModel,
    // Learning / lifetime errors.
    kDegenerateDataset,
    kEmptyJob,
  };

  Status() = default;

  static Status OK() { return Status(); }
  static Status NotFound(std::string_view msg = {}) {
    return Status(Code::kNotFound, msg);
  }
  static Status InvalidArgument(std::string_view msg) {
    return Status(Code::kInvalidArgument, msg);
  }
  static Status IOError(std::string_view msg) {
    return Status(Code::kIoError, msg);
  }
  static Status Corruption(std::string_view msg) {
    return Status(Code::kCorruption, msg);
  }
  static Status Truncated(std::string_view msg = "input ends mid-field") {
    return Status(Code::kTruncated, msg);
  }
  static Status Overflow(std::string_view msg = "varint exceeds 64 bits") {
    return Status(Code::kOverflow, msg);
  }
  static Status BadCount(std::string_view msg) {
    return Status(Code::kBadCount, msg);
  }
  static Status TooManyDeltas(std::string_view msg) {
    return Status(Code::kTooManyDeltas, msg);
  }
  static Status ChecksumMismatch(std::string_view msg) {
    return Status(Code::kChecksumMismatch, msg);
  }
  static Status FileMissing(std::string_view msg) {
    return Status(Code::kFileMissing, msg);
  }
  static Status DanglingLocator(std::string_view msg) {
    return Status(Code::kDanglingLocator, msg);
  }
  static Status CorruptManifest(std::string_view msg) {
    return Status(Code::kCorruptManifest, msg);
  }
  static Status CorruptModel(std::string_view msg) {
    return Status(Code::kCorruptModel, msg);
  }
  static Status DegenerateDataset(std::string_view msg) {
    return Status(Code::kDegenerateDataset, msg);
  }
  static Status EmptyJob(std::string_view msg = "job scanned no records") {
    return Status(Code::kEmptyJob, msg);
  }

  bool ok() const { return code_ == Code::kOk; }
  bool IsNotFound() const { return code_ == Code::kNotFound; }
  bool IsIOError() const { return code_ == Code::kIoError; }
  // True for every code that signals damaged persistent state.
  bool IsCorruption() const {
    switch (code_) {
      case Code::kCorruption:
      case Code::kTruncated:
      case Code::kOverflow:
      case Code::kBadCount:
      case Code::kChecksumMismatch:
      case Code::kFileMissing:
      case Code::kDanglingLocator:
      case Code::kCorruptManifest:
      case Code::kCorruptModel:
        return true;
      default:
        return false;
    }
  }

  Code code() const { return code_; }
  const std::string& message() const { return msg_; }
  std::string ToString() const;

 private:
  Status(Code code, std::string_view msg) : code_(code), msg_(msg) {}

  Code code_ = Code::kOk;
  std::string msg_;
};

const char* CodeName(Status::Code code);

inline std::string Status::ToString() const {
  if (ok()) return "OK";
  std::string out = CodeName(code_);
  if (!msg_.empty()) {
    out += ": ";
    out += msg_;
  }
  return out;
}

inline const char* CodeName(Status::Code code) {
  switch (code) {
    case Status::Code::kOk: return "OK";
    case Status::Code::kNotFound: return "NotFound";
    case Status::Code::kInvalidArgument: return "InvalidArgument";
    case Status::Code::kIoError: return "IOError";
    case Status::Code::kCorruption: return "Corruption";
    case Status::Code::kTruncated: return "Truncated";
    case Status::Code::kOverflow: return "Overflow";
    case Status::Code::kBadCount: return "BadCount";
    case Status::Code::kTooManyDeltas: return "TooManyDeltas";
    case Status::Code::kChecksumMismatch: return "ChecksumMismatch";
    case Status::Code::kFileMissing: return "FileMissing";
    case Status::Code::kDanglingLocator: return "DanglingLocator";
    case Status::Code::kCorruptManifest: return "CorruptManifest";
    case Status::Code::kCorruptModel: return "CorruptModel";
    case Status::Code::kDegenerateDataset: return "DegenerateDataset";
    case Status::Code::kEmptyJob: return "EmptyJob";
  }
  return "Unknown";
}

}  // namespace lifekv

#define LIFEKV_RETURN_IF_ERROR(expr)          \
  do {                                        \
    ::lifekv::Status _st = (expr);            \
    if (!_st.ok()) return _st;                \
  } while (0)

#endif  // LIFEKV_CORE_STATUS_H_
