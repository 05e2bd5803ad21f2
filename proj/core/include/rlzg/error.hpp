#pragma once

#include <stdexcept>
#include <string>

namespace rlzg {

// Broad failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
  kInvalidArgument,  // caller passed something the contract forbids
  kOutOfRange,       // positions/ranges outside a sequence or reservoir
  kNotFound,         // unknown sequence name
  kIo,               // filesystem trouble
  kCorrupt,          // archive bytes failed validation
  kUnsupportedVersion,
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

[[noreturn]] inline void corrupt(const std::string& what) {
  throw Error(ErrorKind::kCorrupt, "corrupt archive: " + what);
}

}  // namespace rlzg
