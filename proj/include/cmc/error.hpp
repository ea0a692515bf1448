#ifndef CMC_ERROR_HPP
#define CMC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cmc {

// Numeric values are shared with the C API status codes in cmc.h.
enum class ErrorCode : int {
  InvalidArgument = 1,
  InvalidTruncation = 2,
  DimensionMismatch = 3,
  SingularGenerator = 4,
  NotHermitian = 5,
  NotNormalized = 6,
  Integrator = 7,
  JumpFailure = 8,
  NoResonance = 9,
  NonUnimodal = 10,
  Config = 11,
  Io = 12,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace cmc

#endif
