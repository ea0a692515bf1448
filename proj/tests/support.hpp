#ifndef CMC_TESTS_SUPPORT_HPP
#define CMC_TESTS_SUPPORT_HPP

#include <cmc/error.hpp>

#include <optional>

namespace cmc::test {

// Error code thrown by `f`, or nullopt when it returns normally.
template <typename F>
std::optional<ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace cmc::test

#endif
