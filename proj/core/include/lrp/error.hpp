#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrp {

enum class ErrorCode {
  invalid_argument,
  invalid_distance,
  empty_window,
  truncation,
  invalid_query,
  numeric,
  invalid_scale,
  invalid_flow,
  lift_infeasible,
  certificate_invalid,
  too_large,
  invalid_data,
  plot_refused,
  parse,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code.
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

}  // namespace lrp
