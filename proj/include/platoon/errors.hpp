#pragma once

#include <stdexcept>
#include <string>

namespace platoon {

enum class ErrorCode {
  schema,
  dangling_reference,
  soc_bounds,
  nonpositive_travel_time,
  parallel_arc,
  invalid_parameter,
  infeasible_deadline,
  unknown_node,
  unservable,
  too_large,
  io,
};

const char* to_string(ErrorCode code);

/// Raised for malformed or inconsistent input data.
class InputError : public std::runtime_error {
 public:
  InputError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A plan whose schedule cannot be derived (cyclic synchronization,
/// broken walks).
class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace platoon
