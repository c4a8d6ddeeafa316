#pragma once

#include <stdexcept>
#include <string>

namespace gwbec {

enum class ErrorKind {
  invalid_argument,  // precondition on an input value
  out_of_range,      // time or index outside the valid domain
  grid_mismatch,     // fields living on different grids
  numerical,         // NaN/Inf or non-convergence
  io,                // filesystem and parse failures
  invariant,         // a physical invariant was violated (a bug)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::invalid_argument, what);
}

}  // namespace gwbec
