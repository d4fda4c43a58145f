#pragma once

#include <stdexcept>
#include <string>

namespace shapanova {

enum class ErrorKind {
  Input,         // malformed or inconsistent caller input
  Resource,      // enumeration/budget caps exceeded
  Numerical,     // singular or ill-conditioned linear algebra
  Evaluation,    // model evaluation failed (external process etc.)
  Distribution,  // invalid distribution parameters or sampler failure
  Contract,      // caller used the wrong operation for this input
  Unsupported,   // requested mode not implemented by design
  Degenerate,    // zero-variance or otherwise degenerate estimand
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace shapanova
