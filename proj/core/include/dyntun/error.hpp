#pragma once

#include <stdexcept>
#include <string>

namespace dyntun {

/// Broad failure class, used by front-ends to pick an exit status.
enum class ErrorKind {
  invalid_argument,
  numeric,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_argument(const std::string& what) {
  return Error(ErrorKind::invalid_argument, what);
}

inline Error numeric_failure(const std::string& what) {
  return Error(ErrorKind::numeric, what);
}

}  // namespace dyntun
