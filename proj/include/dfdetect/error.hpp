#pragma once

#include <stdexcept>
#include <string>

namespace dfdetect {

/// Broad failure class; maps one-to-one onto CLI exit codes.
enum class ErrorKind {
  usage = 1,    // bad arguments or configuration
  data = 2,     // malformed or inconsistent input data
  runtime = 3,  // everything else
};

/// Every library failure is reported as an Error carrying a dotted,
/// machine-parseable reason code (e.g. "manifest.duplicate_id").
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string code,
                              const std::string& message) {
  throw Error(kind, std::move(code), message);
}

}  // namespace dfdetect
