#pragma once

#include <stdexcept>
#include <string>

namespace kubo {

// Exit-code categories used by the CLI: 2 tolerance, 3 precondition/assumption, 4 numerical.
enum class ErrKind { Precondition = 3, Tolerance = 2, Numerical = 4 };

class Error : public std::runtime_error {
 public:
  Error(std::string code, ErrKind kind, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)), kind_(kind) {}
  const std::string& code() const { return code_; }
  ErrKind kind() const { return kind_; }

 private:
  std::string code_;
  ErrKind kind_;
};

[[noreturn]] inline void fail(const char* code, ErrKind kind, const std::string& msg) {
  throw Error(code, kind, msg);
}

}  // namespace kubo
