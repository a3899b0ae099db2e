#pragma once

#include <stdexcept>
#include <string>

namespace bext {

// Every failure carries a short machine-readable code ("empty-space",
// "no-chain", ...) alongside the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  explicit Error(std::string code) : std::runtime_error(code), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace bext
