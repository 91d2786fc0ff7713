#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alforge {

// Stable categories surfaced by the command-line tool.
enum class ErrorCategory { Config, Data, Train, Diverge, PoolExhausted };

std::string_view to_string(ErrorCategory category);

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

[[noreturn]] void throw_error(ErrorCategory category, const std::string& message);

inline void require(bool condition, ErrorCategory category, const std::string& message) {
  if (!condition) throw_error(category, message);
}

}  // namespace alforge
