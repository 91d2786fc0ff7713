#include "alforge/core/error.hpp"

namespace alforge {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config: return "CONFIG";
    case ErrorCategory::Data: return "DATA";
    case ErrorCategory::Train: return "TRAIN";
    case ErrorCategory::Diverge: return "DIVERGE";
    case ErrorCategory::PoolExhausted: return "POOL_EXHAUSTED";
  }
  return "UNKNOWN";
}

void throw_error(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace alforge
