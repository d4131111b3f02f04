#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toolbench {

enum class ErrorCode {
  syntax_error,
  unsupported_construct,
  missing_table,
  missing_column,
  unknown_column,
  unknown_condition,
  unknown_operation,
  non_numeric_aggregate,
  bad_limit,
  bad_range,
  bad_argument,
  unresolved_reference,
  tool_not_in_pool,
  no_final_result,
  missing_param,
  bad_type,
  execution_error,
  fraction_too_small,
  io_error,
  database_error,
  transport_error,
  schema_error,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a stable machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace toolbench
