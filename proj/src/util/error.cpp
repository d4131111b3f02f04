#include "toolbench/util/error.hpp"

namespace toolbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::syntax_error: return "SyntaxError";
    case ErrorCode::unsupported_construct: return "UnsupportedConstruct";
    case ErrorCode::missing_table: return "MissingTable";
    case ErrorCode::missing_column: return "MissingColumn";
    case ErrorCode::unknown_column: return "UnknownColumn";
    case ErrorCode::unknown_condition: return "UnknownCondition";
    case ErrorCode::unknown_operation: return "UnknownOperation";
    case ErrorCode::non_numeric_aggregate: return "NonNumericAggregate";
    case ErrorCode::bad_limit: return "BadLimit";
    case ErrorCode::bad_range: return "BadRange";
    case ErrorCode::bad_argument: return "BadArgument";
    case ErrorCode::unresolved_reference: return "UnresolvedReference";
    case ErrorCode::tool_not_in_pool: return "ToolNotInPool";
    case ErrorCode::no_final_result: return "NoFinalResult";
    case ErrorCode::missing_param: return "MissingParam";
    case ErrorCode::bad_type: return "BadType";
    case ErrorCode::execution_error: return "ExecutionError";
    case ErrorCode::fraction_too_small: return "FractionTooSmall";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::database_error: return "DatabaseError";
    case ErrorCode::transport_error: return "TransportError";
    case ErrorCode::schema_error: return "SchemaError";
  }
  return "Unknown";
}

}  // namespace toolbench
