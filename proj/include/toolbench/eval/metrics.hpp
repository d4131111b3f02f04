#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toolbench/eval/parser.hpp"
#include "toolbench/runtime/executor.hpp"
#include "toolbench/runtime/instance.hpp"
#include "toolbench/runtime/pool.hpp"
#include "toolbench/runtime/tool_call.hpp"

namespace toolbench::eval {

struct AlignmentResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (pred index, gold index)
  std::vector<std::size_t> unmatched_pred;
  std::vector<std::size_t> unmatched_gold;
};

/// Longest common subsequence over intent names. Among optimal alignments
/// the one pairing the earliest positions is chosen.
AlignmentResult align_sequences(const std::vector<std::string>& pred,
                                const std::vector<std::string>& gold);
AlignmentResult align_sequences(const std::vector<runtime::ToolCall>& pred,
                                const std::vector<runtime::ToolCall>& gold);

struct PRF {
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  static PRF from_counts(double tp, double predicted, double expected);
};

PRF intent_metrics(const AlignmentResult& a, std::size_t pred_size, std::size_t gold_size);

struct SlotScore {
  PRF prf;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t expected = 0;
  bool zero_pairs = false;
};

/// Argument key-value agreement over matched pairs. "$LABEL$" values are
/// rewritten to the gold position of the call that produced them, so label
/// spellings never count. The label field itself is not scored.
SlotScore slot_metrics(const AlignmentResult& a, const std::vector<runtime::ToolCall>& pred,
                       const std::vector<runtime::ToolCall>& gold);

struct CompletionResult {
  bool completed = false;
  Json answer;
  std::optional<std::string> failure;  // error code name or "ResultMismatch"
  std::vector<runtime::StepTrace> trace;
};

/// Executes the predicted calls against the instance's pool (after its
/// initialization step) and compares the normalized answer with gold.
CompletionResult completion_check(const runtime::EvalInstance& instance,
                                  const std::vector<runtime::ToolCall>& prediction,
                                  const runtime::ToolPool& pool,
                                  const std::filesystem::path& db_root);

enum class ErrorCategory {
  instruction_alignment_failure,
  wrong_func_count,
  wrong_func_format,
  hallucinated_func_name,
  wrong_func_name,
  missing_required_parameter,
  unexpected_param,
  value_error,
};

inline constexpr std::array kAllErrorCategories = {
    ErrorCategory::instruction_alignment_failure, ErrorCategory::wrong_func_count,
    ErrorCategory::wrong_func_format,             ErrorCategory::hallucinated_func_name,
    ErrorCategory::wrong_func_name,               ErrorCategory::missing_required_parameter,
    ErrorCategory::unexpected_param,              ErrorCategory::value_error,
};

std::string_view to_string(ErrorCategory c);

/// First matching category in precedence order. Intended for predictions
/// that failed completion; anything not caught earlier is a value error.
ErrorCategory classify_error(const runtime::EvalInstance& instance,
                             const ParsedPrediction& prediction, const runtime::ToolPool& pool);

}  // namespace toolbench::eval
