#include "toolbench/eval/metrics.hpp"

#include <map>

#include "toolbench/eval/normalize.hpp"
#include "toolbench/util/fs.hpp"

namespace toolbench::eval {

using runtime::ToolCall;

AlignmentResult align_sequences(const std::vector<std::string>& pred,
                                const std::vector<std::string>& gold) {
  const std::size_t n = pred.size();
  const std::size_t m = gold.size();
  // suffix[i][j] = LCS length of pred[i:] and gold[j:]
  std::vector<std::vector<std::size_t>> suffix(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      suffix[i][j] = pred[i] == gold[j] ? suffix[i + 1][j + 1] + 1
                                        : std::max(suffix[i + 1][j], suffix[i][j + 1]);
    }
  }
  AlignmentResult out;
  std::vector<bool> pred_used(n, false);
  std::vector<bool> gold_used(m, false);
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n && j < m) {
    if (pred[i] == gold[j] && suffix[i][j] == suffix[i + 1][j + 1] + 1) {
      out.pairs.emplace_back(i, j);
      pred_used[i] = gold_used[j] = true;
      ++i;
      ++j;
    } else if (suffix[i][j + 1] >= suffix[i + 1][j]) {
      ++j;
    } else {
      ++i;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!pred_used[k]) out.unmatched_pred.push_back(k);
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (!gold_used[k]) out.unmatched_gold.push_back(k);
  }
  return out;
}

namespace {

std::vector<std::string> names_of(const std::vector<ToolCall>& calls) {
  std::vector<std::string> out;
  for (const auto& c : calls) out.push_back(c.name);
  return out;
}

}  // namespace

AlignmentResult align_sequences(const std::vector<ToolCall>& pred, const std::vector<ToolCall>& gold) {
  return align_sequences(names_of(pred), names_of(gold));
}

PRF PRF::from_counts(double tp, double predicted, double expected) {
  PRF r;
  r.precision = predicted > 0 ? tp / predicted : 0.0;
  r.recall = expected > 0 ? tp / expected : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

PRF intent_metrics(const AlignmentResult& a, std::size_t pred_size, std::size_t gold_size) {
  return PRF::from_counts(static_cast<double>(a.pairs.size()), static_cast<double>(pred_size),
                          static_cast<double>(gold_size));
}

namespace {

// For each call, maps an argument referencing an earlier label to a token
// naming that producer's gold position.
std::vector<Json> canonical_arguments(const std::vector<ToolCall>& calls,
                                      const std::vector<std::optional<std::size_t>>& gold_pos,
                                      const char* side) {
  std::vector<Json> out;
  std::map<std::string, std::size_t> producer;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    Json args = calls[i].arguments.is_object() ? calls[i].arguments : Json::object();
    for (auto& [key, value] : args.items()) {
      const auto label = runtime::referenced_label(value);
      if (label.empty()) continue;
      auto p = producer.find(label);
      if (p == producer.end()) continue;
      value = gold_pos[p->second] ? "$@" + std::to_string(*gold_pos[p->second]) + "$"
                                  : std::string("$@") + side + std::to_string(p->second) + "$";
    }
    out.push_back(std::move(args));
    if (!calls[i].label.empty()) producer[calls[i].label] = i;
  }
  return out;
}

bool same_value(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return normalize_answer(a) == normalize_answer(b);
  return a == b;
}

}  // namespace

SlotScore slot_metrics(const AlignmentResult& a, const std::vector<ToolCall>& pred,
                       const std::vector<ToolCall>& gold) {
  SlotScore s;
  if (a.pairs.empty()) {
    s.zero_pairs = true;
    return s;
  }
  std::vector<std::optional<std::size_t>> pred_to_gold(pred.size());
  std::vector<std::optional<std::size_t>> gold_to_gold(gold.size());
  for (const auto& [p, g] : a.pairs) pred_to_gold[p] = g;
  for (std::size_t g = 0; g < gold.size(); ++g) gold_to_gold[g] = g;
  const auto pred_args = canonical_arguments(pred, pred_to_gold, "p");
  const auto gold_args = canonical_arguments(gold, gold_to_gold, "g");

  for (const auto& [p, g] : a.pairs) {
    const Json& pa = pred_args[p];
    const Json& ga = gold_args[g];
    s.predicted += pa.size();
    s.expected += ga.size();
    for (const auto& [key, value] : pa.items()) {
      auto it = ga.find(key);
      if (it != ga.end() && same_value(value, *it)) ++s.true_positives;
    }
  }
  if (s.predicted == 0 && s.expected == 0) {
    s.prf = {1.0, 1.0, 1.0};
  } else {
    s.prf = PRF::from_counts(static_cast<double>(s.true_positives), static_cast<double>(s.predicted),
                             static_cast<double>(s.expected));
  }
  return s;
}

CompletionResult completion_check(const runtime::EvalInstance& instance,
                                  const std::vector<ToolCall>& prediction,
                                  const runtime::ToolPool& pool,
                                  const std::filesystem::path& db_root) {
  CompletionResult r;
  if (prediction.empty()) {
    r.failure = "NoFinalResult";
    return r;
  }
  util::TempDir work("toolbench-eval");
  runtime::LabelEnv env(work.path(), db_root);
  try {
    if (instance.initialization_step) runtime::run_initialization(*instance.initialization_step, env);
  } catch (const Error& e) {
    r.failure = std::string(toolbench::to_string(e.code()));
    return r;
  }
  auto exec = runtime::execute_sequence(prediction, env, pool);
  r.trace = std::move(exec.trace);
  if (!exec.ok) {
    r.failure = std::string(toolbench::to_string(exec.error_code.value_or(ErrorCode::execution_error)));
    return r;
  }
  r.answer = std::move(exec.answer);
  r.completed = answers_equal(r.answer, instance.gold_answer);
  if (!r.completed) r.failure = "ResultMismatch";
  return r;
}

std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::instruction_alignment_failure: return "instruction_alignment_failure";
    case ErrorCategory::wrong_func_count: return "wrong_func_count";
    case ErrorCategory::wrong_func_format: return "wrong_func_format";
    case ErrorCategory::hallucinated_func_name: return "hallucinated_func_name";
    case ErrorCategory::wrong_func_name: return "wrong_func_name";
    case ErrorCategory::missing_required_parameter: return "missing_required_parameter";
    case ErrorCategory::unexpected_param: return "unexpected_param";
    case ErrorCategory::value_error: return "value_error";
  }
  return "value_error";
}

ErrorCategory classify_error(const runtime::EvalInstance& instance,
                             const ParsedPrediction& prediction, const runtime::ToolPool& pool) {
  if (prediction.stage == ParseStage::failed) return ErrorCategory::instruction_alignment_failure;
  if (prediction.payload.size() != instance.output.size()) return ErrorCategory::wrong_func_count;
  if (!prediction.well_formed) return ErrorCategory::wrong_func_format;
  for (const auto& c : prediction.calls) {
    if (!pool.find(c.name)) return ErrorCategory::hallucinated_func_name;
  }
  for (std::size_t i = 0; i < prediction.calls.size(); ++i) {
    if (prediction.calls[i].name != instance.output[i].name) return ErrorCategory::wrong_func_name;
  }
  for (const auto& c : prediction.calls) {
    const auto* spec = pool.find(c.name);
    for (const auto& p : spec->parameters) {
      if (p.required && (!c.arguments.contains(p.name) || c.arguments.at(p.name).is_null())) {
        return ErrorCategory::missing_required_parameter;
      }
    }
  }
  for (const auto& c : prediction.calls) {
    const auto* spec = pool.find(c.name);
    for (const auto& [key, value] : c.arguments.items()) {
      if (!spec->find_param(key)) return ErrorCategory::unexpected_param;
    }
  }
  return ErrorCategory::value_error;
}

}  // namespace toolbench::eval
