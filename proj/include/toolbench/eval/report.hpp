#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toolbench/eval/metrics.hpp"
#include "toolbench/eval/parser.hpp"
#include "toolbench/rest/endpoint.hpp"
#include "toolbench/runtime/instance.hpp"
#include "toolbench/spec/emitter.hpp"
#include "toolbench/transpile/catalog.hpp"

namespace toolbench::eval {

struct PredictionRecord {
  std::int64_t sample_id = 0;
  std::string raw_text;
};

/// JSONL rows {"sample_id", "output"}; "prediction" is accepted as an alias.
/// Non-string outputs are serialized and parsed like model text. Malformed
/// lines are described in `problems` and skipped; without it they throw
/// Error(schema_error).
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path,
                                               std::vector<std::string>* problems = nullptr);

struct InstanceScore {
  std::int64_t sample_id = 0;
  ParseStage stage = ParseStage::failed;
  std::size_t predicted_calls = 0;
  std::size_t gold_calls = 0;
  std::size_t intent_pairs = 0;
  PRF intent;
  SlotScore slot;
  bool completed = false;
  std::optional<std::string> failure;
  std::optional<ErrorCategory> category;
  // Agent runs only.
  std::optional<std::size_t> loops;
  bool oob = false;
  bool stuck = false;

  Json to_json() const;
};

InstanceScore score_instance(const runtime::EvalInstance& instance,
                             const ParsedPrediction& prediction, const runtime::ToolPool& pool,
                             const std::filesystem::path& db_root);

struct MetricsReport {
  runtime::Formulation formulation = runtime::Formulation::slot;
  std::string pool_sha256;
  PRF intent_macro;
  PRF intent_micro;
  PRF slot_macro;
  PRF slot_micro;
  std::size_t slot_zero_pair_instances = 0;
  double completion_rate = 0;
  std::map<std::string, std::size_t> error_histogram;
  std::size_t missing_predictions = 0;
  std::vector<InstanceScore> instances;
  std::optional<Json> agent_summary;

  Json to_json() const;
  std::string to_csv() const;
};

MetricsReport aggregate_scores(runtime::Formulation formulation, std::vector<InstanceScore> scores);

struct EvalOptions {
  std::filesystem::path db_root;
  std::size_t jobs = 1;
  // Predictions written against obfuscated pools are mapped back per sample.
  std::map<std::int64_t, spec::ObfuscationMap> renames;
};

/// Scores every dataset instance; instances without a prediction count as
/// unparseable output.
MetricsReport evaluate(const std::vector<runtime::EvalInstance>& dataset,
                       const std::vector<PredictionRecord>& predictions,
                       const std::map<std::string, transpile::Catalog>& catalogs,
                       const std::vector<rest::RestEndpoint>& endpoints, const EvalOptions& options);

/// Digest of the tool specs presented for each instance.
std::string pool_digest(const std::vector<runtime::EvalInstance>& dataset,
                        const std::map<std::string, transpile::Catalog>& catalogs,
                        const std::vector<rest::RestEndpoint>& endpoints);

}  // namespace toolbench::eval
