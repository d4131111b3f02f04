#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toolbench/rest/endpoint.hpp"
#include "toolbench/runtime/instance.hpp"
#include "toolbench/runtime/pool.hpp"
#include "toolbench/transpile/catalog.hpp"

namespace toolbench::transpile {

struct CorpusEntry {
  std::int64_t sample_id = 0;
  std::string dataset_name;
  std::string input;
  std::string query;
  // Formulations this query is meant for; empty means all three.
  std::vector<runtime::Formulation> formulations;

  bool targets(runtime::Formulation f) const;
};

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path);

/// Runs every `<db>.sql` script in `script_dir` into `<out_dir>/<db>.sqlite`,
/// replacing existing files. Returns the database names in sorted order.
std::vector<std::string> materialize_databases(const std::filesystem::path& script_dir,
                                               const std::filesystem::path& out_dir);

/// Catalogs for every `<db>.sqlite` under `db_root`, with descriptions read
/// from `<db>.descriptions.json` next to the database or in `descriptions_dir`.
std::map<std::string, Catalog> load_catalogs(const std::filesystem::path& db_root,
                                             const std::filesystem::path& descriptions_dir = {});

struct VerificationRecord {
  std::int64_t sample_id = 0;
  runtime::Formulation formulation = runtime::Formulation::slot;
  bool matched = false;
  Json normalized_gold;
  Json normalized_actual;
  std::optional<std::string> discard_reason;

  Json to_json() const;
};

/// Executes an instance's gold artifact and compares it to `sql_answer`.
VerificationRecord verify_equivalence(const runtime::EvalInstance& instance,
                                      const runtime::ToolPool& pool,
                                      const std::filesystem::path& db_root, const Json& sql_answer);

struct FormulationStats {
  std::size_t targeted = 0;
  std::size_t retained = 0;
  std::size_t discarded = 0;
  std::map<std::string, std::size_t> discard_reasons;
  double avg_tool_calls = 0;
  double avg_slots = 0;
};

struct BuildOptions {
  std::filesystem::path db_root;
  std::filesystem::path descriptions_dir;
  std::size_t jobs = 1;
};

struct BuildResult {
  std::map<runtime::Formulation, std::vector<runtime::EvalInstance>> datasets;
  std::vector<VerificationRecord> records;
  std::map<runtime::Formulation, FormulationStats> stats;
  std::map<std::string, Catalog> catalogs;
  std::vector<rest::RestEndpoint> endpoints;  // deduplicated, all databases

  Json stats_json() const;
};

/// Compiles, synthesizes and verifies every corpus entry. Output order follows
/// the corpus regardless of `jobs`.
BuildResult build_benchmark(const std::vector<CorpusEntry>& corpus, const BuildOptions& options);

/// Reconstructs the tool pool an instance was built against.
runtime::ToolPool instance_pool(const runtime::EvalInstance& instance, const Catalog& catalog,
                                const std::vector<rest::RestEndpoint>& endpoints);

/// Database-wide pool used for spec files.
runtime::ToolPool database_pool(runtime::Formulation f, const Catalog& catalog,
                                const std::vector<rest::RestEndpoint>& endpoints);

Json endpoints_json(const std::vector<rest::RestEndpoint>& endpoints);
std::vector<rest::RestEndpoint> endpoints_from_json(const Json& j);

}  // namespace toolbench::transpile
