#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "toolbench/agent/react.hpp"
#include "toolbench/eval/report.hpp"
#include "toolbench/transpile/build.hpp"

namespace toolbench::cli {

/// Creates <db_root>/<name>.sqlite from every <name>.sql under `data_dir`.
std::vector<std::string> run_init_db(const std::filesystem::path& data_dir,
                                     const std::filesystem::path& db_root, std::ostream& log);

struct BuildConfig {
  std::filesystem::path corpus;
  std::filesystem::path db_root;
  std::filesystem::path descriptions_dir;
  std::filesystem::path out_dir;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  bool obfuscate = false;
  std::vector<double> shortlist_fractions;
};

/// Writes datasets, specs, endpoint pool, verification records and stats
/// under out_dir. Throws Error(execution_error) when nothing is retained.
transpile::BuildResult run_build(const BuildConfig& config, std::ostream& log);

struct EvalConfig {
  std::filesystem::path dataset;
  std::optional<runtime::Formulation> formulation;  // inferred from the file name when unset
  std::filesystem::path db_root;
  std::filesystem::path endpoints;  // REST pool; defaults to endpoints.json beside the dataset
  std::filesystem::path out_dir;
  std::size_t jobs = 1;

  // Direct mode.
  std::filesystem::path predictions;
  std::filesystem::path obfuscation_maps;

  // Agent mode.
  bool agent = false;
  std::string stub;  // "gold", "never-finish", "repeating" or empty for a live model
  agent::ModelClientConfig model;
  std::filesystem::path prompt;
  std::string rest_url;
  std::size_t budget = 10;
  std::size_t observation_limit = 4096;
  bool obfuscate = false;
  std::uint64_t seed = 42;
  std::optional<double> shortlist;
};

/// Scores predictions (or runs agent episodes) and writes report.json,
/// report.csv and, for agents, traces.jsonl.
eval::MetricsReport run_eval(const EvalConfig& config, std::ostream& log);

/// One row per report file with the headline metrics.
struct ReportRow {
  std::string source;
  Json report;
};

std::string summary_table(const std::vector<ReportRow>& rows);
std::string summary_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> load_reports(const std::vector<std::filesystem::path>& paths);

}  // namespace toolbench::cli
