#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "toolbench/runtime/instance.hpp"
#include "toolbench/util/json.hpp"
#include "toolbench/runtime/pool.hpp"
#include "toolbench/transpile/build.hpp"
#include "toolbench/util/fs.hpp"

namespace toolbench::testing {

/// Source data directory (SQL scripts, corpus, prompt).
std::filesystem::path data_dir();

/// Databases materialized into a temp dir plus the benchmark built from the
/// bundled corpus. Built once per process.
struct Workspace {
  util::TempDir dir{"toolbench-test"};
  std::filesystem::path db_root;
  std::vector<transpile::CorpusEntry> corpus;
  transpile::BuildResult build;
};

const Workspace& workspace();

const std::vector<runtime::EvalInstance>& dataset(runtime::Formulation f);

/// Sample id of the first corpus entry whose SQL contains `needle`.
std::int64_t sample_with_query(std::string_view needle);

const runtime::EvalInstance& instance(runtime::Formulation f, std::int64_t sample_id);

runtime::ToolPool pool_for(const runtime::EvalInstance& inst);

std::string prompt_template();

/// Compares calls with an expected list written with plain file-name labels
/// ("data_0.csv" style). Names and argument values must match exactly,
/// including float vs integer; labels and references must match under one
/// consistent renaming. On mismatch, `why` describes the first difference.
bool same_calls_up_to_labels(const std::vector<runtime::ToolCall>& got, const Json& expected,
                             std::string* why = nullptr);

}  // namespace toolbench::testing
