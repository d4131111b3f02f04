#include "toolbench/transpile/build.hpp"

#include <algorithm>
#include <set>

#include "toolbench/eval/normalize.hpp"
#include "toolbench/runtime/executor.hpp"
#include "toolbench/runtime/tools.hpp"
#include "toolbench/sql/parser.hpp"
#include "toolbench/transpile/pools.hpp"
#include "toolbench/transpile/rest_synth.hpp"
#include "toolbench/transpile/sel.hpp"
#include "toolbench/transpile/slot.hpp"
#include "toolbench/util/error.hpp"
#include "toolbench/util/fs.hpp"
#include "toolbench/util/parallel.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::transpile {

using runtime::EvalInstance;
using runtime::Formulation;

namespace {

constexpr Formulation kFormulations[] = {Formulation::slot, Formulation::sel, Formulation::rest};

std::string reason_of(const Error& e) { return std::string(to_string(e.code())); }

}  // namespace

bool CorpusEntry::targets(Formulation f) const {
  return formulations.empty() ||
         std::find(formulations.begin(), formulations.end(), f) != formulations.end();
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path) {
  std::vector<CorpusEntry> out;
  const auto text = util::read_file(path);
  std::size_t line_no = 0;
  for (const auto& line : util::split(text, '\n')) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    try {
      const Json j = Json::parse(line);
      CorpusEntry e;
      e.sample_id = j.at("sample_id").get<std::int64_t>();
      e.dataset_name = j.at("dataset_name").get<std::string>();
      e.input = j.value("input", "");
      e.query = j.at("query").get<std::string>();
      for (const auto& f : j.value("formulations", Json::array())) {
        auto parsed = runtime::parse_formulation(f.get<std::string>());
        if (!parsed) throw Error(ErrorCode::schema_error, "unknown formulation " + f.dump());
        e.formulations.push_back(*parsed);
      }
      out.push_back(std::move(e));
    } catch (const Json::exception& ex) {
      throw Error(ErrorCode::schema_error,
                  path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<std::string> materialize_databases(const std::filesystem::path& script_dir,
                                               const std::filesystem::path& out_dir) {
  if (!std::filesystem::is_directory(script_dir)) {
    throw Error(ErrorCode::io_error, "not a directory: " + script_dir.string());
  }
  std::vector<std::filesystem::path> scripts;
  for (const auto& entry : std::filesystem::directory_iterator(script_dir)) {
    if (entry.path().extension() == ".sql") scripts.push_back(entry.path());
  }
  std::sort(scripts.begin(), scripts.end());
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> names;
  for (const auto& script : scripts) {
    const auto name = script.stem().string();
    const auto target = out_dir / (name + ".sqlite");
    const auto staging = out_dir / (name + ".sqlite.tmp");
    std::filesystem::remove(staging);
    {
      runtime::Database db(staging, runtime::Database::Mode::read_write_create);
      db.exec_script(util::read_file(script));
    }
    std::filesystem::rename(staging, target);
    const auto sidecar = script_dir / (name + ".descriptions.json");
    if (std::filesystem::exists(sidecar) &&
        !std::filesystem::equivalent(script_dir, out_dir)) {
      std::filesystem::copy_file(sidecar, out_dir / sidecar.filename(),
                                 std::filesystem::copy_options::overwrite_existing);
    }
    names.push_back(name);
  }
  return names;
}

std::map<std::string, Catalog> load_catalogs(const std::filesystem::path& db_root,
                                             const std::filesystem::path& descriptions_dir) {
  std::map<std::string, Catalog> out;
  if (!std::filesystem::is_directory(db_root)) {
    throw Error(ErrorCode::io_error, "database root not found: " + db_root.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(db_root)) {
    if (entry.path().extension() != ".sqlite") continue;
    const auto name = entry.path().stem().string();
    auto desc = db_root / (name + ".descriptions.json");
    if (!std::filesystem::exists(desc) && !descriptions_dir.empty()) {
      desc = descriptions_dir / (name + ".descriptions.json");
    }
    runtime::Database db(entry.path());
    out.emplace(name, load_catalog(db, name, desc));
  }
  return out;
}

Json VerificationRecord::to_json() const {
  Json j = Json::object();
  j["sample_id"] = sample_id;
  j["formulation"] = std::string(runtime::to_string(formulation));
  j["matched"] = matched;
  j["normalized_gold"] = normalized_gold;
  j["normalized_actual"] = normalized_actual;
  j["discard_reason"] = discard_reason ? Json(*discard_reason) : Json(nullptr);
  return j;
}

VerificationRecord verify_equivalence(const EvalInstance& instance, const runtime::ToolPool& pool,
                                      const std::filesystem::path& db_root,
                                      const Json& sql_answer) {
  VerificationRecord rec;
  rec.sample_id = instance.sample_id;
  rec.formulation = instance.formulation;
  rec.normalized_gold = eval::normalized_json(sql_answer);
  util::TempDir work("toolbench-verify");
  runtime::LabelEnv env(work.path(), db_root);
  try {
    if (instance.initialization_step) runtime::run_initialization(*instance.initialization_step, env);
  } catch (const Error& e) {
    rec.discard_reason = reason_of(e);
    return rec;
  }
  const auto result = runtime::execute_sequence(instance.output, env, pool);
  if (!result.ok) {
    rec.discard_reason = std::string(to_string(result.error_code.value_or(ErrorCode::execution_error)));
    return rec;
  }
  rec.normalized_actual = eval::normalized_json(result.answer);
  rec.matched = rec.normalized_actual == rec.normalized_gold;
  if (!rec.matched) rec.discard_reason = "ResultMismatch";
  return rec;
}

namespace {

std::vector<std::string> query_tables(const runtime::ToolCall& init) {
  std::vector<std::string> tables;
  for (const auto& [alias, entry] : init.arguments.at("alias_to_table_dict").items()) {
    tables.push_back(entry.at("original_table_name").get<std::string>());
  }
  return tables;
}

std::vector<rest::RestEndpoint> endpoints_of(const std::string& db,
                                             const std::vector<rest::RestEndpoint>& all) {
  std::vector<rest::RestEndpoint> out;
  for (const auto& e : all) {
    if (e.db == db) out.push_back(e);
  }
  return out;
}

struct Work {
  bool parsed = false;
  sql::SqlAst ast;
  Json sql_answer;
  std::optional<std::string> failure;       // parse or oracle failure, applies to all
  std::optional<std::string> slot_failure;  // compile failure, applies to SLOT and SEL
  std::optional<EvalInstance> slot;
  std::optional<EvalInstance> sel;
  std::optional<SynthesizedEndpoint> rest;
  std::optional<VerificationRecord> slot_record;
  std::optional<VerificationRecord> sel_record;
  std::optional<VerificationRecord> rest_record;
  std::optional<EvalInstance> rest_instance;
};

VerificationRecord failed_record(const CorpusEntry& e, Formulation f, const std::string& reason) {
  VerificationRecord r;
  r.sample_id = e.sample_id;
  r.formulation = f;
  r.discard_reason = reason;
  r.normalized_gold = Json::array();
  r.normalized_actual = Json::array();
  return r;
}

EvalInstance base_instance(const CorpusEntry& e, Formulation f, const Json& answer) {
  EvalInstance inst;
  inst.sample_id = e.sample_id;
  inst.dataset_name = e.dataset_name;
  inst.input = e.input;
  inst.query = e.query;
  inst.gold_answer = answer;
  inst.formulation = f;
  return inst;
}

void process_entry(const CorpusEntry& e, const std::map<std::string, Catalog>& catalogs,
                   const BuildOptions& options, Work& w) {
  auto cat = catalogs.find(e.dataset_name);
  if (cat == catalogs.end()) {
    w.failure = std::string(to_string(ErrorCode::missing_table));
    return;
  }
  try {
    w.ast = sql::parse_sql(e.query);
    w.parsed = true;
  } catch (const Error& err) {
    w.failure = reason_of(err);
    return;
  }
  try {
    runtime::Database db(options.db_root / (e.dataset_name + ".sqlite"));
    w.sql_answer = db.query(e.query).rows_json();
  } catch (const Error& err) {
    w.failure = reason_of(err);
    return;
  }

  if (e.targets(Formulation::slot) || e.targets(Formulation::sel)) {
    try {
      auto prog = compile_slot_sequence(w.ast, e.dataset_name);
      auto slot_pool_ = slot_pool(cat->second.column_enum(query_tables(prog.initialization)));
      if (e.targets(Formulation::slot)) {
        auto inst = base_instance(e, Formulation::slot, w.sql_answer);
        inst.output = prog.calls;
        inst.initialization_step = prog.initialization;
        inst.available_tools = slot_pool_.tool_names();
        w.slot_record = verify_equivalence(inst, slot_pool_, options.db_root, w.sql_answer);
        w.slot = std::move(inst);
      }
      if (e.targets(Formulation::sel)) {
        auto sel_pool = derive_sel_pool(slot_pool_);
        std::vector<std::string> schema;
        for (const auto& c : slot_pool_.column_enum) schema.push_back(c.prefixed_name);
        add_getters(sel_pool, derived_columns(prog.calls, schema));
        auto inst = base_instance(e, Formulation::sel, w.sql_answer);
        inst.output = rewrite_to_sel_sequence(prog.calls);
        inst.initialization_step = prog.initialization;
        inst.available_tools = sel_pool.tool_names();
        w.sel_record = verify_equivalence(inst, sel_pool, options.db_root, w.sql_answer);
        w.sel = std::move(inst);
      }
    } catch (const Error& err) {
      w.slot_failure = reason_of(err);
    }
  }
  if (e.targets(Formulation::rest)) {
    w.rest = synthesize_rest_endpoint(w.ast, e.input, e.dataset_name, &cat->second);
  }
}

std::size_t count_slots(const std::vector<runtime::ToolCall>& calls) {
  std::size_t n = 0;
  for (const auto& c : calls) n += c.arguments.size();
  return n;
}

}  // namespace

BuildResult build_benchmark(const std::vector<CorpusEntry>& corpus, const BuildOptions& options) {
  BuildResult result;
  result.catalogs = load_catalogs(options.db_root, options.descriptions_dir);

  std::vector<Work> work(corpus.size());
  util::parallel_for(corpus.size(), options.jobs, [&](std::size_t i) {
    process_entry(corpus[i], result.catalogs, options, work[i]);
  });

  // Endpoint merging and naming depend on corpus order, so they run serially.
  std::vector<rest::RestEndpoint> synthesized;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (work[i].rest) {
      synthesized.push_back(work[i].rest->endpoint);
      owner.push_back(i);
    }
  }
  auto dedup = deduplicate_endpoints(synthesized);
  disambiguate_names(dedup.endpoints);
  result.endpoints = dedup.endpoints;
  std::map<std::string, runtime::ToolPool> rest_pools;
  for (const auto& [db, catalog] : result.catalogs) {
    rest_pools.emplace(db, rest_pool(endpoints_of(db, result.endpoints)));
  }
  std::vector<std::optional<std::size_t>> endpoint_of(corpus.size());
  for (std::size_t k = 0; k < owner.size(); ++k) endpoint_of[owner[k]] = dedup.instance_endpoint[k];

  util::parallel_for(corpus.size(), options.jobs, [&](std::size_t i) {
    Work& w = work[i];
    if (!endpoint_of[i]) return;
    const auto& e = corpus[i];
    const auto& endpoint = result.endpoints[*endpoint_of[i]];
    auto inst = base_instance(e, Formulation::rest, w.sql_answer);
    runtime::ToolCall call;
    call.name = endpoint.name;
    call.arguments = w.rest->arguments;
    inst.output = {call};
    inst.rest_path = endpoint.path;
    const auto& pool = rest_pools.at(e.dataset_name);
    inst.available_tools = pool.tool_names();
    w.rest_record = verify_equivalence(inst, pool, options.db_root, w.sql_answer);
    if (w.rest_record->matched) {
      runtime::Database db(options.db_root / (e.dataset_name + ".sqlite"));
      inst.output_after_executing_api = rest::execute_endpoint(endpoint, call.arguments, db).dump();
    }
    w.rest_instance = std::move(inst);
  });

  for (auto f : kFormulations) {
    result.datasets[f];
    result.stats[f];
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& e = corpus[i];
    Work& w = work[i];
    for (auto f : kFormulations) {
      if (!e.targets(f)) continue;
      auto& st = result.stats[f];
      ++st.targeted;
      VerificationRecord rec;
      std::optional<EvalInstance>* inst = nullptr;
      if (w.failure) {
        rec = failed_record(e, f, *w.failure);
      } else if (f != Formulation::rest && w.slot_failure) {
        rec = failed_record(e, f, *w.slot_failure);
      } else if (f == Formulation::slot) {
        rec = *w.slot_record;
        inst = &w.slot;
      } else if (f == Formulation::sel) {
        rec = *w.sel_record;
        inst = &w.sel;
      } else {
        rec = *w.rest_record;
        inst = &w.rest_instance;
      }
      if (rec.matched) {
        ++st.retained;
        st.avg_tool_calls += static_cast<double>((*inst)->output.size());
        st.avg_slots += static_cast<double>(count_slots((*inst)->output));
        result.datasets[f].push_back(**inst);
      } else {
        ++st.discarded;
        ++st.discard_reasons[rec.discard_reason.value_or("Unknown")];
      }
      result.records.push_back(std::move(rec));
    }
  }
  for (auto& [f, st] : result.stats) {
    if (st.retained) {
      st.avg_tool_calls /= static_cast<double>(st.retained);
      st.avg_slots /= static_cast<double>(st.retained);
    }
  }
  return result;
}

Json BuildResult::stats_json() const {
  Json out = Json::object();
  for (const auto& [f, st] : stats) {
    Json s = Json::object();
    s["targeted"] = st.targeted;
    s["retained"] = st.retained;
    s["discarded"] = st.discarded;
    s["discard_reasons"] = Json(st.discard_reasons);
    s["avg_tool_calls_per_query"] = st.avg_tool_calls;
    s["avg_slots_per_query"] = st.avg_slots;
    out[std::string(runtime::to_string(f))] = std::move(s);
  }
  out["rest_endpoints"] = endpoints.size();
  return out;
}

runtime::ToolPool instance_pool(const EvalInstance& instance, const Catalog& catalog,
                                const std::vector<rest::RestEndpoint>& endpoints) {
  if (instance.formulation == Formulation::rest) {
    return rest_pool(endpoints_of(instance.dataset_name, endpoints));
  }
  std::vector<std::string> tables;
  if (instance.initialization_step) tables = query_tables(*instance.initialization_step);
  auto slot = slot_pool(catalog.column_enum(tables));
  if (instance.formulation == Formulation::slot) return slot;
  auto sel = derive_sel_pool(slot);
  std::vector<std::string> extra;
  for (const auto& name : instance.available_tools) {
    if (util::starts_with_ci(name, "get_") && !sel.find(name)) extra.push_back(name.substr(4));
  }
  add_getters(sel, extra);
  return sel;
}

runtime::ToolPool database_pool(Formulation f, const Catalog& catalog,
                                const std::vector<rest::RestEndpoint>& endpoints) {
  if (f == Formulation::rest) return rest_pool(endpoints_of(catalog.db, endpoints));
  auto slot = slot_pool(catalog.column_enum());
  return f == Formulation::slot ? slot : derive_sel_pool(slot);
}

Json endpoints_json(const std::vector<rest::RestEndpoint>& endpoints) {
  Json out = Json::array();
  for (const auto& e : endpoints) out.push_back(e.to_json());
  return out;
}

std::vector<rest::RestEndpoint> endpoints_from_json(const Json& j) {
  const Json& list = j.is_object() && j.contains("endpoints") ? j.at("endpoints") : j;
  if (!list.is_array()) throw Error(ErrorCode::schema_error, "endpoint pool must be a list");
  std::vector<rest::RestEndpoint> out;
  for (const auto& e : list) out.push_back(rest::RestEndpoint::from_json(e));
  return out;
}

}  // namespace toolbench::transpile
