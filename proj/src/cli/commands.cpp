#include "toolbench/cli/commands.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include "toolbench/spec/emitter.hpp"
#include "toolbench/util/error.hpp"
#include "toolbench/util/fs.hpp"
#include "toolbench/util/parallel.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::cli {

using runtime::EvalInstance;
using runtime::Formulation;

namespace {

constexpr Formulation kFormulations[] = {Formulation::slot, Formulation::sel, Formulation::rest};

std::string fixed(double v, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string fraction_tag(double f) {
  return std::to_string(static_cast<int>(f * 100 + 0.5)) + "pct";
}

std::vector<std::string> gold_tools(const EvalInstance& inst) {
  std::vector<std::string> out;
  for (const auto& c : inst.output) {
    if (std::find(out.begin(), out.end(), c.name) == out.end()) out.push_back(c.name);
  }
  return out;
}

const transpile::Catalog& catalog_for(const std::map<std::string, transpile::Catalog>& catalogs,
                                      const std::string& db) {
  auto it = catalogs.find(db);
  if (it == catalogs.end()) throw Error(ErrorCode::missing_table, "no database named " + db);
  return it->second;
}

}  // namespace

std::vector<std::string> run_init_db(const std::filesystem::path& data_dir,
                                     const std::filesystem::path& db_root, std::ostream& log) {
  auto names = transpile::materialize_databases(data_dir, db_root);
  for (const auto& n : names) log << "created " << (db_root / (n + ".sqlite")).string() << "\n";
  if (names.empty()) throw Error(ErrorCode::io_error, "no .sql scripts in " + data_dir.string());
  return names;
}

transpile::BuildResult run_build(const BuildConfig& config, std::ostream& log) {
  for (const double f : config.shortlist_fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw Error(ErrorCode::bad_argument, "shortlist fraction must be in (0, 1]: " + std::to_string(f));
    }
  }
  const auto corpus = transpile::load_corpus(config.corpus);
  transpile::BuildOptions options{config.db_root, config.descriptions_dir, config.jobs};
  auto result = transpile::build_benchmark(corpus, options);
  const auto& out = config.out_dir;
  std::filesystem::create_directories(out);

  for (auto f : kFormulations) {
    const std::string name(runtime::to_string(f));
    util::write_file(out / (name + ".jsonl"), runtime::to_jsonl(result.datasets[f]));
    for (const auto& [db, catalog] : result.catalogs) {
      const auto pool = transpile::database_pool(f, catalog, result.endpoints);
      const auto dir = out / "specs" / name;
      std::filesystem::create_directories(dir);
      util::write_file(dir / (db + ".json"), spec::emit_pool_spec(pool).dump(2) + "\n");
    }
  }
  util::write_file(out / "endpoints.json",
                   Json{{"endpoints", transpile::endpoints_json(result.endpoints)}}.dump(2) + "\n");
  std::string records;
  for (const auto& r : result.records) records += r.to_json().dump() + "\n";
  util::write_file(out / "verification.jsonl", records);
  util::write_file(out / "stats.json", result.stats_json().dump(2) + "\n");

  if (config.obfuscate) {
    std::filesystem::create_directories(out / "obfuscated");
    for (auto f : kFormulations) {
      std::string rows, maps;
      for (const auto& inst : result.datasets[f]) {
        const auto pool = transpile::instance_pool(inst, catalog_for(result.catalogs, inst.dataset_name),
                                                   result.endpoints);
        const auto ob = spec::obfuscate_pool(pool, config.seed + static_cast<std::uint64_t>(inst.sample_id));
        EvalInstance renamed = inst;
        renamed.output = spec::obfuscate_calls(inst.output, ob.map);
        renamed.available_tools = ob.pool.tool_names();
        rows += renamed.to_json().dump() + "\n";
        maps += Json{{"sample_id", inst.sample_id}, {"map", ob.map.to_json()}}.dump() + "\n";
      }
      const std::string name(runtime::to_string(f));
      util::write_file(out / "obfuscated" / (name + ".jsonl"), rows);
      util::write_file(out / "obfuscated" / (name + ".maps.jsonl"), maps);
    }
  }

  if (!config.shortlist_fractions.empty()) {
    std::filesystem::create_directories(out / "shortlists");
    for (double fraction : config.shortlist_fractions) {
      for (auto f : kFormulations) {
        std::string rows;
        std::size_t skipped = 0;
        for (const auto& inst : result.datasets[f]) {
          const auto pool = transpile::instance_pool(
              inst, catalog_for(result.catalogs, inst.dataset_name), result.endpoints);
          try {
            auto s = spec::shortlist_tools(pool.tool_names(), gold_tools(inst), fraction,
                                           config.seed + static_cast<std::uint64_t>(inst.sample_id));
            s.sample_id = inst.sample_id;
            rows += s.to_json().dump() + "\n";
          } catch (const Error& e) {
            if (e.code() != ErrorCode::fraction_too_small) throw;
            ++skipped;
          }
        }
        const std::string name(runtime::to_string(f));
        util::write_file(out / "shortlists" / (name + "_" + fraction_tag(fraction) + ".jsonl"), rows);
        if (skipped) {
          log << "shortlist " << fixed(fraction) << " " << name << ": " << skipped
              << " instances skipped, pool too small\n";
        }
      }
    }
  }

  std::size_t retained = 0;
  for (auto f : kFormulations) {
    const auto& st = result.stats[f];
    retained += st.retained;
    log << runtime::to_string(f) << ": targeted " << st.targeted << ", retained " << st.retained
        << ", discarded " << st.discarded << ", avg tool calls/query " << fixed(st.avg_tool_calls)
        << ", avg slots/query " << fixed(st.avg_slots) << "\n";
    for (const auto& [reason, n] : st.discard_reasons) log << "  discarded " << reason << ": " << n << "\n";
  }
  log << "rest endpoints: " << result.endpoints.size() << "\n";
  if (retained == 0) throw Error(ErrorCode::execution_error, "no instances retained");
  return result;
}

namespace {

Formulation infer_formulation(const EvalConfig& config) {
  if (config.formulation) return *config.formulation;
  if (auto f = runtime::parse_formulation(config.dataset.stem().string())) return *f;
  throw Error(ErrorCode::bad_argument,
              "cannot infer formulation from " + config.dataset.filename().string() +
                  "; pass --formulation");
}

std::map<std::int64_t, spec::ObfuscationMap> load_maps(const std::filesystem::path& path) {
  std::map<std::int64_t, spec::ObfuscationMap> out;
  for (const auto& line : util::split(util::read_file(path), '\n')) {
    if (util::trim(line).empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("sample_id") || !j.contains("map")) {
      throw Error(ErrorCode::schema_error, "malformed obfuscation map line in " + path.string());
    }
    out.emplace(j.at("sample_id").get<std::int64_t>(), spec::ObfuscationMap::from_json(j.at("map")));
  }
  return out;
}

std::unique_ptr<agent::ModelClient> stub_client(const std::string& stub,
                                                const std::vector<runtime::ToolCall>& gold) {
  if (stub == "gold") return agent::ScriptedClient::replay(gold);
  const auto& first = gold.front();
  if (stub == "never-finish") return agent::ScriptedClient::never_finish(first.name, first.arguments);
  if (stub == "repeating") {
    Json input = first.arguments;
    input["label"] = "RETRY";
    return agent::ScriptedClient::repeating(first.name, input);
  }
  throw Error(ErrorCode::bad_argument, "unknown stub: " + stub);
}

eval::InstanceScore score_episode(const EvalInstance& inst, const agent::Episode& ep) {
  eval::InstanceScore s;
  s.sample_id = inst.sample_id;
  s.stage = eval::ParseStage::json;
  s.predicted_calls = ep.executed_calls.size();
  s.gold_calls = inst.output.size();
  const auto a = eval::align_sequences(ep.executed_calls, inst.output);
  s.intent_pairs = a.pairs.size();
  s.intent = eval::intent_metrics(a, ep.executed_calls.size(), inst.output.size());
  s.slot = eval::slot_metrics(a, ep.executed_calls, inst.output);
  s.completed = ep.completed;
  if (!ep.completed) {
    s.failure = ep.outcome == agent::Outcome::error ? ep.error_cause : std::string(agent::to_string(ep.outcome));
  }
  const auto flags = agent::classify_trace(ep);
  s.loops = flags.loops;
  s.oob = flags.oob;
  s.stuck = flags.stuck;
  return s;
}

}  // namespace

eval::MetricsReport run_eval(const EvalConfig& config, std::ostream& log) {
  const Formulation f = infer_formulation(config);
  const auto dataset = runtime::read_dataset(config.dataset, f);
  const auto catalogs = transpile::load_catalogs(config.db_root);
  std::vector<rest::RestEndpoint> endpoints;
  if (f == Formulation::rest) {
    const auto path = config.endpoints.empty() ? config.dataset.parent_path() / "endpoints.json"
                                               : config.endpoints;
    endpoints = transpile::endpoints_from_json(Json::parse(util::read_file(path)));
  }
  std::filesystem::create_directories(config.out_dir);

  eval::MetricsReport report;
  if (!config.agent) {
    if (config.predictions.empty()) throw Error(ErrorCode::bad_argument, "--predictions is required");
    std::vector<std::string> problems;
    const auto predictions = eval::load_predictions(config.predictions, &problems);
    for (const auto& p : problems) log << "warning: SchemaError: " << p << "\n";
    eval::EvalOptions options;
    options.db_root = config.db_root;
    options.jobs = config.jobs;
    if (!config.obfuscation_maps.empty()) options.renames = load_maps(config.obfuscation_maps);
    report = eval::evaluate(dataset, predictions, catalogs, endpoints, options);
    report.formulation = f;
  } else {
    agent::AgentOptions options;
    options.budget = config.budget;
    options.observation_limit = config.observation_limit;
    options.db_root = config.db_root;
    options.prompt_template = agent::load_prompt_template(config.prompt);
    options.rest_base_url = config.rest_url;
    if (config.obfuscate) options.obfuscation_seed = config.seed;
    options.shortlist_fraction = config.shortlist;
    options.shortlist_seed = config.seed;

    std::unique_ptr<agent::ModelClient> shared;
    if (config.stub.empty()) shared = std::make_unique<agent::HttpChatClient>(config.model);

    std::vector<agent::Episode> episodes(dataset.size());
    util::parallel_for(dataset.size(), config.jobs, [&](std::size_t i) {
      const auto& inst = dataset[i];
      const auto pool = transpile::instance_pool(inst, catalog_for(catalogs, inst.dataset_name), endpoints);
      std::unique_ptr<agent::ModelClient> own;
      if (!shared) {
        const auto presented = agent::presented_pool(inst, pool, options);
        const auto gold = presented.renames ? spec::obfuscate_calls(inst.output, *presented.renames)
                                            : inst.output;
        own = stub_client(config.stub, gold);
      }
      episodes[i] = agent::run_episode(inst, pool, shared ? *shared : *own, options);
    });

    std::vector<eval::InstanceScore> scores;
    std::string traces;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      scores.push_back(score_episode(dataset[i], episodes[i]));
      traces += episodes[i].to_json().dump() + "\n";
    }
    util::write_file(config.out_dir / "traces.jsonl", traces);
    report = eval::aggregate_scores(f, std::move(scores));
    report.pool_sha256 = eval::pool_digest(dataset, catalogs, endpoints);
    Json summary = agent::summarize(episodes).to_json();
    summary["budget"] = config.budget;
    summary["obfuscated"] = config.obfuscate;
    summary["shortlist_fraction"] = config.shortlist ? Json(*config.shortlist) : Json(nullptr);
    summary["model"] = config.stub.empty() ? config.model.to_json() : Json{{"stub", config.stub}};
    report.agent_summary = std::move(summary);
  }

  util::write_file(config.out_dir / "report.json", report.to_json().dump(2) + "\n");
  util::write_file(config.out_dir / "report.csv", report.to_csv());
  log << runtime::to_string(f) << ": " << report.instances.size() << " instances, intent F1 "
      << fixed(report.intent_macro.f1, 3) << ", slot F1 " << fixed(report.slot_macro.f1, 3)
      << ", completion " << fixed(report.completion_rate, 3);
  if (report.agent_summary) {
    log << ", avg loops " << fixed((*report.agent_summary)["avg_loops"].get<double>())
        << ", OOB " << (*report.agent_summary)["oob"].get<std::size_t>() << ", stuck "
        << (*report.agent_summary)["stuck"].get<std::size_t>();
  }
  log << "\n";
  return report;
}

std::vector<ReportRow> load_reports(const std::vector<std::filesystem::path>& paths) {
  std::vector<ReportRow> rows;
  for (const auto& p : paths) {
    const Json j = Json::parse(util::read_file(p), nullptr, false);
    if (j.is_discarded() || !j.contains("intent") || !j.contains("completion_rate")) {
      throw Error(ErrorCode::schema_error, p.string() + " is not a metrics report");
    }
    rows.push_back({p.string(), j});
  }
  return rows;
}

namespace {

std::vector<std::vector<std::string>> summary_cells(const std::vector<ReportRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"report", "formulation", "n", "intent_p", "intent_r", "intent_f1", "slot_p",
                   "slot_r", "slot_f1", "completion", "avg_loops", "oob", "stuck", "pool_sha256"});
  for (const auto& r : rows) {
    const auto& j = r.report;
    const auto& intent = j.at("intent").at("macro");
    const auto& slot = j.at("slot").at("macro");
    const bool agent = j.contains("agent");
    cells.push_back({r.source, j.value("formulation", ""),
                     std::to_string(j.value("instances", std::size_t{0})),
                     fixed(intent.at("precision").get<double>(), 3),
                     fixed(intent.at("recall").get<double>(), 3),
                     fixed(intent.at("f1").get<double>(), 3),
                     fixed(slot.at("precision").get<double>(), 3),
                     fixed(slot.at("recall").get<double>(), 3), fixed(slot.at("f1").get<double>(), 3),
                     fixed(j.at("completion_rate").get<double>(), 3),
                     agent ? fixed(j["agent"]["avg_loops"].get<double>()) : "",
                     agent ? std::to_string(j["agent"]["oob"].get<std::size_t>()) : "",
                     agent ? std::to_string(j["agent"]["stuck"].get<std::size_t>()) : "",
                     j.value("pool_sha256", "").substr(0, 12)});
  }
  return cells;
}

}  // namespace

std::string summary_table(const std::vector<ReportRow>& rows) {
  const auto cells = summary_cells(rows);
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      line += row[c] + std::string(width[c] - row[c].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<ReportRow>& rows) {
  std::string out;
  for (const auto& row : summary_cells(rows)) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      const auto& v = row[c];
      if (v.find_first_of(",\"\r\n") != std::string::npos) {
        std::string q = "\"";
        for (char ch : v) {
          if (ch == '"') q += '"';
          q += ch;
        }
        out += q + "\"";
      } else {
        out += v;
      }
    }
    out += "\r\n";
  }
  return out;
}

}  // namespace toolbench::cli
