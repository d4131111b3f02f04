#include <CLI11.hpp>

#include <cstdlib>
#include <functional>
#include <iostream>
#include <thread>

#include "toolbench/cli/commands.hpp"
#include "toolbench/rest/service.hpp"
#include "toolbench/util/error.hpp"
#include "toolbench/util/fs.hpp"
#include "toolbench/util/parallel.hpp"
#include "toolbench/util/strings.hpp"

using namespace toolbench;

namespace {

// Values missing on the command line fall back to TOOLBENCH_<KEY> in the
// environment, then to the same key in the --config JSON file.
class Settings {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& key, T& target, const std::string& help) {
    auto* opt = app->add_option("--" + key, target, help + " [env " + env_name(key) + "]");
    entries_.push_back({app, opt, key, [&target, key](const std::string& text) { target = from_text<T>(key, text); },
                        [&target, key](const Json& j) { target = from_json<T>(key, j); }});
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& key, bool& target, const std::string& help) {
    auto* opt = app->add_flag("--" + key, target, help + " [env " + env_name(key) + "]");
    entries_.push_back({app, opt, key, [&target, key](const std::string& text) { target = from_text<bool>(key, text); },
                        [&target, key](const Json& j) { target = from_json<bool>(key, j); }});
    return opt;
  }

  void resolve(const Json& config) const {
    for (const auto& e : entries_) {
      if (!e.app->parsed() || e.opt->count() > 0) continue;
      if (const char* v = std::getenv(env_name(e.key).c_str()); v && *v) {
        e.from_env(v);
      } else if (config.is_object() && config.contains(e.key)) {
        e.from_config(config.at(e.key));
      }
    }
  }

  static std::string env_name(const std::string& key) {
    std::string out = "TOOLBENCH_" + util::to_upper(key);
    for (auto& c : out) {
      if (c == '-') c = '_';
    }
    return out;
  }

 private:
  struct Entry {
    CLI::App* app;
    CLI::Option* opt;
    std::string key;
    std::function<void(const std::string&)> from_env;
    std::function<void(const Json&)> from_config;
  };

  template <typename T>
  static T from_text(const std::string& key, const std::string& text) {
    auto bad = [&] { return Error(ErrorCode::bad_argument, "invalid value for " + key + ": " + text); };
    if constexpr (std::is_same_v<T, bool>) {
      const auto t = util::to_lower(text);
      if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
      if (t == "0" || t == "false" || t == "no" || t == "off") return false;
      throw bad();
    } else if constexpr (std::is_same_v<T, std::string> || std::is_same_v<T, std::filesystem::path>) {
      return T(text);
    } else if constexpr (std::is_floating_point_v<T>) {
      auto v = util::parse_number(text);
      if (!v) throw bad();
      return static_cast<T>(*v);
    } else if constexpr (std::is_integral_v<T>) {
      auto v = util::parse_integer(text);
      if (!v || (std::is_unsigned_v<T> && *v < 0)) throw bad();
      return static_cast<T>(*v);
    } else {
      std::vector<double> out;
      for (const auto& part : util::split(text, ',')) out.push_back(from_text<double>(key, util::trim(part)));
      return out;
    }
  }

  template <typename T>
  static T from_json(const std::string& key, const Json& j) {
    try {
      if constexpr (std::is_same_v<T, std::filesystem::path>) {
        return T(j.get<std::string>());
      } else {
        return j.get<T>();
      }
    } catch (const Json::exception&) {
      throw Error(ErrorCode::bad_argument, "invalid config value for " + key + ": " + j.dump());
    }
  }

  std::vector<Entry> entries_;
};

std::pair<std::string, int> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::bad_argument, "--bind expects host:port");
  const auto port = util::parse_integer(bind.substr(colon + 1));
  if (!port) throw Error(ErrorCode::bad_argument, "invalid port in --bind: " + bind);
  return {bind.substr(0, colon), static_cast<int>(*port)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tool-calling benchmark builder, REST host and evaluator"};
  app.require_subcommand(1);
  app.fallthrough();
  Settings settings;
  std::filesystem::path config_path;
  app.add_option("--config", config_path, "JSON file with default option values [env TOOLBENCH_CONFIG]");

  std::filesystem::path data_dir = "data/db";
  std::filesystem::path db_root = "build/db";
  auto* init = app.add_subcommand("init-db", "Create SQLite databases from the bundled SQL scripts");
  settings.add(init, "data-dir", data_dir, "Directory of <name>.sql scripts");
  settings.add(init, "db-root", db_root, "Output directory for <name>.sqlite");

  cli::BuildConfig build_cfg;
  build_cfg.corpus = "data/corpus.jsonl";
  build_cfg.db_root = "build/db";
  build_cfg.out_dir = "build/dataset";
  build_cfg.jobs = util::default_parallelism();
  auto* build = app.add_subcommand("build", "Compile the SQL corpus into verified datasets and tool specs");
  settings.add(build, "corpus", build_cfg.corpus, "Corpus JSONL");
  settings.add(build, "db-root", build_cfg.db_root, "Directory of <name>.sqlite databases");
  settings.add(build, "descriptions", build_cfg.descriptions_dir, "Directory of <name>.descriptions.json");
  settings.add(build, "out", build_cfg.out_dir, "Output directory");
  settings.add(build, "seed", build_cfg.seed, "Seed for obfuscation and shortlists");
  settings.add(build, "jobs", build_cfg.jobs, "Worker threads");
  settings.flag(build, "obfuscate", build_cfg.obfuscate, "Also write obfuscated datasets");
  settings.add(build, "shortlist", build_cfg.shortlist_fractions, "Shortlist fractions, e.g. 0.1,0.25")
      ->delimiter(',');

  rest::ServiceConfig serve_cfg;
  serve_cfg.db_root = "build/db";
  serve_cfg.pool_path = "build/dataset/endpoints.json";
  std::string bind = "127.0.0.1:8000";
  auto* serve = app.add_subcommand("serve", "Host the REST endpoints");
  settings.add(serve, "bind", bind, "Listen address host:port");
  settings.add(serve, "db-root", serve_cfg.db_root, "Directory of <name>.sqlite databases");
  settings.add(serve, "pool", serve_cfg.pool_path, "Endpoint pool JSON written by build");
  settings.add(serve, "timeout-ms", serve_cfg.timeout_ms, "Read/write timeout per request");
  settings.add(serve, "max-concurrent", serve_cfg.max_concurrent, "Worker threads handling requests");

  cli::EvalConfig eval_cfg;
  eval_cfg.db_root = "build/db";
  eval_cfg.out_dir = "build/eval";
  eval_cfg.prompt = "data/react_prompt.txt";
  eval_cfg.jobs = util::default_parallelism();
  std::string formulation;
  std::optional<double> shortlist_value;
  double shortlist = 0;
  auto* ev = app.add_subcommand("eval", "Score predictions or run agent episodes");
  settings.add(ev, "dataset", eval_cfg.dataset, "Dataset JSONL written by build")->required();
  settings.add(ev, "formulation", formulation, "slot, sel or rest (default: from file name)");
  settings.add(ev, "db-root", eval_cfg.db_root, "Directory of <name>.sqlite databases");
  settings.add(ev, "endpoints", eval_cfg.endpoints, "Endpoint pool JSON (REST)");
  settings.add(ev, "out", eval_cfg.out_dir, "Output directory");
  settings.add(ev, "jobs", eval_cfg.jobs, "Worker threads");
  settings.add(ev, "predictions", eval_cfg.predictions, "Predictions JSONL {sample_id, output}");
  settings.add(ev, "obfuscation-maps", eval_cfg.obfuscation_maps, "Maps JSONL for obfuscated predictions");
  settings.flag(ev, "agent", eval_cfg.agent, "Run ReACT episodes instead of scoring a file");
  settings.add(ev, "stub", eval_cfg.stub, "Scripted model: gold, never-finish or repeating")
      ->check(CLI::IsMember({"", "gold", "never-finish", "repeating"}));
  settings.add(ev, "model-endpoint", eval_cfg.model.endpoint, "Chat completion base URL");
  settings.add(ev, "model", eval_cfg.model.model, "Model identifier");
  settings.add(ev, "model-timeout-ms", eval_cfg.model.timeout_ms, "Model request timeout");
  settings.add(ev, "model-retries", eval_cfg.model.retries, "Retries per model request");
  settings.add(ev, "api-key-env", eval_cfg.model.api_key_env, "Environment variable holding the API key");
  settings.add(ev, "prompt", eval_cfg.prompt, "ReACT prompt template");
  settings.add(ev, "rest-url", eval_cfg.rest_url, "Send REST actions to this running service");
  settings.add(ev, "budget", eval_cfg.budget, "Maximum turns per episode");
  settings.add(ev, "observation-limit", eval_cfg.observation_limit, "Observation size limit in bytes");
  settings.flag(ev, "obfuscate", eval_cfg.obfuscate, "Obfuscate tool and argument names");
  settings.add(ev, "seed", eval_cfg.seed, "Seed for obfuscation and shortlists");
  auto* shortlist_opt = settings.add(ev, "shortlist", shortlist, "Fraction of the pool shown to the agent");

  std::vector<std::filesystem::path> reports;
  std::filesystem::path csv_out;
  auto* report = app.add_subcommand("report", "Summarize one or more report.json files");
  report->add_option("reports", reports, "report.json files")->required()->check(CLI::ExistingFile);
  settings.add(report, "csv", csv_out, "Also write the summary as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (config_path.empty()) {
      if (const char* c = std::getenv("TOOLBENCH_CONFIG"); c && *c) config_path = c;
    }
    Json config = Json::object();
    if (!config_path.empty()) {
      config = Json::parse(util::read_file(config_path), nullptr, false);
      if (config.is_discarded() || !config.is_object()) {
        throw Error(ErrorCode::schema_error, config_path.string() + " must hold a JSON object");
      }
    }
    settings.resolve(config);

    if (init->parsed()) {
      cli::run_init_db(data_dir, db_root, std::cout);
    } else if (build->parsed()) {
      cli::run_build(build_cfg, std::cout);
    } else if (serve->parsed()) {
      std::tie(serve_cfg.host, serve_cfg.port) = split_bind(bind);
      rest::serve(serve_cfg, [&](int port) {
        std::cout << "listening on http://" << serve_cfg.host << ":" << port << std::endl;
      });
      std::cout << "stopped" << std::endl;
    } else if (ev->parsed()) {
      if (!formulation.empty()) {
        eval_cfg.formulation = runtime::parse_formulation(formulation);
        if (!eval_cfg.formulation) throw Error(ErrorCode::bad_argument, "unknown formulation " + formulation);
      }
      if (shortlist_opt->count() > 0 || shortlist > 0) shortlist_value = shortlist;
      eval_cfg.shortlist = shortlist_value;
      if (eval_cfg.agent && eval_cfg.stub.empty() && eval_cfg.model.endpoint.empty()) {
        throw Error(ErrorCode::bad_argument, "agent mode needs --model-endpoint or --stub");
      }
      cli::run_eval(eval_cfg, std::cout);
    } else if (report->parsed()) {
      const auto rows = cli::load_reports(reports);
      std::cout << cli::summary_table(rows);
      if (!csv_out.empty()) util::write_file(csv_out, cli::summary_csv(rows));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << std::endl;
    return 1;
  } catch (const Json::exception& e) {
    std::cerr << "error: SchemaError: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: IoError: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
