#include "fixture.hpp"

#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "toolbench/agent/react.hpp"

namespace toolbench::testing {

std::filesystem::path data_dir() { return TOOLBENCH_TEST_DATA_DIR; }

const Workspace& workspace() {
  static const Workspace ws = [] {
    Workspace w;
    w.db_root = w.dir.path() / "db";
    transpile::materialize_databases(data_dir() / "db", w.db_root);
    w.corpus = transpile::load_corpus(data_dir() / "corpus.jsonl");
    transpile::BuildOptions options;
    options.db_root = w.db_root;
    options.jobs = 2;
    w.build = transpile::build_benchmark(w.corpus, options);
    return w;
  }();
  return ws;
}

const std::vector<runtime::EvalInstance>& dataset(runtime::Formulation f) {
  return workspace().build.datasets.at(f);
}

std::int64_t sample_with_query(std::string_view needle) {
  for (const auto& e : workspace().corpus) {
    if (e.query.find(needle) != std::string::npos) return e.sample_id;
  }
  throw std::runtime_error("no corpus query contains " + std::string(needle));
}

const runtime::EvalInstance& instance(runtime::Formulation f, std::int64_t sample_id) {
  for (const auto& inst : dataset(f)) {
    if (inst.sample_id == sample_id) return inst;
  }
  throw std::runtime_error("sample " + std::to_string(sample_id) + " not retained for " +
                           std::string(runtime::to_string(f)));
}

runtime::ToolPool pool_for(const runtime::EvalInstance& inst) {
  const auto& build = workspace().build;
  return transpile::instance_pool(inst, build.catalogs.at(inst.dataset_name), build.endpoints);
}

std::string prompt_template() {
  return agent::load_prompt_template(data_dir() / "react_prompt.txt");
}

namespace {

bool same_number_kind(const Json& a, const Json& b) {
  if (a.is_number() != b.is_number()) return false;
  return !a.is_number() || a.is_number_float() == b.is_number_float();
}

}  // namespace

bool same_calls_up_to_labels(const std::vector<runtime::ToolCall>& got, const Json& expected,
                             std::string* why) {
  const auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (!expected.is_array() || expected.size() != got.size()) {
    return fail("expected " + std::to_string(expected.size()) + " calls, got " +
                std::to_string(got.size()));
  }
  std::map<std::string, std::string> forward;
  std::map<std::string, std::string> backward;
  const auto bind = [&](const std::string& ours, const std::string& theirs) {
    auto [f, fresh_f] = forward.emplace(ours, theirs);
    auto [b, fresh_b] = backward.emplace(theirs, ours);
    return f->second == theirs && b->second == ours;
  };
  for (std::size_t i = 0; i < got.size(); ++i) {
    const auto& want = expected[i];
    const std::string at = "call " + std::to_string(i) + ": ";
    if (got[i].name != want.at("name").get<std::string>()) {
      return fail(at + "name " + got[i].name + " != " + want.at("name").get<std::string>());
    }
    const auto& args = want.at("arguments");
    if (args.size() != got[i].arguments.size()) return fail(at + "argument count differs");
    for (const auto& [key, value] : got[i].arguments.items()) {
      if (!args.contains(key)) return fail(at + "unexpected argument " + key);
      const auto& other = args.at(key);
      const std::string ref = runtime::referenced_label(value);
      if (!ref.empty()) {
        if (!other.is_string() || (forward.count(ref) == 0 && ref != "starting_table_var")) {
          return fail(at + key + " references unknown label " + ref);
        }
        if (!bind(ref, other.get<std::string>())) return fail(at + key + " reference mismatch");
        continue;
      }
      const nlohmann::json plain_got = nlohmann::json::parse(value.dump());
      const nlohmann::json plain_want = nlohmann::json::parse(other.dump());
      if (plain_got != plain_want || !same_number_kind(value, other)) {
        return fail(at + key + " = " + value.dump() + ", expected " + other.dump());
      }
    }
    if (!bind(got[i].label, want.at("label").get<std::string>())) {
      return fail(at + "label " + got[i].label + " cannot map to " + want.at("label").dump());
    }
  }
  return true;
}

}  // namespace toolbench::testing
