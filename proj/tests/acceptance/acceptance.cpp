// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <httplib.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <latch>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "fixture.hpp"
#include "toolbench/agent/react.hpp"
#include "toolbench/cli/commands.hpp"
#include "toolbench/eval/metrics.hpp"
#include "toolbench/eval/normalize.hpp"
#include "toolbench/eval/parser.hpp"
#include "toolbench/eval/report.hpp"
#include "toolbench/rest/service.hpp"
#include "toolbench/runtime/database.hpp"
#include "toolbench/runtime/executor.hpp"
#include "toolbench/spec/emitter.hpp"
#include "toolbench/sql/parser.hpp"
#include "toolbench/transpile/sel.hpp"
#include "toolbench/transpile/slot.hpp"
#include "toolbench/util/error.hpp"
#include "toolbench/util/parallel.hpp"
#include "toolbench/util/random.hpp"

using namespace toolbench;
using runtime::EvalInstance;
using runtime::Formulation;
using runtime::ToolCall;
namespace fs = std::filesystem;

namespace {

constexpr Formulation kAll[] = {Formulation::slot, Formulation::sel, Formulation::rest};

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string ratio(std::size_t a, std::size_t b) { return std::to_string(a) + "/" + std::to_string(b); }

std::string name_of(Formulation f) { return std::string(runtime::to_string(f)); }

Json gold_answer_of(const EvalInstance& inst, const runtime::ToolPool& pool, const fs::path& db_root) {
  if (inst.formulation == Formulation::rest) {
    const auto& call = inst.output.front();
    const auto& endpoint = pool.endpoints.at(call.name);
    const runtime::Database db(db_root / (endpoint.db + ".sqlite"));
    return rest::execute_endpoint(endpoint, call.arguments, db);
  }
  util::TempDir work("toolbench-acceptance");
  runtime::LabelEnv env(work.path(), db_root);
  runtime::run_initialization(*inst.initialization_step, env);
  auto result = runtime::execute_sequence(inst.output, env, pool);
  if (!result.ok) throw Error(*result.error_code, result.error_message);
  return result.answer;
}

httplib::Params query_of(const Json& arguments) {
  httplib::Params params;
  for (const auto& [k, v] : arguments.items()) {
    params.emplace(k, v.is_string() ? v.get<std::string>() : v.dump());
  }
  return params;
}

// Runs a service on an ephemeral port for the lifetime of the object.
class LiveService {
 public:
  LiveService(const std::vector<rest::RestEndpoint>& endpoints, const fs::path& db_root)
      : service_(endpoints, db_root) {
    port_ = service_.bind("127.0.0.1", 0, 10000, 8);
    thread_ = std::thread([this] { service_.run(); });
  }
  ~LiveService() {
    service_.stop();
    thread_.join();
  }
  int port() const { return port_; }

 private:
  rest::RestService service_;
  int port_ = 0;
  std::thread thread_;
};

// The magnet-school query with its SLOT and SEL call sequences, written
// with file-name labels.
const char* kMagnetSql =
    "SELECT T2.School FROM satscores AS T1 INNER JOIN schools AS T2 ON T1.cds = T2.CDSCode "
    "WHERE T2.Magnet = 1 AND T1.NumTstTakr > 500";

const char* kMagnetSlot = R"([
  {"name": "filter_data",
   "arguments": {"data_source": "data_0.csv", "key_name": "schools_Magnet", "value": 1.0,
                 "condition": "equal_to"},
   "label": "data_1.csv"},
  {"name": "filter_data",
   "arguments": {"data_source": "data_1.csv", "key_name": "satscores_NumTstTakr", "value": 500.0,
                 "condition": "greater_than"},
   "label": "data_2.csv"},
  {"name": "retrieve_data",
   "arguments": {"data_source": "data_2.csv", "key_name": "schools_School", "distinct": false,
                 "limit": -1},
   "label": "retrieved_json"}])";

const char* kMagnetSel = R"([
  {"name": "select_data_equal_to",
   "arguments": {"data_source": "data_0.csv", "key_name": "schools_Magnet", "value": 1.0},
   "label": "data_1.csv"},
  {"name": "select_data_greater_than",
   "arguments": {"data_source": "data_1.csv", "key_name": "satscores_NumTstTakr", "value": 500.0},
   "label": "data_2.csv"},
  {"name": "get_schools_School", "arguments": {"data_source": "data_2.csv"},
   "label": "retrieved_json"}])";

// 1 -------------------------------------------------------------------------

Verdict semantic_preservation() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  util::TempDir dir("toolbench-acceptance");
  const fs::path db_root = dir.path() / "db";
  transpile::materialize_databases(testing::data_dir() / "db", db_root);
  const auto corpus = transpile::load_corpus(testing::data_dir() / "corpus.jsonl");
  transpile::BuildOptions options;
  options.db_root = db_root;
  options.jobs = util::default_parallelism();
  const auto build = transpile::build_benchmark(corpus, options);

  for (const auto f : kAll) {
    const auto& data = build.datasets.at(f);
    std::vector<char> equal(data.size(), 0);
    std::vector<std::string> why(data.size());
    util::parallel_for(data.size(), options.jobs, [&](std::size_t i) {
      const auto& inst = data[i];
      try {
        const runtime::Database db(db_root / (inst.dataset_name + ".sqlite"));
        const Json oracle = db.query(inst.query).rows_json();
        const auto pool = transpile::instance_pool(inst, build.catalogs.at(inst.dataset_name),
                                                   build.endpoints);
        equal[i] = eval::answers_equal(gold_answer_of(inst, pool, db_root), oracle);
        if (!equal[i]) why[i] = "answer differs";
      } catch (const std::exception& e) {
        why[i] = e.what();
      }
    });
    const auto ok = static_cast<std::size_t>(std::count(equal.begin(), equal.end(), 1));
    const auto& stats = build.stats.at(f);
    v.note(name_of(f) + " " + ratio(ok, data.size()) + " equal (retained " +
           ratio(stats.retained, stats.targeted) + ")");
    v.require(!data.empty(), name_of(f) + " retained nothing");
    for (std::size_t i = 0; i < data.size(); ++i) {
      v.require(equal[i], name_of(f) + " sample " + std::to_string(data[i].sample_id) + ": " + why[i]);
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream t;
  t.precision(2);
  t << std::fixed << secs << " s";
  v.note(t.str());
  v.require(secs < 60.0, "runtime under 60 s");
  return v;
}

// 2 -------------------------------------------------------------------------

Verdict micro_facts() {
  Verdict v;
  const auto& ws = testing::workspace();

  const auto program =
      transpile::compile_slot_sequence(sql::parse_sql(kMagnetSql), "california_schools");
  std::string why;
  v.require(testing::same_calls_up_to_labels(program.calls, Json::parse(kMagnetSlot), &why),
            "SQL to SLOT sequence: " + why);
  const auto sel = transpile::rewrite_to_sel_sequence(program.calls);
  v.require(testing::same_calls_up_to_labels(sel, Json::parse(kMagnetSel), &why),
            "SLOT to SEL sequence: " + why);
  const auto& magnet = testing::instance(Formulation::slot, testing::sample_with_query(kMagnetSql));
  v.require(eval::answers_equal(magnet.gold_answer,
                                Json::array({"Millikan High", "Polytechnic High", "Troy High"})),
            "magnet gold answer");
  v.note("magnet SQL->SLOT->SEL exact");

  const auto check_answer = [&](const char* needle, const Json& expected, const char* tag) {
    const auto id = testing::sample_with_query(needle);
    std::size_t hits = 0;
    for (const auto f : kAll) {
      const auto& inst = testing::instance(f, id);
      const auto answer = gold_answer_of(inst, testing::pool_for(inst), ws.db_root);
      const bool ok = eval::answers_equal(answer, expected) && eval::answers_equal(inst.gold_answer, expected);
      v.require(ok, std::string(tag) + " via " + name_of(f) + " gave " + answer.dump());
      hits += ok;
    }
    v.note(std::string(tag) + " " + expected.dump() + " in " + std::to_string(hits) + "/3 formulations");
  };
  check_answer("'Angela'", Json("Business"), "simple example");
  check_answer("Berigaud", Json("medium"), "challenging example");

  const auto id = testing::sample_with_query("'Alameda' ORDER BY");
  const auto& rest_inst = testing::instance(Formulation::rest, id);
  const auto& call = rest_inst.output.front();
  v.require(call.arguments == Json{{"county_name", "Alameda"}}, "Alameda gold arguments");
  const auto path = rest_inst.rest_path;
  v.require(path == "/v1/bird/california_schools/free_meal_count_ratio", "Alameda path " + path);
  LiveService live(ws.build.endpoints, ws.db_root);
  httplib::Client client("127.0.0.1", live.port());
  const auto res = client.Get(path, query_of(call.arguments), {});
  v.require(res && res->status == 200, "Alameda GET status");
  if (res && res->status == 200) {
    const auto body = Json::parse(res->body);
    const auto& values = body.at("free_meal_count_ratio");
    const bool one = values.size() == 1 && values[0].is_number() && values[0].get<double>() == 1.0;
    v.require(one, "Alameda value " + res->body);
    v.note("Alameda over HTTP " + res->body);
  }
  return v;
}

// 3 -------------------------------------------------------------------------

std::size_t brute_force_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else ++j;
    }
    if (ok) best = std::max<std::size_t>(best, std::popcount(mask));
  }
  return best;
}

bool valid_alignment(const eval::AlignmentResult& r, const std::vector<std::string>& a,
                     const std::vector<std::string>& b) {
  for (std::size_t k = 0; k < r.pairs.size(); ++k) {
    const auto [i, j] = r.pairs[k];
    if (i >= a.size() || j >= b.size() || a[i] != b[j]) return false;
    if (k > 0 && (i <= r.pairs[k - 1].first || j <= r.pairs[k - 1].second)) return false;
  }
  return r.pairs.size() + r.unmatched_pred.size() == a.size() &&
         r.pairs.size() + r.unmatched_gold.size() == b.size();
}

Verdict metric_battery() {
  Verdict v;
  const auto& ws = testing::workspace();
  eval::EvalOptions options;
  options.db_root = ws.db_root;
  options.jobs = util::default_parallelism();

  for (const auto f : kAll) {
    const auto& data = testing::dataset(f);
    std::vector<eval::PredictionRecord> gold, empty;
    for (const auto& inst : data) {
      gold.push_back({inst.sample_id, runtime::to_json(inst.output).dump()});
      empty.push_back({inst.sample_id, "[]"});
    }
    const auto id = eval::evaluate(data, gold, ws.build.catalogs, ws.build.endpoints, options);
    v.require(id.intent_macro.f1 == 1.0 && id.intent_micro.f1 == 1.0, name_of(f) + " identity intent F1");
    v.require(id.slot_macro.f1 == 1.0 && id.slot_micro.f1 == 1.0, name_of(f) + " identity slot F1");
    v.require(id.completion_rate == 1.0, name_of(f) + " identity completion");
    const auto none = eval::evaluate(data, empty, ws.build.catalogs, ws.build.endpoints, options);
    v.require(none.intent_macro.f1 == 0.0 && none.intent_micro.f1 == 0.0, name_of(f) + " empty intent F1");
    v.require(none.slot_macro.f1 == 0.0 && none.slot_micro.f1 == 0.0, name_of(f) + " empty slot F1");
    v.require(none.completion_rate == 0.0, name_of(f) + " empty completion");
  }
  v.note("identity 1.0 and empty 0 on all three datasets");

  const auto& magnet = testing::instance(Formulation::slot, testing::sample_with_query(kMagnetSql));
  const std::vector<ToolCall> one{magnet.output.front()};
  const auto a = eval::align_sequences(one, magnet.output);
  const auto prf = eval::intent_metrics(a, one.size(), magnet.output.size());
  const double p = 1.0 / 1.0, r = 1.0 / 3.0, f1 = 2 * p * r / (p + r);
  v.require(std::abs(prf.precision - p) < 1e-3 && std::abs(prf.recall - r) < 1e-3 &&
                std::abs(prf.f1 - f1) < 1e-3,
            "1-of-3 intent metrics");
  std::ostringstream s;
  s.precision(3);
  s << std::fixed << "1-of-3 (" << prf.precision << ", " << prf.recall << ", " << prf.f1 << ")";
  v.note(s.str());

  util::Rng rng(20240917);
  const std::vector<std::string> alphabet{"filter_data", "sort_data", "retrieve_data"};
  std::size_t agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> x(rng.below(7)), y(rng.below(7));
    for (auto& e : x) e = alphabet[rng.below(alphabet.size())];
    for (auto& e : y) e = alphabet[rng.below(alphabet.size())];
    const auto al = eval::align_sequences(x, y);
    agree += al.pairs.size() == brute_force_lcs(x, y) && valid_alignment(al, x, y);
  }
  v.require(agree == 1000, "LCS agreement " + ratio(agree, 1000));
  v.note("LCS = brute force in " + ratio(agree, 1000) + " trials");
  return v;
}

// 4 -------------------------------------------------------------------------

const char* kTaggedOutput =
    "<tool_call>\n{\"name\": \"select_data_equal_to\", \"arguments\": {\"data_source\": "
    "\"$starting_table_var$\", \"key_name\": \"races_raceId\", \"value\": 901}, \"label\": "
    "\"FILTERED_DF\"}\n</tool_call>\n<tool_call>\n{\"name\": \"get_races_years\", \"arguments\": "
    "{\"data_source\": \"$FILTERED_DF$\"}, \"label\": \"RACE_YEAR\"}\n</tool_call>\n<tool_call>\n"
    "{\"name\": \"get_seasons_urls\", \"arguments\": {\"data_source\": \"$RACE_YEAR$\"}, \"label\": "
    "\"SEASON_URL\"}\n</tool_call>";

const char* kTaggedExpected = R"([
  {"name": "select_data_equal_to",
   "arguments": {"data_source": "$starting_table_var$", "key_name": "races_raceId", "value": 901},
   "label": "FILTERED_DF"},
  {"name": "get_races_years", "arguments": {"data_source": "$FILTERED_DF$"}, "label": "RACE_YEAR"},
  {"name": "get_seasons_urls", "arguments": {"data_source": "$RACE_YEAR$"}, "label": "SEASON_URL"}])";

const char* kReasoningOutput = R"(    We first need the molecules that contain carbon, then their carcinogenic flags.

1. Look up the molecules with the "C" element.
2. Check the flag of each one.

Plan with tool calls:

1. **Molecules with carbon:**
   ```json
   {"name": "get_molecule_ids_with_element_v1_bird", "arguments": {"element": "C"}}
   ```

2. **Flag per molecule:**
   ```json
   {"name": "get_carcinogenic_flag_v1_bird_toxicology_carcinogenic_flag_get", "arguments": {"atom_id": "atom_id_from_molecule"}}
   ```

The flag endpoint wants an atom id, so atoms have to be listed first:

3. **Atoms per molecule:**
   ```json
   {"name": "get_atom_ids_by_molecule_id_range_and_element_v1_bird", "arguments": {"start_molecule_id": "molecule_id", "end_molecule_id": "molecule_id", "element": "C"}}
   ```

4. **Flag per atom:**
   ```json
   {"name": "get_carcinogenic_flag_v1_bird_toxicology_carcinogenic_flag_get", "arguments": {"atom_id": "atom_id"}}
   ```

Starting with step 1, the first call is:

```json
{"name": "get_molecule_ids_with_element_v1_bird", "arguments": {"element": "C"}}
```)";

const char* kBracketedOutput =
    R"(Here is the function call: [[{"name": "get_card_status_v1_bird_card_games_card_status_get", "arguments": {"card_name": "Cloudchaser Eagle"}}]])";

const char* kRunawayOutput = R"([{"name": "get_card_status_v1_bird_card_games_card_status_get", "arguments": {"card_name": "Cloudchaser Eagle"}}]

USER: Which format is "Cloudchaser Eagle" legal in?
ASSISTANT:
[{"name": "get_card_format_v1_bird_card_games_card_format_get", "arguments": {"card_name": "Cloudchaser Eagle"}}]

USER: Who drew "Cloudchaser Eagle"?
ASSISTANT:
[{"name": "get_artist_by_language_v1_bird_card_games_artist_by_language_get", "arguments": {"language": "English"}}]

USER: How many banned cards have a black border?
ASSISTANT:
[{"name": "get_banned_count_v1_bird_card_games_banned_count_get", "arguments": {"border_color": "black"}}]

USER: List ids and languages for mana cost 5 in set "M15".
ASSISTANT:
[{"name": "get_colors_format_v1_")";

bool calls_equal(const std::vector<ToolCall>& got, const Json& expected) {
  return runtime::to_json(got) == expected;
}

Verdict parser_battery() {
  Verdict v;
  const auto tagged = eval::parse_model_output(kTaggedOutput);
  v.require(tagged.stage == eval::ParseStage::xml_tags, "tagged stage");
  v.require(calls_equal(tagged.calls, Json::parse(kTaggedExpected)), "tagged calls");
  v.note("tool_call tags -> " + std::to_string(tagged.calls.size()) + " calls");

  const auto reasoning = eval::parse_model_output(kReasoningOutput);
  v.require(reasoning.stage == eval::ParseStage::fenced_block, "fenced stage");
  v.require(calls_equal(reasoning.calls, Json::parse(R"([{"name": "get_molecule_ids_with_element_v1_bird",
              "arguments": {"element": "C"}, "label": ""}])")),
            "fenced calls " + runtime::to_json(reasoning.calls).dump());
  v.note("reasoning with fences -> " + std::to_string(reasoning.calls.size()) + " call (last block)");

  const auto bracketed = eval::parse_model_output(kBracketedOutput);
  v.require(bracketed.well_formed, "bracketed well formed");
  v.require(calls_equal(bracketed.calls, Json::parse(R"([{"name": "get_card_status_v1_bird_card_games_card_status_get",
              "arguments": {"card_name": "Cloudchaser Eagle"}, "label": ""}])")),
            "bracketed calls " + runtime::to_json(bracketed.calls).dump());
  v.note("prose + extra brackets -> " + std::to_string(bracketed.calls.size()) + " call");

  EvalInstance inst;
  inst.formulation = Formulation::rest;
  inst.output = {ToolCall{"get_card_status_v1_bird_card_games_card_status_get",
                          Json{{"card_name", "Cloudchaser Eagle"}}, ""}};
  runtime::ToolPool pool;
  pool.formulation = Formulation::rest;
  runtime::ToolSpec tool;
  tool.name = inst.output[0].name;
  tool.parameters = {runtime::ParamSpec{"card_name", "string", "card name", {}, true, false, {}, {}}};
  pool.tools = {tool};
  const auto runaway = eval::parse_model_output(kRunawayOutput);
  const auto category = eval::classify_error(inst, runaway, pool);
  v.require(runaway.stage == eval::ParseStage::failed, "runaway output unparseable");
  v.require(category == eval::ErrorCategory::instruction_alignment_failure,
            "runaway category " + std::string(eval::to_string(category)));
  v.note("runaway generation -> " + std::string(eval::to_string(category)));
  return v;
}

// 5 -------------------------------------------------------------------------

Verdict classifier() {
  Verdict v;
  const auto& ws = testing::workspace();
  const auto& inst = testing::instance(Formulation::slot, testing::sample_with_query(kMagnetSql));
  const auto pool = testing::pool_for(inst);
  const Json gold = runtime::to_json(inst.output);

  const auto edit = [&](const std::function<void(Json&)>& fn) {
    Json j = gold;
    fn(j);
    return j.dump();
  };
  using C = eval::ErrorCategory;
  struct Case {
    std::string label;
    std::string text;
    C expected;
  };
  const std::vector<Case> cases = {
      {"prose", "The magnet schools are Millikan High, Polytechnic High and Troy High.",
       C::instruction_alignment_failure},
      {"two calls", edit([](Json& j) { j.erase(1); }), C::wrong_func_count},
      {"no arguments key",
       edit([](Json& j) { j[1]["parameters"] = j[1]["arguments"]; j[1].erase("arguments"); }),
       C::wrong_func_format},
      {"invented tool", edit([](Json& j) { j[1]["name"] = "filter_rows"; }), C::hallucinated_func_name},
      {"other pool tool", edit([](Json& j) { j[2]["name"] = "select_unique_values"; }), C::wrong_func_name},
      {"missing condition", edit([](Json& j) { j[0]["arguments"].erase("condition"); }),
       C::missing_required_parameter},
      {"extra argument", edit([](Json& j) { j[0]["arguments"]["strict"] = true; }), C::unexpected_param},
      {"wrong value", edit([](Json& j) { j[0]["arguments"]["value"] = 0.0; }), C::value_error},
  };
  std::set<C> covered;
  for (const auto& c : cases) {
    const auto parsed = eval::parse_model_output(c.text);
    const auto got = eval::classify_error(inst, parsed, pool);
    const auto completion = eval::completion_check(inst, parsed.calls, pool, ws.db_root);
    v.require(!completion.completed, c.label + " should fail completion");
    v.require(got == c.expected, c.label + ": " + std::string(eval::to_string(got)) + " != " +
                                     std::string(eval::to_string(c.expected)));
    covered.insert(c.expected);
  }
  v.require(covered.size() == eval::kAllErrorCategories.size(), "one case per category");
  v.note(std::to_string(cases.size()) + " single-category cases");

  const std::vector<Case> overlaps = {
      {"count + invented", edit([](Json& j) { j.erase(1); j[0]["name"] = "filter_rows"; }),
       C::wrong_func_count},
      {"format + invented",
       edit([](Json& j) { j[0]["name"] = "filter_rows"; j[1].erase("arguments"); }), C::wrong_func_format},
      {"invented + missing",
       edit([](Json& j) { j[1]["name"] = "filter_rows"; j[0]["arguments"].erase("condition"); }),
       C::hallucinated_func_name},
      {"wrong name + extra",
       edit([](Json& j) { j[2]["name"] = "select_unique_values"; j[0]["arguments"]["strict"] = true; }),
       C::wrong_func_name},
      {"missing + extra",
       edit([](Json& j) { j[0]["arguments"].erase("condition"); j[1]["arguments"]["strict"] = true; }),
       C::missing_required_parameter},
      {"extra + wrong value",
       edit([](Json& j) { j[0]["arguments"]["strict"] = true; j[1]["arguments"]["value"] = 1.0; }),
       C::unexpected_param},
  };
  for (const auto& c : overlaps) {
    const auto got = eval::classify_error(inst, eval::parse_model_output(c.text), pool);
    v.require(got == c.expected, c.label + ": " + std::string(eval::to_string(got)));
  }
  v.note(std::to_string(overlaps.size()) + " two-category cases take the earlier category");
  return v;
}

// 6 -------------------------------------------------------------------------

agent::AgentOptions agent_options() {
  agent::AgentOptions o;
  o.db_root = testing::workspace().db_root;
  o.prompt_template = testing::prompt_template();
  return o;
}

Verdict react_stubs() {
  Verdict v;
  const auto options = agent_options();
  for (const auto f : kAll) {
    const auto& data = testing::dataset(f);
    std::vector<char> gold_ok(data.size()), oob_ok(data.size()), stuck_ok(data.size());
    util::parallel_for(data.size(), util::default_parallelism(), [&](std::size_t i) {
      const auto& inst = data[i];
      const auto pool = testing::pool_for(inst);
      const auto& first = inst.output.front();

      auto replay = agent::ScriptedClient::replay(inst.output);
      const auto g = agent::run_episode(inst, pool, *replay, options);
      gold_ok[i] = g.completed && g.outcome == agent::Outcome::completed &&
                   g.turns.size() <= inst.output.size() + 1;

      auto never = agent::ScriptedClient::never_finish(first.name, first.arguments);
      const auto n = agent::run_episode(inst, pool, *never, options);
      const auto nf = agent::classify_trace(n);
      oob_ok[i] = n.outcome == agent::Outcome::oob && nf.oob && !nf.stuck && n.turns.size() == 10;

      Json input = first.arguments;
      input["label"] = "RETRY";
      auto repeat = agent::ScriptedClient::repeating(first.name, input);
      const auto r = agent::run_episode(inst, pool, *repeat, options);
      const auto rf = agent::classify_trace(r);
      stuck_ok[i] = r.outcome == agent::Outcome::stuck && rf.stuck && !r.completed;
    });
    const auto count = [](const std::vector<char>& x) {
      return static_cast<std::size_t>(std::count(x.begin(), x.end(), 1));
    };
    v.require(count(gold_ok) == data.size(), name_of(f) + " gold replay");
    v.require(count(oob_ok) == data.size(), name_of(f) + " never-finish OOB at 10");
    v.require(count(stuck_ok) == data.size(), name_of(f) + " repeating stuck");
    v.note(name_of(f) + " gold " + ratio(count(gold_ok), data.size()) + ", oob " +
           ratio(count(oob_ok), data.size()) + ", stuck " + ratio(count(stuck_ok), data.size()));
  }
  const auto& magnet = testing::instance(Formulation::slot, testing::sample_with_query(kMagnetSql));
  auto replay = agent::ScriptedClient::replay(magnet.output);
  const auto ep = agent::run_episode(magnet, testing::pool_for(magnet), *replay, options);
  v.require(ep.completed && ep.turns.size() == 4, "magnet replay in 4 turns");
  return v;
}

// 7 -------------------------------------------------------------------------

Verdict perturbation() {
  Verdict v;
  for (const auto f : kAll) {
    const auto& data = testing::dataset(f);
    std::vector<char> ok(data.size());
    util::parallel_for(data.size(), util::default_parallelism(), [&](std::size_t i) {
      const auto& inst = data[i];
      const auto pool = testing::pool_for(inst);
      auto options = agent_options();
      options.obfuscation_seed = 42;
      const auto presented = agent::presented_pool(inst, pool, options);
      bool hidden = presented.renames.has_value();
      for (const auto& t : presented.pool.tools) hidden = hidden && pool.find(t.name) == nullptr;
      const auto calls = spec::obfuscate_calls(inst.output, *presented.renames);
      auto client = agent::ScriptedClient::replay(calls);
      const auto ep = agent::run_episode(inst, pool, *client, options);
      ok[i] = hidden && ep.completed;
    });
    const auto n = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
    v.require(n == data.size(), name_of(f) + " obfuscated replay");
    v.note(name_of(f) + " obfuscated " + ratio(n, data.size()));
  }

  const auto universe_of = [](std::size_t n) {
    std::vector<std::string> u;
    for (std::size_t i = 0; i < n; ++i) u.push_back("endpoint_" + std::to_string(i));
    return u;
  };
  std::size_t good = 0, total = 0;
  for (const int pct : {10, 25, 50, 75}) {
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
      util::Rng rng(trial * 7919 + static_cast<std::uint64_t>(pct));
      const std::size_t n = 10 + rng.below(191);
      const auto universe = universe_of(n);
      std::vector<std::string> gold;
      const std::size_t gold_count = 1 + rng.below(3);
      while (gold.size() < gold_count) {
        const auto& g = universe[rng.below(n)];
        if (std::find(gold.begin(), gold.end(), g) == gold.end()) gold.push_back(g);
      }
      const auto list = spec::shortlist_tools(universe, gold, pct / 100.0, trial);
      const std::size_t expected = std::max(n * pct / 100, gold.size());
      bool ok = list.tools.size() == expected;
      for (const auto& g : gold) {
        ok = ok && std::find(list.tools.begin(), list.tools.end(), g) != list.tools.end();
      }
      std::size_t last = 0;
      std::set<std::string> seen;
      for (const auto& t : list.tools) {
        const auto pos = static_cast<std::size_t>(std::find(universe.begin(), universe.end(), t) - universe.begin());
        ok = ok && pos < n && (seen.empty() || pos > last) && seen.insert(t).second;
        last = pos;
      }
      good += ok;
      ++total;
    }
  }
  v.require(good == total, "shortlist trials " + ratio(good, total));
  v.note("shortlists keep gold in " + ratio(good, total) + " trials");

  const auto u75 = universe_of(75);
  const auto s75 = spec::shortlist_tools(u75, {u75[40]}, 0.10, 1);
  v.require(s75.tools.size() == 7 && spec::shortlist_size(75, 0.10, 1) == 7, "75 tools at 10%");
  v.note("75 tools at 10% -> " + std::to_string(s75.tools.size()));
  return v;
}

// 8 -------------------------------------------------------------------------

Verdict rest_contract() {
  Verdict v;
  const auto& ws = testing::workspace();
  const auto& data = testing::dataset(Formulation::rest);
  struct Request {
    std::string path;
    httplib::Params params;
    std::string expected;
  };
  std::vector<Request> requests;
  for (std::size_t i = 0; requests.size() < 100; ++i) {
    const auto& inst = data[i % data.size()];
    requests.push_back({inst.rest_path, query_of(inst.output.front().arguments), inst.output_after_executing_api});
  }

  LiveService live(ws.build.endpoints, ws.db_root);
  using Reply = std::pair<int, std::string>;
  const auto fetch = [&](const Request& r) -> Reply {
    httplib::Client client("127.0.0.1", live.port());
    client.set_read_timeout(std::chrono::seconds(30));
    const auto res = client.Get(r.path, r.params, {});
    if (!res) return {-1, httplib::to_string(res.error())};
    return {res->status, res->body};
  };
  std::vector<Reply> serial;
  for (const auto& r : requests) serial.push_back(fetch(r));
  std::vector<Reply> parallel(requests.size());
  {
    std::latch go(static_cast<std::ptrdiff_t>(requests.size()));
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      threads.emplace_back([&, i] {
        go.arrive_and_wait();
        parallel[i] = fetch(requests[i]);
      });
    }
    for (auto& t : threads) t.join();
  }
  std::size_t same = 0, correct = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    same += serial[i] == parallel[i];
    correct += serial[i].first == 200 &&
               Json::parse(serial[i].second, nullptr, false) == Json::parse(requests[i].expected);
  }
  v.require(same == requests.size(), "parallel equals serial " + ratio(same, requests.size()));
  v.require(correct == requests.size(), "serial matches build output " + ratio(correct, requests.size()));
  v.note("100 parallel GETs identical to serial " + ratio(same, requests.size()));

  httplib::Client client("127.0.0.1", live.port());
  const std::string ratio_path = "/v1/bird/california_schools/free_meal_count_ratio";
  const auto missing = client.Get(ratio_path);
  bool ok422 = missing && missing->status == 422;
  if (ok422) {
    const auto body = Json::parse(missing->body);
    ok422 = body.at("detail").at(0).at("loc") == Json::array({"query", "county_name"});
  }
  v.require(ok422, "missing parameter gives 422 naming it");

  const rest::RestEndpoint* typed = nullptr;
  for (const auto& e : ws.build.endpoints) {
    if (!typed && !e.params.empty() && e.params[0].type == "integer") typed = &e;
  }
  bool ok400 = false;
  if (typed) {
    httplib::Params params;
    for (const auto& p : typed->params) params.emplace(p.name, p.type == "string" ? "x" : "1");
    params.erase(typed->params[0].name);
    params.emplace(typed->params[0].name, "not-a-number");
    const auto bad = client.Get(typed->path, params, {});
    ok400 = bad && bad->status == 400;
  }
  v.require(ok400, "bad type gives 400");

  const auto unknown = client.Get("/v1/bird/california_schools/no_such_resource");
  v.require(unknown && unknown->status == 404, "unknown path gives 404");
  v.note("422/400/404 paths ok");
  return v;
}

// 9 -------------------------------------------------------------------------

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = util::read_file(e.path());
  }
  return out;
}

Verdict determinism() {
  Verdict v;
  util::TempDir dir("toolbench-acceptance");
  std::ostringstream log;
  const fs::path db_root = dir.path() / "db";
  cli::run_init_db(testing::data_dir() / "db", db_root, log);

  const auto build = [&](const std::string& name, std::size_t jobs) {
    cli::BuildConfig c;
    c.corpus = testing::data_dir() / "corpus.jsonl";
    c.db_root = db_root;
    c.out_dir = dir.path() / name;
    c.seed = 42;
    c.jobs = jobs;
    c.obfuscate = true;
    c.shortlist_fractions = {0.10, 0.25, 0.50, 0.75};
    cli::run_build(c, log);
    return tree_contents(c.out_dir);
  };
  const auto first = build("build_a", 1);
  const auto second = build("build_b", util::default_parallelism() + 3);
  std::size_t same = 0;
  for (const auto& [path, bytes] : first) {
    const auto it = second.find(path);
    same += it != second.end() && it->second == bytes;
  }
  v.require(first.size() == second.size() && same == first.size(), "build outputs " + ratio(same, first.size()));
  const bool has_kinds = first.count("slot.jsonl") && first.count("specs/sel/california_schools.json") &&
                         first.count("obfuscated/rest.jsonl");
  v.require(has_kinds, "datasets and specs present");
  v.note("builds byte-identical across " + std::to_string(first.size()) + " files");

  std::string predictions;
  for (const auto& inst : runtime::read_dataset(dir.path() / "build_a" / "sel.jsonl", Formulation::sel)) {
    auto calls = inst.output;
    if (inst.sample_id % 3 == 0) calls.pop_back();
    predictions += Json{{"sample_id", inst.sample_id}, {"output", runtime::to_json(calls)}}.dump() + "\n";
  }
  util::write_file(dir.path() / "pred.jsonl", predictions);

  const auto eval_report = [&](const std::string& name, bool agent_mode, std::size_t jobs) {
    cli::EvalConfig c;
    c.db_root = db_root;
    c.out_dir = dir.path() / name;
    c.jobs = jobs;
    if (agent_mode) {
      c.dataset = dir.path() / "build_a" / "rest.jsonl";
      c.agent = true;
      c.stub = "gold";
      c.prompt = testing::data_dir() / "react_prompt.txt";
      c.obfuscate = true;
      c.shortlist = 0.5;
    } else {
      c.dataset = dir.path() / "build_a" / "sel.jsonl";
      c.predictions = dir.path() / "pred.jsonl";
    }
    cli::run_eval(c, log);
    return util::read_file(c.out_dir / "report.json");
  };
  const bool direct_same = eval_report("eval_a", false, 1) == eval_report("eval_b", false, 4);
  const bool agent_same = eval_report("agent_a", true, 1) == eval_report("agent_b", true, 4);
  v.require(direct_same, "direct report bytes");
  v.require(agent_same, "agent report bytes");
  v.note(std::string("reports byte-identical (direct ") + (direct_same ? "yes" : "no") + ", agent " +
         (agent_same ? "yes" : "no") + ")");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> checks = {
      {"semantic preservation", semantic_preservation},
      {"worked examples", micro_facts},
      {"metric battery", metric_battery},
      {"parser battery", parser_battery},
      {"error classifier", classifier},
      {"ReACT scripted stubs", react_stubs},
      {"perturbation invariance", perturbation},
      {"REST service contract", rest_contract},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Verdict v;
    try {
      v = checks[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.notes.push_back(std::string("exception: ") + e.what());
    }
    failures += !v.pass;
    std::string details;
    for (const auto& n : v.notes) details += (details.empty() ? "" : "; ") + n;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << checks[i].first << ": " << details
              << std::endl;
  }
  std::cout << checks.size() - failures << "/" << checks.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
