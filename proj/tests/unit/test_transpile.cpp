#include <doctest.h>

#include <set>

#include "fixture.hpp"
#include "toolbench/eval/normalize.hpp"
#include "toolbench/runtime/database.hpp"
#include "toolbench/sql/parser.hpp"
#include "toolbench/transpile/rest_synth.hpp"
#include "toolbench/transpile/sel.hpp"
#include "toolbench/transpile/slot.hpp"
#include "toolbench/util/error.hpp"

using namespace toolbench;
using runtime::Formulation;

namespace {

const char* kMagnetSql =
    "SELECT T2.School FROM satscores AS T1 INNER JOIN schools AS T2 ON T1.cds = T2.CDSCode "
    "WHERE T2.Magnet = 1 AND T1.NumTstTakr > 500";

const Json kMagnetSlot = Json::parse(R"([
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
   "label": "retrieved_json"}])");

const Json kMagnetSel = Json::parse(R"([
  {"name": "select_data_equal_to",
   "arguments": {"data_source": "data_0.csv", "key_name": "schools_Magnet", "value": 1.0},
   "label": "data_1.csv"},
  {"name": "select_data_greater_than",
   "arguments": {"data_source": "data_1.csv", "key_name": "satscores_NumTstTakr", "value": 500.0},
   "label": "data_2.csv"},
  {"name": "get_schools_School", "arguments": {"data_source": "data_2.csv"},
   "label": "retrieved_json"}])");

}  // namespace

TEST_CASE("magnet query compiles to two filters and a retrieval") {
  const auto program = transpile::compile_slot_sequence(sql::parse_sql(kMagnetSql), "california_schools");
  std::string why;
  CHECK_MESSAGE(testing::same_calls_up_to_labels(program.calls, kMagnetSlot, &why), why);
  CHECK(program.initialization.name == "initialize_active_data");
  CHECK(program.initialization.label == "starting_table_var");
  CHECK(program.initialization.arguments.at("condition_sequence") ==
        Json::parse(R"([["T1.cds", "T2.CDSCode", "INNER"]])"));
}

TEST_CASE("SEL rewrite moves the condition into the tool name") {
  const auto program = transpile::compile_slot_sequence(sql::parse_sql(kMagnetSql), "california_schools");
  const auto sel = transpile::rewrite_to_sel_sequence(program.calls);
  std::string why;
  CHECK_MESSAGE(testing::same_calls_up_to_labels(sel, kMagnetSel, &why), why);
}

TEST_CASE("SEL retrieval options become post-processing calls") {
  const auto program = transpile::compile_slot_sequence(
      sql::parse_sql("SELECT DISTINCT City FROM schools WHERE Magnet = 1 LIMIT 2"), "california_schools");
  const auto sel = transpile::rewrite_to_sel_sequence(program.calls);
  std::vector<std::string> names;
  for (const auto& c : sel) names.push_back(c.name);
  CHECK(names == std::vector<std::string>{"select_data_equal_to", "get_schools_City",
                                          "distinct_values", "limit_values"});
  CHECK(runtime::referenced_label(sel.back().arguments.at("data_source")) == sel[2].label);
}

TEST_CASE("arithmetic ordering cannot be compiled to data tools") {
  const auto ast = sql::parse_sql(
      "SELECT `Free Meal Count (K-12)` / `Enrollment (K-12)` FROM frpm WHERE `County Name` = "
      "'Alameda' ORDER BY (CAST(`Free Meal Count (K-12)` AS REAL) / `Enrollment (K-12)`) DESC LIMIT 1");
  try {
    transpile::compile_slot_sequence(ast, "california_schools");
    FAIL("compiled");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_construct);
  }
}

TEST_CASE("REST synthesis turns WHERE literals into typed parameters") {
  const auto ast = sql::parse_sql(
      "SELECT `Free Meal Count (K-12)` / `Enrollment (K-12)` FROM frpm WHERE `County Name` = "
      "'Alameda' ORDER BY (CAST(`Free Meal Count (K-12)` AS REAL) / `Enrollment (K-12)`) DESC LIMIT 1");
  const auto& catalog = testing::workspace().build.catalogs.at("california_schools");
  const auto s = transpile::synthesize_rest_endpoint(ast, "", "california_schools", &catalog);
  REQUIRE(s.endpoint.params.size() == 1);
  CHECK(s.endpoint.params[0].name == "county_name");
  CHECK(s.endpoint.params[0].type == "string");
  CHECK(s.endpoint.path == "/v1/bird/california_schools/free_meal_count_ratio");
  CHECK(s.arguments == Json{{"county_name", "Alameda"}});
  CHECK(s.endpoint.sql_template.find('?') != std::string::npos);
  CHECK(s.endpoint.sql_template.find("Alameda") == std::string::npos);
}

TEST_CASE("endpoints with identical templates are merged") {
  const auto& catalog = testing::workspace().build.catalogs.at("california_schools");
  const auto a = transpile::synthesize_rest_endpoint(
      sql::parse_sql("SELECT School FROM schools WHERE Magnet = 1"), "", "california_schools", &catalog);
  const auto b = transpile::synthesize_rest_endpoint(
      sql::parse_sql("SELECT T.School FROM schools AS T WHERE T.Magnet = 0"), "", "california_schools",
      &catalog);
  const auto c = transpile::synthesize_rest_endpoint(
      sql::parse_sql("SELECT City FROM schools WHERE Magnet = 1"), "", "california_schools", &catalog);
  const auto d = transpile::deduplicate_endpoints({a.endpoint, b.endpoint, c.endpoint});
  CHECK(d.endpoints.size() == 2);
  CHECK(d.instance_endpoint == std::vector<std::size_t>{0, 0, 1});
}

TEST_CASE("distinct endpoints get distinct names and paths") {
  auto x = rest::RestEndpoint{};
  x.db = "db";
  x.resource = "school";
  x.path = rest::endpoint_path("db", "school");
  x.name = rest::endpoint_name("db", "school");
  x.sql_template = "SELECT a FROM t WHERE b = ?";
  x.params = {{"magnet", "integer", "", "Magnet"}};
  auto y = x;
  y.sql_template = "SELECT a FROM t WHERE c = ?";
  y.params = {{"city", "string", "", "City"}};
  std::vector<rest::RestEndpoint> list{x, y};
  transpile::disambiguate_names(list);
  CHECK(list[0].path == "/v1/bird/db/school");
  CHECK(list[1].path != list[0].path);
  CHECK(list[1].name != list[0].name);
  CHECK(list[1].name == rest::endpoint_name("db", list[1].resource));
}

TEST_CASE("the bundled corpus is fully retained and verified") {
  const auto& build = testing::workspace().build;
  for (const auto f : {Formulation::slot, Formulation::sel, Formulation::rest}) {
    const auto& s = build.stats.at(f);
    CAPTURE(runtime::to_string(f));
    CHECK(s.targeted > 0);
    CHECK(s.retained == s.targeted);
    CHECK(build.datasets.at(f).size() == s.retained);
  }
  for (const auto& r : build.records) {
    CAPTURE(r.sample_id);
    CHECK(r.matched);
  }
  std::set<std::string> paths;
  for (const auto& e : build.endpoints) CHECK(paths.insert(e.path).second);
}

TEST_CASE("verification detects a wrong answer") {
  const auto& inst = testing::instance(Formulation::slot, 0);
  const auto record = transpile::verify_equivalence(inst, testing::pool_for(inst),
                                                    testing::workspace().db_root,
                                                    Json::array({Json::array({"Troy High"})}));
  CHECK_FALSE(record.matched);
  CHECK(record.discard_reason == "ResultMismatch");
}

TEST_CASE("each retained instance matches its SQL oracle") {
  const auto& ws = testing::workspace();
  for (const auto& inst : testing::dataset(Formulation::sel)) {
    CAPTURE(inst.sample_id);
    const runtime::Database db(ws.db_root / (inst.dataset_name + ".sqlite"));
    const auto oracle = db.query(inst.query).rows_json();
    CHECK(eval::answers_equal(inst.gold_answer, oracle));
  }
}

TEST_CASE("the label-insensitive comparison still rejects real differences") {
  const auto program = transpile::compile_slot_sequence(sql::parse_sql(kMagnetSql), "california_schools");
  Json int_value = kMagnetSlot;
  int_value[0]["arguments"]["value"] = 1;
  CHECK_FALSE(testing::same_calls_up_to_labels(program.calls, int_value));
  Json crossed = kMagnetSlot;
  crossed[2]["arguments"]["data_source"] = "data_1.csv";
  CHECK_FALSE(testing::same_calls_up_to_labels(program.calls, crossed));
  Json merged = kMagnetSlot;
  merged[1]["label"] = "data_1.csv";
  CHECK_FALSE(testing::same_calls_up_to_labels(program.calls, merged));
  Json distinct = kMagnetSlot;
  distinct[2]["arguments"]["distinct"] = true;
  CHECK_FALSE(testing::same_calls_up_to_labels(program.calls, distinct));
}
