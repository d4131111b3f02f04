#include <doctest.h>

#include "fixture.hpp"
#include "toolbench/eval/normalize.hpp"
#include "toolbench/runtime/executor.hpp"
#include "toolbench/runtime/table.hpp"
#include "toolbench/runtime/tools.hpp"
#include "toolbench/util/error.hpp"

using namespace toolbench;
using runtime::Table;
using runtime::ToolCall;
using sql::Aggregate;
using sql::ConditionKind;
namespace tools = runtime::tools;

namespace {

Table sample_table() {
  Table t;
  t.columns = {"s_name", "s_city", "s_score", "s_day"};
  t.rows = {
      {"Ann", "Oakland", "12", "2013-02-22 00:00:00"},
      {"Bob", "Fresno", "7", "2014-05-01 00:00:00"},
      {"Cid", "Oakland", "30", "2013-02-22 00:00:00"},
      {"Dee", std::nullopt, "7", "2015-01-09 00:00:00"},
  };
  return t;
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::execution_error;
}

ToolCall call(std::string name, Json args, std::string label) {
  ToolCall c;
  c.name = std::move(name);
  c.arguments = std::move(args);
  c.label = std::move(label);
  return c;
}

}  // namespace

TEST_CASE("CSV keeps NULL apart from the empty string and survives quoting") {
  Table t;
  t.columns = {"a", "b"};
  t.rows = {{std::nullopt, ""}, {"x,y", "say \"hi\"\nbye"}};
  const auto text = runtime::to_csv(t);
  CHECK(runtime::parse_csv(text) == t);
}

TEST_CASE("filter conditions compare numerically when the value is a number") {
  const auto t = sample_table();
  CHECK(tools::filter_data(t, "s_score", Json(7.0), ConditionKind::equal_to).rows.size() == 2);
  CHECK(tools::filter_data(t, "s_score", Json(10.0), ConditionKind::greater_than).rows.size() == 2);
  CHECK(tools::filter_data(t, "s_score", Json(12.0), ConditionKind::less_than_equal_to).rows.size() == 3);
  CHECK(tools::filter_data(t, "s_city", Json("Oakland"), ConditionKind::not_equal_to).rows.size() == 1);
  CHECK(tools::filter_data(t, "s_name", Json("i"), ConditionKind::contains).rows.size() == 1);
  CHECK(tools::filter_data(t, "s_name", Json("_o%"), ConditionKind::like).rows.size() == 1);
  CHECK(code_of([&] { tools::filter_data(t, "nope", Json(1.0), ConditionKind::equal_to); }) ==
        ErrorCode::unknown_column);
}

TEST_CASE("like matching") {
  CHECK(tools::like_match("Oakland", "oak%"));
  CHECK(tools::like_match("Oakland", "%LAND"));
  CHECK(tools::like_match("abc", "a_c"));
  CHECK_FALSE(tools::like_match("abcd", "a_c"));
  CHECK(tools::like_match("", "%"));
}

TEST_CASE("sort, group and aggregate") {
  const auto t = sample_table();
  const auto sorted = tools::sort_data(t, "s_score", false);
  CHECK(sorted.rows.front()[0] == "Cid");
  CHECK(sorted.rows.back()[2] == "7");

  const auto grouped = tools::group_data_by(t, "s_city", Aggregate::count, std::nullopt);
  CHECK(grouped.columns == std::vector<std::string>{"s_city", "count"});
  const auto sums = tools::group_data_by(t, "s_city", Aggregate::sum, "s_score");
  CHECK(sums.columns[1] == "sum_s_score");
  bool saw_oakland = false;
  for (const auto& row : sums.rows) {
    if (row[0] == "Oakland") {
      saw_oakland = true;
      CHECK(eval::answers_equal(Json(row[1].value()), Json(42)));
    }
  }
  CHECK(saw_oakland);

  const auto avg = tools::aggregate_data(t, "s_score", Aggregate::avg);
  REQUIRE(avg.rows.size() == 1);
  CHECK(eval::answers_equal(avg.cell_json(0, 0), Json(14)));
  CHECK(tools::aggregate_data(t, std::nullopt, Aggregate::count).cell_json(0, 0) == Json(4));
  CHECK(code_of([&] { tools::aggregate_data(t, "s_name", Aggregate::sum); }) ==
        ErrorCode::non_numeric_aggregate);
}

TEST_CASE("retrieval applies distinct before the limit") {
  const auto t = sample_table();
  CHECK(tools::retrieve_data(t, "s_city", false, -1).size() == 4);
  const auto d = tools::retrieve_data(t, "s_city", true, 2);
  CHECK(d == Json::array({"Oakland", "Fresno"}));
  CHECK(code_of([&] { tools::retrieve_data(t, "s_city", false, 0); }) == ErrorCode::bad_limit);
  CHECK(tools::limit_values(Json::array({1, 2, 3}), 2) == Json::array({1, 2}));
  CHECK(tools::distinct_values(Json::array({1, 1, 2})) == Json::array({1, 2}));
}

TEST_CASE("substring transform is a 0-based half-open slice") {
  const auto t = sample_table();
  const auto out =
      tools::transform_data(t, "s_day", "substring", Json{{"start_index", 0}, {"end_index", 10}});
  CHECK(out.rows[0][3] == "2013-02-22");
  CHECK(code_of([&] {
          tools::transform_data(t, "s_day", "substring", Json{{"start_index", 5}, {"end_index", 2}});
        }) == ErrorCode::bad_range);
  CHECK(code_of([&] { tools::transform_data(t, "s_day", "reverse", Json::object()); }) ==
        ErrorCode::unknown_operation);
}

TEST_CASE("executing a gold sequence through labels") {
  const auto& inst = testing::instance(runtime::Formulation::slot, 0);
  const auto pool = testing::pool_for(inst);
  util::TempDir work;
  runtime::LabelEnv env(work.path(), testing::workspace().db_root);
  runtime::run_initialization(*inst.initialization_step, env);
  const auto result = runtime::execute_sequence(inst.output, env, pool);
  REQUIRE(result.ok);
  CHECK(result.trace.size() == inst.output.size());
  CHECK(eval::answers_equal(result.answer,
                            Json::array({"Millikan High", "Polytechnic High", "Troy High"})));
}

TEST_CASE("execution failures carry their error code and failing step") {
  const auto& inst = testing::instance(runtime::Formulation::slot, 0);
  const auto pool = testing::pool_for(inst);
  const auto run = [&](std::vector<ToolCall> calls) {
    util::TempDir work;
    runtime::LabelEnv env(work.path(), testing::workspace().db_root);
    runtime::run_initialization(*inst.initialization_step, env);
    return runtime::execute_sequence(calls, env, pool);
  };

  auto r = run({call("filter_data",
                     {{"data_source", "$NOPE$"}, {"key_name", "schools_Magnet"}, {"value", 1.0},
                      {"condition", "equal_to"}},
                     "A")});
  CHECK(r.error_code == ErrorCode::unresolved_reference);
  CHECK(r.failed_step == 0);

  r = run({call("drop_table", {{"data_source", "$starting_table_var$"}}, "A")});
  CHECK(r.error_code == ErrorCode::tool_not_in_pool);

  r = run({call("filter_data",
                {{"data_source", "$starting_table_var$"}, {"key_name", "schools_Magnet"},
                 {"value", 1.0}, {"condition", "roughly"}},
                "A")});
  CHECK(r.error_code == ErrorCode::unknown_condition);

  r = run({call("filter_data",
                {{"data_source", "$starting_table_var$"}, {"key_name", "schools_Magnet"},
                 {"value", 1.0}, {"condition", "equal_to"}},
                "A"),
           call("retrieve_data",
                {{"data_source", "$A$"}, {"key_name", "schools_Nope"}, {"distinct", false},
                 {"limit", -1}},
                "B")});
  CHECK(r.error_code == ErrorCode::unknown_column);
  CHECK(r.failed_step == 1);
  CHECK(r.trace[0].ok);

  r = run({call("filter_data",
                {{"data_source", "$starting_table_var$"}, {"key_name", "schools_Magnet"},
                 {"value", 1.0}, {"condition", "equal_to"}, {"colour", "red"}},
                "A")});
  CHECK(r.error_code == ErrorCode::bad_argument);

  r = run({});
  CHECK(r.error_code == ErrorCode::no_final_result);
}

TEST_CASE("the initializer prefixes columns with their table") {
  const auto& inst = testing::instance(runtime::Formulation::slot, 0);
  util::TempDir work;
  runtime::LabelEnv env(work.path(), testing::workspace().db_root);
  const auto handle = runtime::run_initialization(*inst.initialization_step, env);
  CHECK(std::find(handle.schema.begin(), handle.schema.end(), "schools_Magnet") != handle.schema.end());
  CHECK(std::find(handle.schema.begin(), handle.schema.end(), "satscores_NumTstTakr") !=
        handle.schema.end());
  CHECK(env.has("starting_table_var"));
}
