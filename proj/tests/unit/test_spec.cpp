#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixture.hpp"
#include "toolbench/spec/emitter.hpp"
#include "toolbench/util/error.hpp"

using namespace toolbench;
using runtime::Formulation;

namespace {

const runtime::ToolSpec& tool(const runtime::ToolPool& pool, std::string_view name) {
  const auto* t = pool.find(name);
  REQUIRE(t != nullptr);
  return *t;
}

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("tool_" + std::to_string(i));
  return out;
}

}  // namespace

TEST_CASE("slot tool specs list column enums and required parameters") {
  const auto& inst = testing::instance(Formulation::slot, 0);
  const auto pool = testing::pool_for(inst);
  const auto j = spec::emit_tool_spec(tool(pool, "filter_data"), Formulation::slot);
  CHECK(j.at("name") == "filter_data");
  const auto& props = j.at("parameters").at("properties");
  const auto& keys = props.at("key_name").at("schema").at("enum");
  CHECK(std::find(keys.begin(), keys.end(), Json("schools_Magnet")) != keys.end());
  CHECK(std::find(keys.begin(), keys.end(), Json("satscores_NumTstTakr")) != keys.end());
  const auto& conditions = props.at("condition").at("schema").at("enum");
  CHECK(std::find(conditions.begin(), conditions.end(), Json("greater_than")) != conditions.end());
  const auto& required = j.at("parameters").at("required");
  CHECK(std::find(required.begin(), required.end(), Json("condition")) != required.end());
  CHECK(j.at("parameters").at("type") == "object");
  CHECK(j.contains("output_parameters"));
}

TEST_CASE("sel pools expose per-column getters and fixed-condition filters") {
  const auto& inst = testing::instance(Formulation::sel, 0);
  const auto pool = testing::pool_for(inst);
  const auto j = spec::emit_tool_spec(tool(pool, "select_data_greater_than"), Formulation::sel);
  CHECK_FALSE(j.at("parameters").at("properties").contains("condition"));
  CHECK(pool.find("get_schools_School") != nullptr);
  CHECK(pool.find("filter_data") == nullptr);
}

TEST_CASE("rest specs use a flat argument map and a path") {
  const auto& inst = testing::instance(Formulation::rest, testing::sample_with_query("'Alameda' ORDER BY"));
  const auto pool = testing::pool_for(inst);
  const auto& gold = inst.output.front();
  const auto j = spec::emit_tool_spec(tool(pool, gold.name), Formulation::rest);
  CHECK(j.at("path") == "/v1/bird/california_schools/free_meal_count_ratio");
  CHECK(j.at("arguments").at("county_name").at("type") == "string");
  CHECK_FALSE(j.contains("parameters"));
}

TEST_CASE("obfuscation renames tools and arguments and round-trips") {
  const auto& inst = testing::instance(Formulation::slot, 0);
  const auto pool = testing::pool_for(inst);
  const auto ob = spec::obfuscate_pool(pool, 7);
  std::set<std::string> seen;
  for (const auto& t : ob.pool.tools) {
    CHECK(t.name.rfind("FUNC_", 0) == 0);
    CHECK(seen.insert(t.name).second);
    for (std::size_t k = 0; k < t.parameters.size(); ++k) {
      CHECK(t.parameters[k].name == "ARG_" + std::to_string(k + 1));
      CHECK(t.parameters[k].original_name.has_value());
    }
  }
  CHECK(ob.pool.tools.size() == pool.tools.size());

  const auto calls = spec::obfuscate_calls(inst.output, ob.map);
  for (std::size_t i = 0; i < calls.size(); ++i) {
    CHECK(calls[i].label == inst.output[i].label);
    CHECK(ob.pool.find(calls[i].name) != nullptr);
  }
  const auto back = spec::deobfuscate_calls(calls, ob.map);
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i].to_json() == inst.output[i].to_json());

  const auto restored = spec::deobfuscate_pool(ob.pool, ob.map);
  CHECK(spec::emit_pool_spec(restored) == spec::emit_pool_spec(pool));
  CHECK(spec::ObfuscationMap::from_json(ob.map.to_json()).to_json() == ob.map.to_json());
}

TEST_CASE("obfuscation is seeded") {
  const auto pool = testing::pool_for(testing::instance(Formulation::sel, 0));
  CHECK(spec::obfuscate_pool(pool, 3).map.to_json() == spec::obfuscate_pool(pool, 3).map.to_json());
  CHECK(spec::obfuscate_pool(pool, 3).map.to_json() != spec::obfuscate_pool(pool, 4).map.to_json());
}

TEST_CASE("shortlist size is the floor of the fraction, at least the gold count") {
  CHECK(spec::shortlist_size(75, 0.10, 1) == 7);
  CHECK(spec::shortlist_size(75, 0.25, 1) == 18);
  CHECK(spec::shortlist_size(75, 0.50, 1) == 37);
  CHECK(spec::shortlist_size(75, 0.75, 1) == 56);
  CHECK(spec::shortlist_size(10, 0.10, 3) == 3);
  CHECK(spec::shortlist_size(20, 1.0, 1) == 20);
}

TEST_CASE("shortlists keep gold tools, universe order and determinism") {
  const auto universe = names(40);
  const auto a = spec::shortlist_tools(universe, {"tool_33", "tool_2"}, 0.25, 11);
  CHECK(a.tools.size() == 10);
  CHECK(std::is_sorted(a.tools.begin(), a.tools.end(), [&](const auto& x, const auto& y) {
    return std::find(universe.begin(), universe.end(), x) < std::find(universe.begin(), universe.end(), y);
  }));
  CHECK(std::find(a.tools.begin(), a.tools.end(), "tool_33") != a.tools.end());
  CHECK(std::find(a.tools.begin(), a.tools.end(), "tool_2") != a.tools.end());
  CHECK(spec::shortlist_tools(universe, {"tool_33", "tool_2"}, 0.25, 11).tools == a.tools);
  CHECK(spec::shortlist_tools(universe, {"tool_33", "tool_2"}, 0.25, 12).tools != a.tools);
}

TEST_CASE("shortlist argument errors") {
  const auto universe = names(7);
  const auto code_of = [&](std::vector<std::string> gold, double f) {
    try {
      spec::shortlist_tools(universe, gold, f, 1);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::execution_error;
  };
  CHECK(code_of({"tool_1"}, 0.10) == ErrorCode::fraction_too_small);
  CHECK(code_of({"tool_1"}, 0.0) == ErrorCode::fraction_too_small);
  CHECK(code_of({"tool_1"}, 1.5) == ErrorCode::fraction_too_small);
  CHECK(code_of({"missing"}, 0.5) == ErrorCode::bad_argument);
}
