#include "toolbench/runtime/instance.hpp"

#include "toolbench/util/error.hpp"
#include "toolbench/util/fs.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::runtime {

Json EvalInstance::to_json() const {
  Json j = Json::object();
  j["query"] = query;
  j["input"] = input;
  j["dataset_name"] = dataset_name;
  j["gold_answer"] = gold_answer;
  Json calls = Json::array();
  for (const auto& c : output) {
    if (formulation == Formulation::rest) {
      calls.push_back(Json{{"name", c.name}, {"arguments", c.arguments}, {"path", rest_path}});
    } else {
      calls.push_back(c.to_json());
    }
  }
  j["output"] = std::move(calls);
  if (initialization_step) j["initialization_step"] = initialization_step->to_json();
  if (formulation == Formulation::rest) j["output_after_executing_api"] = output_after_executing_api;
  j["sample_id"] = sample_id;
  j["available_tools"] = available_tools;
  return j;
}

EvalInstance EvalInstance::from_json(const Json& j, Formulation formulation) {
  if (!j.is_object()) throw Error(ErrorCode::schema_error, "dataset row must be an object");
  try {
    EvalInstance e;
    e.formulation = formulation;
    e.sample_id = j.at("sample_id").get<std::int64_t>();
    e.dataset_name = j.at("dataset_name").get<std::string>();
    e.input = j.value("input", "");
    e.query = j.value("query", "");
    e.gold_answer = j.at("gold_answer");
    for (const auto& c : j.at("output")) {
      e.output.push_back(ToolCall::from_json(c));
      if (formulation == Formulation::rest && c.contains("path")) {
        e.rest_path = c.at("path").get<std::string>();
      }
    }
    if (j.contains("initialization_step") && !j.at("initialization_step").is_null()) {
      e.initialization_step = ToolCall::from_json(j.at("initialization_step"));
    }
    e.available_tools = j.value("available_tools", std::vector<std::string>{});
    e.output_after_executing_api = j.value("output_after_executing_api", "");
    return e;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::schema_error, std::string("malformed dataset row: ") + ex.what());
  }
}

std::string to_jsonl(const std::vector<EvalInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += inst.to_json().dump();
    out += '\n';
  }
  return out;
}

std::vector<EvalInstance> read_dataset(const std::filesystem::path& path, Formulation formulation) {
  std::vector<EvalInstance> out;
  std::size_t line_no = 0;
  for (const auto& line : util::split(util::read_file(path), '\n')) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    try {
      out.push_back(EvalInstance::from_json(Json::parse(line), formulation));
    } catch (const Json::exception& ex) {
      throw Error(ErrorCode::schema_error,
                  path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error(ErrorCode::schema_error,
                  path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace toolbench::runtime
