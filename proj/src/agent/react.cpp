#include "toolbench/agent/react.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <set>
#include <thread>

#include "toolbench/eval/normalize.hpp"
#include "toolbench/eval/parser.hpp"
#include "toolbench/runtime/executor.hpp"
#include "toolbench/runtime/table.hpp"
#include "toolbench/util/error.hpp"
#include "toolbench/util/fs.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::agent {

using runtime::ToolCall;

Json ModelClientConfig::to_json() const {
  return Json{{"endpoint", endpoint},
              {"model", model},
              {"timeout_ms", timeout_ms},
              {"retries", retries},
              {"api_key_env", api_key_env}};
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // possibly empty
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

}  // namespace

HttpChatClient::HttpChatClient(ModelClientConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorCode::bad_argument, "model endpoint is not set");
}

std::string HttpChatClient::complete(const std::string& prompt, const std::vector<std::string>& stop) {
  const auto url = split_url(config_.endpoint);
  const std::string path =
      url.path.empty() ? "/v1/chat/completions" : url.path + "/chat/completions";
  Json body = Json::object();
  body["model"] = config_.model;
  body["messages"] = Json::array({Json{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = 0;
  if (!stop.empty()) body["stop"] = stop;

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(500 << (attempt - 1)));
    httplib::Client client(url.origin);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::transport_error, "model endpoint returned HTTP " + std::to_string(res->status));
    }
    const Json reply = Json::parse(res->body, nullptr, false);
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception&) {
      throw Error(ErrorCode::transport_error, "unexpected model response shape");
    }
  }
  throw Error(ErrorCode::transport_error, "model endpoint unreachable: " + last_error);
}

namespace {

// Turns already taken, counted from the observations after the question.
std::size_t turn_of(const std::string& prompt) {
  auto pos = prompt.rfind("\nQuestion:");
  if (pos == std::string::npos) pos = 0;
  std::size_t n = 0;
  while ((pos = prompt.find("\nObservation:", pos)) != std::string::npos) {
    ++n;
    pos += 13;
  }
  return n;
}

std::string action_text(const std::string& thought, const std::string& tool, const Json& input) {
  return " " + thought + "\nAction: " + tool + "\nAction Input: " + input.dump() + "\n";
}

}  // namespace

std::string ScriptedClient::complete(const std::string& prompt, const std::vector<std::string>&) {
  return script_(turn_of(prompt), prompt);
}

std::unique_ptr<ScriptedClient> ScriptedClient::replay(std::vector<ToolCall> calls,
                                                       std::string final_answer) {
  return std::make_unique<ScriptedClient>(
      [calls = std::move(calls), final_answer = std::move(final_answer)](std::size_t turn,
                                                                         const std::string&) {
        if (turn >= calls.size()) return " I now know the final answer\nFinal Answer: " + final_answer;
        const auto& c = calls[turn];
        Json input = c.arguments;
        if (!c.label.empty()) input["label"] = c.label;
        return action_text("Next I call " + c.name + ".", c.name, input);
      });
}

std::unique_ptr<ScriptedClient> ScriptedClient::never_finish(std::string tool, Json base_input) {
  return std::make_unique<ScriptedClient>(
      [tool = std::move(tool), base_input = std::move(base_input)](std::size_t turn,
                                                                   const std::string&) {
        Json input = base_input;
        input["label"] = "ATTEMPT_" + std::to_string(turn);
        return action_text("Attempt " + std::to_string(turn) + ".", tool, input);
      });
}

std::unique_ptr<ScriptedClient> ScriptedClient::repeating(std::string tool, Json input) {
  return std::make_unique<ScriptedClient>(
      [tool = std::move(tool), input = std::move(input)](std::size_t, const std::string&) {
        return action_text("Let me try this again.", tool, input);
      });
}

namespace {

std::size_t find_marker(const std::string& text, const std::string& marker, std::size_t from = 0) {
  // Markers count only at the start of a line.
  for (auto pos = text.find(marker, from); pos != std::string::npos; pos = text.find(marker, pos + 1)) {
    std::size_t b = pos;
    while (b > 0 && (text[b - 1] == ' ' || text[b - 1] == '\t')) --b;
    if (b == 0 || text[b - 1] == '\n') return pos;
  }
  return std::string::npos;
}

std::string until_next_marker(const std::string& text, std::size_t from) {
  std::size_t end = text.size();
  for (const char* m : {"Observation:", "Thought:", "Action:", "Final Answer:"}) {
    end = std::min(end, find_marker(text, m, from));
  }
  return util::trim(std::string_view(text).substr(from, end - from));
}

}  // namespace

ParsedTurn parse_action(const std::string& text) {
  ParsedTurn t;
  const std::string trimmed = util::trim(text);
  if (trimmed.rfind("Observation:", 0) == 0) {
    t.problem = "Your reply must not begin with \"Observation:\". Reply with a Thought and an Action.";
    return t;
  }
  const auto action = find_marker(text, "Action:");
  const auto final_answer = find_marker(text, "Final Answer:");
  const auto thought_end = std::min(action, final_answer);
  std::string thought = util::trim(std::string_view(text).substr(0, std::min(thought_end, text.size())));
  if (thought.rfind("Thought:", 0) == 0) thought = util::trim(thought.substr(8));
  t.thought = thought;

  if (final_answer != std::string::npos && final_answer < action) {
    t.final_answer = until_next_marker(text, final_answer + 13);
    return t;
  }
  if (action == std::string::npos) {
    t.problem = "No Action found. Reply with \"Action:\" and \"Action Input:\", or give a \"Final Answer:\".";
    return t;
  }
  const auto line_end = text.find('\n', action);
  t.action = util::trim(std::string_view(text).substr(action + 7, line_end == std::string::npos
                                                                      ? std::string::npos
                                                                      : line_end - action - 7));
  const auto input = find_marker(text, "Action Input:", action);
  if (input == std::string::npos) {
    t.problem = "Action Input is missing. Give the arguments as a JSON object.";
    return t;
  }
  t.action_input = until_next_marker(text, input + 13);
  t.extra_actions = find_marker(text, "Action:", input) != std::string::npos;
  return t;
}

Json Turn::to_json() const {
  return Json{{"thought", thought},
              {"action", action},
              {"action_input", action_input},
              {"observation", observation},
              {"ok", ok}};
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::completed: return "completed";
    case Outcome::oob: return "oob";
    case Outcome::stuck: return "stuck";
    case Outcome::failed: return "failed";
    case Outcome::error: return "error";
  }
  return "failed";
}

Json Episode::to_json() const {
  Json j = Json::object();
  j["sample_id"] = sample_id;
  j["outcome"] = std::string(to_string(outcome));
  j["completed"] = completed;
  j["budget"] = budget;
  j["turns"] = Json::array();
  for (const auto& t : turns) j["turns"].push_back(t.to_json());
  j["final_answer"] = final_answer ? Json(*final_answer) : Json(nullptr);
  j["error_cause"] = error_cause;
  j["executed_calls"] = runtime::to_json(executed_calls);
  j["answer"] = answer;
  return j;
}

std::string render_prompt(const std::string& tmpl, const std::string& tools,
                          const std::string& tool_names, const std::string& input,
                          const std::string& previous_runs, const std::string& scratchpad) {
  const std::pair<std::string_view, const std::string*> fields[] = {
      {"tools", &tools},
      {"tool_names", &tool_names},
      {"input", &input},
      {"previousruns", &previous_runs},
      {"agent_scratchpad", &scratchpad},
  };
  std::string out;
  out.reserve(tmpl.size() + tools.size() + scratchpad.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 2, "{{") == 0 || tmpl.compare(i, 2, "}}") == 0) {
      out += tmpl[i];
      i += 2;
      continue;
    }
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string::npos) {
        const std::string_view key(tmpl.data() + i + 1, close - i - 1);
        bool replaced = false;
        for (const auto& [name, value] : fields) {
          if (key == name) {
            out += *value;
            replaced = true;
            break;
          }
        }
        if (replaced) {
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string load_prompt_template(const std::filesystem::path& path) {
  std::string t = util::read_file(path);
  for (const char* p : {"{tools}", "{tool_names}", "{input}", "{previousruns}", "{agent_scratchpad}"}) {
    if (t.find(p) == std::string::npos) {
      throw Error(ErrorCode::schema_error, path.string() + " lacks placeholder " + p);
    }
  }
  return t;
}

namespace {

std::string truncate_observation(std::string obs, std::size_t limit) {
  if (limit == 0 || obs.size() <= limit) return obs;
  std::size_t cut = limit;
  while (cut > 0 && (static_cast<unsigned char>(obs[cut]) & 0xC0) == 0x80) --cut;
  const std::size_t dropped = obs.size() - cut;
  obs.resize(cut);
  return obs + "\n...[truncated " + std::to_string(dropped) + " bytes]";
}

std::string describe_result(const runtime::ToolResult& r, const std::string& label,
                            runtime::LabelEnv& env) {
  if (r.kind == runtime::ToolResult::Kind::values) {
    return "Stored as $" + label + "$: " + r.values.dump();
  }
  const auto& table = env.load(r.table);
  runtime::Table preview;
  preview.columns = table.columns;
  for (std::size_t i = 0; i < table.rows.size() && i < 5; ++i) preview.rows.push_back(table.rows[i]);
  return "Stored as $" + label + "$ (" + std::to_string(table.rows.size()) +
         " rows). First rows:\n" + runtime::to_csv(preview);
}

std::string query_value(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

class ActionRunner {
 public:
  ActionRunner(const runtime::EvalInstance& instance, const runtime::ToolPool& pool,
               const AgentOptions& options, runtime::LabelEnv& env)
      : instance_(instance), pool_(pool), options_(options), env_(env) {}

  // Returns the observation; sets `result` on success.
  std::string run(const ToolCall& call, std::optional<Json>& result) {
    try {
      if (pool_.formulation == runtime::Formulation::rest && !options_.rest_base_url.empty()) {
        return run_http(call, result);
      }
      const auto r = runtime::invoke_tool(call, env_, pool_);
      result = r.to_answer();
      if (pool_.formulation == runtime::Formulation::rest) return r.values.dump();
      return describe_result(r, call.label, env_);
    } catch (const Error& e) {
      return "Error: " + std::string(toolbench::to_string(e.code())) + ": " + e.what();
    }
  }

 private:
  std::string run_http(const ToolCall& call, std::optional<Json>& result) {
    const auto* spec = pool_.find(call.name);
    if (!spec || !spec->path) throw Error(ErrorCode::tool_not_in_pool, "tool not in pool: " + call.name);
    httplib::Params params;
    for (const auto& [key, value] : call.arguments.items()) {
      if (!spec->find_param(key)) {
        throw Error(ErrorCode::bad_argument, "unexpected parameter for " + call.name + ": " + key);
      }
      auto m = spec->arg_map.find(key);
      params.emplace(m == spec->arg_map.end() ? key : m->second, query_value(value));
    }
    httplib::Client client(options_.rest_base_url);
    client.set_read_timeout(std::chrono::seconds(30));
    auto res = client.Get(*spec->path, params, httplib::Headers{});
    if (!res) {
      throw Error(ErrorCode::transport_error, "REST service unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      return "Error: HTTP " + std::to_string(res->status) + ": " + res->body;
    }
    const Json body = Json::parse(res->body, nullptr, false);
    if (body.is_discarded()) throw Error(ErrorCode::transport_error, "REST service returned invalid JSON");
    result = body;
    return res->body;
  }

  const runtime::EvalInstance& instance_;
  const runtime::ToolPool& pool_;
  const AgentOptions& options_;
  runtime::LabelEnv& env_;
};

std::optional<Json> parse_input(const std::string& raw) {
  auto j = Json::parse(raw, nullptr, false);
  if (!j.is_discarded()) return j;
  return eval::parse_python_literal(raw);
}

std::string tools_text(const runtime::ToolPool& pool) {
  std::string out;
  for (const auto& t : pool.tools) {
    out += spec::emit_tool_spec(t, pool.formulation).dump();
    out += '\n';
  }
  return out;
}

runtime::ToolPool restrict_pool(const runtime::ToolPool& pool, const std::vector<std::string>& names) {
  const std::set<std::string> keep(names.begin(), names.end());
  runtime::ToolPool out = pool;
  std::erase_if(out.tools, [&](const runtime::ToolSpec& t) { return !keep.count(t.name); });
  return out;
}

// Outputs no later call consumed, combined like a scripted sequence answer.
std::optional<Json> sink_answer(const std::vector<std::pair<runtime::ToolCall, Json>>& produced) {
  if (produced.empty()) return std::nullopt;
  std::vector<bool> sink(produced.size(), true);
  for (std::size_t i = 0; i < produced.size(); ++i) {
    for (const auto& [key, value] : produced[i].first.arguments.items()) {
      std::string ref = runtime::referenced_label(value);
      if (ref.empty() && key == "data_source" && value.is_string()) ref = value.get<std::string>();
      for (std::size_t j = 0; j < i; ++j) {
        if (produced[j].first.label == ref) sink[j] = false;
      }
    }
  }
  Json sinks = Json::array();
  for (std::size_t i = 0; i < produced.size(); ++i) {
    if (sink[i]) sinks.push_back(produced[i].second);
  }
  return sinks.size() == 1 ? sinks[0] : sinks;
}

}  // namespace

PresentedPool presented_pool(const runtime::EvalInstance& instance, const runtime::ToolPool& pool,
                             const AgentOptions& options) {
  PresentedPool out{pool, std::nullopt};
  const auto offset = static_cast<std::uint64_t>(instance.sample_id);
  if (options.shortlist_fraction) {
    std::vector<std::string> gold;
    for (const auto& c : instance.output) gold.push_back(c.name);
    const auto list = spec::shortlist_tools(pool.tool_names(), gold, *options.shortlist_fraction,
                                            options.shortlist_seed + offset);
    out.pool = restrict_pool(pool, list.tools);
  }
  if (options.obfuscation_seed) {
    auto ob = spec::obfuscate_pool(out.pool, *options.obfuscation_seed + offset);
    out.pool = std::move(ob.pool);
    out.renames = std::move(ob.map);
  }
  return out;
}

Episode run_episode(const runtime::EvalInstance& instance, const runtime::ToolPool& pool,
                    ModelClient& client, const AgentOptions& options) {
  Episode ep;
  ep.sample_id = instance.sample_id;
  ep.budget = options.budget;

  auto [presented, renames] = presented_pool(instance, pool, options);

  util::TempDir work("toolbench-agent");
  runtime::LabelEnv env(work.path(), options.db_root);
  if (instance.initialization_step) runtime::run_initialization(*instance.initialization_step, env);
  ActionRunner runner(instance, presented, options, env);

  const std::string tools = tools_text(presented);
  const std::string names = util::join(presented.tool_names(), ", ");
  std::string scratchpad;
  std::vector<std::pair<runtime::ToolCall, Json>> produced;

  while (ep.turns.size() < options.budget) {
    const std::string prompt = render_prompt(options.prompt_template, tools, names, instance.input, "",
                                             scratchpad);
    std::string reply;
    try {
      reply = client.complete(prompt, {"\nObservation:"});
    } catch (const Error& e) {
      ep.outcome = Outcome::error;
      ep.error_cause = std::string(toolbench::to_string(e.code())) + ": " + e.what();
      break;
    }
    // Anything the model wrote past its own Observation line is discarded.
    if (auto cut = find_marker(reply, "Observation:"); cut != std::string::npos && cut > 0) {
      reply.resize(cut);
    }
    const ParsedTurn parsed = parse_action(reply);
    if (parsed.final_answer && !parsed.problem) {
      ep.final_answer = parsed.final_answer;
      Turn t;
      t.thought = parsed.thought;
      t.ok = true;
      ep.turns.push_back(std::move(t));
      break;
    }
    Turn t;
    t.thought = parsed.thought;
    t.action = parsed.action.value_or("");
    t.action_input = parsed.action_input ? Json(*parsed.action_input) : Json(nullptr);
    if (parsed.problem) {
      t.observation = parsed.problem.value();
    } else {
      auto input = parse_input(*parsed.action_input);
      if (!input || !input->is_object()) {
        t.observation = "Error: Action Input must be a JSON object.";
      } else {
        t.action_input = *input;
        ToolCall call;
        call.name = t.action;
        call.arguments = *input;
        if (auto l = call.arguments.find("label"); l != call.arguments.end()) {
          if (l->is_string()) call.label = l->get<std::string>();
          call.arguments.erase(l);
        }
        if (call.label.empty()) call.label = "STEP_" + std::to_string(ep.turns.size());
        std::optional<Json> result;
        t.observation = runner.run(call, result);
        if (result) {
          t.ok = true;
          auto plain = renames ? spec::deobfuscate_call(call, *renames) : call;
          std::erase_if(produced, [&](const auto& p) { return p.first.label == plain.label; });
          produced.emplace_back(plain, std::move(*result));
          ep.executed_calls.push_back(std::move(plain));
        }
      }
      if (parsed.extra_actions) {
        t.observation += "\nNote: only the first action was executed. Send one action per reply.";
      }
    }
    t.observation = truncate_observation(t.observation, options.observation_limit);
    scratchpad += reply;
    if (!reply.empty() && reply.back() != '\n') scratchpad += '\n';
    scratchpad += "Observation: " + t.observation + "\nThought:";
    ep.turns.push_back(std::move(t));
  }

  const auto answer = sink_answer(produced);
  if (answer) ep.answer = *answer;
  ep.completed = ep.outcome != Outcome::error && ep.final_answer && answer &&
                 eval::answers_equal(*answer, instance.gold_answer);
  if (ep.outcome != Outcome::error) {
    const auto flags = classify_trace(ep);
    ep.outcome = ep.completed ? Outcome::completed
                 : flags.stuck ? Outcome::stuck
                 : flags.oob   ? Outcome::oob
                               : Outcome::failed;
  }
  return ep;
}

TraceFlags classify_trace(const Episode& episode) {
  TraceFlags f;
  f.loops = episode.turns.size();
  if (episode.completed) return f;
  f.oob = !episode.final_answer && episode.turns.size() >= episode.budget;
  for (std::size_t i = 1; i < episode.turns.size(); ++i) {
    const auto& a = episode.turns[i - 1];
    const auto& b = episode.turns[i];
    if (!a.action.empty() && a.action == b.action && canonical_dump(a.action_input) == canonical_dump(b.action_input)) {
      f.stuck = true;
      break;
    }
  }
  f.unclassified = !f.oob && !f.stuck;
  return f;
}

Json AgentSummary::to_json() const {
  return Json{{"episodes", episodes},     {"completion_rate", completion_rate},
              {"avg_loops", avg_loops},   {"oob", oob},
              {"stuck", stuck},           {"unclassified", unclassified}};
}

AgentSummary summarize(const std::vector<Episode>& episodes) {
  AgentSummary s;
  s.episodes = episodes.size();
  double loops = 0;
  double completed = 0;
  for (const auto& e : episodes) {
    const auto f = classify_trace(e);
    loops += static_cast<double>(f.loops);
    if (e.completed) ++completed;
    if (f.oob) ++s.oob;
    if (f.stuck) ++s.stuck;
    if (f.unclassified) ++s.unclassified;
  }
  if (!episodes.empty()) {
    s.avg_loops = loops / static_cast<double>(episodes.size());
    s.completion_rate = completed / static_cast<double>(episodes.size());
  }
  return s;
}

}  // namespace toolbench::agent
