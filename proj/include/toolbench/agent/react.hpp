#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "toolbench/runtime/instance.hpp"
#include "toolbench/runtime/pool.hpp"
#include "toolbench/runtime/tool_call.hpp"
#include "toolbench/spec/emitter.hpp"
#include "toolbench/util/json.hpp"

namespace toolbench::agent {

/// Text-completion interface. Implementations must be safe to call from
/// several threads at once.
class ModelClient {
 public:
  virtual ~ModelClient() = default;
  /// Continues `prompt`; generation should stop before any of `stop`.
  /// Throws Error(transport_error) when the model cannot be reached.
  virtual std::string complete(const std::string& prompt, const std::vector<std::string>& stop) = 0;
};

struct ModelClientConfig {
  std::string endpoint;  // base URL, e.g. http://localhost:8080
  std::string model;
  int timeout_ms = 60000;
  int retries = 2;
  std::string api_key_env = "TOOLBENCH_API_KEY";  // name of the variable, never its value

  Json to_json() const;
};

/// OpenAI-style /v1/chat/completions client with retries.
class HttpChatClient : public ModelClient {
 public:
  explicit HttpChatClient(ModelClientConfig config);
  std::string complete(const std::string& prompt, const std::vector<std::string>& stop) override;

 private:
  ModelClientConfig config_;
};

/// Replies produced by a function of (turn index, prompt). Deterministic stubs
/// for tests and dry runs.
class ScriptedClient : public ModelClient {
 public:
  using Script = std::function<std::string(std::size_t turn, const std::string& prompt)>;
  explicit ScriptedClient(Script script) : script_(std::move(script)) {}
  /// The turn index is recovered from the prompt, so one client can serve
  /// concurrent episodes.
  std::string complete(const std::string& prompt, const std::vector<std::string>& stop) override;

  /// Emits each call as an action, then a final answer.
  static std::unique_ptr<ScriptedClient> replay(std::vector<runtime::ToolCall> calls,
                                                std::string final_answer = "done");
  /// Keeps emitting distinct thoughts and valid-looking but different actions; never finishes.
  static std::unique_ptr<ScriptedClient> never_finish(std::string tool, Json base_input);
  /// Emits the same action every turn.
  static std::unique_ptr<ScriptedClient> repeating(std::string tool, Json input);

 private:
  Script script_;
};

struct ParsedTurn {
  std::string thought;
  std::optional<std::string> action;
  std::optional<std::string> action_input;  // raw text after "Action Input:"
  std::optional<std::string> final_answer;
  // Set when the reply cannot be executed as written.
  std::optional<std::string> problem;
  bool extra_actions = false;
};

/// Extracts the first Thought/Action/Action Input triple or a Final Answer.
ParsedTurn parse_action(const std::string& text);

struct Turn {
  std::string thought;
  std::string action;
  Json action_input;  // parsed object, or the raw string when unparseable
  std::string observation;
  bool ok = false;  // the action ran successfully

  Json to_json() const;
};

enum class Outcome { completed, oob, stuck, failed, error };
std::string_view to_string(Outcome o);

struct Episode {
  std::int64_t sample_id = 0;
  std::vector<Turn> turns;
  std::size_t budget = 10;
  std::optional<std::string> final_answer;
  Outcome outcome = Outcome::failed;
  std::string error_cause;
  bool completed = false;
  // Successful actions in execution order, in unobfuscated names.
  std::vector<runtime::ToolCall> executed_calls;
  Json answer;  // outputs of the successful calls no later call consumed

  Json to_json() const;
};

struct AgentOptions {
  std::size_t budget = 10;
  std::size_t observation_limit = 4096;
  std::filesystem::path db_root;
  std::string prompt_template;
  // REST actions go to this base URL when set, otherwise run in process.
  std::string rest_base_url;
  std::optional<std::uint64_t> obfuscation_seed;
  std::optional<double> shortlist_fraction;
  std::uint64_t shortlist_seed = 0;
};

/// Replaces {tools}, {tool_names}, {input}, {previousruns} and
/// {agent_scratchpad}; "{{" and "}}" become literal braces.
std::string render_prompt(const std::string& tmpl, const std::string& tools,
                          const std::string& tool_names, const std::string& input,
                          const std::string& previous_runs, const std::string& scratchpad);

std::string load_prompt_template(const std::filesystem::path& path);

struct PresentedPool {
  runtime::ToolPool pool;
  std::optional<spec::ObfuscationMap> renames;
};

/// The pool shown to the model for an instance after shortlisting and
/// obfuscation. Seeds are offset by the sample id.
PresentedPool presented_pool(const runtime::EvalInstance& instance, const runtime::ToolPool& pool,
                             const AgentOptions& options);

/// Runs one TAO loop. Tool failures become observations; a client failure
/// ends the episode with outcome error.
Episode run_episode(const runtime::EvalInstance& instance, const runtime::ToolPool& pool,
                    ModelClient& client, const AgentOptions& options);

struct TraceFlags {
  std::size_t loops = 0;
  bool oob = false;
  bool stuck = false;
  bool unclassified = false;
};

TraceFlags classify_trace(const Episode& episode);

struct AgentSummary {
  std::size_t episodes = 0;
  double completion_rate = 0;
  double avg_loops = 0;
  std::size_t oob = 0;
  std::size_t stuck = 0;
  std::size_t unclassified = 0;

  Json to_json() const;
};

AgentSummary summarize(const std::vector<Episode>& episodes);

}  // namespace toolbench::agent
