#include "toolbench/eval/report.hpp"

#include <cstdio>
#include <sstream>

#include "toolbench/spec/emitter.hpp"
#include "toolbench/transpile/build.hpp"
#include "toolbench/util/error.hpp"
#include "toolbench/util/fs.hpp"
#include "toolbench/util/hash.hpp"
#include "toolbench/util/parallel.hpp"
#include "toolbench/util/strings.hpp"

namespace toolbench::eval {

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path,
                                               std::vector<std::string>* problems) {
  std::vector<PredictionRecord> out;
  std::size_t line_no = 0;
  for (const auto& line : util::split(util::read_file(path), '\n')) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    auto reject = [&](const std::string& why) {
      if (!problems) throw Error(ErrorCode::schema_error, where + ": " + why);
      problems->push_back(where + ": " + why);
    };
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      reject("not a JSON object");
      continue;
    }
    auto id = j.find("sample_id");
    if (id == j.end() || !id->is_number_integer()) {
      reject("sample_id must be an integer");
      continue;
    }
    auto text = j.find("output");
    if (text == j.end()) text = j.find("prediction");
    if (text == j.end()) {
      reject("missing output");
      continue;
    }
    PredictionRecord r;
    r.sample_id = id->get<std::int64_t>();
    r.raw_text = text->is_string() ? text->get<std::string>() : text->dump();
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

Json prf_json(const PRF& p) {
  return Json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Json InstanceScore::to_json() const {
  Json j = Json::object();
  j["sample_id"] = sample_id;
  j["parse_stage"] = std::string(to_string(stage));
  j["predicted_calls"] = predicted_calls;
  j["gold_calls"] = gold_calls;
  j["intent"] = prf_json(intent);
  j["slot"] = prf_json(slot.prf);
  j["slot_zero_pairs"] = slot.zero_pairs;
  j["completed"] = completed;
  j["failure"] = failure ? Json(*failure) : Json(nullptr);
  j["error_category"] = category ? Json(std::string(to_string(*category))) : Json(nullptr);
  if (loops) {
    j["loops"] = *loops;
    j["oob"] = oob;
    j["stuck"] = stuck;
  }
  return j;
}

InstanceScore score_instance(const runtime::EvalInstance& instance,
                             const ParsedPrediction& prediction, const runtime::ToolPool& pool,
                             const std::filesystem::path& db_root) {
  InstanceScore s;
  s.sample_id = instance.sample_id;
  s.stage = prediction.stage;
  s.predicted_calls = prediction.calls.size();
  s.gold_calls = instance.output.size();
  const auto alignment = align_sequences(prediction.calls, instance.output);
  s.intent_pairs = alignment.pairs.size();
  s.intent = intent_metrics(alignment, prediction.calls.size(), instance.output.size());
  s.slot = slot_metrics(alignment, prediction.calls, instance.output);
  if (prediction.well_formed && !prediction.calls.empty()) {
    const auto c = completion_check(instance, prediction.calls, pool, db_root);
    s.completed = c.completed;
    s.failure = c.failure;
  } else {
    s.failure = prediction.stage == ParseStage::failed ? "ParseFailure" : "MalformedCalls";
  }
  if (!s.completed) s.category = classify_error(instance, prediction, pool);
  return s;
}

MetricsReport aggregate_scores(runtime::Formulation formulation, std::vector<InstanceScore> scores) {
  MetricsReport r;
  r.formulation = formulation;
  for (auto c : kAllErrorCategories) r.error_histogram[std::string(to_string(c))] = 0;
  double pairs = 0, predicted = 0, gold = 0;
  double slot_tp = 0, slot_pred = 0, slot_gold = 0;
  double completed = 0;
  for (const auto& s : scores) {
    r.intent_macro.precision += s.intent.precision;
    r.intent_macro.recall += s.intent.recall;
    r.intent_macro.f1 += s.intent.f1;
    r.slot_macro.precision += s.slot.prf.precision;
    r.slot_macro.recall += s.slot.prf.recall;
    r.slot_macro.f1 += s.slot.prf.f1;
    pairs += static_cast<double>(s.intent_pairs);
    predicted += static_cast<double>(s.predicted_calls);
    gold += static_cast<double>(s.gold_calls);
    slot_tp += static_cast<double>(s.slot.true_positives);
    slot_pred += static_cast<double>(s.slot.predicted);
    slot_gold += static_cast<double>(s.slot.expected);
    if (s.slot.zero_pairs) ++r.slot_zero_pair_instances;
    if (s.completed) ++completed;
    if (s.category) ++r.error_histogram[std::string(to_string(*s.category))];
  }
  if (!scores.empty()) {
    const double n = static_cast<double>(scores.size());
    for (PRF* p : {&r.intent_macro, &r.slot_macro}) {
      p->precision /= n;
      p->recall /= n;
      p->f1 /= n;
    }
    r.completion_rate = completed / n;
  }
  r.intent_micro = PRF::from_counts(pairs, predicted, gold);
  r.slot_micro = PRF::from_counts(slot_tp, slot_pred, slot_gold);
  r.instances = std::move(scores);
  return r;
}

Json MetricsReport::to_json() const {
  Json j = Json::object();
  j["formulation"] = std::string(runtime::to_string(formulation));
  j["pool_sha256"] = pool_sha256;
  j["instances"] = instances.size();
  j["missing_predictions"] = missing_predictions;
  j["intent"] = Json{{"macro", prf_json(intent_macro)}, {"micro", prf_json(intent_micro)}};
  j["slot"] = Json{{"macro", prf_json(slot_macro)},
                   {"micro", prf_json(slot_micro)},
                   {"zero_pair_instances", slot_zero_pair_instances}};
  j["completion_rate"] = completion_rate;
  j["error_histogram"] = Json(error_histogram);
  if (agent_summary) j["agent"] = *agent_summary;
  Json rows = Json::array();
  for (const auto& s : instances) rows.push_back(s.to_json());
  j["per_instance"] = std::move(rows);
  return j;
}

std::string MetricsReport::to_csv() const {
  const bool agent = agent_summary.has_value();
  std::ostringstream out;
  out << "sample_id,parse_stage,predicted_calls,gold_calls,intent_p,intent_r,intent_f1,"
         "slot_p,slot_r,slot_f1,slot_zero_pairs,completed,failure,error_category"
      << (agent ? ",loops,oob,stuck" : "") << "\r\n";
  for (const auto& s : instances) {
    out << s.sample_id << ',' << to_string(s.stage) << ',' << s.predicted_calls << ','
        << s.gold_calls << ',' << fmt(s.intent.precision) << ',' << fmt(s.intent.recall) << ','
        << fmt(s.intent.f1) << ',' << fmt(s.slot.prf.precision) << ',' << fmt(s.slot.prf.recall)
        << ',' << fmt(s.slot.prf.f1) << ',' << (s.slot.zero_pairs ? "true" : "false") << ','
        << (s.completed ? "true" : "false") << ',' << csv_field(s.failure.value_or("")) << ','
        << (s.category ? std::string(to_string(*s.category)) : std::string());
    if (agent) {
      out << ',' << s.loops.value_or(0) << ',' << (s.oob ? "true" : "false") << ','
          << (s.stuck ? "true" : "false");
    }
    out << "\r\n";
  }
  return out.str();
}

namespace {

const transpile::Catalog& catalog_for(const runtime::EvalInstance& inst,
                                      const std::map<std::string, transpile::Catalog>& catalogs) {
  auto it = catalogs.find(inst.dataset_name);
  if (it == catalogs.end()) {
    throw Error(ErrorCode::missing_table, "no database for dataset " + inst.dataset_name);
  }
  return it->second;
}

}  // namespace

std::string pool_digest(const std::vector<runtime::EvalInstance>& dataset,
                        const std::map<std::string, transpile::Catalog>& catalogs,
                        const std::vector<rest::RestEndpoint>& endpoints) {
  Json all = Json::array();
  for (const auto& inst : dataset) {
    const auto pool = transpile::instance_pool(inst, catalog_for(inst, catalogs), endpoints);
    all.push_back(Json{{"sample_id", inst.sample_id}, {"tools", spec::emit_pool_spec(pool)}});
  }
  return util::sha256_hex(canonical_dump(all));
}

MetricsReport evaluate(const std::vector<runtime::EvalInstance>& dataset,
                       const std::vector<PredictionRecord>& predictions,
                       const std::map<std::string, transpile::Catalog>& catalogs,
                       const std::vector<rest::RestEndpoint>& endpoints, const EvalOptions& options) {
  std::map<std::int64_t, const PredictionRecord*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.sample_id, &p).second) {
      throw Error(ErrorCode::schema_error,
                  "duplicate prediction for sample " + std::to_string(p.sample_id));
    }
  }
  std::size_t missing = 0;
  for (const auto& inst : dataset) {
    if (!by_id.count(inst.sample_id)) ++missing;
  }
  std::vector<InstanceScore> scores(dataset.size());
  util::parallel_for(dataset.size(), options.jobs, [&](std::size_t i) {
    const auto& inst = dataset[i];
    const auto pool = transpile::instance_pool(inst, catalog_for(inst, catalogs), endpoints);
    auto it = by_id.find(inst.sample_id);
    auto parsed = parse_model_output(it == by_id.end() ? "" : it->second->raw_text);
    if (auto r = options.renames.find(inst.sample_id); r != options.renames.end()) {
      parsed.calls = spec::deobfuscate_calls(parsed.calls, r->second);
    }
    scores[i] = score_instance(inst, parsed, pool, options.db_root);
  });
  auto report = aggregate_scores(dataset.empty() ? runtime::Formulation::slot : dataset.front().formulation,
                                 std::move(scores));
  report.missing_predictions = missing;
  report.pool_sha256 = pool_digest(dataset, catalogs, endpoints);
  return report;
}

}  // namespace toolbench::eval
