// SPDX-License-Identifier: Apache-2.0
#include <iomanip>
#include <sstream>

#include "spark/evaluation.hpp"

namespace spark {

namespace {

nlohmann::json scores_json(const metrics::Scores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"hit", s.hit}, {"map", s.ap}, {"mrr", s.rr}};
}

nlohmann::json distribution_json(const Distribution& d) {
  return {{"min", d.min}, {"mean", d.mean}, {"median", d.median}, {"max", d.max}};
}

void csv_number(std::ostringstream& o, double v) { o << std::fixed << std::setprecision(6) << v; }

void csv_scores(std::ostringstream& o, const metrics::Scores& s) {
  for (double v : {s.precision, s.recall, s.hit, s.ap, s.rr}) {
    o << ',';
    csv_number(o, v);
  }
}

}  // namespace

nlohmann::json to_json(const QueryResult& r) {
  nlohmann::json retrieved = nlohmann::json::array();
  for (const auto& h : r.retrieved) retrieved.push_back({{"test_id", h.test_id}, {"score", h.score}});

  nlohmann::json per_k = nlohmann::json::array();
  for (const auto& kr : r.per_k) {
    nlohmann::json warnings = nlohmann::json::array();
    for (auto w : kr.prediction.warnings) warnings.push_back(to_string(w));
    nlohmann::json j{{"k", kr.k},
                     {"prompt_k", kr.prompt_k},
                     {"prediction", kr.prediction.element_ids},
                     {"unit_prediction", kr.unit_prediction},
                     {"warnings", warnings},
                     {"prompt_chars", kr.prompt_chars},
                     {"prompt_tokens", kr.prompt_tokens},
                     {"usage_in", kr.usage_in},
                     {"usage_out", kr.usage_out},
                     {"latency_ms", kr.latency_ms},
                     {"parse_failed", kr.parse_failed}};
    if (!kr.error.empty()) j["error"] = kr.error;
    if (kr.line_scores) j["line_scores"] = scores_json(*kr.line_scores);
    if (kr.unit_scores) j["unit_scores"] = scores_json(*kr.unit_scores);
    per_k.push_back(std::move(j));
  }

  nlohmann::json j{{"query_id", r.query_id},
                   {"kb_size", r.kb_size},
                   {"retrieval", r.retrieval},
                   {"retrieved", retrieved},
                   {"patterns", r.patterns},
                   {"unlabeled_hits", r.unlabeled_hits},
                   {"annotated", r.annotated},
                   {"annotated_count", r.annotated_count()},
                   {"per_k", per_k},
                   {"empty_truth", r.empty_truth},
                   {"hard_failure", r.hard_failure}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json agg = nlohmann::json::object();
  for (const auto& [k, by_gran] : m.aggregates) {
    nlohmann::json g = nlohmann::json::object();
    for (const auto& [name, s] : by_gran) g[name] = scores_json(s);
    agg[std::to_string(k)] = std::move(g);
  }
  return {{"queries", m.queries},
          {"aggregates", agg},
          {"tokens", {{"avg_in", m.tokens.avg_in}, {"avg_out", m.tokens.avg_out}}},
          {"time", {{"avg_ms", m.time.avg_ms}, {"sum_ms", m.time.sum_ms}}},
          {"parse_failures", m.parse_failures},
          {"hard_failures", m.hard_failures},
          {"short_predictions", m.short_predictions},
          {"empty_truth", m.empty_truth}};
}

nlohmann::json to_json(const EvaluationRun& run) {
  nlohmann::json per_query = nlohmann::json::array();
  for (const auto& q : run.per_query) per_query.push_back(to_json(q));
  nlohmann::json j = to_json(run.report);
  j["config"] = run.config;
  j["leakage_violations"] = run.leakage_violations;
  j["per_query"] = std::move(per_query);
  return j;
}

nlohmann::json sweep_to_json(SweepAxis axis, const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    out.push_back({{"value", row.value},
                   {"report", to_json(row.run.report)},
                   {"config", row.run.config},
                   {"annotated_lines", distribution_json(row.annotated_lines)},
                   {"annotated_ratio", distribution_json(row.annotated_ratio)}});
  }
  return {{"axis", to_string(axis)}, {"rows", out}};
}

std::string report_csv(const MetricsReport& m) {
  std::ostringstream o;
  o << "k,granularity,precision,recall,hit,map,mrr\n";
  for (const auto& [k, by_gran] : m.aggregates) {
    for (const auto& [name, s] : by_gran) {
      o << k << ',' << name;
      csv_scores(o, s);
      o << '\n';
    }
  }
  return o.str();
}

std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::ostringstream o;
  o << to_string(axis)
    << ",k,granularity,precision,recall,hit,map,mrr,annotated_min,annotated_mean,annotated_median,annotated_max,"
       "annotated_ratio_mean\n";
  for (const auto& row : rows) {
    for (const auto& [k, by_gran] : row.run.report.aggregates) {
      for (const auto& [name, s] : by_gran) {
        o << row.value << ',' << k << ',' << name;
        csv_scores(o, s);
        for (double v : {row.annotated_lines.min, row.annotated_lines.mean, row.annotated_lines.median,
                         row.annotated_lines.max, row.annotated_ratio.mean}) {
          o << ',';
          csv_number(o, v);
        }
        o << '\n';
      }
    }
  }
  return o.str();
}

}  // namespace spark
