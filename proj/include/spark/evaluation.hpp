// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "spark/annotator.hpp"
#include "spark/corpus.hpp"
#include "spark/filtering.hpp"
#include "spark/llm_client.hpp"
#include "spark/metrics.hpp"
#include "spark/prompting.hpp"
#include "spark/simsearch.hpp"
#include "spark/unitmap.hpp"

namespace spark {

/// Pipeline variants. The first four are the ablation modes; Baseline skips
/// retrieval entirely and NaiveRag pastes whole retrieved cases into the
/// prompt instead of annotating.
enum class RunMode { Default, Random, AnnotationFree, Directive, Baseline, NaiveRag };

RunMode parse_run_mode(std::string_view name);  // default|random|annotation-free|directive|baseline|naive-rag
std::string_view to_string(RunMode mode);

struct ModeToggles {
  bool retrieval = true;
  bool similarity_search = true;  // false: uniform random pick from the KB
  bool annotation = true;
  TemplateKind prompt = TemplateKind::Baseline;
};

ModeToggles toggles_for(RunMode mode);

struct PipelineConfig {
  RunMode mode = RunMode::Default;
  FilterPolicy policy = FilterPolicy::all();
  AnnotationOptions annotation;
  std::size_t r = 1;
  std::vector<std::size_t> ks{1, 3, 5, 10};
  Granularity granularity = Granularity::Statement;  // unit level reported next to line level
  std::uint64_t seed = 0;
  std::string programming_language = "Python";
  unsigned parallelism = 1;

  /// Throws Error{InvalidArgument}.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Result of one LLM call for one k.
struct KResult {
  std::size_t k = 0;
  std::size_t prompt_k = 0;  // k actually requested; clamped to the line count
  RankedPrediction prediction;
  std::vector<int> unit_prediction;
  std::size_t prompt_chars = 0;
  std::size_t prompt_tokens = 0;      // local tokenizer
  std::size_t usage_in = 0;           // as reported by the client
  std::size_t usage_out = 0;
  double latency_ms = 0.0;
  bool parse_failed = false;
  std::string error;
  std::optional<metrics::Scores> line_scores;
  std::optional<metrics::Scores> unit_scores;
};

struct QueryResult {
  std::string query_id;
  std::size_t kb_size = 0;
  std::string retrieval;  // similarity | random | none
  std::vector<SimilarityHit> retrieved;
  std::vector<std::string> patterns;
  std::vector<std::string> unlabeled_hits;
  std::vector<int> annotated;
  std::vector<double> scores;
  std::vector<KResult> per_k;
  bool empty_truth = false;
  bool hard_failure = false;
  std::string error;

  std::size_t annotated_count() const { return annotated.size(); }
};

/// Everything the per-query pipeline reads. The corpus is only consulted
/// through ids returned by filtering; labels are read through the hook.
struct PipelineInputs {
  const Corpus& corpus;
  const SimilarityIndex& index;
  LlmClient& client;
};

/// Runs filtering, retrieval, context extraction, annotation, prompting and
/// parsing for one query at every k. `query` must not carry labels the
/// caller wants hidden; the function never reads query.faulty_lines. Stage
/// failures are recorded on the result instead of thrown, except
/// Error{Leakage}.
QueryResult run_query(const TestCase& query, std::span<const float> query_vector, const PipelineInputs& inputs,
                      const PipelineConfig& config, const LabelAccessHook& on_label_access = {});

/// Fills line and unit scores of every k result against the held-out truth.
void score_query(QueryResult& result, const TestCase& labeled_query, Granularity granularity);

struct TokenStats {
  double avg_in = 0.0;
  double avg_out = 0.0;
};

struct TimeStats {
  double avg_ms = 0.0;
  double sum_ms = 0.0;
};

struct MetricsReport {
  std::size_t queries = 0;
  /// aggregates[k][granularity]
  std::map<std::size_t, std::map<std::string, metrics::Scores>> aggregates;
  TokenStats tokens;
  TimeStats time;
  std::size_t parse_failures = 0;
  std::size_t hard_failures = 0;
  std::size_t short_predictions = 0;
  std::size_t empty_truth = 0;
};

/// Unweighted means over all queries; failed queries count as zeros.
/// Throws Error{EmptyRun}.
MetricsReport aggregate(std::span<const QueryResult> results, const std::vector<std::size_t>& ks,
                        Granularity granularity);

struct EvaluationRun {
  nlohmann::json config;
  std::vector<QueryResult> per_query;
  MetricsReport report;
  std::size_t leakage_violations = 0;
};

/// Receives (query id, id whose labels were read) during leave-one-out.
using LabelAccessObserver = std::function<void(const std::string& query_id, const std::string& accessed_id)>;

/// Treats each corpus case in turn as the query with its labels withheld.
/// Query embeddings are taken from `embeddings`.
EvaluationRun leave_one_out(const Corpus& corpus, const EmbeddingIndex& embeddings, LlmClient& client,
                            const PipelineConfig& config, const LabelAccessObserver& observer = {});

struct Distribution {
  double min = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
};

Distribution distribution(std::vector<double> values);

enum class SweepAxis { Epsilon, Policy, Mode };
SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct SweepRow {
  std::string value;
  EvaluationRun run;
  Distribution annotated_lines;
  Distribution annotated_ratio;  // annotated / total lines
};

/// One leave-one-out run per axis value, sharing the embeddings. Throws
/// Error{EmptyAxis}.
std::vector<SweepRow> sweep(const Corpus& corpus, const EmbeddingIndex& embeddings, LlmClient& client,
                            const PipelineConfig& base, SweepAxis axis, const std::vector<std::string>& values);

nlohmann::json to_json(const QueryResult& r);
nlohmann::json to_json(const MetricsReport& m);
nlohmann::json to_json(const EvaluationRun& run);
nlohmann::json sweep_to_json(SweepAxis axis, const std::vector<SweepRow>& rows);

/// Header `k,granularity,precision,recall,hit,map,mrr`.
std::string report_csv(const MetricsReport& m);
/// As report_csv with a leading axis column and annotation statistics.
std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows);

}  // namespace spark
