// SPDX-License-Identifier: Apache-2.0
#include "spark/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "spark/error.hpp"
#include "spark/hashing.hpp"

namespace spark {

RunMode parse_run_mode(std::string_view name) {
  if (name == "default") return RunMode::Default;
  if (name == "random") return RunMode::Random;
  if (name == "annotation-free") return RunMode::AnnotationFree;
  if (name == "directive") return RunMode::Directive;
  if (name == "baseline") return RunMode::Baseline;
  if (name == "naive-rag") return RunMode::NaiveRag;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Default: return "default";
    case RunMode::Random: return "random";
    case RunMode::AnnotationFree: return "annotation-free";
    case RunMode::Directive: return "directive";
    case RunMode::Baseline: return "baseline";
    case RunMode::NaiveRag: return "naive-rag";
  }
  return "default";
}

ModeToggles toggles_for(RunMode mode) {
  switch (mode) {
    case RunMode::Default: return {true, true, true, TemplateKind::Baseline};
    case RunMode::Random: return {true, false, true, TemplateKind::Baseline};
    case RunMode::AnnotationFree: return {true, true, false, TemplateKind::AnnotationFree};
    case RunMode::Directive: return {true, true, true, TemplateKind::Directive};
    case RunMode::Baseline: return {false, false, false, TemplateKind::Baseline};
    case RunMode::NaiveRag: return {true, true, false, TemplateKind::NaiveRag};
  }
  return {};
}

void PipelineConfig::validate() const {
  if (r < 1) throw Error(ErrorCode::InvalidArgument, "r must be >= 1");
  if (ks.empty()) throw Error(ErrorCode::InvalidArgument, "at least one k is required");
  for (auto k : ks) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k values must be >= 1");
  }
  if (!(annotation.epsilon >= 0.0 && annotation.epsilon <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be in [0, 1]");
  }
  if (!(policy.fraction > 0.0 && policy.fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "fraction must be in (0, 1]");
  }
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"mode", to_string(mode)},
          {"policy", policy.name()},
          {"fraction", policy.fraction},
          {"epsilon", annotation.epsilon},
          {"normalizer", to_string(annotation.normalizer)},
          {"trim", annotation.trim_leading},
          {"annotation_message", annotation.message},
          {"r", r},
          {"k", ks},
          {"granularity", to_string(granularity)},
          {"mapper", granularity == Granularity::Block ? "approx-block" : std::string(to_string(granularity))},
          {"seed", seed},
          {"programming_language", programming_language}};
}

namespace {

std::vector<SimilarityHit> random_pick(const KnowledgeBase& kb, std::size_t r, std::uint64_t seed,
                                       const std::string& query_id) {
  std::string seed_text = std::to_string(seed);
  seed_text.push_back('\0');
  seed_text += query_id;
  std::mt19937_64 rng(hashing::fnv1a64(seed_text));
  std::vector<std::string> pool = kb.members;
  const std::size_t take = std::min(r, pool.size());
  std::vector<SimilarityHit> hits;
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
    hits.push_back({pool[i], 0.0});
  }
  return hits;
}

}  // namespace

QueryResult run_query(const TestCase& query, std::span<const float> query_vector, const PipelineInputs& inputs,
                      const PipelineConfig& config, const LabelAccessHook& on_label_access) {
  QueryResult result;
  result.query_id = query.id;
  const ModeToggles mode = toggles_for(config.mode);

  FaultPatternSet patterns;
  std::vector<TestCase> retrieved_cases;
  try {
    if (mode.retrieval) {
      const KnowledgeBase kb = filter(query, inputs.corpus, config.policy);
      if (std::find(kb.members.begin(), kb.members.end(), query.id) != kb.members.end()) {
        throw Error(ErrorCode::Leakage, "knowledge base for '" + query.id + "' contains the query");
      }
      result.kb_size = kb.members.size();
      if (mode.similarity_search) {
        result.retrieval = "similarity";
        result.retrieved = inputs.index.search(query.id, query_vector, kb, config.r);
      } else {
        result.retrieval = "random";
        result.retrieved = random_pick(kb, config.r, config.seed, query.id);
      }
      patterns = retrieve_context(result.retrieved, inputs.corpus, on_label_access);
      result.patterns = patterns.patterns;
      result.unlabeled_hits = patterns.unlabeled;
      if (mode.prompt == TemplateKind::NaiveRag) {
        for (const auto& hit : result.retrieved) retrieved_cases.push_back(inputs.corpus.at(hit.test_id));
      }
    } else {
      result.retrieval = "none";
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Leakage) throw;
    result.hard_failure = true;
    result.error = std::string("retrieval: ") + e.what();
    return result;
  }

  const AnnotatedTest at = annotate(query, mode.annotation ? patterns : FaultPatternSet{}, config.annotation);
  result.annotated = at.annotated;
  result.scores = at.scores;

  PromptContext context;
  if (mode.prompt == TemplateKind::AnnotationFree) context.patterns = patterns;
  if (mode.prompt == TemplateKind::NaiveRag) context.retrieved = std::move(retrieved_cases);

  for (std::size_t k : config.ks) {
    KResult kr;
    kr.k = k;
    kr.prompt_k = std::min(k, query.lines.size());
    try {
      PromptOptions opts;
      opts.kind = mode.prompt;
      opts.k = kr.prompt_k;
      opts.granularity = "line";
      opts.programming_language = config.programming_language;
      const PromptBundle bundle = render_prompt(at, opts, context);
      kr.prompt_chars = bundle.char_count;
      kr.prompt_tokens = bundle.token_count;
      const LlmResponse response = invoke(inputs.client, bundle);
      kr.usage_in = response.prompt_tokens;
      kr.usage_out = response.completion_tokens;
      kr.latency_ms = response.latency_ms;
      try {
        kr.prediction = parse_ranking(response.text, kr.prompt_k, bundle.max_element_id);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Unparseable) throw;
        kr.parse_failed = true;
        kr.error = e.what();
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Leakage) throw;
      kr.error = std::string("llm: ") + e.what();
      result.hard_failure = true;
      if (result.error.empty()) result.error = kr.error;
    }
    result.per_k.push_back(std::move(kr));
  }
  return result;
}

void score_query(QueryResult& result, const TestCase& labeled_query, Granularity granularity) {
  const std::set<int> line_truth(labeled_query.faulty_lines.begin(), labeled_query.faulty_lines.end());
  const UnitMap um = map_units(labeled_query, granularity);
  const std::set<int> unit_truth = lift_ground_truth(labeled_query.faulty_lines, um);
  result.empty_truth = line_truth.empty();
  for (auto& kr : result.per_k) {
    const auto& ids = kr.prediction.element_ids;
    kr.unit_prediction = lift_ranking(ids, um);
    kr.line_scores = metrics::score_at_k(ids, line_truth, kr.k);
    kr.unit_scores = metrics::score_at_k(kr.unit_prediction, unit_truth, kr.k);
  }
}

MetricsReport aggregate(std::span<const QueryResult> results, const std::vector<std::size_t>& ks,
                        Granularity granularity) {
  if (results.empty()) throw Error(ErrorCode::EmptyRun, "no queries to aggregate");
  MetricsReport m;
  m.queries = results.size();
  const std::string unit_name(to_string(granularity));
  const auto n = static_cast<double>(results.size());

  auto add = [](metrics::Scores& acc, const metrics::Scores& s) {
    acc.precision += s.precision;
    acc.recall += s.recall;
    acc.hit += s.hit;
    acc.ap += s.ap;
    acc.rr += s.rr;
  };
  auto divide = [n](metrics::Scores& acc) {
    acc.precision /= n;
    acc.recall /= n;
    acc.hit /= n;
    acc.ap /= n;
    acc.rr /= n;
  };

  double in_sum = 0.0, out_sum = 0.0, ms_sum = 0.0;
  std::size_t calls = 0;
  for (std::size_t k : ks) {
    metrics::Scores line{}, unit{};
    for (const auto& q : results) {
      for (const auto& kr : q.per_k) {
        if (kr.k != k) continue;
        if (kr.line_scores) add(line, *kr.line_scores);
        if (kr.unit_scores) add(unit, *kr.unit_scores);
      }
    }
    divide(line);
    divide(unit);
    m.aggregates[k]["line"] = line;
    if (granularity != Granularity::Line) m.aggregates[k][unit_name] = unit;
  }
  for (const auto& q : results) {
    if (q.hard_failure) ++m.hard_failures;
    if (q.empty_truth) ++m.empty_truth;
    for (const auto& kr : q.per_k) {
      if (kr.parse_failed) ++m.parse_failures;
      if (kr.prediction.has(RankedPrediction::Warning::Short)) ++m.short_predictions;
      if (kr.usage_in == 0 && kr.usage_out == 0) continue;  // the client was never reached
      in_sum += static_cast<double>(kr.usage_in);
      out_sum += static_cast<double>(kr.usage_out);
      ms_sum += kr.latency_ms;
      ++calls;
    }
  }
  if (calls > 0) {
    m.tokens.avg_in = in_sum / static_cast<double>(calls);
    m.tokens.avg_out = out_sum / static_cast<double>(calls);
    m.time.avg_ms = ms_sum / static_cast<double>(calls);
  }
  m.time.sum_ms = ms_sum;
  return m;
}

EvaluationRun leave_one_out(const Corpus& corpus, const EmbeddingIndex& embeddings, LlmClient& client,
                            const PipelineConfig& config, const LabelAccessObserver& observer) {
  config.validate();
  if (corpus.empty()) throw Error(ErrorCode::EmptyRun, "corpus is empty");
  const ExactSimilarityIndex index(embeddings, corpus);
  const PipelineInputs inputs{corpus, index, client};
  const auto& cases = corpus.cases();

  EvaluationRun run;
  run.config = config.to_json();
  run.config["client"] = client.identity();
  run.config["embedder"] = embeddings.embedder_name();
  run.config["dimension"] = embeddings.dimension();
  run.per_query.resize(cases.size());

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> violations{0};
  std::mutex observer_mu;
  std::exception_ptr fatal;
  std::mutex fatal_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      const TestCase& labeled = cases[i];
      TestCase query = labeled;
      query.faulty_lines.clear();
      const LabelAccessHook hook = [&](const std::string& accessed) {
        if (observer) {
          std::lock_guard lock(observer_mu);
          observer(labeled.id, accessed);
        }
        if (accessed == labeled.id) {
          ++violations;
          throw Error(ErrorCode::Leakage, "labels of '" + labeled.id + "' read during its own query");
        }
      };
      QueryResult qr;
      try {
        const EmbeddingRecord* rec = embeddings.find(labeled.id);
        const bool needs_vector = toggles_for(config.mode).similarity_search;
        if (needs_vector && !rec) throw Error(ErrorCode::MissingEmbedding, labeled.id);
        qr = run_query(query, rec ? std::span<const float>(rec->vector) : std::span<const float>(), inputs, config,
                       hook);
      } catch (const Error& e) {
        qr = QueryResult{};
        qr.query_id = labeled.id;
        qr.hard_failure = true;
        qr.error = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        continue;
      }
      score_query(qr, labeled, config.granularity);
      run.per_query[i] = std::move(qr);
    }
  };

  const unsigned threads =
      std::max(1u, std::min({config.parallelism, client.parallelism(), static_cast<unsigned>(cases.size())}));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  std::sort(run.per_query.begin(), run.per_query.end(),
            [](const QueryResult& a, const QueryResult& b) { return a.query_id < b.query_id; });
  run.report = aggregate(run.per_query, config.ks, config.granularity);
  run.leakage_violations = violations.load();
  return run;
}

Distribution distribution(std::vector<double> values) {
  Distribution d;
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  d.min = values.front();
  d.max = values.back();
  double sum = 0.0;
  for (double v : values) sum += v;
  d.mean = sum / static_cast<double>(values.size());
  const std::size_t mid = values.size() / 2;
  d.median = values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
  return d;
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "epsilon") return SweepAxis::Epsilon;
  if (name == "policy") return SweepAxis::Policy;
  if (name == "mode") return SweepAxis::Mode;
  throw Error(ErrorCode::InvalidArgument, "unknown sweep axis '" + std::string(name) + "'");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Epsilon: return "epsilon";
    case SweepAxis::Policy: return "policy";
    case SweepAxis::Mode: return "mode";
  }
  return "epsilon";
}

std::vector<SweepRow> sweep(const Corpus& corpus, const EmbeddingIndex& embeddings, LlmClient& client,
                            const PipelineConfig& base, SweepAxis axis, const std::vector<std::string>& values) {
  if (values.empty()) throw Error(ErrorCode::EmptyAxis, std::string(to_string(axis)) + " axis has no values");
  std::vector<PipelineConfig> configs;
  for (const auto& v : values) {
    PipelineConfig cfg = base;
    switch (axis) {
      case SweepAxis::Epsilon: {
        std::size_t used = 0;
        try {
          cfg.annotation.epsilon = std::stod(v, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != v.size()) throw Error(ErrorCode::InvalidArgument, "bad epsilon '" + v + "'");
        break;
      }
      case SweepAxis::Policy: cfg.policy = FilterPolicy::parse(v, base.policy.fraction); break;
      case SweepAxis::Mode: cfg.mode = parse_run_mode(v); break;
    }
    cfg.validate();
    configs.push_back(std::move(cfg));
  }

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    SweepRow row;
    row.value = values[i];
    row.run = leave_one_out(corpus, embeddings, client, configs[i]);
    std::vector<double> counts, ratios;
    for (const auto& q : row.run.per_query) {
      counts.push_back(static_cast<double>(q.annotated_count()));
      const TestCase* tc = corpus.find(q.query_id);
      ratios.push_back(tc && !tc->lines.empty()
                           ? static_cast<double>(q.annotated_count()) / static_cast<double>(tc->lines.size())
                           : 0.0);
    }
    row.annotated_lines = distribution(counts);
    row.annotated_ratio = distribution(ratios);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace spark
