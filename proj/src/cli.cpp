// SPDX-License-Identifier: Apache-2.0
#include "spark/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "spark/error.hpp"
#include "spark/evaluation.hpp"
#include "spark/file_io.hpp"
#include "spark/http_embedder.hpp"
#include "spark/text.hpp"

namespace spark::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kVersion = "0.1.0";
constexpr std::string_view kPipeline = "spark-pipeline-1";

/// Flag values shared by every subcommand. Names are validated and turned
/// into a PipelineConfig only once a subcommand has been chosen.
struct Options {
  std::string corpus;
  std::string index;
  std::string embedder = "ngram";
  std::size_t dim = 1024;
  std::size_t chunk_len = 8192;

  std::string mode = "default";
  std::string policy = "all";
  double fraction = 0.10;
  double epsilon = 0.05;
  std::string normalizer = "max";
  bool trim = false;
  std::string annotation_message = std::string(kAnnotationMessage);
  std::size_t r = 1;
  std::vector<std::size_t> ks{1, 3, 5, 10};
  std::string granularity = "statement";
  std::uint64_t seed = 0;
  unsigned parallelism = 1;
  std::string language = "Python";

  std::string client = "echo-annotated";
  std::string fixtures;
  std::string record;
  std::string model = "qwen2.5-72b-instruct";
  double temperature = 0.0;
  int retries = 3;
};

PipelineConfig pipeline_config(const Options& o) {
  PipelineConfig cfg;
  cfg.mode = parse_run_mode(o.mode);
  cfg.policy = FilterPolicy::parse(o.policy, o.fraction);
  cfg.annotation.epsilon = o.epsilon;
  cfg.annotation.normalizer = parse_normalizer(o.normalizer);
  cfg.annotation.trim_leading = o.trim;
  if (text::trim(o.annotation_message).empty()) throw Error(ErrorCode::InvalidArgument, "annotation message is empty");
  cfg.annotation.message = o.annotation_message;
  cfg.r = o.r;
  cfg.ks = o.ks;
  cfg.granularity = parse_granularity(o.granularity);
  cfg.seed = o.seed;
  cfg.parallelism = o.parallelism;
  cfg.programming_language = o.language;
  cfg.validate();
  if (o.client != "http" && o.client != "replay" && o.client != "oracle" && o.client != "echo-annotated") {
    throw Error(ErrorCode::InvalidArgument, "unknown client '" + o.client + "'");
  }
  if (o.client == "replay" && o.fixtures.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--client replay needs --fixtures");
  }
  if (o.embedder != "ngram" && o.embedder != "http") {
    throw Error(ErrorCode::InvalidArgument, "unknown embedder '" + o.embedder + "'");
  }
  return cfg;
}

void require_file(const std::string& path, std::string_view what) {
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " path is required");
  if (!fs::exists(path)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " '" + path + "' does not exist");
}

std::unique_ptr<Embedder> make_embedder(const std::string& kind, std::size_t dim, std::size_t chunk_len) {
  if (kind == "http") return std::make_unique<HttpEmbedder>(HttpEmbedder::from_env(dim, chunk_len));
  return std::make_unique<NgramHashEmbedder>(dim, chunk_len);
}

/// Embedder able to reproduce the vectors of `index`.
std::unique_ptr<Embedder> embedder_for(const EmbeddingIndex& index, std::size_t chunk_len) {
  auto e = index.embedder_name().starts_with("http:") ? make_embedder("http", index.dimension(), chunk_len)
                                                       : make_embedder("ngram", index.dimension(), chunk_len);
  if (e->name() != index.embedder_name()) {
    throw Error(ErrorCode::InvalidArgument, "index was built with '" + index.embedder_name() +
                                                "' but the configured embedder is '" + e->name() + "'");
  }
  return e;
}

EmbeddingIndex embeddings_for(const Options& o, const Corpus& corpus) {
  if (!o.index.empty()) {
    require_file(o.index, "index");
    return load_index(o.index);
  }
  return build_index(corpus, *make_embedder(o.embedder, o.dim, o.chunk_len), o.parallelism);
}

std::unique_ptr<LlmClient> make_client(const Options& o, const Corpus* truth_source,
                                       const std::map<std::string, std::vector<int>>& extra_truth = {}) {
  if (o.client == "http") {
    return std::make_unique<HttpChatClient>(HttpChatClient::from_env(o.model, o.temperature, o.retries, o.parallelism));
  }
  if (o.client == "replay") return std::make_unique<ReplayClient>(ReplayClient::from_file(o.fixtures));
  if (o.client == "oracle") {
    std::map<std::string, std::vector<int>> truth = extra_truth;
    if (truth_source) {
      for (const auto& tc : *truth_source) truth.emplace(tc.id, tc.faulty_lines);
    }
    return std::make_unique<OracleClient>(std::move(truth));
  }
  return std::make_unique<EchoAnnotatedClient>(o.annotation_message);
}

std::string id_list(const std::vector<int>& ids) {
  std::string s = "[";
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? ", " : "") + std::to_string(ids[i]);
  return s + "]";
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

// Raw record loading -------------------------------------------------------

struct LoadedRecord {
  std::string source;
  std::optional<RawTestCase> raw;
  std::string error;
};

std::vector<LoadedRecord> load_raw_records(const fs::path& input) {
  std::vector<LoadedRecord> out;
  auto from_json_text = [&](const std::string& text, const std::string& source, const std::string& fallback_id) {
    LoadedRecord rec{source, std::nullopt, {}};
    try {
      rec.raw = raw_from_json(nlohmann::json::parse(text), fallback_id);
    } catch (const nlohmann::json::exception& e) {
      rec.error = e.what();
    } catch (const Error& e) {
      rec.error = e.what();
    }
    out.push_back(std::move(rec));
  };
  auto from_jsonl = [&](const fs::path& path) {
    const auto lines = text::split_lines(io::read_file(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (text::is_blank(lines[i])) continue;
      from_json_text(lines[i], path.string() + ":" + std::to_string(i + 1), "");
    }
  };

  if (fs::is_directory(input)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(input)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".json" || ext == ".jsonl")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      if (f.extension() == ".jsonl") {
        from_jsonl(f);
      } else {
        from_json_text(io::read_file(f), f.string(), f.stem().string());
      }
    }
  } else {
    from_jsonl(input);
  }
  return out;
}

std::vector<std::string> code_lines(const nlohmann::json& j, const std::string& code_key, const std::string& lines_key) {
  if (j.contains(code_key)) {
    if (!j[code_key].is_string()) throw Error(ErrorCode::MalformedRecord, code_key + " must be a string");
    return text::split_lines(j[code_key].get<std::string>());
  }
  if (j.contains(lines_key)) {
    if (!j[lines_key].is_array()) throw Error(ErrorCode::MalformedRecord, lines_key + " must be an array");
    std::vector<std::string> lines;
    for (const auto& l : j[lines_key]) {
      if (!l.is_string()) throw Error(ErrorCode::MalformedRecord, lines_key + " entries must be strings");
      lines.push_back(l.get<std::string>());
    }
    return lines;
  }
  throw Error(ErrorCode::MalformedRecord, "record has neither '" + code_key + "' nor '" +
                                              lines_key + "'");
}

// Subcommands ----------------------------------------------------------------

int cmd_ingest(const std::string& input, const std::string& out_path, std::ostream& out, std::ostream& err) {
  require_file(input, "input");
  if (out_path.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
  const auto records = load_raw_records(input);
  if (records.empty()) {
    err << "error: no records found in '" << input << "'\n";
    return kExitFailures;
  }

  Corpus corpus;
  std::size_t errors = 0, blank_removed = 0;
  for (const auto& rec : records) {
    if (!rec.raw) {
      err << "error: " << rec.source << ": " << rec.error << "\n";
      ++errors;
      continue;
    }
    try {
      TestCase tc = preprocess(*rec.raw);
      blank_removed += rec.raw->raw_lines.size() - tc.lines.size();
      corpus.add(std::move(tc));
    } catch (const Error& e) {
      err << "error: " << rec.source << ": " << e.what() << "\n";
      ++errors;
    }
  }
  const Corpus unique = dedup(corpus);
  for (const auto& tc : corpus) {
    if (!unique.find(tc.id)) out << "notice: dropped duplicate '" << tc.id << "'\n";
  }
  if (!unique.empty()) save_corpus(out_path, unique);
  out << "total: " << records.size() << "\n"
      << "ingested: " << unique.size() << "\n"
      << "deduped: " << corpus.size() - unique.size() << "\n"
      << "blank lines removed: " << blank_removed << "\n"
      << "errors: " << errors << "\n";
  if (unique.empty()) {
    err << "error: no valid records\n";
    return kExitFailures;
  }
  return errors ? kExitFailures : kExitOk;
}

int cmd_label(const Options& o, const std::string& repaired_dir, const std::string& out_path, bool drop_outliers,
              const std::string& report_path, std::ostream& out, std::ostream& err) {
  require_file(o.corpus, "corpus");
  require_file(repaired_dir, "repaired directory");
  if (out_path.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
  const Corpus corpus = load_corpus(o.corpus);

  std::map<std::string, fs::path> by_stem;
  for (const auto& entry : fs::directory_iterator(repaired_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto& p = entry.path();
    // <id>.json wins over other extensions with the same stem.
    if (p.extension() == ".json" || !by_stem.count(p.stem().string())) by_stem[p.stem().string()] = p;
    by_stem.emplace(p.filename().string(), p);
  }

  Corpus labeled;
  std::vector<FaultLabel> labels;
  std::size_t missing = 0;
  for (const auto& tc : corpus) {
    auto it = by_stem.find(tc.id);
    if (it == by_stem.end()) {
      err << "error: " << Error(ErrorCode::MissingRepairedVersion, tc.id).what() << "\n";
      ++missing;
      continue;
    }
    RawTestCase raw;
    raw.id = tc.id;
    raw.error_message = tc.error_message;
    raw.failure_ts = tc.failure_ts.text;
    const std::string content = io::read_file(it->second);
    if (it->second.extension() == ".json") {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(content);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, it->second.string() + ": " + e.what());
      }
      raw.raw_lines = code_lines(j, "code", "lines");
    } else {
      raw.raw_lines = text::split_lines(content);
    }
    TestCase repaired;
    try {
      repaired = preprocess(raw);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllLinesBlank) throw;
      repaired = tc;
      repaired.lines.clear();
    }
    FaultLabel label = label_from_diff(tc, repaired);
    TestCase copy = tc;
    copy.faulty_lines = label.faulty_lines;
    labels.push_back(std::move(label));
    labeled.add(std::move(copy));
  }
  if (missing) return kExitFailures;

  const auto outliers = flag_outliers(labels);
  nlohmann::json report{{"cases", labels.size()}, {"outliers", outliers}, {"dropped", drop_outliers}};
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& l : labels) counts[l.test_id] = l.modified_count;
  report["modified_counts"] = counts;

  Corpus result;
  const std::set<std::string> flagged(outliers.begin(), outliers.end());
  for (const auto& tc : labeled) {
    if (drop_outliers && flagged.count(tc.id)) continue;
    result.add(tc);
  }
  save_corpus(out_path, result);
  if (!report_path.empty()) io::write_file_atomic(report_path, report.dump(2) + "\n");

  std::size_t unlabeled = 0;
  for (const auto& tc : result) unlabeled += tc.labeled() ? 0 : 1;
  out << "labeled: " << result.size() << "\n"
      << "without faulty lines: " << unlabeled << "\n"
      << "outliers: " << outliers.size() << (drop_outliers ? " (dropped)" : "") << "\n";
  for (const auto& id : outliers) out << "  " << id << " (" << counts[id].get<std::size_t>() << " lines)\n";
  return kExitOk;
}

int cmd_index(const Options& o, bool force, const std::string& json_debug, std::ostream& out, std::ostream& err) {
  require_file(o.corpus, "corpus");
  if (o.index.empty()) throw Error(ErrorCode::InvalidArgument, "--index is required");
  const auto embedder = make_embedder(o.embedder, o.dim, o.chunk_len);
  if (fs::exists(o.index) && !force) {
    const EmbeddingIndex existing = load_index(o.index);
    if (existing.dimension() != embedder->dimension() || existing.embedder_name() != embedder->name()) {
      err << "error: " << o.index << " holds " << existing.embedder_name() << " d=" << existing.dimension()
          << " vectors; configured " << embedder->name() << " d=" << embedder->dimension()
          << " (use --force to replace)\n";
      return kExitUsage;
    }
  }
  const Corpus corpus = load_corpus(o.corpus);
  const EmbeddingIndex index = build_index(corpus, *embedder, o.parallelism);
  save_index(o.index, index);
  if (!json_debug.empty()) io::write_file_atomic(json_debug, index_to_json(index).dump(2) + "\n");
  out << "indexed: " << index.size() << " cases with " << index.embedder_name() << " d=" << index.dimension() << "\n";
  return kExitOk;
}

int cmd_localize(const Options& o, const std::string& query_path, const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
  const PipelineConfig cfg = pipeline_config(o);
  require_file(o.corpus, "corpus");
  require_file(query_path, "query");
  const Corpus corpus = load_corpus(o.corpus);

  nlohmann::json qj;
  try {
    qj = nlohmann::json::parse(io::read_file(query_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, query_path + ": " + e.what());
  }
  TestCase labeled = preprocess(raw_from_json(qj, fs::path(query_path).stem().string()));
  if (qj.contains("faulty_lines")) labeled.faulty_lines = qj["faulty_lines"].get<std::vector<int>>();
  TestCase query = labeled;
  query.faulty_lines.clear();

  const EmbeddingIndex embeddings = embeddings_for(o, corpus);
  const auto embedder = embedder_for(embeddings, o.chunk_len);
  const EmbeddingRecord qrec = embed_test(query, *embedder);
  const ExactSimilarityIndex index(embeddings, corpus);
  auto client = make_client(o, &corpus, {{labeled.id, labeled.faulty_lines}});
  const PipelineInputs inputs{corpus, index, *client};

  QueryResult result = run_query(query, qrec.vector, inputs, cfg);
  if (labeled.labeled()) score_query(result, labeled, cfg.granularity);

  out << "query: " << result.query_id << "\n"
      << "knowledge base: " << result.kb_size << " cases (" << cfg.policy.name() << ")\n";
  if (result.retrieved.empty() || result.patterns.empty()) {
    out << "no retrieval context: baseline prompt\n";
  }
  for (const auto& hit : result.retrieved) {
    out << "retrieved: " << hit.test_id << " score=" << fixed(hit.score) << "\n";
  }
  out << "annotated lines: " << id_list(result.annotated) << "\n";
  const UnitMap um = map_units(query, cfg.granularity);
  for (const auto& kr : result.per_k) {
    out << "k=" << kr.k << ": " << id_list(kr.prediction.element_ids);
    if (cfg.granularity != Granularity::Line) {
      out << " " << to_string(cfg.granularity) << "s " << id_list(lift_ranking(kr.prediction.element_ids, um));
    }
    out << " tokens in=" << kr.usage_in << " out=" << kr.usage_out << "\n";
    if (!kr.error.empty()) err << "error: k=" << kr.k << ": " << kr.error << "\n";
  }
  if (!out_path.empty()) io::write_file_atomic(out_path, to_json(result).dump(2) + "\n");
  if (result.hard_failure) {
    err << "error: " << result.error << "\n";
    return kExitFailures;
  }
  return kExitOk;
}

void print_summary(const MetricsReport& m, std::ostream& out) {
  out << "queries: " << m.queries << "  hard failures: " << m.hard_failures << "  parse failures: "
      << m.parse_failures << "\n";
  out << "k    granularity  precision  recall  hit     map     mrr\n";
  for (const auto& [k, by_gran] : m.aggregates) {
    for (const auto& [name, s] : by_gran) {
      out << std::left << std::setw(5) << k << std::setw(13) << name << std::setw(11) << fixed(s.precision)
          << std::setw(8) << fixed(s.recall) << std::setw(8) << fixed(s.hit) << std::setw(8) << fixed(s.ap)
          << fixed(s.rr) << "\n";
    }
  }
  out << std::right << "avg tokens in=" << fixed(m.tokens.avg_in, 1) << " out=" << fixed(m.tokens.avg_out, 1) << "\n";
}

int cmd_evaluate(const Options& o, const std::string& out_path, const std::string& csv_path, std::ostream& out) {
  const PipelineConfig cfg = pipeline_config(o);
  require_file(o.corpus, "corpus");
  if (!o.fixtures.empty()) require_file(o.fixtures, "fixtures");
  const Corpus corpus = load_corpus(o.corpus);
  const EmbeddingIndex embeddings = embeddings_for(o, corpus);
  auto inner = make_client(o, &corpus);
  std::optional<RecordingClient> recorder;
  LlmClient* client = inner.get();
  if (!o.record.empty()) client = &recorder.emplace(*inner);

  const EvaluationRun run = leave_one_out(corpus, embeddings, *client, cfg);
  const std::string json = to_json(run).dump(2) + "\n";
  if (!out_path.empty()) {
    io::write_file_atomic(out_path, json);
    print_summary(run.report, out);
  } else {
    out << json;
  }
  if (!csv_path.empty()) io::write_file_atomic(csv_path, report_csv(run.report));
  if (recorder) recorder->save(o.record);
  return run.report.hard_failures ? kExitFailures : kExitOk;
}

int cmd_sweep(const Options& o, const std::string& axis_name, const std::vector<std::string>& values,
              const std::string& out_path, const std::string& csv_path, std::ostream& out) {
  const PipelineConfig cfg = pipeline_config(o);
  const SweepAxis axis = parse_sweep_axis(axis_name);
  if (values.empty()) throw Error(ErrorCode::EmptyAxis, "--values is required");
  require_file(o.corpus, "corpus");
  if (!o.fixtures.empty()) require_file(o.fixtures, "fixtures");
  const Corpus corpus = load_corpus(o.corpus);
  const EmbeddingIndex embeddings = embeddings_for(o, corpus);
  auto inner = make_client(o, &corpus);
  std::optional<RecordingClient> recorder;
  LlmClient* client = inner.get();
  if (!o.record.empty()) client = &recorder.emplace(*inner);

  const auto rows = sweep(corpus, embeddings, *client, cfg, axis, values);
  const std::string json = sweep_to_json(axis, rows).dump(2) + "\n";
  const std::string csv = sweep_csv(axis, rows);
  if (!out_path.empty()) {
    io::write_file_atomic(out_path, json);
    out << csv;
  } else {
    out << json;
  }
  if (!csv_path.empty()) io::write_file_atomic(csv_path, csv);
  if (recorder) recorder->save(o.record);
  std::size_t failures = 0;
  for (const auto& row : rows) failures += row.run.report.hard_failures;
  return failures ? kExitFailures : kExitOk;
}

}  // namespace

std::string version_string() {
  return "spark " + std::string(kVersion) + " (pipeline " + std::string(kPipeline) + "; embedder " +
         NgramHashEmbedder().name() + " d=1024; tokenizer " + HeuristicTokenizer().name() +
         "; block mapper approx-block)";
}

RawTestCase raw_from_json(const nlohmann::json& j, const std::string& fallback_id) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "record is not an object");
  RawTestCase raw;
  raw.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : fallback_id;
  if (raw.id.empty()) throw Error(ErrorCode::MalformedRecord, "record has no id");
  raw.raw_lines = code_lines(j, "code", "lines");
  for (const char* key : {"error_message", "failure_ts"}) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorCode::MalformedRecord, std::string("'") + key + "' must be a string");
    }
  }
  raw.error_message = j["error_message"].get<std::string>();
  raw.failure_ts = j["failure_ts"].get<std::string>();
  if (j.contains("meta")) {
    if (!j["meta"].is_object()) throw Error(ErrorCode::MalformedRecord, "'meta' must be an object");
    raw.meta = j["meta"];
  }
  if (j.contains("repaired_code") || j.contains("repaired_lines")) {
    raw.repaired_lines = code_lines(j, "repaired_code", "repaired_lines");
  }
  return raw;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Retrieval-augmented fault localization for test scripts", "spark"};
  app.set_version_flag("--version", version_string());
  app.set_config("--config", "", "Read option values from a TOML-style file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--corpus", o.corpus, "Corpus JSONL file");
  app.add_option("--index", o.index, "Embedding sidecar file");
  app.add_option("--embedder", o.embedder, "ngram|http")->capture_default_str();
  app.add_option("--dim", o.dim, "Embedding dimension")->capture_default_str();
  app.add_option("--chunk-len,--chunk_len", o.chunk_len, "Embedder chunk window in characters")->capture_default_str();
  app.add_option("--mode", o.mode, "default|random|annotation-free|directive|baseline|naive-rag")
      ->capture_default_str();
  app.add_option("--policy", o.policy, "all|all-preceding|closest|closest-preceding")->capture_default_str();
  app.add_option("--fraction", o.fraction, "Retention fraction of the closest policies")->capture_default_str();
  app.add_option("--epsilon", o.epsilon, "Annotation threshold")->capture_default_str();
  app.add_option("--normalizer", o.normalizer, "max|sum|align")->capture_default_str();
  app.add_flag("--trim", o.trim, "Also strip leading whitespace before comparing lines");
  app.add_option("--annotation-message,--annotation_message", o.annotation_message, "Comment appended to annotated lines");
  app.add_option("--r", o.r, "Number of retrieved cases")->capture_default_str();
  app.add_option("--k", o.ks, "Cutoffs, comma separated")->delimiter(',')->capture_default_str();
  app.add_option("--granularity", o.granularity, "line|statement|block")->capture_default_str();
  app.add_option("--seed", o.seed, "Seed of random retrieval")->capture_default_str();
  app.add_option("--parallelism", o.parallelism, "Concurrent queries")->capture_default_str();
  app.add_option("--language", o.language, "Language named in prompts")->capture_default_str();
  app.add_option("--client", o.client, "http|replay|oracle|echo-annotated")->capture_default_str();
  app.add_option("--fixtures", o.fixtures, "Replay fixture file");
  app.add_option("--record", o.record, "Save every exchange as replay fixtures");
  app.add_option("--model", o.model, "Model name sent to the chat endpoint")->capture_default_str();
  app.add_option("--temperature", o.temperature, "Sampling temperature")->capture_default_str();
  app.add_option("--retries", o.retries, "Retries on transient HTTP failures")->capture_default_str();

  std::string input, out_path, csv_path, repaired, report_path, query, json_debug, axis;
  std::vector<std::string> values;
  bool drop_outliers = false, force = false;

  auto* ingest = app.add_subcommand("ingest", "Build a corpus from raw records");
  ingest->add_option("input", input, "Directory of *.json records or a JSONL file")->required();
  ingest->add_option("--out", out_path, "Corpus file to write")->required();

  auto* label = app.add_subcommand("label", "Label faulty lines from repaired versions");
  label->add_option("--repaired", repaired, "Directory with <id>.json or <id>.<ext> repaired scripts")->required();
  label->add_option("--out", out_path, "Labeled corpus file to write")->required();
  label->add_flag("--drop-outliers", drop_outliers, "Remove cases with outlying modification counts");
  label->add_option("--report", report_path, "Outlier report JSON");

  auto* index = app.add_subcommand("index", "Embed every corpus case");
  index->add_flag("--force", force, "Replace a sidecar built with another embedder");
  index->add_option("--json-debug", json_debug, "Also write the vectors as JSON");

  auto* localize = app.add_subcommand("localize", "Rank the lines of one failing test");
  localize->add_option("--query", query, "Query record JSON")->required();
  localize->add_option("--out", out_path, "Result JSON");

  auto* evaluate = app.add_subcommand("evaluate", "Leave-one-out evaluation over the corpus");
  evaluate->add_option("--out", out_path, "Report JSON");
  evaluate->add_option("--csv", csv_path, "Aggregate metrics CSV");

  auto* sweep_cmd = app.add_subcommand("sweep", "Leave-one-out evaluation per parameter value");
  sweep_cmd->add_option("--axis", axis, "epsilon|policy|mode")->required();
  sweep_cmd->add_option("--values", values, "Values, comma separated")->delimiter(',')->required();
  sweep_cmd->add_option("--out", out_path, "Sweep JSON");
  sweep_cmd->add_option("--csv", csv_path, "Sweep CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(input, out_path, out, err);
    if (*label) return cmd_label(o, repaired, out_path, drop_outliers, report_path, out, err);
    if (*index) {
      pipeline_config(o);
      return cmd_index(o, force, json_debug, out, err);
    }
    if (*localize) return cmd_localize(o, query, out_path, out, err);
    if (*evaluate) return cmd_evaluate(o, out_path, csv_path, out);
    if (*sweep_cmd) return cmd_sweep(o, axis, values, out_path, csv_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    const bool usage = e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::EmptyAxis;
    return usage ? kExitUsage : kExitFailures;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailures;
  }
  return kExitUsage;
}

}  // namespace spark::cli
