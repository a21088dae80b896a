#pragma once

// Experiment execution behind the command-line subcommands: run, compare,
// oracle-check and paths. Everything here is in-process so tests can drive it.

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgdpd/classifier.hpp"
#include "cgdpd/dataset.hpp"
#include "cgdpd/decoder.hpp"
#include "cgdpd/http_backend.hpp"
#include "cgdpd/metrics.hpp"
#include "cgdpd/report.hpp"

namespace cgdpd::runner {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kBackendFailure = 3, kDataError = 4 };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BackendFailure : public std::runtime_error {
 public:
  BackendFailure(const std::string& what, std::string example_id)
      : std::runtime_error(what), example_id_(std::move(example_id)) {}
  const std::string& example_id() const noexcept { return example_id_; }

 private:
  std::string example_id_;
};

enum class Method { Single, Cgdpd };

constexpr std::string_view to_string(Method m) noexcept { return m == Method::Single ? "single" : "cgdpd"; }

enum class BackendKind { Oracle, Noisy, Http };

constexpr std::string_view to_string(BackendKind k) noexcept {
  switch (k) {
    case BackendKind::Oracle: return "oracle";
    case BackendKind::Noisy: return "noisy";
    case BackendKind::Http: return "http";
  }
  return "?";
}

struct SyntheticSpec {
  std::size_t n = 0;
  double decisive_fraction = 0.5;
};

struct BackendSpec {
  BackendKind kind = BackendKind::Oracle;
  NoiseModel noise;  // seed is taken from RunConfig::seed
  http::HttpConfig http;
};

struct RunConfig {
  std::optional<std::string> dataset_path;
  std::optional<SyntheticSpec> synthetic;
  dataset::FieldMap field_map;
  BackendSpec backend;
  Method method = Method::Cgdpd;
  NegatorKind negator = NegatorKind::Formula;
  double unknown_penalty = 0.5;
  oracle::OracleConfig oracle;
  std::optional<std::size_t> max_examples;  // upper bound, applied after loading
  std::uint64_t seed = 0;
  bool cache = true;
  std::size_t bootstrap_samples = 10000;
  std::optional<std::string> baseline_report;
  bool keep_going = false;
  bool strict = false;

  // Execution-only settings; they never change results and are reported
  // under "runtime".
  unsigned concurrency = 1;
  std::optional<std::string> out;
  std::optional<std::string> csv_out;

  void validate() const {
    if (dataset_path.has_value() == synthetic.has_value()) throw ConfigError("exactly one of --dataset or --synthetic is required");
    if (synthetic) {
      if (synthetic->n < 1) throw ConfigError("synthetic size must be >= 1");
      if (!(synthetic->decisive_fraction >= 0.0 && synthetic->decisive_fraction <= 1.0))
        throw ConfigError("synthetic decisive fraction must lie in [0,1]");
    }
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (bootstrap_samples < 1) throw ConfigError("bootstrap samples must be >= 1");
    if (max_examples && *max_examples < 1) throw ConfigError("max_examples must be >= 1");
    try {
      oracle.validate();
      ClassifierConfig{unknown_penalty, 0.0}.validate();
      if (backend.kind == BackendKind::Noisy) backend.noise.validate();
      if (backend.kind == BackendKind::Http) backend.http.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

inline json config_echo(const RunConfig& c) {
  json j;
  if (c.dataset_path) j["dataset"] = *c.dataset_path;
  if (c.synthetic) j["synthetic"] = {{"n", c.synthetic->n}, {"decisive_fraction", c.synthetic->decisive_fraction}};
  j["backend"] = {{"kind", std::string(to_string(c.backend.kind))}};
  if (c.backend.kind == BackendKind::Noisy)
    j["backend"]["noise"] = {{"u", c.backend.noise.epistemic_unknown_prob},
                             {"f", c.backend.noise.flip_prob},
                             {"g", c.backend.noise.genuine_decide_prob}};
  if (c.backend.kind == BackendKind::Http)
    j["backend"]["http"] = {{"endpoint", c.backend.http.endpoint},
                            {"model", c.backend.http.model},
                            {"retries", c.backend.http.retries},
                            {"timeout_seconds", c.backend.http.timeout_seconds},
                            {"max_in_flight", c.backend.http.max_in_flight},
                            {"token_env", c.backend.http.token_env}};
  j["method"] = std::string(to_string(c.method));
  j["negator"] = std::string(to_string(c.negator));
  j["unknown_penalty"] = c.unknown_penalty;
  j["temperature"] = 0.0;
  j["oracle"] = {{"unique_names", c.oracle.unique_names},
                 {"max_ground_atoms", c.oracle.max_ground_atoms},
                 {"max_domain_size", c.oracle.max_domain_size}};
  j["max_examples"] = c.max_examples ? json(*c.max_examples) : json(nullptr);
  j["seed"] = c.seed;
  j["cache"] = c.cache;
  j["bootstrap_samples"] = c.bootstrap_samples;
  j["keep_going"] = c.keep_going;
  j["strict"] = c.strict;
  if (c.baseline_report) j["baseline_report"] = *c.baseline_report;
  return j;
}

struct LoadedData {
  std::vector<dataset::Example> examples;
  dataset::DatasetStats stats;
};

inline LoadedData load_examples(const RunConfig& cfg) {
  LoadedData d;
  if (cfg.synthetic) {
    d.examples = dataset::generate_synthetic(cfg.synthetic->n, cfg.synthetic->decisive_fraction, cfg.seed, cfg.oracle);
    d.stats.n = d.examples.size();
    for (const auto& ex : d.examples) ++d.stats.label_counts[ex.gold];
  } else {
    dataset::LoadOptions opts;
    opts.fields = cfg.field_map;
    opts.strict = cfg.strict;
    opts.diagnostics = &std::cerr;
    auto r = dataset::load_folio_jsonl(*cfg.dataset_path, opts);
    d.examples = std::move(r.examples);
    d.stats = std::move(r.stats);
  }
  if (cfg.max_examples && d.examples.size() > *cfg.max_examples) d.examples.resize(*cfg.max_examples);
  return d;
}

struct BackendHandle {
  std::shared_ptr<Backend> backend;
  std::shared_ptr<CachedBackend> cache;  // null when the backend is unwrapped
};

inline BackendHandle make_backend(const RunConfig& cfg) {
  BackendHandle h;
  switch (cfg.backend.kind) {
    case BackendKind::Oracle:
      h.cache = std::make_shared<CachedBackend>(std::make_shared<OracleBackend>(cfg.oracle), cfg.cache);
      h.backend = h.cache;
      break;
    case BackendKind::Noisy: {
      NoiseModel noise = cfg.backend.noise;
      noise.seed = cfg.seed;
      h.backend = std::make_shared<NoisyBackend>(noise, cfg.oracle);
      break;
    }
    case BackendKind::Http: {
      http::HttpConfig hc = cfg.backend.http;
      hc.classifier.unknown_penalty = cfg.unknown_penalty;
      try {
        h.cache = std::make_shared<CachedBackend>(std::make_shared<http::HttpBackend>(hc), cfg.cache);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      h.backend = h.cache;
      break;
    }
  }
  return h;
}

struct Outcome {
  metrics::PredictionRecord record;
  std::optional<Trace> trace;
};

inline Outcome decode_one(Backend& backend, const RunConfig& cfg, const dataset::Example& ex) {
  Outcome o;
  o.record.example_id = ex.id;
  o.record.gold = ex.gold;
  const Decision d = cfg.method == Method::Single ? decide_single(backend, ex.problem(), ex.hypothesis)
                                                  : decide_cgdpd(backend, cfg.negator, ex.problem(), ex.hypothesis);
  o.record.predicted = d.label;
  o.record.calls = d.trace.calls;
  o.record.stage = d.trace.stage;
  o.trace = d.trace;
  return o;
}

// Decodes every example on a bounded pool. Output order follows example
// order regardless of scheduling.
inline std::vector<Outcome> decode_all(Backend& backend, const RunConfig& cfg, std::span<const dataset::Example> examples) {
  std::vector<Outcome> out(examples.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex err_mu;
  std::optional<std::pair<std::size_t, std::string>> first_error;

  auto worker = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= examples.size()) return;
      try {
        out[i] = decode_one(backend, cfg, examples[i]);
      } catch (const DecodeError& e) {
        if (!cfg.keep_going) {
          std::lock_guard lock(err_mu);
          if (!first_error || i < first_error->first) first_error = {i, e.what()};
          abort = true;
          return;
        }
        auto& r = out[i].record;
        r.example_id = examples[i].id;
        r.gold = examples[i].gold;
        r.predicted = Label::Unknown;
        r.calls = std::max(1, e.partial().calls);
        r.stage = e.partial().stage;
        r.error = e.what();
        out[i].trace = e.partial();
      }
    }
  };

  const unsigned workers = std::max(1U, std::min<unsigned>(cfg.concurrency, static_cast<unsigned>(std::max<std::size_t>(1, examples.size()))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (first_error) throw BackendFailure(first_error->second, examples[first_error->first].id);
  return out;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dataset::FileNotFound("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw report::ReportError("'" + path + "' is not valid JSON: " + e.what());
  }
}

struct LoadedReport {
  json document;
  std::vector<metrics::PredictionRecord> records;
};

// Parses a run report and checks that its stored metrics are exactly what its
// records produce.
inline LoadedReport parse_report(json doc) {
  if (!doc.is_object() || doc.value("schema", "") != std::string(report::kReportSchema))
    throw report::ReportError("not a " + std::string(report::kReportSchema) + " document");
  LoadedReport r;
  for (const auto& e : doc.at("records")) r.records.push_back(report::record_from_json(e));
  const json recomputed = report::to_json(metrics::compute_metrics(r.records));
  if (recomputed != doc.at("metrics")) throw report::ReportError("stored metrics do not match the embedded records");
  r.document = std::move(doc);
  return r;
}

inline LoadedReport load_report(const std::string& path) { return parse_report(read_json(path)); }

inline json compare_runs(std::span<const metrics::PredictionRecord> a, std::span<const metrics::PredictionRecord> b,
                         std::size_t resamples, std::uint64_t seed, unsigned threads = 1) {
  json deltas = json::array();
  for (const auto stat : {metrics::Statistic::Accuracy, metrics::Statistic::UnknownRate,
                          metrics::Statistic::EpistemicUnknownRate}) {
    try {
      deltas.push_back(report::to_json(metrics::paired_bootstrap(a, b, stat, resamples, seed, threads)));
    } catch (const metrics::EmptyInput&) {
      deltas.push_back({{"statistic", std::string(to_string(stat))}, {"undefined", true}});
    }
  }
  return {{"deltas", deltas}, {"diff", report::to_json(metrics::diff_report(a, b))}};
}

// `run`: decodes the dataset and builds the report document.
inline json cmd_run(const RunConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = utc_timestamp();

  std::optional<LoadedReport> baseline;
  if (cfg.baseline_report) baseline = load_report(*cfg.baseline_report);

  LoadedData data = load_examples(cfg);
  if (data.examples.empty()) throw dataset::MalformedLine("dataset contains no loadable examples");
  BackendHandle backend = make_backend(cfg);
  std::vector<Outcome> outcomes = decode_all(*backend.backend, cfg, data.examples);

  std::vector<metrics::PredictionRecord> records;
  records.reserve(outcomes.size());
  for (const auto& o : outcomes) records.push_back(o.record);

  json doc;
  doc["schema"] = std::string(report::kReportSchema);
  doc["config"] = config_echo(cfg);
  doc["dataset_stats"] = report::to_json(data.stats);

  if (baseline) {
    std::unordered_map<std::string, Label> base_pred;
    for (const auto& r : baseline->records) base_pred.emplace(r.example_id, r.predicted);
    for (auto& r : records)
      if (const auto it = base_pred.find(r.example_id); it != base_pred.end()) r.changed_vs_baseline = it->second != r.predicted;
    doc["comparison"] = compare_runs(baseline->records, records, cfg.bootstrap_samples, cfg.seed, cfg.concurrency);
  }

  json recs = json::array();
  std::size_t total_calls = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    json e = report::to_json(records[i]);
    if (outcomes[i].trace) e["trace"] = report::to_json(*outcomes[i].trace);
    e["hypothesis"] = data.examples[i].hypothesis_text;
    recs.push_back(std::move(e));
    total_calls += static_cast<std::size_t>(records[i].calls);
  }
  const auto m = metrics::compute_metrics(records);
  doc["metrics"] = report::to_json(m);
  doc["confusion"] = report::to_json(metrics::confusion(records));
  doc["totals"] = {{"examples", records.size()}, {"algorithmic_calls", total_calls}};
  doc["records"] = std::move(recs);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  doc["runtime"] = {
      {"started_at", started_at},
      {"wall_clock_seconds", wall},
      {"concurrency", cfg.concurrency},
      {"upstream_invocations", backend.cache ? json(backend.cache->upstream_invocations()) : json(total_calls)},
  };
  return doc;
}

inline void write_csv(const std::string& path, const json& report_doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "id,gold,predicted,calls,stage,error\n";
  for (const auto& r : report_doc.at("records")) {
    std::string err = r.value("error", "");
    for (auto& ch : err)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    out << r.at("id").get<std::string>() << ',' << r.at("gold").get<std::string>() << ','
        << r.at("predicted").get<std::string>() << ',' << r.at("calls").get<int>() << ','
        << r.at("stage").get<std::string>() << ',' << err << '\n';
  }
}

inline json cmd_compare(const std::string& report_a, const std::string& report_b, std::size_t resamples,
                        std::uint64_t seed, unsigned threads = 1) {
  const auto a = load_report(report_a);
  const auto b = load_report(report_b);
  json doc = compare_runs(a.records, b.records, resamples, seed, threads);
  doc["schema"] = std::string(report::kComparisonSchema);
  doc["a"] = report_a;
  doc["b"] = report_b;
  return doc;
}

inline json cmd_oracle_check(const RunConfig& cfg) {
  if (cfg.dataset_path.has_value() == cfg.synthetic.has_value())
    throw ConfigError("exactly one of --dataset or --synthetic is required");
  LoadedData data = load_examples(cfg);
  const auto stats = dataset::validate_with_oracle(data.examples, cfg.oracle, data.stats);
  return {{"schema", "cgdpd-oracle-check/1"}, {"stats", report::to_json(stats)}};
}

inline json cmd_paths() {
  json rows = json::array();
  for (const auto& r : decision_path_enumeration()) rows.push_back(report::to_json(r));
  return {{"schema", "cgdpd-paths/1"}, {"rows", rows}};
}

}  // namespace cgdpd::runner
