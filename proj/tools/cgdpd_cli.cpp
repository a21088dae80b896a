#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cgdpd/runner.hpp"

namespace {

using cgdpd::runner::ConfigError;
using nlohmann::json;

double parse_probability(std::string_view text, std::string_view key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError("noise parameter '" + std::string(key) + "' is not a number: " + std::string(text));
  return v;
}

// oracle | noisy:u=0.5,f=0,g=0 | http:URL
cgdpd::runner::BackendSpec parse_backend(const std::string& spec) {
  cgdpd::runner::BackendSpec b;
  if (spec == "oracle") return b;
  if (spec.starts_with("http:")) {
    b.kind = cgdpd::runner::BackendKind::Http;
    b.http.endpoint = spec.substr(5);
    return b;
  }
  if (spec == "noisy" || spec.starts_with("noisy:")) {
    b.kind = cgdpd::runner::BackendKind::Noisy;
    std::string_view rest = spec.size() > 6 ? std::string_view(spec).substr(6) : std::string_view{};
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw ConfigError("noise parameter must be key=value: " + std::string(item));
      const auto key = item.substr(0, eq);
      const double v = parse_probability(item.substr(eq + 1), key);
      if (key == "u") b.noise.epistemic_unknown_prob = v;
      else if (key == "f") b.noise.flip_prob = v;
      else if (key == "g") b.noise.genuine_decide_prob = v;
      else throw ConfigError("unknown noise parameter '" + std::string(key) + "'");
    }
    return b;
  }
  throw ConfigError("unknown backend '" + spec + "'");
}

void apply_http_config(cgdpd::http::HttpConfig& hc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open backend config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("backend config is not valid JSON: " + std::string(e.what()));
  }
  if (j.contains("endpoint")) hc.endpoint = j["endpoint"].get<std::string>();
  if (j.contains("model")) hc.model = j["model"].get<std::string>();
  if (j.contains("token_env")) hc.token_env = j["token_env"].get<std::string>();
  if (j.contains("timeout_seconds")) hc.timeout_seconds = j["timeout_seconds"].get<double>();
  if (j.contains("retries")) hc.retries = j["retries"].get<int>();
  if (j.contains("max_in_flight")) hc.max_in_flight = j["max_in_flight"].get<std::size_t>();
  if (j.contains("response_pointer")) hc.response_pointer = j["response_pointer"].get<std::string>();
  if (j.contains("templates_dir")) hc.templates_dir = j["templates_dir"].get<std::string>();
}

cgdpd::dataset::FieldMap parse_field_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field map '" + path + "'");
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("field map must be a JSON object");
  cgdpd::dataset::FieldMap m;
  if (j.contains("premises")) m.premises = j["premises"].get<std::string>();
  if (j.contains("conclusion")) m.conclusion = j["conclusion"].get<std::string>();
  if (j.contains("label")) m.label = j["label"].get<std::string>();
  if (j.contains("id")) m.id = j["id"].get<std::string>();
  return m;
}

void emit(const json& doc, const std::optional<std::string>& out) {
  if (out) cgdpd::runner::write_json(*out, doc);
  else std::cout << doc.dump(2) << "\n";
}

struct Args {
  std::string dataset;
  std::string synthetic;
  std::string backend = "oracle";
  std::string backend_config;
  std::string method = "cgdpd";
  std::string negator = "formula";
  std::string field_map;
  std::string baseline;
  std::string out;
  std::string csv;
  double unknown_penalty = 0.5;
  std::size_t max_examples = 0;
  std::uint64_t seed = 0;
  unsigned concurrency = 1;
  std::size_t bootstrap_samples = 10000;
  bool keep_going = false;
  bool strict = false;
  bool no_cache = false;
  bool no_unique_names = false;
  std::size_t max_ground_atoms = 20;
  std::size_t max_domain_size = 8;
};

cgdpd::runner::RunConfig to_config(const Args& a) {
  cgdpd::runner::RunConfig c;
  if (!a.dataset.empty()) c.dataset_path = a.dataset;
  if (!a.synthetic.empty()) {
    const auto colon = a.synthetic.find(':');
    cgdpd::runner::SyntheticSpec s;
    try {
      s.n = std::stoul(a.synthetic.substr(0, colon));
      if (colon != std::string::npos) s.decisive_fraction = std::stod(a.synthetic.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("--synthetic expects N[:FRACTION]");
    }
    c.synthetic = s;
  }
  c.backend = parse_backend(a.backend);
  if (!a.backend_config.empty()) {
    if (c.backend.kind != cgdpd::runner::BackendKind::Http) throw ConfigError("--backend-config applies to http backends only");
    apply_http_config(c.backend.http, a.backend_config);
  }
  if (a.method == "single") c.method = cgdpd::runner::Method::Single;
  else if (a.method == "cgdpd") c.method = cgdpd::runner::Method::Cgdpd;
  else throw ConfigError("unknown method '" + a.method + "'");
  if (a.negator == "formula") c.negator = cgdpd::NegatorKind::Formula;
  else if (a.negator == "not-wrapper") c.negator = cgdpd::NegatorKind::NotWrapper;
  else throw ConfigError("unknown negator '" + a.negator + "'");
  if (!a.field_map.empty()) c.field_map = parse_field_map(a.field_map);
  if (!a.baseline.empty()) c.baseline_report = a.baseline;
  if (!a.out.empty()) c.out = a.out;
  if (!a.csv.empty()) c.csv_out = a.csv;
  c.unknown_penalty = a.unknown_penalty;
  if (a.max_examples > 0) c.max_examples = a.max_examples;
  c.seed = a.seed;
  c.concurrency = a.concurrency;
  c.bootstrap_samples = a.bootstrap_samples;
  c.keep_going = a.keep_going;
  c.strict = a.strict;
  c.cache = !a.no_cache;
  c.oracle.unique_names = !a.no_unique_names;
  c.oracle.max_ground_atoms = a.max_ground_atoms;
  c.oracle.max_domain_size = a.max_domain_size;
  return c;
}

void add_data_options(CLI::App* sub, Args& a) {
  sub->add_option("--dataset", a.dataset, "JSONL dataset of premises / conclusion / label");
  sub->add_option("--synthetic", a.synthetic, "Generate N examples, FRACTION of them decisive (N[:FRACTION])");
  sub->add_option("--field-map", a.field_map, "JSON file renaming dataset fields");
  sub->add_option("--max-examples", a.max_examples, "Use at most this many examples");
  sub->add_option("--seed", a.seed, "Seed for generation, noise and bootstrap");
  sub->add_flag("--strict", a.strict, "Fail on the first malformed dataset line");
  sub->add_flag("--no-unique-names", a.no_unique_names, "Let distinct constants denote the same individual");
  sub->add_option("--max-ground-atoms", a.max_ground_atoms, "Oracle ground-atom budget");
  sub->add_option("--max-domain-size", a.max_domain_size, "Oracle domain-size budget");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cgdpd::runner;
  CLI::App app{"Consistency-guided three-way entailment decoding"};
  app.require_subcommand(1);
  Args a;

  auto* run = app.add_subcommand("run", "Decode a dataset and write a report");
  add_data_options(run, a);
  run->add_option("--backend", a.backend, "oracle | noisy:u=..,f=..,g=.. | http:URL");
  run->add_option("--backend-config", a.backend_config, "JSON settings for the http backend");
  run->add_option("--method", a.method, "single | cgdpd");
  run->add_option("--negator", a.negator, "formula | not-wrapper");
  run->add_option("--unknown-penalty", a.unknown_penalty, "Penalty on Unknown answers stated in prompts");
  run->add_option("--concurrency", a.concurrency, "Examples decoded in parallel");
  run->add_option("--bootstrap-samples", a.bootstrap_samples, "Resamples for baseline comparison");
  run->add_option("--baseline", a.baseline, "Report to compare against");
  run->add_option("--out", a.out, "Report path (stdout when omitted)");
  run->add_option("--csv", a.csv, "Also write per-example rows as CSV");
  run->add_flag("--keep-going", a.keep_going, "Record backend failures instead of aborting");
  run->add_flag("--no-cache", a.no_cache, "Disable the probe cache");

  std::string report_a, report_b;
  auto* compare = app.add_subcommand("compare", "Paired bootstrap between two reports");
  compare->add_option("baseline", report_a, "Baseline report")->required();
  compare->add_option("method", report_b, "Method report")->required();
  compare->add_option("--bootstrap-samples", a.bootstrap_samples, "Resamples");
  compare->add_option("--seed", a.seed, "Bootstrap seed");
  compare->add_option("--out", a.out, "Output path (stdout when omitted)");

  auto* check = app.add_subcommand("oracle-check", "Re-derive gold labels with the exact oracle");
  add_data_options(check, a);
  check->add_option("--out", a.out, "Output path (stdout when omitted)");

  auto* paths = app.add_subcommand("paths", "Enumerate decision paths over scripted answers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; usage mistakes are config errors.
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  const std::optional<std::string> out = a.out.empty() ? std::nullopt : std::optional(a.out);
  try {
    if (*run) {
      const RunConfig cfg = to_config(a);
      const json doc = cmd_run(cfg);
      emit(doc, cfg.out);
      if (cfg.csv_out) write_csv(*cfg.csv_out, doc);
    } else if (*compare) {
      emit(cmd_compare(report_a, report_b, a.bootstrap_samples, a.seed), out);
    } else if (*check) {
      const json doc = cmd_oracle_check(to_config(a));
      emit(doc, out);
      if (doc["stats"]["oracle_disagreements"].get<std::size_t>() > 0) return kFailure;
    } else if (*paths) {
      emit(cmd_paths(), std::nullopt);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const BackendFailure& e) {
    std::cerr << "backend failure on " << e.example_id() << ": " << e.what() << "\n";
    return kBackendFailure;
  } catch (const cgdpd::BackendError& e) {
    std::cerr << "backend failure: " << e.what() << "\n";
    return kBackendFailure;
  } catch (const cgdpd::dataset::FileNotFound& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const cgdpd::dataset::MalformedLine& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const cgdpd::dataset::UnknownLabelString& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const cgdpd::metrics::IdMismatch& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const cgdpd::report::ReportError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
