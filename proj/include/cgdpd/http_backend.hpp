#pragma once

// Remote model backend. Each probe renders a prompt template, POSTs it with
// a strict enum schema at temperature 0, and parses the single-token answer.

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cgdpd/classifier.hpp"

namespace cgdpd::http {

struct PromptTemplates {
  std::string classify;
  std::string fix_unknown;
  std::string entails;
  std::string adjudicate;

  static PromptTemplates defaults();

  // Reads classify.txt, fix_unknown.txt, entails.txt and adjudicate.txt;
  // missing files keep the default text.
  static PromptTemplates load(const std::filesystem::path& dir) {
    PromptTemplates t = defaults();
    auto read = [&](const char* file, std::string& slot) {
      std::ifstream in(dir / file);
      if (!in) return;
      std::ostringstream ss;
      ss << in.rdbuf();
      slot = ss.str();
    };
    read("classify.txt", t.classify);
    read("fix_unknown.txt", t.fix_unknown);
    read("entails.txt", t.entails);
    read("adjudicate.txt", t.adjudicate);
    return t;
  }
};

inline PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.classify =
      "You are given premises and a hypothesis written in first-order logic.\n"
      "A hypothesis of the form \"NOT: X\" denotes the logical negation of X.\n"
      "Premises:\n{premises}\n"
      "Hypothesis: {hypothesis}\n"
      "Answer True if the premises entail the hypothesis, False if they entail its negation, "
      "and Unknown if they entail neither.\n"
      "{lambda}\n"
      "Respond with exactly one of: True, False, Unknown.\n";
  t.fix_unknown =
      "An earlier answer for this problem was Unknown. Re-check it.\n"
      "A hypothesis of the form \"NOT: X\" denotes the logical negation of X.\n"
      "Premises:\n{premises}\n"
      "Hypothesis: {hypothesis}\n"
      "If the premises entail the hypothesis answer True; if they entail its negation answer False. "
      "A True or False answer must quote the premise that supports it as the witness. "
      "Otherwise answer Unknown and, if helpful, state the missing premise that would decide it.\n"
      "Respond with a JSON object: {\"label\": \"True\"|\"False\"|\"Unknown\", \"witness\": string, "
      "\"missing_premise\": string}.\n";
  t.entails =
      "A hypothesis of the form \"NOT: X\" denotes the logical negation of X.\n"
      "Premises:\n{premises}\n"
      "Statement: {hypothesis}\n"
      "Do the premises logically entail the statement?\n"
      "Respond with exactly one of: Yes, No.\n";
  t.adjudicate =
      "Two answers about the same hypothesis contradict each other.\n"
      "Premises:\n{premises}\n"
      "Hypothesis: {hypothesis}\n"
      "Option A: the hypothesis is {y_h}.\n"
      "Option B: the hypothesis is {y_neg_h_mapped} (its negation was judged {y_neg_h}).\n"
      "Choose the option supported by the premises.\n"
      "Respond with exactly one of: {y_h}, {y_neg_h_mapped}.\n";
  return t;
}

// Replaces every {name} placeholder found in vars; other braces are kept.
inline std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

// The Unknown penalty is expressed as prompt wording, not an API parameter.
inline std::string unknown_penalty_sentence(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", lambda);
  std::string s = "Unknown penalty (lambda = ";
  s += buf;
  s += "): ";
  if (lambda >= 0.75) s += "strongly avoid Unknown; choose it only when there is clearly insufficient support for either side.";
  else if (lambda >= 0.25) s += "choose Unknown only when there is insufficient support for either side.";
  else if (lambda > 0.0) s += "choose Unknown whenever support for either side is weak.";
  else s += "no penalty applies to Unknown.";
  return s;
}

// trim, strip surrounding quotes and trailing punctuation, case-fold.
inline std::string normalize_token(std::string_view raw) {
  std::string s(raw);
  auto strip = [&] {
    const auto b = s.find_first_not_of(" \t\r\n\"'`");
    if (b == std::string::npos) {
      s.clear();
      return;
    }
    const auto e = s.find_last_not_of(" \t\r\n\"'`.,;:!?");
    s = e == std::string::npos || e < b ? std::string() : s.substr(b, e - b + 1);
  };
  strip();
  strip();
  return ascii_lower(s);
}

inline std::optional<Label> parse_label_token(std::string_view raw) {
  const auto s = normalize_token(raw);
  if (s == "true") return Label::True;
  if (s == "false") return Label::False;
  if (s == "unknown") return Label::Unknown;
  return std::nullopt;
}

inline std::optional<BinaryAnswer> parse_answer_token(std::string_view raw) {
  const auto s = normalize_token(raw);
  if (s == "yes") return BinaryAnswer::Yes;
  if (s == "no") return BinaryAnswer::No;
  return std::nullopt;
}

struct HttpConfig {
  std::string endpoint;  // scheme://host[:port]/path
  std::string model;
  std::string token_env;  // environment variable holding a bearer token; empty sends none
  double timeout_seconds = 60.0;
  int retries = 2;  // extra attempts after the first
  std::size_t max_in_flight = 4;
  std::string response_pointer = "/output";  // JSON pointer to the answer in a JSON response body
  std::optional<std::string> templates_dir;
  ClassifierConfig classifier;

  void validate() const {
    if (endpoint.find("://") == std::string::npos) throw std::invalid_argument("HTTP endpoint must be scheme://host[:port]/path");
    if (retries < 0) throw std::invalid_argument("retries must be >= 0");
    if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
    if (timeout_seconds <= 0) throw std::invalid_argument("timeout must be positive");
    classifier.validate();
  }
};

class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t cap) : cap_(cap) {}

  class Slot {
   public:
    explicit Slot(InFlightLimiter& l) : l_(l) {
      std::unique_lock lock(l_.mu_);
      l_.cv_.wait(lock, [&] { return l_.active_ < l_.cap_; });
      ++l_.active_;
      l_.peak_ = std::max(l_.peak_, l_.active_);
    }
    ~Slot() {
      {
        std::lock_guard lock(l_.mu_);
        --l_.active_;
      }
      l_.cv_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    InFlightLimiter& l_;
  };

  std::size_t peak() const {
    std::lock_guard lock(mu_);
    return peak_;
  }

 private:
  std::size_t cap_;
  std::size_t active_ = 0;
  std::size_t peak_ = 0;
  mutable std::mutex mu_;
  std::condition_variable cv_;
};

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpConfig cfg)
      : cfg_(std::move(cfg)),
        templates_(cfg_.templates_dir ? PromptTemplates::load(*cfg_.templates_dir) : PromptTemplates::defaults()),
        limiter_(cfg_.max_in_flight) {
    cfg_.validate();
    const auto scheme_end = cfg_.endpoint.find("://");
    const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
    base_ = cfg_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
    if (!cfg_.token_env.empty()) {
      const char* tok = std::getenv(cfg_.token_env.c_str());
      if (!tok || !*tok) throw std::invalid_argument("environment variable '" + cfg_.token_env + "' is not set");
      token_ = tok;
    }
  }

  Label classify(const Problem& s, const Hypothesis& h) override {
    const auto prompt = fill(templates_.classify, vars(s, h));
    const auto content = invoke(ProbeKind::Classify, prompt, enum_schema({"True", "False", "Unknown"}),
                                [](const std::string& c) { return parse_label_token(c).has_value(); });
    return content ? *parse_label_token(*content) : Label::Unknown;
  }

  BinaryAnswer entails_yes_no(const Problem& s, const Hypothesis& h) override {
    const auto prompt = fill(templates_.entails, vars(s, h));
    const auto content = invoke(ProbeKind::EntailsYesNo, prompt, enum_schema({"Yes", "No"}),
                                [](const std::string& c) { return parse_answer_token(c).has_value(); });
    if (!content) throw BackendError("entails_yes_no: no schema-conforming answer after retries");
    return *parse_answer_token(*content);
  }

  std::string name() const override { return "http"; }

  std::size_t peak_in_flight() const { return limiter_.peak(); }
  const PromptTemplates& templates() const noexcept { return templates_; }

  static std::optional<FixOutcome> parse_fix(const std::string& content) {
    nlohmann::json j = nlohmann::json::parse(content, nullptr, false);
    if (j.is_object() && j.contains("label") && j["label"].is_string()) {
      const auto y = parse_label_token(j["label"].get<std::string>());
      if (!y) return std::nullopt;
      FixOutcome out{*y, std::nullopt, std::nullopt};
      if (j.contains("witness") && j["witness"].is_string()) out.witness = j["witness"].get<std::string>();
      if (j.contains("missing_premise") && j["missing_premise"].is_string())
        out.missing_premise_note = j["missing_premise"].get<std::string>();
      return out;
    }
    // A bare label carries no witness.
    if (const auto y = parse_label_token(content)) return FixOutcome{*y, std::nullopt, std::nullopt};
    return std::nullopt;
  }

 protected:
  FixOutcome do_fix_unknown(const Problem& s, const Hypothesis& h) override {
    const auto prompt = fill(templates_.fix_unknown, vars(s, h));
    nlohmann::json schema = {
        {"type", "object"},
        {"properties",
         {{"label", {{"type", "string"}, {"enum", {"True", "False", "Unknown"}}}},
          {"witness", {{"type", "string"}}},
          {"missing_premise", {{"type", "string"}}}}},
        {"required", {"label"}},
    };
    const auto content = invoke(ProbeKind::FixUnknown, prompt, schema,
                                [](const std::string& c) { return parse_fix(c).has_value(); });
    return content ? *parse_fix(*content) : FixOutcome::unknown();
  }

  Label do_adjudicate(const Problem& s, const Hypothesis& h, Label y_h, Label y_neg_h) override {
    auto v = vars(s, h);
    v["y_h"] = std::string(to_string(y_h));
    v["y_neg_h"] = std::string(to_string(y_neg_h));
    v["y_neg_h_mapped"] = std::string(to_string(neg_map(y_neg_h)));
    const auto prompt = fill(templates_.adjudicate, v);
    const Label a = y_h, b = neg_map(y_neg_h);
    const auto content = invoke(ProbeKind::Adjudicate, prompt,
                                enum_schema({std::string(to_string(a)), std::string(to_string(b))}),
                                [&](const std::string& c) {
                                  const auto y = parse_label_token(c);
                                  return y && (*y == a || *y == b);
                                });
    if (!content) throw BackendError("adjudicate: no schema-conforming answer after retries");
    return *parse_label_token(*content);
  }

 private:
  static nlohmann::json enum_schema(std::initializer_list<std::string> values) {
    return {{"type", "string"}, {"enum", values}};
  }

  std::map<std::string, std::string> vars(const Problem& s, const Hypothesis& h) const {
    std::string premises;
    for (std::size_t i = 0; i < s.premises.size(); ++i) {
      premises += std::to_string(i + 1) + ". " + fol::render(s.premises[i]) + "\n";
    }
    if (!premises.empty()) premises.pop_back();
    return {{"premises", premises}, {"hypothesis", h.text}, {"lambda", unknown_penalty_sentence(cfg_.classifier.unknown_penalty)}};
  }

  // Pulls the answer out of the response: the string (or object) at the
  // configured JSON pointer, a bare JSON string, or else the raw body.
  std::string extract(const std::string& body) const {
    const nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) return body;
    if (j.is_string()) return j.get<std::string>();
    if (j.is_object()) {
      const nlohmann::json::json_pointer ptr(cfg_.response_pointer);
      if (j.contains(ptr)) {
        const auto& v = j.at(ptr);
        return v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    return body;
  }

  // Returns the first schema-conforming content, nullopt if every attempt
  // answered but none conformed. Transport failure on the last attempt throws.
  template <class Accept>
  std::optional<std::string> invoke(ProbeKind kind, const std::string& prompt, const nlohmann::json& schema,
                                    Accept&& accept) {
    const nlohmann::json request = {
        {"model", cfg_.model}, {"temperature", cfg_.classifier.temperature}, {"probe", std::string(to_string(kind))},
        {"prompt", prompt},    {"schema", schema},
    };
    const std::string payload = request.dump();
    std::string last_transport_error;
    bool last_was_transport = false;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
      httplib::Result res = post(payload);
      if (!res) {
        last_was_transport = true;
        last_transport_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        last_was_transport = true;
        last_transport_error = "HTTP status " + std::to_string(res->status);
        continue;
      }
      last_was_transport = false;
      std::string content = extract(res->body);
      if (accept(content)) return content;
    }
    if (last_was_transport)
      throw BackendError(std::string(to_string(kind)) + ": " + last_transport_error);
    return std::nullopt;
  }

  httplib::Result post(const std::string& payload) {
    InFlightLimiter::Slot slot(limiter_);
    httplib::Client client(base_);
    const auto timeout = std::chrono::duration<double>(cfg_.timeout_seconds);
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
    client.set_connection_timeout(us);
    client.set_read_timeout(us);
    client.set_write_timeout(us);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    return client.Post(path_, headers, payload, "application/json");
  }

  HttpConfig cfg_;
  PromptTemplates templates_;
  InFlightLimiter limiter_;
  std::string base_;
  std::string path_;
  std::string token_;
};

}  // namespace cgdpd::http
