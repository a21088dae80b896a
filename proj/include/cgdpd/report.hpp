#pragma once

// JSON forms of traces, records and run statistics.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgdpd/dataset.hpp"
#include "cgdpd/decoder.hpp"
#include "cgdpd/metrics.hpp"

namespace cgdpd::report {

using nlohmann::json;

inline constexpr std::string_view kReportSchema = "cgdpd-report/1";
inline constexpr std::string_view kComparisonSchema = "cgdpd-comparison/1";

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline Label label_field(const json& j, const char* key) {
  const auto y = label_from_string(j.at(key).get<std::string>());
  if (!y) throw ReportError(std::string("bad label in field '") + key + "'");
  return *y;
}

// Percent with one decimal, rounding half away from zero.
inline std::string display_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", std::round(fraction * 1000.0) / 10.0);
  return buf;
}

inline json to_json(const FixOutcome& f) {
  json j = {{"label", std::string(to_string(f.label))}};
  if (f.witness) j["witness"] = *f.witness;
  if (f.missing_premise_note) j["missing_premise"] = *f.missing_premise_note;
  return j;
}

inline json to_json(const Trace& t) {
  json j;
  j["y_H_initial"] = std::string(to_string(t.y_h_initial));
  j["y_negH_initial"] = t.y_neg_h_initial ? json(std::string(to_string(*t.y_neg_h_initial))) : json(nullptr);
  j["fixes"] = json::array();
  for (const auto& f : t.fixes) {
    json e = to_json(f.outcome);
    e["polarity"] = std::string(to_string(f.polarity));
    j["fixes"].push_back(std::move(e));
  }
  j["probes"] = t.probes ? json{{"H", std::string(to_string(t.probes->h))}, {"negH", std::string(to_string(t.probes->neg_h))}}
                         : json(nullptr);
  j["adjudicated"] = t.adjudicated;
  j["adjudicated_label"] = t.adjudicated_label ? json(std::string(to_string(*t.adjudicated_label))) : json(nullptr);
  j["stage"] = std::string(to_string(t.stage));
  j["calls"] = t.calls;
  return j;
}

inline Trace trace_from_json(const json& j) {
  Trace t;
  t.y_h_initial = label_field(j, "y_H_initial");
  if (!j.at("y_negH_initial").is_null()) t.y_neg_h_initial = label_field(j, "y_negH_initial");
  for (const auto& e : j.at("fixes")) {
    FixOutcome f{label_field(e, "label"), std::nullopt, std::nullopt};
    if (e.contains("witness")) f.witness = e["witness"].get<std::string>();
    if (e.contains("missing_premise")) f.missing_premise_note = e["missing_premise"].get<std::string>();
    t.fixes.push_back({e.at("polarity").get<std::string>() == "H" ? Polarity::Positive : Polarity::Negated, std::move(f)});
  }
  if (!j.at("probes").is_null()) {
    const auto h = answer_from_string(j["probes"].at("H").get<std::string>());
    const auto n = answer_from_string(j["probes"].at("negH").get<std::string>());
    if (!h || !n) throw ReportError("bad probe answer");
    t.probes = ProbePair{*h, *n};
  }
  t.adjudicated = j.at("adjudicated").get<bool>();
  if (!j.at("adjudicated_label").is_null()) t.adjudicated_label = label_field(j, "adjudicated_label");
  const auto st = stage_from_string(j.at("stage").get<std::string>());
  if (!st) throw ReportError("bad stage");
  t.stage = *st;
  t.calls = j.at("calls").get<int>();
  return t;
}

inline json to_json(const metrics::PredictionRecord& r) {
  json j = {
      {"id", r.example_id},
      {"gold", std::string(to_string(r.gold))},
      {"predicted", std::string(to_string(r.predicted))},
      {"calls", r.calls},
      {"stage", std::string(to_string(r.stage))},
  };
  if (r.changed_vs_baseline) j["changed_vs_baseline"] = *r.changed_vs_baseline;
  if (r.error) j["error"] = *r.error;
  return j;
}

inline metrics::PredictionRecord record_from_json(const json& j) {
  metrics::PredictionRecord r;
  r.example_id = j.at("id").get<std::string>();
  r.gold = label_field(j, "gold");
  r.predicted = label_field(j, "predicted");
  r.calls = j.at("calls").get<int>();
  const auto st = stage_from_string(j.at("stage").get<std::string>());
  if (!st) throw ReportError("bad stage");
  r.stage = *st;
  if (j.contains("changed_vs_baseline")) r.changed_vs_baseline = j["changed_vs_baseline"].get<bool>();
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  return r;
}

inline json to_json(const metrics::Metrics& m) {
  json hist = json::object();
  for (const auto& [c, f] : m.call_histogram) hist[std::to_string(c)] = f;
  json display = {
      {"rule", "percent, one decimal, half away from zero"},
      {"accuracy", display_percent(m.accuracy)},
      {"unknown_rate", display_percent(m.unknown_rate)},
      {"epistemic_unknown_rate", m.epistemic_unknown_rate ? json(display_percent(*m.epistemic_unknown_rate)) : json(nullptr)},
      {"coverage", display_percent(m.coverage)},
      {"answered_accuracy", m.answered_accuracy ? json(display_percent(*m.answered_accuracy)) : json(nullptr)},
  };
  return {
      {"n", m.n},
      {"n_errors", m.n_errors},
      {"counts",
       {{"correct", m.correct},
        {"unknown_predictions", m.unknown_predictions},
        {"decisive_gold", m.decisive_gold},
        {"epistemic_unknowns", m.epistemic_unknowns},
        {"answered_correct", m.answered_correct}}},
      {"accuracy", m.accuracy},
      {"unknown_rate", m.unknown_rate},
      {"epistemic_unknown_rate", optional_number(m.epistemic_unknown_rate)},
      {"coverage", m.coverage},
      {"answered_accuracy", optional_number(m.answered_accuracy)},
      {"mean_calls", m.mean_calls},
      {"call_histogram", hist},
      {"display", display},
  };
}

inline json to_json(const metrics::Confusion& c) {
  json j;
  j["order"] = {"True", "False", "Unknown"};
  j["counts"] = c.counts;
  j["row_normalized"] = c.row_normalized;
  j["empty_row"] = c.empty_row;
  return j;
}

inline json to_json(const metrics::BootstrapCI& ci) {
  return {
      {"statistic", std::string(to_string(ci.statistic))},
      {"point_delta", ci.point_delta},
      {"lo", ci.lo},
      {"hi", ci.hi},
      {"resamples", ci.resamples},
      {"seed", ci.seed},
      {"undefined_resamples", ci.undefined_resamples},
      {"excludes_zero", ci.excludes_zero()},
      {"method", "paired percentile bootstrap, 2.5/97.5 percentiles"},
  };
}

inline json to_json(const metrics::DiffReport& d) {
  json fractions = json::object();
  for (const auto& [c, f] : d.method_call_fractions) fractions[std::to_string(c)] = f;
  return {
      {"n", d.n},
      {"changed", d.changed},
      {"changed_ids", d.changed_ids},
      {"transitions", d.transitions},
      {"method_call_fractions", fractions},
      {"max_calls_fraction", d.max_calls_fraction},
  };
}

inline json to_json(const dataset::DatasetStats& s) {
  json labels = json::object();
  for (const Label y : kAllLabels) {
    const auto it = s.label_counts.find(y);
    labels[std::string(to_string(y))] = it == s.label_counts.end() ? 0 : it->second;
  }
  auto issues = [](const std::vector<dataset::Issue>& v) {
    json a = json::array();
    for (const auto& i : v) a.push_back({{"id", i.id}, {"reason", i.reason}});
    return a;
  };
  return {
      {"n", s.n},
      {"label_counts", labels},
      {"parse_failures", s.parse_failures},
      {"oracle_disagreements", s.oracle_disagreements},
      {"budget_exceeded", s.budget_exceeded},
      {"parse_failure_lines", issues(s.parse_failure_lines)},
      {"disagreements", issues(s.disagreements)},
      {"over_budget", issues(s.over_budget)},
  };
}

inline json to_json(const PathRow& r) {
  return {{"signature", r.signature}, {"stage", std::string(to_string(r.stage))}, {"calls", r.calls},
          {"label", std::string(to_string(r.label))}};
}

}  // namespace cgdpd::report
