#pragma once

// Consistency-guided decoding with proof-driven disambiguation, and the
// single-call baseline. Every decision carries a trace from which its label
// can be re-derived.

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "cgdpd/classifier.hpp"
#include "cgdpd/label.hpp"

namespace cgdpd {

enum class Stage { SingleShot, ConsistentPair, ProjectedAfterFix, BinaryProbes, Adjudicated };

constexpr std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::SingleShot: return "SingleShot";
    case Stage::ConsistentPair: return "ConsistentPair";
    case Stage::ProjectedAfterFix: return "ProjectedAfterFix";
    case Stage::BinaryProbes: return "BinaryProbes";
    case Stage::Adjudicated: return "Adjudicated";
  }
  return "?";
}

inline std::optional<Stage> stage_from_string(std::string_view s) noexcept {
  for (const Stage st : {Stage::SingleShot, Stage::ConsistentPair, Stage::ProjectedAfterFix, Stage::BinaryProbes,
                         Stage::Adjudicated})
    if (s == to_string(st)) return st;
  return std::nullopt;
}

struct FixRecord {
  Polarity polarity;
  FixOutcome outcome;
};

struct ProbePair {
  BinaryAnswer h;
  BinaryAnswer neg_h;
};

struct Trace {
  Label y_h_initial = Label::Unknown;
  std::optional<Label> y_neg_h_initial;  // absent for the single-call baseline
  std::vector<FixRecord> fixes;
  std::optional<ProbePair> probes;
  bool adjudicated = false;              // the adjudicator was consulted
  std::optional<Label> adjudicated_label;
  Stage stage = Stage::SingleShot;
  int calls = 0;
};

struct Decision {
  Label label;
  Trace trace;
};

// Backend failure mid-decode. Carries the trace recorded up to the failing
// call; `partial().calls` counts completed calls only.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, Trace partial) : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trace& partial() const noexcept { return partial_; }

 private:
  Trace partial_;
};

inline Decision decide_single(Backend& backend, const Problem& s, const fol::Formula& h) {
  Trace t;
  t.stage = Stage::SingleShot;
  try {
    t.y_h_initial = backend.classify(s, make_hypothesis(h));
  } catch (const std::exception& e) {
    throw DecodeError(e.what(), t);
  }
  t.calls = 1;
  return {t.y_h_initial, std::move(t)};
}

// Binary probe decision rule: (Yes,No) -> True, (No,Yes) -> False, anything
// else abstains, including the conflicting (Yes,Yes).
constexpr Label probe_rule(BinaryAnswer b_h, BinaryAnswer b_neg_h) noexcept {
  if (b_h == BinaryAnswer::Yes && b_neg_h == BinaryAnswer::No) return Label::True;
  if (b_h == BinaryAnswer::No && b_neg_h == BinaryAnswer::Yes) return Label::False;
  return Label::Unknown;
}

inline Decision decide_cgdpd(Backend& backend, NegatorKind negator, const Problem& s, const fol::Formula& h) {
  const Hypothesis pos = make_hypothesis(h);
  const Hypothesis neg = negated(pos, negator);
  Trace t;

  auto call = [&](auto&& fn) {
    try {
      auto r = fn();
      ++t.calls;
      return r;
    } catch (const std::exception& e) {
      throw DecodeError(e.what(), t);
    }
  };

  Label y_h = call([&] { return backend.classify(s, pos); });
  t.y_h_initial = y_h;
  Label y_neg = call([&] { return backend.classify(s, neg); });
  t.y_neg_h_initial = y_neg;

  if (pair_consistent(y_h, y_neg) && !(y_h == Label::Unknown && y_neg == Label::Unknown)) {
    t.stage = Stage::ConsistentPair;
    return {y_h, std::move(t)};
  }

  if (y_h == Label::Unknown) {
    FixOutcome fix = call([&] { return backend.fix_unknown(s, pos); });
    y_h = fix.label;
    t.fixes.push_back({Polarity::Positive, std::move(fix)});
  }
  if (y_neg == Label::Unknown) {
    FixOutcome fix = call([&] { return backend.fix_unknown(s, neg); });
    y_neg = fix.label;
    t.fixes.push_back({Polarity::Negated, std::move(fix)});
  }

  if (is_decisive(y_h) && y_neg == Label::Unknown) {
    t.stage = Stage::ProjectedAfterFix;
    return {y_h, std::move(t)};
  }
  if (y_h == Label::Unknown && is_decisive(y_neg)) {
    t.stage = Stage::ProjectedAfterFix;
    return {neg_map(y_neg), std::move(t)};
  }

  if (y_h == Label::Unknown && y_neg == Label::Unknown) {
    const BinaryAnswer b_h = call([&] { return backend.entails_yes_no(s, pos); });
    t.probes = ProbePair{b_h, BinaryAnswer::No};
    const BinaryAnswer b_neg = call([&] { return backend.entails_yes_no(s, neg); });
    t.probes->neg_h = b_neg;
    t.stage = Stage::BinaryProbes;
    return {probe_rule(b_h, b_neg), std::move(t)};
  }

  // Both decisive. An already consistent pair needs no adjudicator call.
  t.stage = Stage::Adjudicated;
  if (pair_consistent(y_h, y_neg)) {
    t.adjudicated_label = y_h;
    return {y_h, std::move(t)};
  }
  const Label picked = call([&] { return backend.adjudicate(s, pos, y_h, y_neg); });
  t.adjudicated = true;
  t.adjudicated_label = picked;
  return {picked, std::move(t)};
}

// Replays the decision procedure over the recorded values.
inline Label rederive_label(const Trace& t) {
  if (t.stage == Stage::SingleShot) return t.y_h_initial;
  if (!t.y_neg_h_initial) throw std::invalid_argument("trace lacks the negated initial label");
  Label y_h = t.y_h_initial, y_neg = *t.y_neg_h_initial;
  if (pair_consistent(y_h, y_neg) && !(y_h == Label::Unknown && y_neg == Label::Unknown)) return y_h;
  for (const auto& f : t.fixes) (f.polarity == Polarity::Positive ? y_h : y_neg) = f.outcome.label;
  if (is_decisive(y_h) && y_neg == Label::Unknown) return y_h;
  if (y_h == Label::Unknown && is_decisive(y_neg)) return neg_map(y_neg);
  if (y_h == Label::Unknown && y_neg == Label::Unknown) {
    if (!t.probes) throw std::invalid_argument("trace lacks probe results");
    return probe_rule(t.probes->h, t.probes->neg_h);
  }
  if (pair_consistent(y_h, y_neg)) return y_h;
  if (!t.adjudicated_label) throw std::invalid_argument("trace lacks the adjudicated label");
  return *t.adjudicated_label;
}

// ---------------------------------------------------------------------------

struct PathRow {
  std::string signature;  // probes actually consulted, with their answers
  Stage stage;
  int calls;
  Label label;

  friend bool operator<(const PathRow& a, const PathRow& b) {
    return std::tie(a.calls, a.stage, a.signature) < std::tie(b.calls, b.stage, b.signature);
  }
};

namespace detail {

inline std::string path_signature(const Trace& t) {
  std::string sig = "classify(H)=";
  sig += short_name(t.y_h_initial);
  sig += " classify(negH)=";
  sig += short_name(*t.y_neg_h_initial);
  for (const auto& f : t.fixes) {
    sig += f.polarity == Polarity::Positive ? " fix(H)=" : " fix(negH)=";
    sig += short_name(f.outcome.label);
  }
  if (t.probes) {
    sig += " entails(H)=";
    sig += to_string(t.probes->h);
    sig += " entails(negH)=";
    sig += to_string(t.probes->neg_h);
  }
  if (t.adjudicated) {
    sig += " adjudicate=";
    sig += short_name(*t.adjudicated_label);
  }
  return sig;
}

}  // namespace detail

// Drives decide_cgdpd through every combination of scripted answers and
// returns each distinct branch reached, ordered by call count.
inline std::vector<PathRow> decision_path_enumeration() {
  using Choice = ScriptedBackend::AdjudicatorChoice;
  static const fol::Formula h = fol::ground_atom("P", {"a"});
  static const std::vector<fol::Formula> premises = {h};
  const Problem problem{"path-enumeration", premises};

  std::set<std::string> seen;
  std::vector<PathRow> rows;
  for (const Label c_h : kAllLabels)
    for (const Label c_neg : kAllLabels)
      for (const Label f_h : kAllLabels)
        for (const Label f_neg : kAllLabels)
          for (const BinaryAnswer p_h : {BinaryAnswer::Yes, BinaryAnswer::No})
            for (const BinaryAnswer p_neg : {BinaryAnswer::Yes, BinaryAnswer::No})
              for (const Choice adj : {Choice::KeepHypothesis, Choice::MapNegation}) {
                ScriptedBackend backend({c_h, c_neg, f_h, f_neg, p_h, p_neg, adj});
                const Decision d = decide_cgdpd(backend, NegatorKind::Formula, problem, h);
                std::string sig = detail::path_signature(d.trace);
                if (seen.insert(sig).second) rows.push_back({std::move(sig), d.trace.stage, d.trace.calls, d.label});
              }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace cgdpd
