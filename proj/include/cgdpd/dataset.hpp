#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgdpd/classifier.hpp"
#include "cgdpd/fol.hpp"
#include "cgdpd/label.hpp"
#include "cgdpd/oracle.hpp"
#include "cgdpd/rng.hpp"

namespace cgdpd::dataset {

struct Example {
  std::string id;
  std::vector<fol::Formula> premises;
  std::vector<std::string> premise_texts;
  fol::Formula hypothesis;
  std::string hypothesis_text;
  Label gold = Label::Unknown;

  Problem problem() const { return {id, premises}; }
};

struct Issue {
  std::string id;
  std::string reason;
};

struct DatasetStats {
  std::size_t n = 0;
  std::map<Label, std::size_t> label_counts;
  std::size_t parse_failures = 0;
  std::size_t oracle_disagreements = 0;
  std::size_t budget_exceeded = 0;
  std::vector<Issue> parse_failure_lines;  // id is "line <k>"
  std::vector<Issue> disagreements;
  std::vector<Issue> over_budget;
};

class UnknownLabelString : public std::invalid_argument {
 public:
  explicit UnknownLabelString(const std::string& raw) : std::invalid_argument("unrecognized label '" + raw + "'") {}
};

class FileNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedLine : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GenerationBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Case-insensitive; "Uncertain" (the FOLIO export spelling) maps to Unknown.
inline Label normalize_label(std::string_view raw) {
  std::string s = ascii_lower(raw);
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  if (s == "true") return Label::True;
  if (s == "false") return Label::False;
  if (s == "unknown" || s == "uncertain") return Label::Unknown;
  throw UnknownLabelString(std::string(raw));
}

// JSON field names, remappable for different dataset releases.
struct FieldMap {
  std::string premises = "premises-FOL";
  std::string conclusion = "conclusion-FOL";
  std::string label = "label";
  std::string id = "example_id";
};

struct LoadOptions {
  FieldMap fields;
  bool strict = false;
  fol::ParseOptions parse;
  std::ostream* diagnostics = nullptr;  // skipped lines are reported here when set
};

namespace detail {

inline std::vector<std::string> premise_strings(const nlohmann::json& v) {
  std::vector<std::string> out;
  auto push_lines = [&](const std::string& s) {
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto nl = s.find('\n', start);
      std::string line = s.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
      if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back(std::move(line));
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
  };
  if (v.is_array()) {
    for (const auto& item : v) {
      if (!item.is_string()) throw MalformedLine("premise entry is not a string");
      out.push_back(item.get<std::string>());
    }
  } else if (v.is_string()) {
    push_lines(v.get<std::string>());
  } else {
    throw MalformedLine("premises field is neither an array nor a string");
  }
  if (out.empty()) throw MalformedLine("no premises");
  return out;
}

inline Example parse_example(const std::string& line, std::size_t line_no, const LoadOptions& opts) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedLine(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw MalformedLine("line is not a JSON object");
  const auto& f = opts.fields;
  for (const auto* key : {&f.premises, &f.conclusion, &f.label})
    if (!j.contains(*key)) throw MalformedLine("missing field '" + *key + "'");

  Example ex;
  if (j.contains(f.id) && !j[f.id].is_null()) {
    const auto& id = j[f.id];
    ex.id = id.is_string() ? id.get<std::string>() : id.dump();
  } else {
    ex.id = "line-" + std::to_string(line_no);
  }
  ex.premise_texts = premise_strings(j[f.premises]);
  for (std::size_t i = 0; i < ex.premise_texts.size(); ++i) {
    try {
      ex.premises.push_back(fol::parse_formula(ex.premise_texts[i], opts.parse));
    } catch (const fol::ParseError& e) {
      throw MalformedLine("premise " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!j[f.conclusion].is_string()) throw MalformedLine("conclusion is not a string");
  ex.hypothesis_text = j[f.conclusion].get<std::string>();
  try {
    ex.hypothesis = fol::parse_formula(ex.hypothesis_text, opts.parse);
  } catch (const fol::ParseError& e) {
    throw MalformedLine(std::string("conclusion: ") + e.what());
  }
  if (!j[f.label].is_string()) throw MalformedLine("label is not a string");
  try {
    ex.gold = normalize_label(j[f.label].get<std::string>());
  } catch (const UnknownLabelString& e) {
    throw MalformedLine(e.what());
  }
  return ex;
}

}  // namespace detail

struct LoadResult {
  std::vector<Example> examples;
  DatasetStats stats;
};

// Line-delimited JSON. Blank lines are ignored; every other line is either
// loaded or counted under parse_failures (fatal in strict mode).
inline LoadResult load_folio_jsonl(const std::string& path, const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open dataset '" + path + "'");
  LoadResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      Example ex = detail::parse_example(line, line_no, opts);
      ++out.stats.label_counts[ex.gold];
      out.examples.push_back(std::move(ex));
    } catch (const MalformedLine& e) {
      if (opts.strict) throw MalformedLine("line " + std::to_string(line_no) + ": " + e.what());
      ++out.stats.parse_failures;
      out.stats.parse_failure_lines.push_back({"line " + std::to_string(line_no), e.what()});
      if (opts.diagnostics) *opts.diagnostics << path << ":" << line_no << ": skipped: " << e.what() << "\n";
    }
  }
  out.stats.n = out.examples.size();
  return out;
}

// Audits golds against the oracle without touching them.
inline DatasetStats validate_with_oracle(std::span<const Example> examples, const oracle::OracleConfig& cfg = {},
                                         DatasetStats stats = {}) {
  stats.n = examples.size();
  stats.label_counts.clear();
  for (const auto& ex : examples) {
    ++stats.label_counts[ex.gold];
    try {
      const Label y = oracle::three_way_label(ex.premises, ex.hypothesis, cfg);
      if (y != ex.gold) {
        ++stats.oracle_disagreements;
        stats.disagreements.push_back(
            {ex.id, "oracle label " + std::string(to_string(y)) + " vs gold " + std::string(to_string(ex.gold))});
      }
    } catch (const oracle::InconsistentPremises& e) {
      ++stats.oracle_disagreements;
      stats.disagreements.push_back({ex.id, "inconsistent premises"});
    } catch (const oracle::BudgetExceeded& e) {
      ++stats.budget_exceeded;
      stats.over_budget.push_back({ex.id, e.what()});
    } catch (const oracle::NonGroundable& e) {
      ++stats.oracle_disagreements;
      stats.disagreements.push_back({ex.id, std::string("not groundable: ") + e.what()});
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Synthetic data with oracle-verified golds.

namespace detail {

class SyntheticBuilder {
 public:
  explicit SyntheticBuilder(SplitMix64& rng) : rng_(rng) {}

  // One attempt at an example with the requested gold. The caller verifies.
  std::pair<std::vector<fol::Formula>, fol::Formula> attempt(Label target) {
    using fol::Formula;
    const std::size_t n_preds = 2 + rng_.below(3);  // 2..4
    const std::size_t n_consts = 1 + rng_.below(3);  // 1..3
    std::vector<std::string> preds(kPreds, kPreds + 4), consts(kConsts, kConsts + 3);
    shuffle(preds);
    preds.resize(n_preds);
    shuffle(consts);
    consts.resize(n_consts);
    const std::string& c = consts[0];

    std::vector<Formula> premises;
    Formula h = fol::ground_atom(preds[0], {c});
    const std::size_t variant = rng_.below(3);

    if (target == Label::Unknown) {
      if (variant == 0 || n_preds < 3) {
        // Disjunctive premise: neither disjunct follows.
        premises.push_back(Formula::disj(fol::ground_atom(preds[0], {c}), fol::ground_atom(preds[1], {c})));
        h = fol::ground_atom(preds[rng_.below(2)], {c});
      } else if (variant == 1) {
        // A rule whose antecedent is never established.
        premises.push_back(rule(preds[0], preds[1], false));
        premises.push_back(fol::ground_atom(preds[2], {c}));
        h = fol::ground_atom(preds[1], {c});
      } else {
        // A chain about one individual, hypothesis about another (or an
        // unrelated predicate when only one constant exists).
        premises.push_back(fol::ground_atom(preds[0], {c}));
        premises.push_back(rule(preds[0], preds[1], false));
        const std::string& other = n_consts > 1 ? consts[1] : c;
        h = n_consts > 1 ? fol::ground_atom(preds[1], {other}) : fol::ground_atom(preds[2], {c});
      }
    } else {
      // Entailing chain p0(c), p0->p1, ..., with the last link negated for
      // a False gold (or the hypothesis negated instead).
      const std::size_t links = 1 + rng_.below(n_preds - 1);
      premises.push_back(fol::ground_atom(preds[0], {c}));
      const bool negate_last_link = target == Label::False && rng_.below(2) == 0;
      for (std::size_t i = 0; i < links; ++i)
        premises.push_back(rule(preds[i], preds[i + 1], negate_last_link && i + 1 == links));
      h = fol::ground_atom(preds[links], {c});
      if (target == Label::False && !negate_last_link) h = Formula::negation(h);
      if (variant == 1) {
        // Weaken with a disjunct: still decided by the chain.
        const std::string& d = consts[rng_.below(n_consts)];
        const Formula extra = fol::ground_atom(preds[rng_.below(n_preds)], {d});
        h = target == Label::True ? Formula::disj(h, extra) : Formula::conj(h, extra);
      } else if (variant == 2) {
        h = Formula::exists("x", substitute_constant(h, c));
      }
    }

    // Distractor literals about other individuals or predicates.
    const std::size_t distractors = rng_.below(3);
    for (std::size_t k = 0; k < distractors; ++k) {
      Formula lit = fol::ground_atom(preds[rng_.below(n_preds)], {consts[rng_.below(n_consts)]});
      if (rng_.below(2)) lit = Formula::negation(lit);
      premises.push_back(lit);
    }
    shuffle(premises);
    return {std::move(premises), std::move(h)};
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng_.below(i)]);
  }

 private:
  static fol::Formula rule(const std::string& from, const std::string& to, bool negated_consequent) {
    using fol::Formula;
    using fol::Term;
    Formula consequent = Formula::atom(to, {Term::variable("x")});
    if (negated_consequent) consequent = Formula::negation(consequent);
    return Formula::forall("x", Formula::implies(Formula::atom(from, {Term::variable("x")}), std::move(consequent)));
  }

  // Replaces constant c by the variable x throughout f.
  static fol::Formula substitute_constant(const fol::Formula& f, const std::string& c) {
    using fol::Formula;
    return std::visit(
        [&](const auto& n) -> Formula {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, fol::Atom>) {
            std::vector<fol::Term> args;
            for (const auto& t : n.args)
              args.push_back(!t.is_variable() && t.name == c ? fol::Term::variable("x") : t);
            return Formula::atom(n.predicate, std::move(args));
          } else if constexpr (std::is_same_v<T, fol::Negation>) {
            return Formula::negation(substitute_constant(n.body, c));
          } else if constexpr (std::is_same_v<T, fol::Binary>) {
            return Formula::binary(n.op, substitute_constant(n.left, c), substitute_constant(n.right, c));
          } else {
            return f;
          }
        },
        f.node());
  }

  static constexpr const char* kPreds[] = {"Red", "Round", "Heavy", "Shiny"};
  static constexpr const char* kConsts[] = {"ann", "bob", "cal"};

  SplitMix64& rng_;
};

}  // namespace detail

// n examples whose golds are verified by the oracle. round(n * fraction)
// are decisive (True/False split evenly, odd one random), the rest Unknown.
inline std::vector<Example> generate_synthetic(std::size_t n, double decisive_fraction, std::uint64_t seed,
                                               const oracle::OracleConfig& cfg = {}) {
  if (n < 1) throw std::invalid_argument("synthetic dataset needs n >= 1");
  if (!(decisive_fraction >= 0.0 && decisive_fraction <= 1.0))
    throw std::invalid_argument("decisive_fraction must lie in [0,1]");
  SplitMix64 rng(seed);
  detail::SyntheticBuilder builder(rng);

  const auto decisive = static_cast<std::size_t>(std::llround(static_cast<double>(n) * decisive_fraction));
  std::vector<Label> targets;
  targets.reserve(n);
  for (std::size_t i = 0; i < decisive; ++i) targets.push_back(i % 2 == 0 ? Label::True : Label::False);
  if (decisive % 2 == 1 && rng.below(2)) targets.back() = Label::True == targets.back() ? Label::False : Label::True;
  targets.resize(n, Label::Unknown);
  builder.shuffle(targets);

  constexpr int kAttempts = 1000;
  std::vector<Example> out;
  out.reserve(n);
  char id[32];
  for (std::size_t i = 0; i < n; ++i) {
    bool done = false;
    for (int attempt = 0; attempt < kAttempts && !done; ++attempt) {
      auto [premises, h] = builder.attempt(targets[i]);
      try {
        if (oracle::three_way_label(premises, h, cfg) != targets[i]) continue;
      } catch (const oracle::InconsistentPremises&) {
        continue;
      }
      Example ex;
      std::snprintf(id, sizeof id, "syn-%05zu", i);
      ex.id = id;
      for (const auto& p : premises) ex.premise_texts.push_back(fol::render(p));
      ex.premises = std::move(premises);
      ex.hypothesis_text = fol::render(h);
      ex.hypothesis = std::move(h);
      ex.gold = targets[i];
      out.push_back(std::move(ex));
      done = true;
    }
    if (!done) throw GenerationBudgetExceeded("could not generate a verified example after " + std::to_string(kAttempts) + " attempts");
  }
  return out;
}

}  // namespace cgdpd::dataset
