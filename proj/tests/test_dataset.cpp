#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cgdpd/dataset.hpp"

using namespace cgdpd;
using namespace cgdpd::dataset;

namespace {

class TempFile {
 public:
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cgdpd-dataset-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".jsonl");
    std::ofstream(path_) << contents;
  }
  ~TempFile() { std::filesystem::remove(path_); }
  std::string path() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

const char* kGoodLines =
    R"j({"example_id": "e1", "premises-FOL": ["∀x (Man(x) → Mortal(x))", "Man(socrates)"], "conclusion-FOL": "Mortal(socrates)", "label": "True"})j"
    "\n"
    R"j({"example_id": "e2", "premises-FOL": ["In(p, nm) ∨ In(p, tx)"], "conclusion-FOL": "In(p, tx)", "label": "Uncertain"})j"
    "\n"
    R"j({"example_id": "e3", "premises-FOL": ["P(a)"], "conclusion-FOL": "¬P(a)", "label": "false"})j"
    "\n";

}  // namespace

TEST(NormalizeLabel, Vocabulary) {
  EXPECT_EQ(normalize_label("True"), Label::True);
  EXPECT_EQ(normalize_label("false"), Label::False);
  EXPECT_EQ(normalize_label("Unknown"), Label::Unknown);
  EXPECT_EQ(normalize_label("UNCERTAIN"), Label::Unknown);
  EXPECT_EQ(normalize_label("  true\n"), Label::True);
  EXPECT_THROW(normalize_label("maybe"), UnknownLabelString);
  EXPECT_THROW(normalize_label(""), UnknownLabelString);
}

TEST(Loader, ReadsExamples) {
  TempFile f(kGoodLines);
  const auto r = load_folio_jsonl(f.path());
  ASSERT_EQ(r.examples.size(), 3U);
  EXPECT_EQ(r.stats.n, 3U);
  EXPECT_EQ(r.stats.parse_failures, 0U);
  EXPECT_EQ(r.examples[0].id, "e1");
  EXPECT_EQ(r.examples[0].gold, Label::True);
  EXPECT_EQ(r.examples[0].premises.size(), 2U);
  EXPECT_EQ(r.examples[0].premise_texts[1], "Man(socrates)");
  EXPECT_EQ(r.examples[0].hypothesis_text, "Mortal(socrates)");
  EXPECT_EQ(r.examples[1].gold, Label::Unknown);
  EXPECT_EQ(r.examples[2].gold, Label::False);
  EXPECT_EQ(r.stats.label_counts.at(Label::True), 1U);
  EXPECT_EQ(r.stats.label_counts.at(Label::Unknown), 1U);
  EXPECT_EQ(r.stats.label_counts.at(Label::False), 1U);
}

TEST(Loader, UnknownLabelLine) {
  TempFile f(R"j({"premises-FOL": ["P(a)"], "conclusion-FOL": "Q(a)", "label": "Unknown"})j"
             "\n");
  const auto r = load_folio_jsonl(f.path());
  ASSERT_EQ(r.examples.size(), 1U);
  EXPECT_EQ(r.examples[0].gold, Label::Unknown);
  EXPECT_EQ(r.examples[0].id, "line-1");
}

TEST(Loader, SkipsBadLinesAndStaysTotal) {
  std::string text = kGoodLines;
  text += R"j({"premises-FOL": ["P(a)"], "conclusion-FOL": "P(a) ∧", "label": "True"})j"
          "\n";                                                                          // bad conclusion
  text += "not json\n";                                                                  // bad JSON
  text += R"j({"premises-FOL": ["P(a)"], "label": "True"})j"
          "\n";                                                                          // missing field
  text += R"j({"premises-FOL": ["P(a)"], "conclusion-FOL": "P(a)", "label": "maybe"})j"
          "\n";                                                                          // bad label
  text += R"j({"premises-FOL": [], "conclusion-FOL": "P(a)", "label": "True"})j"
          "\n";                                                                          // no premises
  text += "\n   \n";                                                                     // blank, ignored
  TempFile f(text);
  std::ostringstream diag;
  LoadOptions opts;
  opts.diagnostics = &diag;
  const auto r = load_folio_jsonl(f.path(), opts);
  EXPECT_EQ(r.stats.n, 3U);
  EXPECT_EQ(r.stats.parse_failures, 5U);
  EXPECT_EQ(r.stats.n + r.stats.parse_failures, 8U);
  ASSERT_EQ(r.stats.parse_failure_lines.size(), 5U);
  EXPECT_EQ(r.stats.parse_failure_lines[0].id, "line 4");
  EXPECT_NE(r.stats.parse_failure_lines[0].reason.find("conclusion"), std::string::npos);
  EXPECT_NE(diag.str().find(":4: skipped"), std::string::npos);
}

TEST(Loader, StrictModeIsFatal) {
  TempFile f(std::string(kGoodLines) + "garbage\n");
  LoadOptions opts;
  opts.strict = true;
  EXPECT_THROW(load_folio_jsonl(f.path(), opts), MalformedLine);
}

TEST(Loader, MissingFile) {
  EXPECT_THROW(load_folio_jsonl("/nonexistent/cgdpd.jsonl"), FileNotFound);
}

TEST(Loader, NewlineSeparatedPremiseString) {
  TempFile f(R"j({"id": 7, "premises": "P(a)\nP(a) → Q(a)\n", "conclusion": "Q(a)", "answer": "True"})j"
             "\n");
  LoadOptions opts;
  opts.fields = {"premises", "conclusion", "answer", "id"};
  const auto r = load_folio_jsonl(f.path(), opts);
  ASSERT_EQ(r.examples.size(), 1U);
  EXPECT_EQ(r.examples[0].id, "7");
  EXPECT_EQ(r.examples[0].premises.size(), 2U);
  EXPECT_EQ(oracle::three_way_label(r.examples[0].premises, r.examples[0].hypothesis), Label::True);
}

TEST(Loader, DefaultFieldNamesRejectRemappedFile) {
  TempFile f(R"j({"premises": ["P(a)"], "conclusion": "Q(a)", "answer": "True"})j"
             "\n");
  const auto r = load_folio_jsonl(f.path());
  EXPECT_EQ(r.stats.n, 0U);
  EXPECT_EQ(r.stats.parse_failures, 1U);
}

TEST(Loader, StableOrder) {
  TempFile f(kGoodLines);
  const auto a = load_folio_jsonl(f.path()), b = load_folio_jsonl(f.path());
  ASSERT_EQ(a.examples.size(), b.examples.size());
  for (std::size_t i = 0; i < a.examples.size(); ++i) EXPECT_EQ(a.examples[i].id, b.examples[i].id);
}

TEST(Validate, LoadedGoldsAgree) {
  TempFile f(kGoodLines);
  const auto r = load_folio_jsonl(f.path());
  const auto s = validate_with_oracle(r.examples);
  EXPECT_EQ(s.oracle_disagreements, 0U);
  EXPECT_EQ(s.budget_exceeded, 0U);
  EXPECT_EQ(s.n, 3U);
}

TEST(Validate, InconsistentPremisesAndWrongGold) {
  TempFile f(R"j({"example_id": "bad", "premises-FOL": ["P(a)", "¬P(a)"], "conclusion-FOL": "Q(a)", "label": "True"})j"
             "\n"
             R"j({"example_id": "wrong", "premises-FOL": ["P(a)"], "conclusion-FOL": "P(a)", "label": "False"})j"
             "\n");
  const auto r = load_folio_jsonl(f.path());
  const auto s = validate_with_oracle(r.examples);
  EXPECT_EQ(s.oracle_disagreements, 2U);
  ASSERT_EQ(s.disagreements.size(), 2U);
  EXPECT_EQ(s.disagreements[0].id, "bad");
  EXPECT_EQ(s.disagreements[0].reason, "inconsistent premises");
  EXPECT_EQ(s.disagreements[1].id, "wrong");
  EXPECT_EQ(r.examples[1].gold, Label::False);  // golds are never mutated
}

TEST(Validate, BudgetExceededIsCounted) {
  TempFile f(R"j({"example_id": "big", "premises-FOL": ["∀x ∀y R(x, y)", "R(a, b) ∨ R(c, d)"], "conclusion-FOL": "R(e, a)", "label": "True"})j"
             "\n");
  const auto r = load_folio_jsonl(f.path());
  oracle::OracleConfig cfg;
  cfg.max_ground_atoms = 10;  // 5 constants give 25 ground atoms
  const auto s = validate_with_oracle(r.examples, cfg);
  EXPECT_EQ(s.budget_exceeded, 1U);
  EXPECT_EQ(s.oracle_disagreements, 0U);
  ASSERT_EQ(s.over_budget.size(), 1U);
  EXPECT_EQ(s.over_budget[0].id, "big");
}

TEST(Synthetic, MixtureContract) {
  const auto xs = generate_synthetic(4, 0.5, 11);
  std::size_t decisive = 0;
  for (const auto& x : xs) decisive += is_decisive(x.gold);
  EXPECT_EQ(decisive, 2U);
  for (const double frac : {0.0, 0.3, 0.5, 1.0}) {
    const auto ys = generate_synthetic(51, frac, 5);
    std::size_t d = 0;
    for (const auto& y : ys) d += is_decisive(y.gold);
    EXPECT_LE(std::abs(static_cast<double>(d) - 51 * frac), 1.0) << frac;
  }
}

TEST(Synthetic, OracleSoundness) {
  const auto xs = generate_synthetic(400, 0.5, 99);
  ASSERT_EQ(xs.size(), 400U);
  std::map<Label, int> seen;
  for (const auto& x : xs) {
    ASSERT_EQ(oracle::three_way_label(x.premises, x.hypothesis), x.gold) << x.id;
    ASSERT_FALSE(x.premises.empty());
    ++seen[x.gold];
  }
  EXPECT_GT(seen[Label::True], 0);
  EXPECT_GT(seen[Label::False], 0);
  EXPECT_EQ(validate_with_oracle(xs).oracle_disagreements, 0U);
}

TEST(Synthetic, TextsRoundTrip) {
  for (const auto& x : generate_synthetic(50, 0.5, 3)) {
    ASSERT_EQ(fol::render(fol::parse_formula(x.hypothesis_text)), fol::render(x.hypothesis));
    for (std::size_t i = 0; i < x.premises.size(); ++i)
      ASSERT_EQ(fol::render(fol::parse_formula(x.premise_texts[i])), fol::render(x.premises[i]));
  }
}

TEST(Synthetic, Deterministic) {
  const auto a = generate_synthetic(60, 0.5, 1234), b = generate_synthetic(60, 0.5, 1234);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].gold, b[i].gold);
    EXPECT_EQ(a[i].hypothesis_text, b[i].hypothesis_text);
    EXPECT_EQ(a[i].premise_texts, b[i].premise_texts);
  }
  const auto c = generate_synthetic(60, 0.5, 1235);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].hypothesis_text != c[i].hypothesis_text;
  EXPECT_TRUE(differs);
}

TEST(Synthetic, RejectsBadArguments) {
  EXPECT_THROW(generate_synthetic(0, 0.5, 1), std::invalid_argument);
  EXPECT_THROW(generate_synthetic(5, 1.5, 1), std::invalid_argument);
  EXPECT_THROW(generate_synthetic(5, -0.1, 1), std::invalid_argument);
}
