#include <gtest/gtest.h>

#include <set>

#include "cgdpd/dataset.hpp"
#include "cgdpd/decoder.hpp"
#include "support/instance_gen.hpp"

namespace fol = cgdpd::fol;
using namespace cgdpd;
using Script = ScriptedBackend::Script;
using Choice = ScriptedBackend::AdjudicatorChoice;

namespace {

const fol::Formula kH = fol::ground_atom("P", {"a"});
const std::vector<fol::Formula> kPremises = {fol::ground_atom("Q", {"a"})};
const Problem kProblem{"scripted", kPremises};

Decision run(const Script& s) {
  ScriptedBackend b(s);
  return decide_cgdpd(b, NegatorKind::Formula, kProblem, kH);
}

// Fails on the n-th probe (0-based), answering Unknown/No before that.
class FailingBackend final : public Backend {
 public:
  explicit FailingBackend(int fail_at) : fail_at_(fail_at) {}
  Label classify(const Problem&, const Hypothesis&) override {
    tick();
    return Label::Unknown;
  }
  BinaryAnswer entails_yes_no(const Problem&, const Hypothesis&) override {
    tick();
    return BinaryAnswer::No;
  }
  std::string name() const override { return "failing"; }

 protected:
  FixOutcome do_fix_unknown(const Problem&, const Hypothesis&) override {
    tick();
    return FixOutcome::unknown();
  }
  Label do_adjudicate(const Problem&, const Hypothesis&, Label y_h, Label) override {
    tick();
    return y_h;
  }

 private:
  void tick() {
    if (n_++ == fail_at_) throw BackendError("transport failure");
  }
  int fail_at_;
  int n_ = 0;
};

}  // namespace

TEST(Decoder, UnknownThenTrueProjectsToFalse) {
  Script s;
  s.classify_h = Label::Unknown;
  s.classify_neg = Label::True;
  s.fix_h = Label::Unknown;
  const Decision d = run(s);
  EXPECT_EQ(d.label, Label::False);
  EXPECT_EQ(d.trace.stage, Stage::ProjectedAfterFix);
  EXPECT_EQ(d.trace.calls, 3);
}

TEST(Decoder, AllUnknownPreservesUnknownInSixCalls) {
  Script s;
  s.probe_h = BinaryAnswer::No;
  s.probe_neg = BinaryAnswer::No;
  const Decision d = run(s);
  EXPECT_EQ(d.label, Label::Unknown);
  EXPECT_EQ(d.trace.stage, Stage::BinaryProbes);
  EXPECT_EQ(d.trace.calls, 6);
  ASSERT_EQ(d.trace.fixes.size(), 2U);
  EXPECT_EQ(d.trace.fixes[0].polarity, Polarity::Positive);
  EXPECT_EQ(d.trace.fixes[1].polarity, Polarity::Negated);
}

TEST(Decoder, DecisiveConflictIsAdjudicated) {
  Script s;
  s.classify_h = Label::True;
  s.classify_neg = Label::True;
  s.adjudicator = Choice::MapNegation;
  const Decision d = run(s);
  EXPECT_EQ(d.label, Label::False);
  EXPECT_EQ(d.trace.stage, Stage::Adjudicated);
  EXPECT_EQ(d.trace.calls, 3);
  EXPECT_TRUE(d.trace.adjudicated);
}

TEST(Decoder, ConsistentPairTouchesNothingElse) {
  for (const auto& [a, b] : {std::pair{Label::True, Label::False}, std::pair{Label::False, Label::True}}) {
    Script s;
    s.classify_h = a;
    s.classify_neg = b;
    ScriptedBackend backend(s);
    const Decision d = decide_cgdpd(backend, NegatorKind::Formula, kProblem, kH);
    EXPECT_EQ(d.label, a);
    EXPECT_EQ(d.trace.stage, Stage::ConsistentPair);
    EXPECT_EQ(d.trace.calls, 2);
    EXPECT_EQ(backend.calls().size(), 2U);
    EXPECT_TRUE(d.trace.fixes.empty());
    EXPECT_FALSE(d.trace.probes.has_value());
  }
}

TEST(Decoder, ConsistentUnknownPairStillGoesToFixers) {
  Script s;
  s.fix_h = Label::True;
  const Decision d = run(s);
  EXPECT_EQ(d.label, Label::True);
  EXPECT_EQ(d.trace.stage, Stage::ProjectedAfterFix);
  EXPECT_EQ(d.trace.calls, 4);
}

TEST(Decoder, FixedPairThatBecameConsistentSkipsAdjudicator) {
  Script s;
  s.fix_h = Label::True;
  s.fix_neg = Label::False;
  ScriptedBackend backend(s);
  const Decision d = decide_cgdpd(backend, NegatorKind::Formula, kProblem, kH);
  EXPECT_EQ(d.label, Label::True);
  EXPECT_EQ(d.trace.stage, Stage::Adjudicated);
  EXPECT_EQ(d.trace.calls, 4);
  EXPECT_FALSE(d.trace.adjudicated);
  EXPECT_EQ(backend.calls().size(), 4U);
}

TEST(Decoder, OneFixConflictingWithOtherSideAdjudicates) {
  Script s;
  s.classify_h = Label::True;
  s.classify_neg = Label::Unknown;
  s.fix_neg = Label::True;
  const Decision d = run(s);
  EXPECT_EQ(d.trace.stage, Stage::Adjudicated);
  EXPECT_EQ(d.trace.calls, 4);
  EXPECT_EQ(d.label, Label::True);
}

TEST(Decoder, ProbeRule) {
  const std::pair<std::pair<BinaryAnswer, BinaryAnswer>, Label> cases[] = {
      {{BinaryAnswer::Yes, BinaryAnswer::No}, Label::True},
      {{BinaryAnswer::No, BinaryAnswer::Yes}, Label::False},
      {{BinaryAnswer::No, BinaryAnswer::No}, Label::Unknown},
      {{BinaryAnswer::Yes, BinaryAnswer::Yes}, Label::Unknown},
  };
  for (const auto& [probes, expected] : cases) {
    Script s;
    s.probe_h = probes.first;
    s.probe_neg = probes.second;
    const Decision d = run(s);
    EXPECT_EQ(d.label, expected);
    EXPECT_EQ(d.trace.stage, Stage::BinaryProbes);
    EXPECT_EQ(probe_rule(probes.first, probes.second), expected);
  }
}

TEST(Decoder, SingleBaseline) {
  OracleBackend oracle;
  const std::vector<fol::Formula> s = {kH};
  const Decision d = decide_single(oracle, {"single", s}, kH);
  EXPECT_EQ(d.label, Label::True);
  EXPECT_EQ(d.trace.calls, 1);
  EXPECT_EQ(d.trace.stage, Stage::SingleShot);

  NoisyBackend unknown({1.0, 0.0, 0.0, 0});
  EXPECT_EQ(decide_single(unknown, {"single", s}, kH).label, Label::Unknown);

  const std::vector<fol::Formula> other = {fol::ground_atom("Q", {"a"})};
  EXPECT_EQ(decide_single(oracle, {"single", other}, kH).label, Label::Unknown);
}

TEST(Decoder, ErrorCarriesPartialTrace) {
  for (int k = 0; k < 6; ++k) {
    FailingBackend b(k);
    try {
      (void)decide_cgdpd(b, NegatorKind::Formula, kProblem, kH);
      FAIL() << "expected failure at probe " << k;
    } catch (const DecodeError& e) {
      EXPECT_EQ(e.partial().calls, k);
      if (k >= 1) {
        EXPECT_EQ(e.partial().y_h_initial, Label::Unknown);
      }
      EXPECT_NE(std::string(e.what()).find("transport"), std::string::npos);
    }
  }
}

TEST(Paths, EnumerationCoversStagesAndCalls) {
  const auto rows = decision_path_enumeration();
  std::set<Stage> stages;
  std::set<int> calls;
  for (const auto& r : rows) {
    stages.insert(r.stage);
    calls.insert(r.calls);
    EXPECT_GE(r.calls, 2);
    EXPECT_LE(r.calls, 6);
  }
  EXPECT_EQ(stages, (std::set<Stage>{Stage::ConsistentPair, Stage::ProjectedAfterFix, Stage::BinaryProbes, Stage::Adjudicated}));
  EXPECT_EQ(calls, (std::set<int>{2, 3, 4, 5, 6}));
}

TEST(Paths, SpecificRows) {
  const auto rows = decision_path_enumeration();
  auto find = [&](const std::string& sig) -> const PathRow* {
    for (const auto& r : rows)
      if (r.signature == sig) return &r;
    return nullptr;
  };
  const auto* tf = find("classify(H)=T classify(negH)=F");
  ASSERT_NE(tf, nullptr);
  EXPECT_EQ(tf->calls, 2);
  const auto* uu = find("classify(H)=U classify(negH)=U fix(H)=U fix(negH)=U entails(H)=No entails(negH)=No");
  ASSERT_NE(uu, nullptr);
  EXPECT_EQ(uu->calls, 6);
  EXPECT_EQ(uu->label, Label::Unknown);
  const auto* tt = find("classify(H)=T classify(negH)=T adjudicate=F");
  ASSERT_NE(tt, nullptr);
  EXPECT_EQ(tt->calls, 3);
}

TEST(Properties, TraceRederivesLabelAndFinalPairConsistent) {
  for (const Label c_h : kAllLabels)
    for (const Label c_neg : kAllLabels)
      for (const Label f_h : kAllLabels)
        for (const Label f_neg : kAllLabels)
          for (const BinaryAnswer p_h : {BinaryAnswer::Yes, BinaryAnswer::No})
            for (const BinaryAnswer p_neg : {BinaryAnswer::Yes, BinaryAnswer::No})
              for (const Choice adj : {Choice::KeepHypothesis, Choice::MapNegation}) {
                const Decision d = run({c_h, c_neg, f_h, f_neg, p_h, p_neg, adj});
                ASSERT_EQ(rederive_label(d.trace), d.label);
                ASSERT_TRUE(pair_consistent(d.label, neg_map(d.label)));
                if (d.trace.stage == Stage::BinaryProbes) {
                  const auto [b_h, b_neg] = *d.trace.probes;
                  if (d.label == Label::True) {
                    ASSERT_TRUE(b_h == BinaryAnswer::Yes && b_neg == BinaryAnswer::No);
                  }
                  if (d.label == Label::False) {
                    ASSERT_TRUE(b_h == BinaryAnswer::No && b_neg == BinaryAnswer::Yes);
                  }
                }
                if (d.trace.probes) {
                  for (const auto& f : d.trace.fixes) ASSERT_EQ(f.outcome.label, Label::Unknown);
                }
              }
}

TEST(Properties, OracleFixpointOnGeneratedInstances) {
  gen::Generator g(77);
  OracleBackend oracle;
  for (int i = 0; i < 300; ++i) {
    const auto inst = g.next();
    const std::string id = "gen-" + std::to_string(i);
    const Problem p{id, inst.premises};
    const Label gold = oracle::three_way_label(inst.premises, inst.hypothesis);
    for (const auto negator : {NegatorKind::Formula, NegatorKind::NotWrapper}) {
      const Decision d = decide_cgdpd(oracle, negator, p, inst.hypothesis);
      ASSERT_EQ(d.label, gold);
      ASSERT_EQ(d.trace.calls, is_decisive(gold) ? 2 : 6);
    }
    ASSERT_EQ(decide_single(oracle, p, inst.hypothesis).label, gold);
  }
}
