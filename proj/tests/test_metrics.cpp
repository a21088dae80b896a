#include <gtest/gtest.h>

#include "cgdpd/metrics.hpp"
#include "cgdpd/report.hpp"

using namespace cgdpd;
using metrics::PredictionRecord;
using metrics::Statistic;

namespace {

constexpr Label T = Label::True;
constexpr Label F = Label::False;
constexpr Label U = Label::Unknown;

std::vector<PredictionRecord> records(std::initializer_list<std::pair<Label, Label>> gold_pred) {
  std::vector<PredictionRecord> out;
  for (const auto& [g, p] : gold_pred) {
    PredictionRecord r;
    r.example_id = "ex-" + std::to_string(out.size());
    r.gold = g;
    r.predicted = p;
    out.push_back(r);
  }
  return out;
}

// n records with the given golds; the first `correct` are predicted right and
// the rest predicted Unknown (wrong, since every gold is decisive).
std::vector<PredictionRecord> scored_run(std::size_t n, std::size_t correct) {
  std::vector<PredictionRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].example_id = "ex-" + std::to_string(i);
    out[i].gold = i % 2 ? T : F;
    out[i].predicted = i < correct ? out[i].gold : U;
  }
  return out;
}

}  // namespace

TEST(Metrics, HandCountedFixture) {
  const auto rs = records({{T, T}, {T, U}, {F, F}, {U, U}});
  const auto m = metrics::compute_metrics(rs);
  EXPECT_EQ(m.accuracy, 0.75);
  EXPECT_EQ(m.unknown_rate, 0.5);
  ASSERT_TRUE(m.epistemic_unknown_rate.has_value());
  EXPECT_EQ(m.epistemic_unknowns, 1U);
  EXPECT_EQ(m.decisive_gold, 3U);
  EXPECT_DOUBLE_EQ(*m.epistemic_unknown_rate, 1.0 / 3.0);
  EXPECT_EQ(m.coverage, 0.5);
  ASSERT_TRUE(m.answered_accuracy.has_value());
  EXPECT_EQ(*m.answered_accuracy, 1.0);
  EXPECT_EQ(m.n, 4U);
  EXPECT_EQ(m.mean_calls, 1.0);
}

TEST(Metrics, AllCorrect) {
  const auto m = metrics::compute_metrics(records({{T, T}, {F, F}, {U, U}}));
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(*m.epistemic_unknown_rate, 0.0);
}

TEST(Metrics, AllUnknownOnDecisiveGolds) {
  const auto m = metrics::compute_metrics(records({{T, U}, {F, U}}));
  EXPECT_EQ(m.accuracy, 0.0);
  EXPECT_EQ(m.unknown_rate, 1.0);
  EXPECT_EQ(*m.epistemic_unknown_rate, 1.0);
  EXPECT_EQ(m.coverage, 0.0);
  EXPECT_FALSE(m.answered_accuracy.has_value());
}

TEST(Metrics, EpistemicUndefinedWithoutDecisiveGolds) {
  const auto m = metrics::compute_metrics(records({{U, U}, {U, T}}));
  EXPECT_FALSE(m.epistemic_unknown_rate.has_value());
}

TEST(Metrics, EmptyInputAndErroredRecords) {
  EXPECT_THROW(metrics::compute_metrics({}), metrics::EmptyInput);
  auto rs = records({{T, T}, {F, U}});
  rs[1].error = "timeout";
  const auto m = metrics::compute_metrics(rs);
  EXPECT_EQ(m.n, 1U);
  EXPECT_EQ(m.n_errors, 1U);
  EXPECT_EQ(m.accuracy, 1.0);
  rs[0].error = "timeout";
  EXPECT_THROW(metrics::compute_metrics(rs), metrics::EmptyInput);
}

TEST(Metrics, CallHistogram) {
  auto rs = records({{T, T}, {T, T}, {U, U}, {U, U}});
  rs[0].calls = 2;
  rs[1].calls = 2;
  rs[2].calls = 6;
  rs[3].calls = 3;
  const auto m = metrics::compute_metrics(rs);
  EXPECT_EQ(m.mean_calls, 13.0 / 4.0);
  EXPECT_EQ(m.call_histogram, (std::map<int, double>{{2, 0.5}, {3, 0.25}, {6, 0.25}}));
}

TEST(Metrics, InvariantsOnRandomRuns) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PredictionRecord> rs(1 + rng.below(40));
    for (auto& r : rs) {
      r.example_id = "ex-" + std::to_string(&r - rs.data());
      r.gold = kAllLabels[rng.below(3)];
      r.predicted = kAllLabels[rng.below(3)];
      r.calls = 1 + static_cast<int>(rng.below(6));
    }
    const auto m = metrics::compute_metrics(rs);
    ASSERT_EQ(m.coverage + m.unknown_rate, 1.0);
    std::size_t uu = 0;
    for (const auto& r : rs) uu += r.gold == U && r.predicted == U;
    const double unknown_correct = static_cast<double>(uu) / static_cast<double>(rs.size());
    const double answered = m.answered_accuracy.value_or(0.0) * m.coverage;
    ASSERT_NEAR(m.accuracy, answered + unknown_correct, 1e-12);
    double hist = 0.0;
    for (const auto& [c, frac] : m.call_histogram) hist += frac;
    ASSERT_NEAR(hist, 1.0, 1e-12);
    for (const double v : {m.accuracy, m.unknown_rate, m.coverage}) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }

    const auto c = metrics::confusion(rs);
    std::size_t total = 0;
    for (std::size_t g = 0; g < 3; ++g) {
      std::size_t row = 0, gold_total = 0;
      for (std::size_t p = 0; p < 3; ++p) row += c.counts[g][p];
      for (const auto& r : rs) gold_total += index_of(r.gold) == g;
      ASSERT_EQ(row, gold_total);
      total += row;
      double norm = 0.0;
      for (std::size_t p = 0; p < 3; ++p) norm += c.row_normalized[g][p];
      ASSERT_NEAR(norm, row ? 1.0 : 0.0, 1e-12);
      ASSERT_EQ(c.empty_row[g], row == 0);
    }
    ASSERT_EQ(total, rs.size());
  }
}

TEST(Confusion, SingleRecord) {
  const auto c = metrics::confusion(records({{T, U}}));
  EXPECT_EQ(c.counts[index_of(T)][index_of(U)], 1U);
  EXPECT_EQ(c.row_normalized[index_of(T)][index_of(U)], 1.0);
  EXPECT_TRUE(c.empty_row[index_of(F)]);
  EXPECT_TRUE(c.empty_row[index_of(U)]);
  EXPECT_EQ(c.row_normalized[index_of(F)], (std::array<double, 3>{0.0, 0.0, 0.0}));
}

TEST(Confusion, PerfectIsDiagonal) {
  const auto c = metrics::confusion(records({{T, T}, {F, F}, {U, U}, {T, T}}));
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t p = 0; p < 3; ++p) EXPECT_EQ(c.row_normalized[g][p], g == p ? 1.0 : 0.0);
  EXPECT_EQ(c.counts[index_of(T)][index_of(T)], 2U);
}

TEST(Confusion, SplitRow) {
  const auto c = metrics::confusion(records({{T, T}, {T, F}}));
  EXPECT_EQ(c.row_normalized[index_of(T)], (std::array<double, 3>{0.5, 0.5, 0.0}));
  EXPECT_THROW(metrics::confusion({}), metrics::EmptyInput);
}

TEST(Bootstrap, IdenticalRunsGiveZeroInterval) {
  const auto a = scored_run(50, 30);
  for (const auto s : {Statistic::Accuracy, Statistic::UnknownRate, Statistic::EpistemicUnknownRate}) {
    const auto ci = metrics::paired_bootstrap(a, a, s, 500, 1);
    EXPECT_EQ(ci.point_delta, 0.0);
    EXPECT_EQ(ci.lo, 0.0);
    EXPECT_EQ(ci.hi, 0.0);
    EXPECT_FALSE(ci.excludes_zero());
  }
}

TEST(Bootstrap, DominationForcesPositiveLowerBound) {
  const auto a = scored_run(40, 0);
  const auto b = scored_run(40, 40);
  const auto ci = metrics::paired_bootstrap(a, b, Statistic::Accuracy, 1000, 2);
  EXPECT_GT(ci.lo, 0.0);
  EXPECT_EQ(ci.point_delta, 1.0);
  EXPECT_LE(ci.lo, ci.hi);
}

TEST(Bootstrap, PointDeltaOnConstructedFixture) {
  const auto a = scored_run(204, 130);
  const auto b = scored_run(204, 139);
  const auto ma = metrics::compute_metrics(a), mb = metrics::compute_metrics(b);
  EXPECT_EQ(ma.correct, 130U);
  EXPECT_EQ(mb.correct, 139U);
  const auto ci = metrics::paired_bootstrap(a, b, Statistic::Accuracy, 2000, 3);
  EXPECT_NEAR(ci.point_delta, 9.0 / 204.0, 1e-12);
  EXPECT_NEAR(ci.point_delta, 0.0441, 1e-4);
  EXPECT_LE(ci.lo, ci.hi);
}

TEST(Bootstrap, PairsByIdNotPosition) {
  const auto a = scored_run(30, 10);
  auto b = a;
  std::reverse(b.begin(), b.end());
  const auto ci = metrics::paired_bootstrap(a, b, Statistic::Accuracy, 300, 4);
  EXPECT_EQ(ci.lo, 0.0);
  EXPECT_EQ(ci.hi, 0.0);
}

TEST(Bootstrap, IdMismatchAndBadResampleCount) {
  const auto a = scored_run(10, 5);
  auto b = a;
  b.back().example_id = "other";
  EXPECT_THROW(metrics::paired_bootstrap(a, b, Statistic::Accuracy, 10), metrics::IdMismatch);
  b.pop_back();
  EXPECT_THROW(metrics::paired_bootstrap(a, b, Statistic::Accuracy, 10), metrics::IdMismatch);
  auto dup = a;
  dup[1].example_id = dup[0].example_id;
  EXPECT_THROW(metrics::paired_bootstrap(dup, dup, Statistic::Accuracy, 10), metrics::IdMismatch);
  EXPECT_THROW(metrics::paired_bootstrap(a, a, Statistic::Accuracy, 0), std::invalid_argument);
}

TEST(Bootstrap, DeterministicAndThreadInvariant) {
  SplitMix64 rng(9);
  auto a = scored_run(120, 0), b = scored_run(120, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (rng.bernoulli(0.6)) a[i].predicted = a[i].gold;
    if (rng.bernoulli(0.7)) b[i].predicted = b[i].gold;
  }
  const auto one = metrics::paired_bootstrap(a, b, Statistic::Accuracy, 3000, 42, 1);
  const auto again = metrics::paired_bootstrap(a, b, Statistic::Accuracy, 3000, 42, 1);
  const auto many = metrics::paired_bootstrap(a, b, Statistic::Accuracy, 3000, 42, 7);
  EXPECT_EQ(one.lo, again.lo);
  EXPECT_EQ(one.hi, again.hi);
  EXPECT_EQ(one.lo, many.lo);
  EXPECT_EQ(one.hi, many.hi);
}

TEST(Bootstrap, CalibrationSmoke) {
  // Each example is correct in run A with probability 0.6 and in run B with
  // probability 0.7, independently; the true edge is 0.1.
  SplitMix64 rng(2024);
  int covered = 0;
  constexpr int kTrials = 200;
  for (int t = 0; t < kTrials; ++t) {
    auto a = scored_run(300, 0), b = scored_run(300, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (rng.bernoulli(0.6)) a[i].predicted = a[i].gold;
      if (rng.bernoulli(0.7)) b[i].predicted = b[i].gold;
    }
    const auto ci = metrics::paired_bootstrap(a, b, Statistic::Accuracy, 400, static_cast<std::uint64_t>(t));
    covered += ci.lo <= 0.1 && 0.1 <= ci.hi;
  }
  EXPECT_GE(covered, kTrials * 9 / 10);
}

TEST(Bootstrap, ErroredRecordsDroppedPairwise) {
  auto a = scored_run(20, 10), b = scored_run(20, 20);
  b[0].error = "boom";
  const auto ci = metrics::paired_bootstrap(a, b, Statistic::Accuracy, 200, 1);
  // Example 0 is correct in A; dropping it leaves 9/19 vs 19/19.
  EXPECT_NEAR(ci.point_delta, 10.0 / 19.0, 1e-12);
}

TEST(Diff, IdenticalRuns) {
  const auto a = scored_run(10, 4);
  const auto d = metrics::diff_report(a, a);
  EXPECT_EQ(d.changed, 0U);
  EXPECT_TRUE(d.changed_ids.empty());
  EXPECT_TRUE(d.transitions.empty());
}

TEST(Diff, SingleFlip) {
  const auto a = records({{T, U}, {F, F}});
  auto b = a;
  b[0].predicted = T;
  const auto d = metrics::diff_report(a, b);
  EXPECT_EQ(d.changed, 1U);
  EXPECT_EQ(d.changed_ids, (std::vector<std::string>{"ex-0"}));
  EXPECT_EQ(d.transitions, (std::map<std::string, std::size_t>{{"Unknown->True", 1}}));
}

TEST(Diff, MaxCallsFraction) {
  const auto a = scored_run(204, 100);
  auto b = a;
  for (std::size_t i = 0; i < b.size(); ++i) b[i].calls = i < 110 ? 6 : 2;
  const auto d = metrics::diff_report(a, b);
  EXPECT_NEAR(d.max_calls_fraction, 110.0 / 204.0, 1e-12);
  EXPECT_NEAR(d.max_calls_fraction, 0.539, 1e-3);
  EXPECT_NEAR(d.method_call_fractions.at(2), 94.0 / 204.0, 1e-12);
  auto c = a;
  c[3].example_id = "zzz";
  EXPECT_THROW(metrics::diff_report(a, c), metrics::IdMismatch);
}

TEST(Display, PercentRounding) {
  EXPECT_EQ(report::display_percent(0.75), "75.0");
  EXPECT_EQ(report::display_percent(1.0 / 3.0), "33.3");
  EXPECT_EQ(report::display_percent(9.0 / 204.0), "4.4");
  EXPECT_EQ(report::display_percent(0.0005), "0.1");
  EXPECT_EQ(report::display_percent(1.0), "100.0");
  EXPECT_EQ(report::display_percent(0.0), "0.0");
}
