#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "cgdpd/decoder.hpp"
#include "cgdpd/label.hpp"
#include "cgdpd/rng.hpp"

namespace cgdpd::metrics {

class EmptyInput : public std::invalid_argument {
 public:
  EmptyInput() : std::invalid_argument("no scored records") {}
};

class IdMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PredictionRecord {
  std::string example_id;
  Label gold = Label::Unknown;
  Label predicted = Label::Unknown;
  int calls = 1;
  Stage stage = Stage::SingleShot;
  std::optional<bool> changed_vs_baseline;
  std::optional<std::string> error;  // set when the backend failed under keep-going

  bool scored() const noexcept { return !error.has_value(); }
};

struct Metrics {
  std::size_t n = 0;         // scored records
  std::size_t n_errors = 0;  // records excluded by backend failure
  std::size_t correct = 0;
  std::size_t unknown_predictions = 0;
  std::size_t decisive_gold = 0;
  std::size_t epistemic_unknowns = 0;  // gold decisive, predicted Unknown
  std::size_t answered_correct = 0;

  double accuracy = 0.0;
  double unknown_rate = 0.0;
  std::optional<double> epistemic_unknown_rate;  // undefined without decisive golds
  double coverage = 0.0;
  std::optional<double> answered_accuracy;       // undefined at zero coverage
  double mean_calls = 0.0;
  std::map<int, double> call_histogram;
};

inline Metrics compute_metrics(std::span<const PredictionRecord> records) {
  Metrics m;
  std::map<int, std::size_t> calls;
  std::size_t call_total = 0;
  for (const auto& r : records) {
    if (!r.scored()) {
      ++m.n_errors;
      continue;
    }
    ++m.n;
    m.correct += r.predicted == r.gold;
    const bool abstained = r.predicted == Label::Unknown;
    m.unknown_predictions += abstained;
    if (is_decisive(r.gold)) {
      ++m.decisive_gold;
      m.epistemic_unknowns += abstained;
    }
    if (!abstained) m.answered_correct += r.predicted == r.gold;
    ++calls[r.calls];
    call_total += static_cast<std::size_t>(r.calls);
  }
  if (m.n == 0) throw EmptyInput();

  const double n = static_cast<double>(m.n);
  const std::size_t answered = m.n - m.unknown_predictions;
  m.accuracy = static_cast<double>(m.correct) / n;
  m.unknown_rate = static_cast<double>(m.unknown_predictions) / n;
  m.coverage = static_cast<double>(answered) / n;
  if (m.decisive_gold) m.epistemic_unknown_rate = static_cast<double>(m.epistemic_unknowns) / static_cast<double>(m.decisive_gold);
  if (answered) m.answered_accuracy = static_cast<double>(m.answered_correct) / static_cast<double>(answered);
  m.mean_calls = static_cast<double>(call_total) / n;
  for (const auto& [c, k] : calls) m.call_histogram[c] = static_cast<double>(k) / n;
  return m;
}

struct Confusion {
  std::array<std::array<std::size_t, 3>, 3> counts{};        // [gold][predicted]
  std::array<std::array<double, 3>, 3> row_normalized{};
  std::array<bool, 3> empty_row{};                            // gold label absent; row left all-zero
};

inline Confusion confusion(std::span<const PredictionRecord> records) {
  Confusion c;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (!r.scored()) continue;
    ++c.counts[index_of(r.gold)][index_of(r.predicted)];
    ++n;
  }
  if (n == 0) throw EmptyInput();
  for (std::size_t g = 0; g < 3; ++g) {
    std::size_t row = 0;
    for (const auto k : c.counts[g]) row += k;
    c.empty_row[g] = row == 0;
    for (std::size_t p = 0; p < 3; ++p)
      c.row_normalized[g][p] = row ? static_cast<double>(c.counts[g][p]) / static_cast<double>(row) : 0.0;
  }
  return c;
}

// ---------------------------------------------------------------------------

enum class Statistic { Accuracy, UnknownRate, EpistemicUnknownRate };

constexpr std::string_view to_string(Statistic s) noexcept {
  switch (s) {
    case Statistic::Accuracy: return "accuracy";
    case Statistic::UnknownRate: return "unknown_rate";
    case Statistic::EpistemicUnknownRate: return "epistemic_unknown_rate";
  }
  return "?";
}

struct BootstrapCI {
  Statistic statistic = Statistic::Accuracy;
  double point_delta = 0.0;  // statistic(B) - statistic(A) on the full set
  double lo = 0.0;
  double hi = 0.0;
  std::size_t resamples = 0;
  std::uint64_t seed = 0;
  std::size_t undefined_resamples = 0;  // resamples where the statistic was undefined in a run

  bool excludes_zero() const noexcept { return lo > 0.0 || hi < 0.0; }
};

namespace detail {

// Example-aligned pair of runs: index i refers to the same example in both.
struct PairedOutcomes {
  std::vector<std::string> ids;
  std::vector<const PredictionRecord*> a, b;
};

inline PairedOutcomes align(std::span<const PredictionRecord> a, std::span<const PredictionRecord> b) {
  std::unordered_map<std::string_view, const PredictionRecord*> by_id;
  for (const auto& r : b)
    if (!by_id.emplace(r.example_id, &r).second) throw IdMismatch("duplicate example id '" + r.example_id + "'");
  if (a.size() != b.size()) throw IdMismatch("runs cover different numbers of examples");
  PairedOutcomes out;
  std::unordered_map<std::string_view, bool> seen;
  for (const auto& r : a) {
    if (!seen.emplace(r.example_id, true).second) throw IdMismatch("duplicate example id '" + r.example_id + "'");
    const auto it = by_id.find(r.example_id);
    if (it == by_id.end()) throw IdMismatch("example '" + r.example_id + "' missing from the second run");
    out.ids.push_back(r.example_id);
    out.a.push_back(&r);
    out.b.push_back(it->second);
  }
  return out;
}

struct Tally {
  std::size_t n = 0, correct = 0, unknown = 0, decisive = 0, epistemic = 0;

  void add(const PredictionRecord& r) {
    ++n;
    correct += r.predicted == r.gold;
    unknown += r.predicted == Label::Unknown;
    if (is_decisive(r.gold)) {
      ++decisive;
      epistemic += r.predicted == Label::Unknown;
    }
  }

  std::optional<double> value(Statistic s) const {
    switch (s) {
      case Statistic::Accuracy: return n ? std::optional(static_cast<double>(correct) / static_cast<double>(n)) : std::nullopt;
      case Statistic::UnknownRate: return n ? std::optional(static_cast<double>(unknown) / static_cast<double>(n)) : std::nullopt;
      case Statistic::EpistemicUnknownRate:
        return decisive ? std::optional(static_cast<double>(epistemic) / static_cast<double>(decisive)) : std::nullopt;
    }
    return std::nullopt;
  }
};

// Linear interpolation between order statistics (the common "type 7" rule).
inline double percentile(std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

// Paired percentile bootstrap of statistic(B) - statistic(A). Resample b draws
// from its own stream keyed by (seed, b), so results do not depend on the
// thread count. Records with backend errors are dropped pairwise.
inline BootstrapCI paired_bootstrap(std::span<const PredictionRecord> run_a, std::span<const PredictionRecord> run_b,
                                    Statistic stat, std::size_t resamples = 10000, std::uint64_t seed = 0,
                                    unsigned threads = 1) {
  if (resamples < 1) throw std::invalid_argument("bootstrap needs at least one resample");
  const auto all = detail::align(run_a, run_b);
  detail::PairedOutcomes paired;
  for (std::size_t i = 0; i < all.ids.size(); ++i) {
    if (!all.a[i]->scored() || !all.b[i]->scored()) continue;
    paired.ids.push_back(all.ids[i]);
    paired.a.push_back(all.a[i]);
    paired.b.push_back(all.b[i]);
  }
  const std::size_t n = paired.ids.size();
  if (n == 0) throw EmptyInput();

  BootstrapCI ci;
  ci.statistic = stat;
  ci.resamples = resamples;
  ci.seed = seed;
  {
    detail::Tally ta, tb;
    for (std::size_t i = 0; i < n; ++i) {
      ta.add(*paired.a[i]);
      tb.add(*paired.b[i]);
    }
    const auto va = ta.value(stat), vb = tb.value(stat);
    if (!va || !vb) throw EmptyInput();
    ci.point_delta = *vb - *va;
  }

  std::vector<std::optional<double>> deltas(resamples);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      SplitMix64 rng(stream_key(seed, b));
      detail::Tally ta, tb;
      for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(rng.below(n));
        ta.add(*paired.a[i]);
        tb.add(*paired.b[i]);
      }
      const auto va = ta.value(stat), vb = tb.value(stat);
      if (va && vb) deltas[b] = *vb - *va;
    }
  };
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(resamples)));
  if (threads == 1) {
    work(0, resamples);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (resamples + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk, end = std::min(resamples, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  std::vector<double> valid;
  valid.reserve(resamples);
  for (const auto& d : deltas)
    if (d) valid.push_back(*d);
  ci.undefined_resamples = resamples - valid.size();
  if (valid.empty()) throw EmptyInput();
  std::sort(valid.begin(), valid.end());
  ci.lo = detail::percentile(valid, 0.025);
  ci.hi = detail::percentile(valid, 0.975);
  return ci;
}

// ---------------------------------------------------------------------------

struct DiffReport {
  std::size_t n = 0;
  std::size_t changed = 0;
  std::vector<std::string> changed_ids;
  std::map<std::string, std::size_t> transitions;  // "Unknown->True" etc.
  std::map<int, double> method_call_fractions;     // fraction of examples at each call count
  double max_calls_fraction = 0.0;                 // fraction at 6 calls
};

inline DiffReport diff_report(std::span<const PredictionRecord> baseline, std::span<const PredictionRecord> method) {
  const auto paired = detail::align(baseline, method);
  DiffReport d;
  d.n = paired.ids.size();
  if (d.n == 0) throw EmptyInput();
  std::map<int, std::size_t> calls;
  for (std::size_t i = 0; i < d.n; ++i) {
    const auto& a = *paired.a[i];
    const auto& b = *paired.b[i];
    ++calls[b.calls];
    if (!a.scored() || !b.scored() || a.predicted == b.predicted) continue;
    ++d.changed;
    d.changed_ids.push_back(paired.ids[i]);
    ++d.transitions[std::string(to_string(a.predicted)) + "->" + std::string(to_string(b.predicted))];
  }
  for (const auto& [c, k] : calls) d.method_call_fractions[c] = static_cast<double>(k) / static_cast<double>(d.n);
  if (const auto it = d.method_call_fractions.find(6); it != d.method_call_fractions.end()) d.max_calls_fraction = it->second;
  return d;
}

}  // namespace cgdpd::metrics
