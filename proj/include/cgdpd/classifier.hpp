#pragma once

// The four probes the decoder drives, and the in-process backends that answer
// them: the exact oracle, a seeded noisy simulator, a scripted backend for
// path testing, and a memoizing wrapper.

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "cgdpd/fol.hpp"
#include "cgdpd/label.hpp"
#include "cgdpd/oracle.hpp"
#include "cgdpd/rng.hpp"

namespace cgdpd {

enum class ProbeKind : std::uint8_t { Classify, FixUnknown, EntailsYesNo, Adjudicate };

constexpr std::string_view to_string(ProbeKind k) noexcept {
  switch (k) {
    case ProbeKind::Classify: return "classify";
    case ProbeKind::FixUnknown: return "fix_unknown";
    case ProbeKind::EntailsYesNo: return "entails_yes_no";
    case ProbeKind::Adjudicate: return "adjudicate";
  }
  return "?";
}

enum class Polarity : std::uint8_t { Positive, Negated };

constexpr std::string_view to_string(Polarity p) noexcept { return p == Polarity::Positive ? "H" : "negH"; }

enum class NegatorKind { Formula, NotWrapper };

constexpr std::string_view to_string(NegatorKind k) noexcept { return k == NegatorKind::Formula ? "formula" : "not-wrapper"; }

// A hypothesis as presented to a backend. In-process backends read
// `formula`; the HTTP backend sends `text`.
struct Hypothesis {
  fol::Formula formula;
  std::string text;
  Polarity polarity = Polarity::Positive;
};

inline Hypothesis make_hypothesis(const fol::Formula& h) { return {h, fol::render(h), Polarity::Positive}; }

inline constexpr std::string_view kNotWrapperPrefix = "NOT: ";

// The Formula negator applies fol::negate. The NOT-wrapper keeps the
// hypothesis text verbatim behind a "NOT: " prefix; its formula is Not(H)
// so in-process backends still see the intended semantics.
inline Hypothesis negated(const Hypothesis& h, NegatorKind kind) {
  if (kind == NegatorKind::Formula) {
    auto f = fol::negate(h.formula);
    auto text = fol::render(f);
    return {std::move(f), std::move(text), Polarity::Negated};
  }
  return {fol::Formula::negation(h.formula), std::string(kNotWrapperPrefix) + h.text, Polarity::Negated};
}

// Premise set of one example. Non-owning.
struct Problem {
  std::string_view id;
  std::span<const fol::Formula> premises;
};

struct FixOutcome {
  Label label = Label::Unknown;
  std::optional<std::string> witness;
  std::optional<std::string> missing_premise_note;

  static FixOutcome unknown(std::optional<std::string> note = std::nullopt) {
    return {Label::Unknown, std::nullopt, std::move(note)};
  }
};

struct ClassifierConfig {
  double unknown_penalty = 0.5;
  double temperature = 0.0;

  void validate() const {
    if (!(unknown_penalty >= 0.0 && unknown_penalty <= 1.0)) throw std::invalid_argument("unknown_penalty must lie in [0,1]");
    if (temperature != 0.0) throw std::invalid_argument("temperature must be 0");
  }
};

struct NoiseModel {
  double epistemic_unknown_prob = 0.0;  // u
  double flip_prob = 0.0;               // f
  double genuine_decide_prob = 0.0;     // g
  std::uint64_t seed = 0;

  void validate() const {
    for (const double p : {epistemic_unknown_prob, flip_prob, genuine_decide_prob})
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise probabilities must lie in [0,1]");
  }
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual Label classify(const Problem& s, const Hypothesis& h) = 0;

  // Decisive outcomes without a witness are coerced to Unknown, and Unknown
  // outcomes never carry one.
  FixOutcome fix_unknown(const Problem& s, const Hypothesis& h) {
    FixOutcome out = do_fix_unknown(s, h);
    if (is_decisive(out.label) && (!out.witness || out.witness->empty())) return FixOutcome::unknown(out.missing_premise_note);
    if (!is_decisive(out.label)) out.witness.reset();
    return out;
  }

  virtual BinaryAnswer entails_yes_no(const Problem& s, const Hypothesis& h) = 0;

  // Returns one of {y_h, neg_map(y_neg_h)}. A pair that is already
  // consistent is returned without consulting the backend.
  Label adjudicate(const Problem& s, const Hypothesis& h, Label y_h, Label y_neg_h) {
    if (!is_decisive(y_h) || !is_decisive(y_neg_h)) throw PreconditionViolation("adjudicate requires two decisive labels");
    if (pair_consistent(y_h, y_neg_h)) return y_h;
    const Label out = do_adjudicate(s, h, y_h, y_neg_h);
    if (out != y_h && out != neg_map(y_neg_h))
      throw BackendError("adjudicator returned a label outside {y_H, NegMap(y_negH)}");
    return out;
  }

  virtual std::string name() const = 0;

 protected:
  virtual FixOutcome do_fix_unknown(const Problem& s, const Hypothesis& h) = 0;
  virtual Label do_adjudicate(const Problem& s, const Hypothesis& h, Label y_h, Label y_neg_h) = 0;
};

// ---------------------------------------------------------------------------

class OracleBackend final : public Backend {
 public:
  explicit OracleBackend(oracle::OracleConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  Label classify(const Problem& s, const Hypothesis& h) override {
    return oracle::three_way_label(s.premises, h.formula, cfg_);
  }

  BinaryAnswer entails_yes_no(const Problem& s, const Hypothesis& h) override {
    return oracle::to_answer(oracle::entails(s.premises, h.formula, cfg_));
  }

  std::string name() const override { return "oracle"; }

  const oracle::OracleConfig& config() const noexcept { return cfg_; }

 protected:
  FixOutcome do_fix_unknown(const Problem& s, const Hypothesis& h) override {
    const Label y = oracle::three_way_label(s.premises, h.formula, cfg_);
    if (!is_decisive(y)) return FixOutcome::unknown();
    const fol::Formula target = y == Label::True ? h.formula : fol::negate(h.formula);
    const auto subset = oracle::minimal_entailing_subset(s.premises, target, cfg_);
    std::string witness;
    if (subset && !subset->empty()) witness = fol::render(s.premises[subset->front()]);
    else if (!s.premises.empty()) witness = fol::render(s.premises.front());
    else witness = fol::render(target);
    return {y, std::move(witness), std::nullopt};
  }

  // Picks whichever candidate matches the exact label; y_h when neither does.
  Label do_adjudicate(const Problem& s, const Hypothesis& h, Label y_h, Label y_neg_h) override {
    const Label gold = oracle::three_way_label(s.premises, h.formula, cfg_);
    if (gold == y_h) return y_h;
    if (gold == neg_map(y_neg_h)) return neg_map(y_neg_h);
    return y_h;
  }

 private:
  oracle::OracleConfig cfg_;
};

// ---------------------------------------------------------------------------

// Oracle answers corrupted by seeded noise. Every draw is a pure function of
// (seed, example id, probe kind, polarity, draw slot), so results do not
// depend on call order or thread schedule.
class NoisyBackend final : public Backend {
 public:
  NoisyBackend(NoiseModel noise, oracle::OracleConfig cfg = {}) : noise_(noise), exact_(cfg) { noise_.validate(); }

  Label classify(const Problem& s, const Hypothesis& h) override {
    const Label y = exact_.classify(s, h);
    if (is_decisive(y)) {
      if (draw(s, ProbeKind::Classify, h.polarity, 0) < noise_.epistemic_unknown_prob) return Label::Unknown;
      if (draw(s, ProbeKind::Classify, h.polarity, 1) < noise_.flip_prob) return neg_map(y);
      return y;
    }
    if (draw(s, ProbeKind::Classify, h.polarity, 2) < noise_.genuine_decide_prob)
      return draw(s, ProbeKind::Classify, h.polarity, 3) < 0.5 ? Label::True : Label::False;
    return Label::Unknown;
  }

  BinaryAnswer entails_yes_no(const Problem& s, const Hypothesis& h) override {
    const BinaryAnswer b = exact_.entails_yes_no(s, h);
    if (draw(s, ProbeKind::EntailsYesNo, h.polarity, 0) < noise_.flip_prob)
      return b == BinaryAnswer::Yes ? BinaryAnswer::No : BinaryAnswer::Yes;
    return b;
  }

  std::string name() const override { return "noisy"; }

  const NoiseModel& noise() const noexcept { return noise_; }

 protected:
  FixOutcome do_fix_unknown(const Problem& s, const Hypothesis& h) override {
    if (draw(s, ProbeKind::FixUnknown, h.polarity, 0) < noise_.epistemic_unknown_prob) return FixOutcome::unknown();
    const Label y = oracle::three_way_label(s.premises, h.formula, exact_.config());
    if (!is_decisive(y)) return FixOutcome::unknown();
    return {y, s.premises.empty() ? fol::render(h.formula) : fol::render(s.premises.front()), std::nullopt};
  }

  // The exact choice, swapped for the other candidate with probability f.
  Label do_adjudicate(const Problem& s, const Hypothesis& h, Label y_h, Label y_neg_h) override {
    const Label pick = exact_.adjudicate(s, h, y_h, y_neg_h);
    if (draw(s, ProbeKind::Adjudicate, h.polarity, 0) < noise_.flip_prob) return pick == y_h ? neg_map(y_neg_h) : y_h;
    return pick;
  }

 private:
  double draw(const Problem& s, ProbeKind kind, Polarity pol, std::uint64_t slot) const {
    SplitMix64 rng(stream_key(noise_.seed, fnv1a(s.id), static_cast<std::uint64_t>(kind),
                              static_cast<std::uint64_t>(pol), slot));
    return rng.uniform();
  }

  NoiseModel noise_;
  OracleBackend exact_;
};

// ---------------------------------------------------------------------------

// Fixed answers per probe and polarity, with a call log. Drives the decoder
// down chosen branches.
class ScriptedBackend final : public Backend {
 public:
  enum class AdjudicatorChoice { KeepHypothesis, MapNegation };

  struct Script {
    Label classify_h = Label::Unknown;
    Label classify_neg = Label::Unknown;
    Label fix_h = Label::Unknown;
    Label fix_neg = Label::Unknown;
    BinaryAnswer probe_h = BinaryAnswer::No;
    BinaryAnswer probe_neg = BinaryAnswer::No;
    AdjudicatorChoice adjudicator = AdjudicatorChoice::KeepHypothesis;
  };

  explicit ScriptedBackend(Script script) : script_(script) {}

  Label classify(const Problem&, const Hypothesis& h) override {
    log(ProbeKind::Classify, h.polarity);
    return h.polarity == Polarity::Positive ? script_.classify_h : script_.classify_neg;
  }

  BinaryAnswer entails_yes_no(const Problem&, const Hypothesis& h) override {
    log(ProbeKind::EntailsYesNo, h.polarity);
    return h.polarity == Polarity::Positive ? script_.probe_h : script_.probe_neg;
  }

  std::string name() const override { return "scripted"; }

  const std::vector<std::pair<ProbeKind, Polarity>>& calls() const noexcept { return calls_; }

 protected:
  FixOutcome do_fix_unknown(const Problem&, const Hypothesis& h) override {
    log(ProbeKind::FixUnknown, h.polarity);
    const Label y = h.polarity == Polarity::Positive ? script_.fix_h : script_.fix_neg;
    if (!is_decisive(y)) return FixOutcome::unknown();
    return {y, std::string("scripted witness"), std::nullopt};
  }

  Label do_adjudicate(const Problem&, const Hypothesis& h, Label y_h, Label y_neg_h) override {
    log(ProbeKind::Adjudicate, h.polarity);
    return script_.adjudicator == AdjudicatorChoice::KeepHypothesis ? y_h : neg_map(y_neg_h);
  }

 private:
  void log(ProbeKind k, Polarity p) { calls_.emplace_back(k, p); }

  Script script_;
  std::vector<std::pair<ProbeKind, Polarity>> calls_;
};

// ---------------------------------------------------------------------------

// Memoizes the wrapped backend on (probe kind, rendered premises, hypothesis
// text). Only sound for backends whose answers depend on those alone (oracle,
// temperature-0 HTTP); the noisy backend keys on example id and is never
// wrapped. Decoder call accounting is unaffected by hits.
class CachedBackend final : public Backend {
 public:
  explicit CachedBackend(std::shared_ptr<Backend> inner, bool enabled = true) : inner_(std::move(inner)), enabled_(enabled) {}

  Label classify(const Problem& s, const Hypothesis& h) override {
    return lookup<Label>(key(ProbeKind::Classify, s, h), [&] { return inner_->classify(s, h); });
  }

  BinaryAnswer entails_yes_no(const Problem& s, const Hypothesis& h) override {
    return lookup<BinaryAnswer>(key(ProbeKind::EntailsYesNo, s, h), [&] { return inner_->entails_yes_no(s, h); });
  }

  std::string name() const override { return inner_->name(); }

  std::uint64_t upstream_invocations() const noexcept { return upstream_.load(); }
  Backend& inner() noexcept { return *inner_; }

 protected:
  FixOutcome do_fix_unknown(const Problem& s, const Hypothesis& h) override {
    return lookup<FixOutcome>(key(ProbeKind::FixUnknown, s, h), [&] { return inner_->fix_unknown(s, h); });
  }

  Label do_adjudicate(const Problem& s, const Hypothesis& h, Label y_h, Label y_neg_h) override {
    std::string k = key(ProbeKind::Adjudicate, s, h);
    k += '\x1f';
    k += short_name(y_h);
    k += short_name(y_neg_h);
    return lookup<Label>(k, [&] { return inner_->adjudicate(s, h, y_h, y_neg_h); });
  }

 private:
  using Value = std::variant<Label, BinaryAnswer, FixOutcome>;

  static std::string key(ProbeKind kind, const Problem& s, const Hypothesis& h) {
    std::string k(to_string(kind));
    k += '\x1f';
    for (const auto& p : s.premises) {
      k += fol::render(p);
      k += '\x1e';
    }
    k += '\x1f';
    k += h.text;
    return k;
  }

  template <class T, class F>
  T lookup(const std::string& k, F&& compute) {
    if (!enabled_) {
      ++upstream_;
      return compute();
    }
    {
      std::lock_guard lock(mu_);
      if (auto it = entries_.find(k); it != entries_.end()) return std::get<T>(it->second);
    }
    ++upstream_;
    T value = compute();
    std::lock_guard lock(mu_);
    entries_.insert_or_assign(k, Value(value));
    return value;
  }

  std::shared_ptr<Backend> inner_;
  bool enabled_;
  std::mutex mu_;
  std::unordered_map<std::string, Value> entries_;
  std::atomic<std::uint64_t> upstream_{0};
};

}  // namespace cgdpd
