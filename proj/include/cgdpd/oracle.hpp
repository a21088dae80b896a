#pragma once

// Exact entailment for function-free FOL over the Herbrand domain of the
// problem's constants. Quantifiers are expanded into propositional matrices
// and satisfiability is decided by enumerating all 2^N atom assignments,
// 64 assignments per machine word.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cgdpd/fol.hpp"
#include "cgdpd/label.hpp"

namespace cgdpd::oracle {

struct OracleConfig {
  bool unique_names = true;
  std::size_t max_ground_atoms = 20;
  std::size_t max_domain_size = 8;

  void validate() const {
    if (max_ground_atoms < 1) throw std::invalid_argument("max_ground_atoms must be >= 1");
    if (max_ground_atoms > 30) throw std::invalid_argument("max_ground_atoms above 30 is not supported by enumeration");
    if (max_domain_size < 1) throw std::invalid_argument("max_domain_size must be >= 1");
  }
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonGroundable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InconsistentPremises : public std::runtime_error {
 public:
  InconsistentPremises() : std::runtime_error("premise set is unsatisfiable") {}
};

// Node of a propositional circuit. Children always precede their parent, so
// evaluating nodes in index order is a valid schedule.
struct PropNode {
  enum class Op : std::uint8_t { False, True, Atom, Not, And, Or, Xor, Implies, Iff };
  Op op = Op::False;
  std::uint32_t a = 0;  // atom index for Atom, first child otherwise
  std::uint32_t b = 0;
};

struct PropMatrix {
  std::vector<PropNode> nodes;
  std::uint32_t root = 0;

  bool is_constant(bool value) const {
    return nodes[root].op == (value ? PropNode::Op::True : PropNode::Op::False);
  }
};

struct GroundProblem {
  std::vector<std::string> domain;
  std::vector<std::string> atoms;           // ground atom identities, by first occurrence
  std::vector<PropMatrix> premise_parts;    // one matrix per premise
  PropMatrix premise_matrix;                // conjunction of premise_parts
  PropMatrix hypothesis_matrix;
};

enum class EntailmentVerdict { Yes, No };

inline BinaryAnswer to_answer(EntailmentVerdict v) noexcept {
  return v == EntailmentVerdict::Yes ? BinaryAnswer::Yes : BinaryAnswer::No;
}

namespace detail {

inline constexpr std::size_t kMaxMatrixNodes = std::size_t{1} << 22;
inline constexpr std::string_view kFreshConstant = "_e0";

class MatrixBuilder {
 public:
  using Op = PropNode::Op;

  std::uint32_t constant(bool v) { return push({v ? Op::True : Op::False, 0, 0}); }

  std::uint32_t atom(std::uint32_t index) { return push({Op::Atom, index, 0}); }

  std::uint32_t negation(std::uint32_t x) {
    const Op o = m_.nodes[x].op;
    if (o == Op::True) return constant(false);
    if (o == Op::False) return constant(true);
    return push({Op::Not, x, 0});
  }

  std::uint32_t binary(Op op, std::uint32_t x, std::uint32_t y) {
    const auto cx = value_of(x), cy = value_of(y);
    switch (op) {
      case Op::And:
        if (cx == 0 || cy == 0) return constant(false);
        if (cx == 1) return y;
        if (cy == 1) return x;
        break;
      case Op::Or:
        if (cx == 1 || cy == 1) return constant(true);
        if (cx == 0) return y;
        if (cy == 0) return x;
        break;
      case Op::Implies:
        if (cx == 0 || cy == 1) return constant(true);
        if (cx == 1) return y;
        if (cy == 0) return negation(x);
        break;
      case Op::Xor:
        if (cx >= 0 && cy >= 0) return constant(cx != cy);
        if (cx == 0) return y;
        if (cy == 0) return x;
        if (cx == 1) return negation(y);
        if (cy == 1) return negation(x);
        break;
      case Op::Iff:
        if (cx >= 0 && cy >= 0) return constant(cx == cy);
        if (cx == 1) return y;
        if (cy == 1) return x;
        if (cx == 0) return negation(y);
        if (cy == 0) return negation(x);
        break;
      default:
        break;
    }
    return push({op, x, y});
  }

  PropMatrix finish(std::uint32_t root) {
    m_.root = root;
    PropMatrix out = std::move(m_);
    m_ = {};
    return out;
  }

 private:
  int value_of(std::uint32_t x) const {
    const Op o = m_.nodes[x].op;
    return o == Op::True ? 1 : o == Op::False ? 0 : -1;
  }

  std::uint32_t push(PropNode n) {
    if (m_.nodes.size() >= kMaxMatrixNodes) throw BudgetExceeded("ground matrix exceeds node budget");
    m_.nodes.push_back(n);
    return static_cast<std::uint32_t>(m_.nodes.size() - 1);
  }

  PropMatrix m_;
};

class Grounder {
 public:
  Grounder(std::vector<std::string> domain, const OracleConfig& cfg) : domain_(std::move(domain)), cfg_(cfg) {}

  PropMatrix ground(const fol::Formula& f) {
    MatrixBuilder b;
    std::vector<std::pair<std::string_view, std::string_view>> env;
    const auto root = expand(f, b, env);
    return b.finish(root);
  }

  std::vector<std::string> take_atoms() { return std::move(atoms_); }
  const std::vector<std::string>& atoms() const { return atoms_; }

 private:
  using Env = std::vector<std::pair<std::string_view, std::string_view>>;

  std::string_view value(const fol::Term& t, const Env& env) const {
    if (!t.is_variable()) {
      if (t.name.find('(') != std::string::npos) throw NonGroundable("function term '" + t.name + "'");
      return t.name;
    }
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == t.name) return it->second;
    throw NonGroundable("free variable '" + t.name + "'");
  }

  std::uint32_t atom_index(std::string key) {
    auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(atoms_.size()));
    if (inserted) {
      atoms_.push_back(std::move(key));
      if (atoms_.size() > cfg_.max_ground_atoms)
        throw BudgetExceeded("ground atom count exceeds " + std::to_string(cfg_.max_ground_atoms));
    }
    return it->second;
  }

  std::uint32_t expand(const fol::Formula& f, MatrixBuilder& b, Env& env) {
    using Op = PropNode::Op;
    return std::visit(
        [&](const auto& n) -> std::uint32_t {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, fol::Atom>) {
            std::string key = n.predicate;
            key += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
              if (i) key += ',';
              key += value(n.args[i], env);
            }
            key += ')';
            return b.atom(atom_index(std::move(key)));
          } else if constexpr (std::is_same_v<T, fol::Equality>) {
            const auto l = value(n.left, env), r = value(n.right, env);
            if (l == r) return b.constant(true);
            if (cfg_.unique_names) return b.constant(false);
            // Unordered pair so a=b and b=a share one atom. Congruence axioms
            // are not added.
            std::string key = "=(";
            key += std::min(l, r);
            key += ',';
            key += std::max(l, r);
            key += ')';
            return b.atom(atom_index(std::move(key)));
          } else if constexpr (std::is_same_v<T, fol::Negation>) {
            return b.negation(expand(n.body, b, env));
          } else if constexpr (std::is_same_v<T, fol::Binary>) {
            const auto x = expand(n.left, b, env);
            const auto y = expand(n.right, b, env);
            switch (n.op) {
              case fol::Connective::And: return b.binary(Op::And, x, y);
              case fol::Connective::Or: return b.binary(Op::Or, x, y);
              case fol::Connective::Xor: return b.binary(Op::Xor, x, y);
              case fol::Connective::Implies: return b.binary(Op::Implies, x, y);
              case fol::Connective::Iff: return b.binary(Op::Iff, x, y);
            }
            return b.constant(false);
          } else {
            const bool forall = n.quantifier == fol::Quantifier::Forall;
            std::optional<std::uint32_t> acc;
            for (const auto& c : domain_) {
              env.emplace_back(n.var, c);
              const auto inst = expand(n.body, b, env);
              env.pop_back();
              acc = acc ? b.binary(forall ? Op::And : Op::Or, *acc, inst) : inst;
            }
            return *acc;
          }
        },
        f.node());
  }

  std::vector<std::string> domain_;
  const OracleConfig& cfg_;
  std::vector<std::string> atoms_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

inline std::vector<std::string> herbrand_domain(std::span<const fol::Formula> premises, const fol::Formula& hypothesis,
                                                const OracleConfig& cfg) {
  auto names = fol::constants(premises);
  for (const auto& c : fol::constants(hypothesis)) names.insert(c);
  std::vector<std::string> domain(names.begin(), names.end());
  if (domain.empty()) domain.emplace_back(kFreshConstant);
  if (domain.size() > cfg.max_domain_size)
    throw BudgetExceeded("domain size " + std::to_string(domain.size()) + " exceeds " + std::to_string(cfg.max_domain_size));
  return domain;
}

inline PropMatrix conjunction(std::span<const PropMatrix> parts) {
  // Splice the parts into one node array, offsetting child indices.
  PropMatrix out;
  std::vector<std::uint32_t> roots;
  for (const auto& p : parts) {
    const auto base = static_cast<std::uint32_t>(out.nodes.size());
    for (PropNode n : p.nodes) {
      if (n.op != PropNode::Op::Atom && n.op != PropNode::Op::True && n.op != PropNode::Op::False) {
        n.a += base;
        n.b += base;
      }
      out.nodes.push_back(n);
    }
    roots.push_back(base + p.root);
  }
  if (roots.empty()) {
    out.nodes.push_back({PropNode::Op::True, 0, 0});
    out.root = 0;
    return out;
  }
  std::uint32_t acc = roots[0];
  for (std::size_t i = 1; i < roots.size(); ++i) {
    out.nodes.push_back({PropNode::Op::And, acc, roots[i]});
    acc = static_cast<std::uint32_t>(out.nodes.size() - 1);
  }
  out.root = acc;
  return out;
}

// Assignment lanes: bit k of the word for atom i is atom i's value under
// assignment (block * 64 + k).
inline constexpr std::array<std::uint64_t, 6> kLanePatterns = {
    0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
    0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL,
};

class BlockEvaluator {
 public:
  explicit BlockEvaluator(std::size_t atom_count) : atoms_(atom_count) {
    blocks_ = atom_count <= 6 ? 1 : (std::uint64_t{1} << (atom_count - 6));
    lanes_ = atom_count >= 6 ? ~std::uint64_t{0} : ((std::uint64_t{1} << (std::uint64_t{1} << atom_count)) - 1);
  }

  std::uint64_t blocks() const noexcept { return blocks_; }
  std::uint64_t lanes() const noexcept { return lanes_; }

  std::uint64_t eval(const PropMatrix& m, std::uint64_t block) {
    using Op = PropNode::Op;
    scratch_.resize(m.nodes.size());
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
      const PropNode& n = m.nodes[i];
      std::uint64_t v = 0;
      switch (n.op) {
        case Op::False: v = 0; break;
        case Op::True: v = ~std::uint64_t{0}; break;
        case Op::Atom:
          v = n.a < 6 ? kLanePatterns[n.a] : (((block >> (n.a - 6)) & 1U) ? ~std::uint64_t{0} : 0);
          break;
        case Op::Not: v = ~scratch_[n.a]; break;
        case Op::And: v = scratch_[n.a] & scratch_[n.b]; break;
        case Op::Or: v = scratch_[n.a] | scratch_[n.b]; break;
        case Op::Xor: v = scratch_[n.a] ^ scratch_[n.b]; break;
        case Op::Implies: v = ~scratch_[n.a] | scratch_[n.b]; break;
        case Op::Iff: v = ~(scratch_[n.a] ^ scratch_[n.b]); break;
      }
      scratch_[i] = v;
    }
    return scratch_[m.root] & lanes_;
  }

 private:
  std::size_t atoms_;
  std::uint64_t blocks_ = 1;
  std::uint64_t lanes_ = 0;
  std::vector<std::uint64_t> scratch_;
};

struct Sweep {
  bool premises_satisfiable = false;
  bool counter_to_hypothesis = false;  // some model of S falsifies H
  bool counter_to_negation = false;    // some model of S satisfies H
};

inline Sweep sweep(const GroundProblem& g, const PropMatrix& premises) {
  Sweep s;
  BlockEvaluator ev(g.atoms.size());
  for (std::uint64_t blk = 0; blk < ev.blocks(); ++blk) {
    const auto p = ev.eval(premises, blk);
    if (!p) continue;
    const auto h = ev.eval(g.hypothesis_matrix, blk);
    s.premises_satisfiable = true;
    s.counter_to_hypothesis |= (p & ~h) != 0;
    s.counter_to_negation |= (p & h) != 0;
    if (s.counter_to_hypothesis && s.counter_to_negation) break;
  }
  return s;
}

}  // namespace detail

namespace detail {

inline GroundProblem build(std::span<const fol::Formula> premises, const fol::Formula* hypothesis,
                           std::vector<std::string> domain, const OracleConfig& cfg) {
  GroundProblem g;
  g.domain = std::move(domain);
  Grounder grounder(g.domain, cfg);
  for (const auto& p : premises) g.premise_parts.push_back(grounder.ground(p));
  if (hypothesis) {
    g.hypothesis_matrix = grounder.ground(*hypothesis);
  } else {
    MatrixBuilder b;
    g.hypothesis_matrix = b.finish(b.constant(true));
  }
  g.atoms = grounder.take_atoms();
  g.premise_matrix = conjunction(g.premise_parts);
  return g;
}

}  // namespace detail

inline GroundProblem ground(std::span<const fol::Formula> premises, const fol::Formula& hypothesis,
                            const OracleConfig& cfg = {}) {
  cfg.validate();
  return detail::build(premises, &hypothesis, detail::herbrand_domain(premises, hypothesis, cfg), cfg);
}

inline EntailmentVerdict entails(std::span<const fol::Formula> premises, const fol::Formula& phi,
                                 const OracleConfig& cfg = {}) {
  const auto g = ground(premises, phi, cfg);
  return detail::sweep(g, g.premise_matrix).counter_to_hypothesis ? EntailmentVerdict::No : EntailmentVerdict::Yes;
}

// Satisfiability of S over the domain of S's own constants.
inline bool check_consistency(std::span<const fol::Formula> premises, const OracleConfig& cfg = {}) {
  cfg.validate();
  const auto names = fol::constants(premises);
  std::vector<std::string> domain(names.begin(), names.end());
  if (domain.empty()) domain.emplace_back(detail::kFreshConstant);
  if (domain.size() > cfg.max_domain_size)
    throw BudgetExceeded("domain size " + std::to_string(domain.size()) + " exceeds " +
                         std::to_string(cfg.max_domain_size));
  const auto g = detail::build(premises, nullptr, std::move(domain), cfg);
  return detail::sweep(g, g.premise_matrix).premises_satisfiable;
}

// True iff S entails H, False iff S entails not-H, Unknown otherwise.
inline Label three_way_label(std::span<const fol::Formula> premises, const fol::Formula& h,
                             const OracleConfig& cfg = {}) {
  const auto g = ground(premises, h, cfg);
  const auto s = detail::sweep(g, g.premise_matrix);
  if (!s.premises_satisfiable) throw InconsistentPremises();
  if (!s.counter_to_hypothesis) return Label::True;
  if (!s.counter_to_negation) return Label::False;
  return Label::Unknown;
}

// Greedy deletion: drops each premise in turn if entailment of phi survives
// without it. Returns indices (ascending) of a subset minimal under single
// deletions, or nullopt when the full set does not entail phi. The domain is
// fixed by the full problem.
inline std::optional<std::vector<std::size_t>> minimal_entailing_subset(std::span<const fol::Formula> premises,
                                                                        const fol::Formula& phi,
                                                                        const OracleConfig& cfg = {}) {
  const auto g = ground(premises, phi, cfg);
  std::vector<std::size_t> keep(premises.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;

  auto entails_with = [&](const std::vector<std::size_t>& idx) {
    std::vector<PropMatrix> parts;
    parts.reserve(idx.size());
    for (const auto i : idx) parts.push_back(g.premise_parts[i]);
    const auto conj = detail::conjunction(parts);
    return !detail::sweep(g, conj).counter_to_hypothesis;
  };

  if (!entails_with(keep)) return std::nullopt;
  for (std::size_t k = 0; k < keep.size();) {
    auto trial = keep;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
    if (entails_with(trial)) keep = std::move(trial);
    else ++k;
  }
  return keep;
}

}  // namespace cgdpd::oracle
