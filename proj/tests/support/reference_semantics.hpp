#pragma once

// Brute-force model checker used to cross-check the oracle. It shares no code
// with the grounder: quantifiers are evaluated by looping over the domain and
// every interpretation of the full Herbrand base is visited one at a time.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgdpd/fol.hpp"
#include "cgdpd/label.hpp"

namespace ref {

using cgdpd::Label;
namespace fol = cgdpd::fol;

struct Universe {
  std::vector<std::string> domain;
  std::map<std::string, std::size_t> atom_index;  // "P(a,b)" -> bit
};

inline std::string atom_key(const std::string& pred, const std::vector<std::string>& args) {
  std::string k = pred + "(";
  for (std::size_t i = 0; i < args.size(); ++i) k += (i ? "," : "") + args[i];
  return k + ")";
}

inline void enumerate_tuples(const std::vector<std::string>& domain, std::size_t arity, std::vector<std::string>& cur,
                             const std::string& pred, Universe& u) {
  if (cur.size() == arity) {
    u.atom_index.emplace(atom_key(pred, cur), u.atom_index.size());
    return;
  }
  for (const auto& c : domain) {
    cur.push_back(c);
    enumerate_tuples(domain, arity, cur, pred, u);
    cur.pop_back();
  }
}

inline Universe universe(const std::vector<fol::Formula>& all) {
  Universe u;
  const auto names = fol::constants(all);
  u.domain.assign(names.begin(), names.end());
  if (u.domain.empty()) u.domain.push_back("_e0");
  for (const auto& [pred, arity] : fol::predicates(all)) {
    std::vector<std::string> cur;
    enumerate_tuples(u.domain, arity, cur, pred, u);
  }
  return u;
}

class Evaluator {
 public:
  Evaluator(const Universe& u, std::uint64_t assignment) : u_(u), bits_(assignment) {}

  bool eval(const fol::Formula& f) {
    if (const auto* a = f.as<fol::Atom>()) {
      std::vector<std::string> args;
      for (const auto& t : a->args) args.push_back(resolve(t));
      return (bits_ >> u_.atom_index.at(atom_key(a->predicate, args))) & 1U;
    }
    if (const auto* e = f.as<fol::Equality>()) return resolve(e->left) == resolve(e->right);
    if (const auto* n = f.as<fol::Negation>()) return !eval(n->body);
    if (const auto* b = f.as<fol::Binary>()) {
      const bool l = eval(b->left);
      const bool r = eval(b->right);
      switch (b->op) {
        case fol::Connective::And: return l && r;
        case fol::Connective::Or: return l || r;
        case fol::Connective::Xor: return l != r;
        case fol::Connective::Implies: return !l || r;
        case fol::Connective::Iff: return l == r;
      }
    }
    const auto* q = f.as<fol::Quantified>();
    const auto saved = env_.find(q->var) == env_.end() ? std::nullopt : std::optional(env_[q->var]);
    bool result = q->quantifier == fol::Quantifier::Forall;
    for (const auto& c : u_.domain) {
      env_[q->var] = c;
      const bool v = eval(q->body);
      if (q->quantifier == fol::Quantifier::Forall && !v) { result = false; break; }
      if (q->quantifier == fol::Quantifier::Exists && v) { result = true; break; }
    }
    if (saved) env_[q->var] = *saved;
    else env_.erase(q->var);
    return result;
  }

 private:
  std::string resolve(const fol::Term& t) const {
    if (!t.is_variable()) return t.name;
    const auto it = env_.find(t.name);
    if (it == env_.end()) throw std::logic_error("free variable " + t.name);
    return it->second;
  }

  const Universe& u_;
  std::uint64_t bits_;
  std::map<std::string, std::string> env_;
};

struct Verdict {
  bool satisfiable = false;
  Label label = Label::Unknown;
};

inline constexpr std::size_t kMaxAtoms = 16;

// Three-way label of h given premises, or satisfiable=false.
inline Verdict classify(const std::vector<fol::Formula>& premises, const fol::Formula& h) {
  std::vector<fol::Formula> all = premises;
  all.push_back(h);
  const Universe u = universe(all);
  if (u.atom_index.size() > kMaxAtoms) throw std::length_error("reference base too large");
  bool sat = false, counter_h = false, counter_neg = false;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << u.atom_index.size()); ++m) {
    Evaluator ev(u, m);
    bool ok = true;
    for (const auto& p : premises)
      if (!ev.eval(p)) { ok = false; break; }
    if (!ok) continue;
    sat = true;
    if (ev.eval(h)) counter_neg = true;
    else counter_h = true;
  }
  Verdict v;
  v.satisfiable = sat;
  v.label = !counter_h ? Label::True : !counter_neg ? Label::False : Label::Unknown;
  return v;
}

inline std::size_t base_size(const std::vector<fol::Formula>& premises, const fol::Formula& h) {
  std::vector<fol::Formula> all = premises;
  all.push_back(h);
  return universe(all).atom_index.size();
}

}  // namespace ref
