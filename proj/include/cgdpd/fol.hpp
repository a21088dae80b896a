#pragma once

// Function-free first-order logic: AST, parser, canonical renderer and the
// mechanical negation used for dual probing.
//
// Grammar, loosest binding first:
//
//   formula  := iff
//   iff      := implies ( '↔' iff )?            right-assoc
//   implies  := xor ( '→' implies )?            right-assoc
//   xor      := or ( '⊕' or )*                  left-assoc
//   or       := and ( '∨' and )*                left-assoc
//   and      := unary ( '∧' unary )*            left-assoc
//   unary    := '¬' unary | ('∀'|'∃') ident formula | primary
//   primary  := '(' formula ')' | ident '(' terms ')' | ident ('='|'≠') ident | ident
//
// A quantifier body extends as far right as the enclosing parentheses allow.
// ASCII spellings: forall exists ~ ! & | ^ -> <-> = !=.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace cgdpd::fol {

struct Term {
  enum class Kind { Constant, Variable };
  Kind kind = Kind::Constant;
  std::string name;

  static Term constant(std::string n) { return {Kind::Constant, std::move(n)}; }
  static Term variable(std::string n) { return {Kind::Variable, std::move(n)}; }
  bool is_variable() const noexcept { return kind == Kind::Variable; }

  friend bool operator==(const Term&, const Term&) = default;
};

enum class Connective { And, Or, Xor, Implies, Iff };
enum class Quantifier { Forall, Exists };

struct Atom;
struct Equality;
struct Negation;
struct Binary;
struct Quantified;

// Immutable formula handle. Copies share structure and are safe to hand
// across threads.
class Formula {
 public:
  using Node = std::variant<Atom, Equality, Negation, Binary, Quantified>;

  // Empty handle; must be assigned before use.
  Formula() = default;

  static Formula atom(std::string predicate, std::vector<Term> args = {});
  static Formula equality(Term left, Term right);
  static Formula negation(Formula body);
  static Formula binary(Connective op, Formula left, Formula right);
  static Formula quantified(Quantifier q, std::string var, Formula body);

  static Formula forall(std::string var, Formula body) { return quantified(Quantifier::Forall, std::move(var), std::move(body)); }
  static Formula exists(std::string var, Formula body) { return quantified(Quantifier::Exists, std::move(var), std::move(body)); }
  static Formula conj(Formula l, Formula r) { return binary(Connective::And, std::move(l), std::move(r)); }
  static Formula disj(Formula l, Formula r) { return binary(Connective::Or, std::move(l), std::move(r)); }
  static Formula implies(Formula l, Formula r) { return binary(Connective::Implies, std::move(l), std::move(r)); }

  const Node& node() const noexcept;

  template <class T>
  const T* as() const noexcept;

  template <class T>
  bool is() const noexcept;

  bool same_node(const Formula& other) const noexcept { return node_.get() == other.node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Equality {
  Term left, right;
  friend bool operator==(const Equality&, const Equality&) = default;
};

struct Negation {
  Formula body;
  friend bool operator==(const Negation&, const Negation&) = default;
};

struct Binary {
  Connective op;
  Formula left, right;
  friend bool operator==(const Binary&, const Binary&) = default;
};

struct Quantified {
  Quantifier quantifier;
  std::string var;
  Formula body;
  friend bool operator==(const Quantified&, const Quantified&) = default;
};

inline const Formula::Node& Formula::node() const noexcept { return *node_; }

template <class T>
const T* Formula::as() const noexcept {
  return std::get_if<T>(node_.get());
}

template <class T>
bool Formula::is() const noexcept {
  return std::holds_alternative<T>(*node_);
}

inline Formula Formula::atom(std::string predicate, std::vector<Term> args) {
  return Formula(std::make_shared<const Node>(Atom{std::move(predicate), std::move(args)}));
}
inline Formula Formula::equality(Term left, Term right) {
  return Formula(std::make_shared<const Node>(Equality{std::move(left), std::move(right)}));
}
inline Formula Formula::negation(Formula body) {
  return Formula(std::make_shared<const Node>(Negation{std::move(body)}));
}
inline Formula Formula::binary(Connective op, Formula left, Formula right) {
  return Formula(std::make_shared<const Node>(Binary{op, std::move(left), std::move(right)}));
}
inline Formula Formula::quantified(Quantifier q, std::string var, Formula body) {
  return Formula(std::make_shared<const Node>(Quantified{q, std::move(var), std::move(body)}));
}

inline bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  return a.node_ && b.node_ && *a.node_ == *b.node_;
}

// Convenience for building ground atoms in code and tests.
inline Formula ground_atom(std::string predicate, std::initializer_list<std::string_view> constants) {
  std::vector<Term> args;
  for (const auto c : constants) args.push_back(Term::constant(std::string(c)));
  return Formula::atom(std::move(predicate), std::move(args));
}

// ---------------------------------------------------------------------------
// Diagnostics

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, std::string message)
      : std::runtime_error("at byte " + std::to_string(position) + ": " + message),
        position_(position),
        message_(std::move(message)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t position_;
  std::string message_;
};

struct ParseOptions {
  // When set, an unbound identifier shaped like a conventional variable
  // (one letter u..z, optionally followed by digits) is rejected as a free
  // variable instead of being read as a constant.
  bool reject_unbound_variable_names = true;
};

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class Tok { Ident, LParen, RParen, Comma, Not, And, Or, Xor, Implies, Iff, Forall, Exists, Eq, Neq, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

inline bool ident_start(char c) noexcept {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
inline bool ident_char(char c) noexcept { return ident_start(c) || (c >= '0' && c <= '9'); }

inline std::vector<Token> tokenize(std::string_view s) {
  struct Symbol {
    std::string_view spelling;
    Tok kind;
  };
  // Longest spellings first so "<->" wins over "-" and "!=" over "!".
  static constexpr Symbol symbols[] = {
      {"<->", Tok::Iff},    {"->", Tok::Implies},   {"!=", Tok::Neq},      {"↔", Tok::Iff},
      {"→", Tok::Implies}, {"⊕", Tok::Xor}, {"∨", Tok::Or},   {"∧", Tok::And},
      {"¬", Tok::Not}, {"∀", Tok::Forall},  {"∃", Tok::Exists}, {"≠", Tok::Neq},
      {"~", Tok::Not},      {"!", Tok::Not},          {"&", Tok::And},       {"|", Tok::Or},
      {"^", Tok::Xor},      {"=", Tok::Eq},           {"(", Tok::LParen},    {")", Tok::RParen},
      {",", Tok::Comma},
  };

  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      std::string word(s.substr(i, j - i));
      Tok kind = Tok::Ident;
      if (word == "forall") kind = Tok::Forall;
      else if (word == "exists") kind = Tok::Exists;
      out.push_back({kind, std::move(word), i});
      i = j;
      continue;
    }
    bool matched = false;
    for (const auto& sym : symbols) {
      if (s.substr(i, sym.spelling.size()) == sym.spelling) {
        out.push_back({sym.kind, std::string(sym.spelling), i});
        i += sym.spelling.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(i, "unexpected character '" + std::string(1, c) + "'");
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

inline bool looks_like_variable(std::string_view name) noexcept {
  if (name.empty() || name[0] < 'u' || name[0] > 'z') return false;
  for (std::size_t k = 1; k < name.size(); ++k)
    if (name[k] < '0' || name[k] > '9') return false;
  return true;
}

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& opts) : tokens_(tokenize(text)), opts_(opts) {}

  Formula parse() {
    if (peek().kind == Tok::End) throw ParseError(0, "empty input");
    Formula f = parse_iff();
    if (peek().kind != Tok::End) {
      if (peek().kind == Tok::RParen) throw ParseError(peek().offset, "unbalanced ')'");
      throw ParseError(peek().offset, "unexpected token '" + peek().text + "'");
    }
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok k, std::string_view what) {
    if (peek().kind != k) {
      if (peek().kind == Tok::End) throw ParseError(peek().offset, "unexpected end of input, expected " + std::string(what));
      throw ParseError(peek().offset, "expected " + std::string(what) + ", found '" + peek().text + "'");
    }
    return next();
  }

  Formula parse_iff() {
    Formula left = parse_implies();
    if (accept(Tok::Iff)) return Formula::binary(Connective::Iff, std::move(left), parse_iff());
    return left;
  }
  Formula parse_implies() {
    Formula left = parse_xor();
    if (accept(Tok::Implies)) return Formula::binary(Connective::Implies, std::move(left), parse_implies());
    return left;
  }
  Formula parse_xor() {
    Formula left = parse_or();
    while (accept(Tok::Xor)) left = Formula::binary(Connective::Xor, std::move(left), parse_or());
    return left;
  }
  Formula parse_or() {
    Formula left = parse_and();
    while (accept(Tok::Or)) left = Formula::binary(Connective::Or, std::move(left), parse_and());
    return left;
  }
  Formula parse_and() {
    Formula left = parse_unary();
    while (accept(Tok::And)) left = Formula::binary(Connective::And, std::move(left), parse_unary());
    return left;
  }

  Formula parse_unary() {
    if (accept(Tok::Not)) return Formula::negation(parse_unary());
    if (peek().kind == Tok::Forall || peek().kind == Tok::Exists) {
      const Quantifier q = next().kind == Tok::Forall ? Quantifier::Forall : Quantifier::Exists;
      std::string var = expect(Tok::Ident, "quantified variable").text;
      scope_.push_back(var);
      Formula body = parse_iff();
      scope_.pop_back();
      return Formula::quantified(q, std::move(var), std::move(body));
    }
    return parse_primary();
  }

  Formula parse_primary() {
    if (peek().kind == Tok::LParen) {
      const std::size_t open = next().offset;
      if (peek().kind == Tok::RParen) throw ParseError(peek().offset, "empty parentheses");
      Formula inner = parse_iff();
      if (peek().kind != Tok::RParen) {
        if (peek().kind == Tok::End) throw ParseError(open, "unbalanced '('");
        throw ParseError(peek().offset, "expected ')', found '" + peek().text + "'");
      }
      next();
      return inner;
    }
    if (peek().kind != Tok::Ident) {
      if (peek().kind == Tok::End) throw ParseError(peek().offset, "unexpected end of input");
      if (peek().kind == Tok::RParen) throw ParseError(peek().offset, "unbalanced ')'");
      throw ParseError(peek().offset, "unexpected token '" + peek().text + "'");
    }
    const Token& head = next();
    if (accept(Tok::LParen)) {
      std::vector<Term> args;
      args.push_back(parse_term());
      while (accept(Tok::Comma)) args.push_back(parse_term());
      expect(Tok::RParen, "')' closing argument list");
      return Formula::atom(head.text, std::move(args));
    }
    if (peek().kind == Tok::Eq || peek().kind == Tok::Neq) {
      const bool negated = next().kind == Tok::Neq;
      Term left = resolve(head);
      Term right = parse_term();
      Formula eq = Formula::equality(std::move(left), std::move(right));
      return negated ? Formula::negation(std::move(eq)) : eq;
    }
    return Formula::atom(head.text, {});
  }

  Term parse_term() {
    const Token& t = expect(Tok::Ident, "term");
    if (peek().kind == Tok::LParen)
      throw ParseError(t.offset, "function symbol '" + t.text + "' is not supported (function-free fragment only)");
    return resolve(t);
  }

  Term resolve(const Token& t) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (*it == t.text) return Term::variable(t.text);
    if (opts_.reject_unbound_variable_names && looks_like_variable(t.text))
      throw ParseError(t.offset, "free variable '" + t.text + "'");
    return Term::constant(t.text);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;
  ParseOptions opts_;
};

inline void collect_names(const Formula& f, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) {
          for (const auto& t : n.args) out.insert(t.name);
        } else if constexpr (std::is_same_v<T, Equality>) {
          out.insert(n.left.name);
          out.insert(n.right.name);
        } else if constexpr (std::is_same_v<T, Negation>) {
          collect_names(n.body, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          collect_names(n.left, out);
          collect_names(n.right, out);
        } else {
          out.insert(n.var);
          collect_names(n.body, out);
        }
      },
      f.node());
}

class AlphaNormalizer {
 public:
  explicit AlphaNormalizer(const Formula& f) { collect_names(f, reserved_); }

  Formula run(const Formula& f) {
    return std::visit(
        [&](const auto& n) -> Formula {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Atom>) {
            std::vector<Term> args;
            args.reserve(n.args.size());
            for (const auto& t : n.args) args.push_back(rename(t));
            return Formula::atom(n.predicate, std::move(args));
          } else if constexpr (std::is_same_v<T, Equality>) {
            return Formula::equality(rename(n.left), rename(n.right));
          } else if constexpr (std::is_same_v<T, Negation>) {
            return Formula::negation(run(n.body));
          } else if constexpr (std::is_same_v<T, Binary>) {
            return Formula::binary(n.op, run(n.left), run(n.right));
          } else {
            std::string fresh = n.var;
            if (!claimed_.insert(fresh).second || constants_.contains(fresh)) {
              for (int k = 1;; ++k) {
                fresh = n.var + "_" + std::to_string(k);
                if (!reserved_.contains(fresh) && !claimed_.contains(fresh)) break;
              }
              claimed_.insert(fresh);
            }
            bindings_.emplace_back(n.var, fresh);
            Formula body = run(n.body);
            bindings_.pop_back();
            return Formula::quantified(n.quantifier, fresh, std::move(body));
          }
        },
        f.node());
  }

  void note_constants(const Formula& f) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Atom>) {
            for (const auto& t : n.args)
              if (!t.is_variable()) constants_.insert(t.name);
          } else if constexpr (std::is_same_v<T, Equality>) {
            if (!n.left.is_variable()) constants_.insert(n.left.name);
            if (!n.right.is_variable()) constants_.insert(n.right.name);
          } else if constexpr (std::is_same_v<T, Negation>) {
            note_constants(n.body);
          } else if constexpr (std::is_same_v<T, Binary>) {
            note_constants(n.left);
            note_constants(n.right);
          } else {
            note_constants(n.body);
          }
        },
        f.node());
  }

 private:
  Term rename(const Term& t) const {
    if (!t.is_variable()) return t;
    for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it)
      if (it->first == t.name) return Term::variable(it->second);
    return t;
  }

  std::set<std::string> reserved_;
  std::set<std::string> claimed_;
  std::set<std::string> constants_;
  std::vector<std::pair<std::string, std::string>> bindings_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Operations

// Renames bound variables so each quantifier in f binds a distinct name that
// also differs from every constant in f. Names are kept where already unique.
inline Formula alpha_normalize(const Formula& f) {
  detail::AlphaNormalizer normalizer(f);
  normalizer.note_constants(f);
  return normalizer.run(f);
}

inline Formula parse_formula(std::string_view text, const ParseOptions& opts = {}) {
  detail::Parser parser(text, opts);
  return alpha_normalize(parser.parse());
}

namespace detail {

inline std::string_view connective_symbol(Connective op) noexcept {
  switch (op) {
    case Connective::And: return "∧";
    case Connective::Or: return "∨";
    case Connective::Xor: return "⊕";
    case Connective::Implies: return "→";
    case Connective::Iff: return "↔";
  }
  return "?";
}

inline void render_into(const Formula& f, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) {
          out += n.predicate;
          if (!n.args.empty()) {
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
              if (i) out += ", ";
              out += n.args[i].name;
            }
            out += ')';
          }
        } else if constexpr (std::is_same_v<T, Equality>) {
          out += n.left.name;
          out += " = ";
          out += n.right.name;
        } else if constexpr (std::is_same_v<T, Negation>) {
          out += "¬(";
          render_into(n.body, out);
          out += ')';
        } else if constexpr (std::is_same_v<T, Binary>) {
          out += '(';
          // A quantifier reaches to the closing parenthesis, so a quantified
          // left operand needs its own pair to keep its scope.
          const bool wrap = n.left.template is<Quantified>();
          if (wrap) out += '(';
          render_into(n.left, out);
          if (wrap) out += ')';
          out += ' ';
          out += connective_symbol(n.op);
          out += ' ';
          render_into(n.right, out);
          out += ')';
        } else {
          out += n.quantifier == Quantifier::Forall ? "∀" : "∃";
          out += n.var;
          out += " (";
          render_into(n.body, out);
          out += ')';
        }
      },
      f.node());
}

}  // namespace detail

// Canonical fully parenthesized Unicode rendering.
inline std::string render(const Formula& f) {
  std::string out;
  detail::render_into(f, out);
  return out;
}

// Not(f), except Not(Not(g)) collapses to g. Nothing else is rewritten.
inline Formula negate(const Formula& f) {
  if (const auto* n = f.as<Negation>()) return n->body;
  return Formula::negation(f);
}

namespace detail {

inline void collect_constants(const Formula& f, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) {
          for (const auto& t : n.args)
            if (!t.is_variable()) out.insert(t.name);
        } else if constexpr (std::is_same_v<T, Equality>) {
          if (!n.left.is_variable()) out.insert(n.left.name);
          if (!n.right.is_variable()) out.insert(n.right.name);
        } else if constexpr (std::is_same_v<T, Negation>) {
          collect_constants(n.body, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          collect_constants(n.left, out);
          collect_constants(n.right, out);
        } else {
          collect_constants(n.body, out);
        }
      },
      f.node());
}

}  // namespace detail

// Constant names across fs, in lexicographic order.
inline std::set<std::string> constants(std::span<const Formula> fs) {
  std::set<std::string> out;
  for (const auto& f : fs) detail::collect_constants(f, out);
  return out;
}

inline std::set<std::string> constants(const Formula& f) { return constants(std::span<const Formula>(&f, 1)); }

// Predicate symbol -> arity, as used in fs.
inline std::map<std::string, std::size_t> predicates(std::span<const Formula> fs) {
  std::map<std::string, std::size_t> out;
  auto walk = [&](auto&& self, const Formula& f) -> void {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Atom>) {
            out.emplace(n.predicate, n.args.size());
          } else if constexpr (std::is_same_v<T, Negation>) {
            self(self, n.body);
          } else if constexpr (std::is_same_v<T, Binary>) {
            self(self, n.left);
            self(self, n.right);
          } else if constexpr (std::is_same_v<T, Quantified>) {
            self(self, n.body);
          }
        },
        f.node());
  };
  for (const auto& f : fs) walk(walk, f);
  return out;
}

inline std::size_t depth(const Formula& f) {
  return std::visit(
      [](const auto& n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom> || std::is_same_v<T, Equality>) {
          return 1;
        } else if constexpr (std::is_same_v<T, Binary>) {
          return 1 + std::max(depth(n.left), depth(n.right));
        } else {
          return 1 + depth(n.body);
        }
      },
      f.node());
}

// Structural equality up to consistent renaming of bound variables.
inline bool alpha_equivalent(const Formula& a, const Formula& b) {
  using Env = std::vector<std::pair<std::string, std::string>>;
  auto term_eq = [](const Term& x, const Term& y, const Env& env) {
    if (x.kind != y.kind) return false;
    if (!x.is_variable()) return x.name == y.name;
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
      const bool lx = it->first == x.name, ly = it->second == y.name;
      if (lx || ly) return lx && ly;
    }
    return x.name == y.name;
  };
  auto go = [&](auto&& self, const Formula& x, const Formula& y, Env& env) -> bool {
    if (x.node().index() != y.node().index()) return false;
    return std::visit(
        [&](const auto& nx) -> bool {
          using T = std::decay_t<decltype(nx)>;
          const T& ny = std::get<T>(y.node());
          if constexpr (std::is_same_v<T, Atom>) {
            if (nx.predicate != ny.predicate || nx.args.size() != ny.args.size()) return false;
            for (std::size_t i = 0; i < nx.args.size(); ++i)
              if (!term_eq(nx.args[i], ny.args[i], env)) return false;
            return true;
          } else if constexpr (std::is_same_v<T, Equality>) {
            return term_eq(nx.left, ny.left, env) && term_eq(nx.right, ny.right, env);
          } else if constexpr (std::is_same_v<T, Negation>) {
            return self(self, nx.body, ny.body, env);
          } else if constexpr (std::is_same_v<T, Binary>) {
            return nx.op == ny.op && self(self, nx.left, ny.left, env) && self(self, nx.right, ny.right, env);
          } else {
            if (nx.quantifier != ny.quantifier) return false;
            env.emplace_back(nx.var, ny.var);
            const bool ok = self(self, nx.body, ny.body, env);
            env.pop_back();
            return ok;
          }
        },
        x.node());
  };
  Env env;
  return go(go, a, b, env);
}

inline bool is_closed(const Formula& f) {
  auto go = [](auto&& self, const Formula& g, std::vector<std::string>& bound) -> bool {
    auto ok_term = [&](const Term& t) {
      if (!t.is_variable()) return true;
      for (const auto& b : bound)
        if (b == t.name) return true;
      return false;
    };
    return std::visit(
        [&](const auto& n) -> bool {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Atom>) {
            for (const auto& t : n.args)
              if (!ok_term(t)) return false;
            return true;
          } else if constexpr (std::is_same_v<T, Equality>) {
            return ok_term(n.left) && ok_term(n.right);
          } else if constexpr (std::is_same_v<T, Negation>) {
            return self(self, n.body, bound);
          } else if constexpr (std::is_same_v<T, Binary>) {
            return self(self, n.left, bound) && self(self, n.right, bound);
          } else {
            bound.push_back(n.var);
            const bool ok = self(self, n.body, bound);
            bound.pop_back();
            return ok;
          }
        },
        g.node());
  };
  std::vector<std::string> bound;
  return go(go, f, bound);
}

}  // namespace cgdpd::fol
