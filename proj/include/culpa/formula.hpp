#pragma once

#include "culpa/error.hpp"
#include "culpa/lexer.hpp"
#include "culpa/scm.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace culpa {

// Boolean combination of primitive events X = x.
struct FormulaNode {
  enum class Kind { True, False, Prim, Not, And, Or };
  Kind kind = Kind::True;
  std::string var;
  std::string value;
  std::size_t var_index = 0;  // valid once bound
  int value_index = -1;
  std::vector<std::shared_ptr<const FormulaNode>> args;
};
using FormulaNodePtr = std::shared_ptr<const FormulaNode>;

struct InterventionAtom {
  std::string var;
  std::string value;
};

// [Y1 <- y1, ..., Yk <- yk] phi, with at most one (outermost) prefix.
class CausalFormula {
 public:
  CausalFormula() : body_(make(FormulaNode::Kind::True)) {}
  CausalFormula(std::vector<InterventionAtom> prefix, FormulaNodePtr body)
      : prefix_(std::move(prefix)), body_(std::move(body)) {}

  static FormulaNodePtr make(FormulaNode::Kind k, std::vector<FormulaNodePtr> args = {}) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = k;
    n->args = std::move(args);
    return n;
  }
  static FormulaNodePtr prim(std::string var, std::string value) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FormulaNode::Kind::Prim;
    n->var = std::move(var);
    n->value = std::move(value);
    return n;
  }

  const std::vector<InterventionAtom>& prefix() const noexcept { return prefix_; }
  const FormulaNodePtr& body() const noexcept { return body_; }
  const Intervention& intervention() const noexcept { return iv_; }
  bool bound() const noexcept { return bound_; }
  bool has_intervention() const noexcept { return !prefix_.empty(); }

  // Resolves names against `sig`; throws UnknownVariable / ValueNotInRange.
  CausalFormula bind(const Signature& sig) const {
    CausalFormula f(prefix_, bind_node(body_, sig));
    for (const auto& a : prefix_) f.iv_.set(sig, a.var, a.value);
    f.bound_ = true;
    return f;
  }

  CausalFormula with_prefix(std::vector<InterventionAtom> prefix) const {
    if (has_intervention()) throw Error(ErrorCode::SyntaxError, "formula already has an intervention prefix");
    CausalFormula f(std::move(prefix), body_);
    return f;
  }

  // Same body with the intervention `iv` prepended (bound formulas only).
  CausalFormula under(const Signature& sig, const Intervention& iv) const {
    if (has_intervention()) throw Error(ErrorCode::SyntaxError, "formula already has an intervention prefix");
    std::vector<InterventionAtom> p;
    for (const auto& [v, x] : iv.items()) p.push_back({sig.endo(v).name(), sig.endo(v).value(x)});
    CausalFormula f(std::move(p), body_);
    f.iv_ = iv;
    f.bound_ = bound_;
    return f;
  }

  CausalFormula negated_body() const {
    CausalFormula f(prefix_, make(FormulaNode::Kind::Not, {body_}));
    f.iv_ = iv_;
    f.bound_ = bound_;
    return f;
  }

 private:
  static FormulaNodePtr bind_node(const FormulaNodePtr& n, const Signature& sig) {
    auto out = std::make_shared<FormulaNode>(*n);
    out->args.clear();
    for (const auto& a : n->args) out->args.push_back(bind_node(a, sig));
    if (n->kind == FormulaNode::Kind::Prim) {
      out->var_index = sig.endo_index(n->var);
      out->value_index = sig.endo(out->var_index).value_index(n->value);
    }
    return out;
  }

  std::vector<InterventionAtom> prefix_;
  FormulaNodePtr body_;
  Intervention iv_;
  bool bound_ = false;
};

namespace detail {

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view src) : ts_(src) {}

  CausalFormula parse() {
    std::vector<InterventionAtom> prefix;
    if (ts_.at_punct("[")) {
      ts_.next();
      do {
        InterventionAtom a;
        a.var = ident();
        ts_.expect("<-");
        a.value = value();
        prefix.push_back(std::move(a));
      } while (ts_.accept(","));
      ts_.expect("]");
    }
    auto body = bexpr();
    if (!ts_.done()) ts_.fail("unexpected trailing input");
    return CausalFormula(std::move(prefix), std::move(body));
  }

 private:
  std::string ident() {
    if (ts_.peek().kind != Tok::Ident) ts_.fail("expected a variable name");
    return ts_.next().text;
  }
  std::string value() {
    const auto& t = ts_.peek();
    if (t.kind == Tok::Ident || t.kind == Tok::Int || t.kind == Tok::Quoted) return ts_.next().text;
    if (t.kind == Tok::Punct && t.text == "-" && ts_.peek(1).kind == Tok::Int) {
      ts_.next();
      return "-" + ts_.next().text;
    }
    ts_.fail("expected a value");
  }
  FormulaNodePtr bexpr() {
    auto lhs = conj();
    while (ts_.at_punct("|") || ts_.at_punct("||")) {
      ts_.next();
      lhs = CausalFormula::make(FormulaNode::Kind::Or, {lhs, conj()});
    }
    return lhs;
  }
  FormulaNodePtr conj() {
    auto lhs = bterm();
    while (ts_.at_punct("&") || ts_.at_punct("&&")) {
      ts_.next();
      lhs = CausalFormula::make(FormulaNode::Kind::And, {lhs, bterm()});
    }
    return lhs;
  }
  FormulaNodePtr bterm() {
    if (ts_.at_punct("!")) {
      ts_.next();
      return CausalFormula::make(FormulaNode::Kind::Not, {bterm()});
    }
    if (ts_.at_punct("(")) {
      ts_.next();
      auto e = bexpr();
      ts_.expect(")");
      return e;
    }
    if (ts_.at_punct("[")) ts_.fail("nested intervention: the prefix must be outermost");
    if (ts_.at_word("true")) {
      ts_.next();
      return CausalFormula::make(FormulaNode::Kind::True);
    }
    if (ts_.at_word("false")) {
      ts_.next();
      return CausalFormula::make(FormulaNode::Kind::False);
    }
    auto var = ident();
    if (!ts_.accept("=") && !ts_.accept("==")) ts_.fail("expected '='");
    return CausalFormula::prim(std::move(var), value());
  }

  TokenStream ts_;
};

}  // namespace detail

// cformula := '[' iv (',' iv)* ']' bexpr | bexpr
inline CausalFormula parse_formula(std::string_view text) { return detail::FormulaParser(text).parse(); }

inline CausalFormula parse_formula(std::string_view text, const Signature& sig) {
  return parse_formula(text).bind(sig);
}

inline bool eval_body(const FormulaNode& n, const World& w) {
  using K = FormulaNode::Kind;
  switch (n.kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Prim: return w[n.var_index] == n.value_index;
    case K::Not: return !eval_body(*n.args[0], w);
    case K::And: return eval_body(*n.args[0], w) && eval_body(*n.args[1], w);
    case K::Or: return eval_body(*n.args[0], w) || eval_body(*n.args[1], w);
  }
  return false;
}

// (M,u) |= phi
inline bool holds(const CausalSetting& s, const CausalFormula& f) {
  if (!f.bound()) throw Error(ErrorCode::PreconditionViolated, "formula is not bound to a signature");
  return eval_body(*f.body(), world_under(s, f.intervention()));
}

inline void collect_variables(const FormulaNode& n, std::vector<std::size_t>& out) {
  if (n.kind == FormulaNode::Kind::Prim &&
      std::find(out.begin(), out.end(), n.var_index) == out.end())
    out.push_back(n.var_index);
  for (const auto& a : n.args) collect_variables(*a, out);
}

// Flattens a conjunction of primitive events (X=x & Y=y ...); nullopt otherwise.
inline std::optional<std::vector<std::pair<std::size_t, int>>> as_conjunction(const CausalFormula& f) {
  if (f.has_intervention()) return std::nullopt;
  std::vector<std::pair<std::size_t, int>> out;
  std::function<bool(const FormulaNode&)> walk = [&](const FormulaNode& n) {
    if (n.kind == FormulaNode::Kind::Prim) {
      for (const auto& [v, x] : out)
        if (v == n.var_index) return x == n.value_index;  // X=x & X=x is fine, X=x & X=y is not
      out.emplace_back(n.var_index, n.value_index);
      return true;
    }
    if (n.kind == FormulaNode::Kind::And) return walk(*n.args[0]) && walk(*n.args[1]);
    return false;
  };
  if (!walk(*f.body()) || out.empty()) return std::nullopt;
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {
inline std::string node_text(const FormulaNode& n, int parent_prec) {
  using K = FormulaNode::Kind;
  switch (n.kind) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Prim: return n.var + " = " + n.value;
    case K::Not: return "!" + node_text(*n.args[0], 3);
    case K::And:
    case K::Or: {
      const int prec = n.kind == K::And ? 2 : 1;
      std::string s = node_text(*n.args[0], prec) + (prec == 2 ? " & " : " | ") + node_text(*n.args[1], prec + 1);
      return prec < parent_prec ? "(" + s + ")" : s;
    }
  }
  return {};
}
}  // namespace detail

inline std::string to_string(const CausalFormula& f) {
  std::string s;
  if (f.has_intervention()) {
    s = "[";
    for (std::size_t i = 0; i < f.prefix().size(); ++i) {
      if (i) s += ", ";
      s += f.prefix()[i].var + " <- " + f.prefix()[i].value;
    }
    s += "] ";
  }
  return s + detail::node_text(*f.body(), f.has_intervention() ? 3 : 0);
}

}  // namespace culpa
