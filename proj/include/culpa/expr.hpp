#pragma once

#include "culpa/error.hpp"
#include "culpa/lexer.hpp"
#include "culpa/signature.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace culpa {

enum class ValueType { Int, Sym, Bool };

// Equation body AST. Unbound after parsing (names only); bind_expression
// resolves names against a signature and assigns static types.
struct Expr {
  enum class Op { IntLit, SymLit, BoolLit, Var, Neg, Not, Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or, If };
  Op op = Op::IntLit;
  std::int64_t ival = 0;
  std::string text;
  std::vector<std::shared_ptr<const Expr>> args;
  std::optional<VarRef> ref;
  ValueType type = ValueType::Int;
  std::size_t pos = 0;
};
using ExprPtr = std::shared_ptr<const Expr>;

namespace detail {

inline ExprPtr make_node(Expr::Op op, std::vector<ExprPtr> args, std::size_t pos) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->args = std::move(args);
  e->pos = pos;
  return e;
}

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : ts_(src) {}

  ExprPtr parse() {
    auto e = expr();
    if (!ts_.done()) ts_.fail("unexpected trailing input");
    return e;
  }

 private:
  ExprPtr expr() {
    if (ts_.at_word("if")) {
      const auto pos = ts_.next().pos;
      auto c = expr();
      ts_.expect("then");
      auto t = expr();
      ts_.expect("else");
      auto f = expr();
      return make_node(Expr::Op::If, {c, t, f}, pos);
    }
    return disjunction();
  }
  ExprPtr disjunction() {
    auto lhs = conjunction();
    while (ts_.at_punct("|") || ts_.at_punct("||") || ts_.at_word("or")) {
      const auto pos = ts_.next().pos;
      lhs = make_node(Expr::Op::Or, {lhs, conjunction()}, pos);
    }
    return lhs;
  }
  ExprPtr conjunction() {
    auto lhs = negation();
    while (ts_.at_punct("&") || ts_.at_punct("&&") || ts_.at_word("and")) {
      const auto pos = ts_.next().pos;
      lhs = make_node(Expr::Op::And, {lhs, negation()}, pos);
    }
    return lhs;
  }
  ExprPtr negation() {
    if (ts_.at_punct("!") || ts_.at_word("not")) {
      const auto pos = ts_.next().pos;
      return make_node(Expr::Op::Not, {negation()}, pos);
    }
    return comparison();
  }
  ExprPtr comparison() {
    auto lhs = sum();
    static const std::pair<const char*, Expr::Op> ops[] = {{"=", Expr::Op::Eq},  {"==", Expr::Op::Eq},
                                                           {"!=", Expr::Op::Ne}, {"<", Expr::Op::Lt},
                                                           {"<=", Expr::Op::Le}, {">", Expr::Op::Gt},
                                                           {">=", Expr::Op::Ge}};
    for (const auto& [text, op] : ops) {
      if (ts_.at_punct(text)) {
        const auto pos = ts_.next().pos;
        auto rhs = sum();
        for (const auto& [t2, op2] : ops)
          if (ts_.at_punct(t2)) ts_.fail("comparisons do not chain");
        return make_node(op, {lhs, rhs}, pos);
      }
    }
    return lhs;
  }
  ExprPtr sum() {
    auto lhs = product();
    while (ts_.at_punct("+") || ts_.at_punct("-")) {
      const auto t = ts_.next();
      lhs = make_node(t.text == "+" ? Expr::Op::Add : Expr::Op::Sub, {lhs, product()}, t.pos);
    }
    return lhs;
  }
  ExprPtr product() {
    auto lhs = unary();
    while (ts_.at_punct("*")) {
      const auto pos = ts_.next().pos;
      lhs = make_node(Expr::Op::Mul, {lhs, unary()}, pos);
    }
    return lhs;
  }
  ExprPtr unary() {
    if (ts_.at_punct("-")) {
      const auto pos = ts_.next().pos;
      return make_node(Expr::Op::Neg, {unary()}, pos);
    }
    return atom();
  }
  ExprPtr atom() {
    const Token t = ts_.peek();
    if (t.kind == Tok::Punct && t.text == "(") {
      ts_.next();
      auto e = expr();
      ts_.expect(")");
      return e;
    }
    auto e = std::make_shared<Expr>();
    e->pos = t.pos;
    switch (t.kind) {
      case Tok::Int:
        if (!parse_int64(t.text, e->ival)) throw SyntaxError("integer literal out of range", t.pos);
        e->op = Expr::Op::IntLit;
        break;
      case Tok::Quoted:
        e->op = Expr::Op::SymLit;
        e->text = t.text;
        break;
      case Tok::Ident:
        if (t.text == "true" || t.text == "false") {
          e->op = Expr::Op::BoolLit;
          e->ival = t.text == "true";
        } else if (t.text == "if" || t.text == "then" || t.text == "else" || t.text == "and" ||
                   t.text == "or" || t.text == "not") {
          ts_.fail("unexpected keyword");
        } else {
          e->op = Expr::Op::Var;
          e->text = t.text;
        }
        break;
      default:
        ts_.fail("expected a value, variable or '('");
    }
    ts_.next();
    return e;
  }

  TokenStream ts_;
};

inline bool numeric(ValueType t) { return t != ValueType::Sym; }

}  // namespace detail

inline ExprPtr parse_expression(std::string_view text) { return detail::ExprParser(text).parse(); }

// Resolves variable names and type-checks. `target` (the equation's own
// variable) may not be referenced.
inline ExprPtr bind_expression(const ExprPtr& e, const Signature& sig, std::string_view target = {}) {
  using Op = Expr::Op;
  auto out = std::make_shared<Expr>(*e);
  out->args.clear();
  for (const auto& a : e->args) out->args.push_back(bind_expression(a, sig, target));
  const auto& args = out->args;
  auto type_error = [&](const std::string& msg) {
    throw Error(ErrorCode::TypeError, msg + " (at offset " + std::to_string(e->pos) + ")");
  };
  auto check_symbol = [&](const ExprPtr& var, const ExprPtr& lit) {
    if (var->op == Op::Var && lit->op == Op::SymLit && !sig.var(*var->ref).find(lit->text))
      throw Error(ErrorCode::ValueNotInRange,
                  "value '" + lit->text + "' is not in the range of " + var->text);
  };
  switch (e->op) {
    case Op::IntLit: out->type = ValueType::Int; break;
    case Op::SymLit: out->type = ValueType::Sym; break;
    case Op::BoolLit: out->type = ValueType::Bool; break;
    case Op::Var: {
      if (e->text == target) type_error("equation for " + e->text + " refers to itself");
      auto r = sig.find(e->text);
      if (!r) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + e->text + "'");
      out->ref = r;
      out->type = sig.var(*r).is_integer() ? ValueType::Int : ValueType::Sym;
      break;
    }
    case Op::Neg:
      if (!detail::numeric(args[0]->type)) type_error("arithmetic on a symbolic value");
      out->type = ValueType::Int;
      break;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
      if (!detail::numeric(args[0]->type) || !detail::numeric(args[1]->type))
        type_error("arithmetic on a symbolic value");
      out->type = ValueType::Int;
      break;
    case Op::Eq:
    case Op::Ne:
      if (detail::numeric(args[0]->type) != detail::numeric(args[1]->type))
        type_error("comparison between a symbolic and a numeric value (quote symbolic values as 'v')");
      check_symbol(args[0], args[1]);
      check_symbol(args[1], args[0]);
      out->type = ValueType::Bool;
      break;
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge:
      if (!detail::numeric(args[0]->type) || !detail::numeric(args[1]->type))
        type_error("ordering comparison on a symbolic value");
      out->type = ValueType::Bool;
      break;
    case Op::Not:
    case Op::And:
    case Op::Or:
      for (const auto& a : args)
        if (!detail::numeric(a->type)) type_error("boolean connective on a symbolic value");
      out->type = ValueType::Bool;
      break;
    case Op::If:
      if (!detail::numeric(args[0]->type)) type_error("if-condition is symbolic");
      if (detail::numeric(args[1]->type) != detail::numeric(args[2]->type))
        type_error("if-branches mix symbolic and numeric values");
      if (args[1]->type == ValueType::Sym)
        out->type = ValueType::Sym;
      else if (args[1]->type == ValueType::Bool && args[2]->type == ValueType::Bool)
        out->type = ValueType::Bool;
      else
        out->type = ValueType::Int;
      break;
  }
  return out;
}

inline void collect_refs(const Expr& e, std::vector<VarRef>& out) {
  if (e.op == Expr::Op::Var && e.ref) {
    if (std::find(out.begin(), out.end(), *e.ref) == out.end()) out.push_back(*e.ref);
  }
  for (const auto& a : e.args) collect_refs(*a, out);
}

struct Value {
  ValueType type = ValueType::Int;
  std::int64_t i = 0;
  const std::string* s = nullptr;
};

inline std::string value_text(const Value& v) {
  switch (v.type) {
    case ValueType::Int: return std::to_string(v.i);
    case ValueType::Bool: return v.i ? "1" : "0";
    case ValueType::Sym: return *v.s;
  }
  return {};
}

// Evaluates a bound expression. `exo` and `endo` hold range indices.
inline Value evaluate(const Expr& e, const Signature& sig, std::span<const int> exo, std::span<const int> endo) {
  using Op = Expr::Op;
  auto num = [&](const ExprPtr& a) {
    Value v = evaluate(*a, sig, exo, endo);
    return v.i;
  };
  auto overflow = [] { throw Error(ErrorCode::TypeError, "integer overflow in equation"); };
  switch (e.op) {
    case Op::IntLit: return {ValueType::Int, e.ival, nullptr};
    case Op::BoolLit: return {ValueType::Bool, e.ival, nullptr};
    case Op::SymLit: return {ValueType::Sym, 0, &e.text};
    case Op::Var: {
      const auto& var = sig.var(*e.ref);
      const int idx = e.ref->kind == VarKind::Exogenous ? exo[e.ref->index] : endo[e.ref->index];
      if (var.is_integer()) return {ValueType::Int, var.int_value(idx), nullptr};
      return {ValueType::Sym, 0, &var.value(idx)};
    }
    case Op::Neg: {
      std::int64_t r = 0;
      if (__builtin_sub_overflow(std::int64_t{0}, num(e.args[0]), &r)) overflow();
      return {ValueType::Int, r, nullptr};
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul: {
      const auto a = num(e.args[0]);
      const auto b = num(e.args[1]);
      std::int64_t r = 0;
      bool bad = e.op == Op::Add   ? __builtin_add_overflow(a, b, &r)
                 : e.op == Op::Sub ? __builtin_sub_overflow(a, b, &r)
                                   : __builtin_mul_overflow(a, b, &r);
      if (bad) overflow();
      return {ValueType::Int, r, nullptr};
    }
    case Op::Eq:
    case Op::Ne: {
      const Value a = evaluate(*e.args[0], sig, exo, endo);
      const Value b = evaluate(*e.args[1], sig, exo, endo);
      const bool eq = a.type == ValueType::Sym ? *a.s == *b.s : a.i == b.i;
      return {ValueType::Bool, (e.op == Op::Eq) == eq, nullptr};
    }
    case Op::Lt: return {ValueType::Bool, num(e.args[0]) < num(e.args[1]), nullptr};
    case Op::Le: return {ValueType::Bool, num(e.args[0]) <= num(e.args[1]), nullptr};
    case Op::Gt: return {ValueType::Bool, num(e.args[0]) > num(e.args[1]), nullptr};
    case Op::Ge: return {ValueType::Bool, num(e.args[0]) >= num(e.args[1]), nullptr};
    case Op::Not: return {ValueType::Bool, num(e.args[0]) == 0, nullptr};
    case Op::And: return {ValueType::Bool, num(e.args[0]) != 0 && num(e.args[1]) != 0, nullptr};
    case Op::Or: return {ValueType::Bool, num(e.args[0]) != 0 || num(e.args[1]) != 0, nullptr};
    case Op::If: {
      Value v = num(e.args[0]) != 0 ? evaluate(*e.args[1], sig, exo, endo) : evaluate(*e.args[2], sig, exo, endo);
      if (e.type == ValueType::Int && v.type == ValueType::Bool) v.type = ValueType::Int;
      return v;
    }
  }
  return {};
}

// Maps a computed value onto the target's range; nullopt when out of range.
inline std::optional<int> to_range_index(const Value& v, const Variable& target) {
  switch (v.type) {
    case ValueType::Int: return target.find_int(v.i);
    case ValueType::Bool:
      if (target.is_integer()) return target.find_int(v.i);
      return target.find(v.i ? "true" : "false");
    case ValueType::Sym: return target.find(*v.s);
  }
  return std::nullopt;
}

// Literal node holding a value of `var`, used for interventions and case lists.
inline ExprPtr constant_expr(const Variable& var, int idx) {
  auto e = std::make_shared<Expr>();
  if (var.is_integer()) {
    e->op = Expr::Op::IntLit;
    e->ival = var.int_value(idx);
    e->type = ValueType::Int;
  } else {
    e->op = Expr::Op::SymLit;
    e->text = var.value(idx);
    e->type = ValueType::Sym;
  }
  return e;
}

}  // namespace culpa
