#pragma once

#include "culpa/error.hpp"
#include "culpa/expr.hpp"
#include "culpa/signature.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace culpa {

using SignaturePtr = std::shared_ptr<const Signature>;

struct Equation {
  std::size_t target = 0;  // endogenous index
  ExprPtr body;            // bound
  std::vector<VarRef> parents;
  std::string source;  // original text, for diagnostics
};

// Parses and binds an equation body for endogenous variable `target`.
inline Equation make_equation(const Signature& sig, std::string_view target, std::string_view text) {
  Equation eq;
  eq.target = sig.endo_index(target);
  eq.body = bind_expression(parse_expression(text), sig, target);
  collect_refs(*eq.body, eq.parents);
  eq.source = std::string(text);
  return eq;
}

struct Case {
  std::string when;
  std::string value;
};

// `cases: [{when, value}...], default` desugars to nested if/then/else; the
// values are literals from the target's range.
inline Equation make_case_equation(const Signature& sig, std::string_view target, const std::vector<Case>& cases,
                                   std::string_view fallback) {
  const std::size_t t = sig.endo_index(target);
  const auto& var = sig.endo(t);
  ExprPtr body = constant_expr(var, var.value_index(fallback));
  std::string source = std::string(fallback);
  for (auto it = cases.rbegin(); it != cases.rend(); ++it) {
    auto cond = bind_expression(parse_expression(it->when), sig, target);
    if (cond->type == ValueType::Sym)
      throw Error(ErrorCode::TypeError, "case condition '" + it->when + "' is not boolean");
    auto node = std::make_shared<Expr>();
    node->op = Expr::Op::If;
    node->args = {cond, constant_expr(var, var.value_index(it->value)), body};
    node->type = var.is_integer() ? ValueType::Int : ValueType::Sym;
    body = node;
    source = "if " + it->when + " then " + it->value + " else (" + source + ")";
  }
  Equation eq;
  eq.target = t;
  eq.body = body;
  collect_refs(*eq.body, eq.parents);
  eq.source = source;
  return eq;
}

inline Equation constant_equation(const Signature& sig, std::size_t target, int value) {
  Equation eq;
  eq.target = target;
  eq.body = constant_expr(sig.endo(target), value);
  eq.source = sig.endo(target).value(value);
  return eq;
}

namespace detail {

inline std::string describe_assignment(const Signature& sig, const std::vector<VarRef>& vars,
                                       const std::vector<int>& idx) {
  std::string s = "{";
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) s += ", ";
    s += sig.var(vars[i]).name() + "=" + sig.var(vars[i]).value(idx[i]);
  }
  return s + "}";
}

// Depth-first search for one cycle among endogenous dependencies.
inline std::vector<std::string> find_cycle(const Signature& sig, const std::vector<Equation>& eqs) {
  const std::size_t n = eqs.size();
  std::vector<int> state(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::string> cycle;
  std::function<bool(std::size_t)> dfs = [&](std::size_t v) {
    state[v] = 1;
    stack.push_back(v);
    for (const auto& p : eqs[v].parents) {
      if (p.kind != VarKind::Endogenous) continue;
      if (state[p.index] == 1) {
        auto it = std::find(stack.begin(), stack.end(), p.index);
        for (; it != stack.end(); ++it) cycle.push_back(sig.endo(*it).name());
        return true;
      }
      if (state[p.index] == 0 && dfs(p.index)) return true;
    }
    stack.pop_back();
    state[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < n; ++v)
    if (state[v] == 0 && dfs(v)) break;
  // The DFS walks from child to parent; present the cycle in causal direction.
  std::reverse(cycle.begin(), cycle.end());
  if (!cycle.empty()) {
    auto m = std::min_element(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), m, cycle.end());
  }
  return cycle;
}

// Evaluates every equation over the full product of its parents' ranges.
inline void check_ranges(const Signature& sig, const Equation& eq) {
  const auto& target = sig.endo(eq.target);
  std::vector<int> exo(sig.exogenous().size(), 0);
  std::vector<int> endo(sig.endogenous().size(), 0);
  std::vector<int> idx(eq.parents.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < eq.parents.size(); ++i) {
      const auto& p = eq.parents[i];
      (p.kind == VarKind::Exogenous ? exo : endo)[p.index] = idx[i];
    }
    const Value v = evaluate(*eq.body, sig, exo, endo);
    if (!to_range_index(v, target))
      throw RangeViolationError(target.name(), describe_assignment(sig, eq.parents, idx), value_text(v));
    std::size_t k = 0;
    for (; k < idx.size(); ++k) {
      if (++idx[k] < static_cast<int>(sig.var(eq.parents[k]).size())) break;
      idx[k] = 0;
    }
    if (k == idx.size()) break;
  }
}

}  // namespace detail

// Returns a topological order of the endogenous variables (each equation only
// reads exogenous variables and variables earlier in the order). Throws
// CyclicModelError or RangeViolationError.
inline std::vector<std::size_t> validate_model(const Signature& sig, const std::vector<Equation>& eqs) {
  const std::size_t n = sig.endogenous().size();
  if (eqs.size() != n) throw Error(ErrorCode::InvalidSignature, "expected one equation per endogenous variable");
  for (std::size_t i = 0; i < n; ++i)
    if (eqs[i].target != i) throw Error(ErrorCode::InvalidSignature, "equations are not indexed by their target");

  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& p : eqs[v].parents)
      if (p.kind == VarKind::Endogenous) {
        ++indegree[v];
        children[p.index].push_back(v);
      }
  // Kahn's algorithm; the smallest ready index first keeps the order stable.
  std::vector<std::size_t> order;
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push_back(v);
  while (!ready.empty()) {
    auto it = std::min_element(ready.begin(), ready.end());
    const std::size_t v = *it;
    ready.erase(it);
    order.push_back(v);
    for (auto c : children[v])
      if (--indegree[c] == 0) ready.push_back(c);
  }
  if (order.size() != n) throw CyclicModelError(detail::find_cycle(sig, eqs));
  for (const auto& eq : eqs) detail::check_ranges(sig, eq);
  return order;
}

struct World {
  std::vector<int> values;  // range index per endogenous variable
  int operator[](std::size_t i) const { return values[i]; }
  bool operator==(const World&) const = default;
};

struct Context {
  std::vector<int> values;  // range index per exogenous variable
  bool operator==(const Context&) const = default;
};

// Distinct endogenous variables set to constants, kept sorted by variable index.
class Intervention {
 public:
  Intervention() = default;

  void set(std::size_t var, int value) {
    auto it = std::lower_bound(items_.begin(), items_.end(), var,
                               [](const auto& p, std::size_t v) { return p.first < v; });
    if (it != items_.end() && it->first == var)
      it->second = value;
    else
      items_.insert(it, {var, value});
  }
  void set(const Signature& sig, std::string_view var, std::string_view value) {
    const auto i = sig.endo_index(var);
    if (contains(i))
      throw Error(ErrorCode::InvalidSignature, "variable " + std::string(var) + " intervened on twice");
    set(i, sig.endo(i).value_index(value));
  }
  bool contains(std::size_t var) const {
    return std::any_of(items_.begin(), items_.end(), [&](const auto& p) { return p.first == var; });
  }
  const std::vector<std::pair<std::size_t, int>>& items() const noexcept { return items_; }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t size() const noexcept { return items_.size(); }

  // Later assignments win on overlap.
  Intervention merged(const Intervention& other) const {
    Intervention r = *this;
    for (const auto& [v, x] : other.items_) r.set(v, x);
    return r;
  }

  bool operator==(const Intervention&) const = default;

 private:
  std::vector<std::pair<std::size_t, int>> items_;
};

class CausalModel {
 public:
  CausalModel(SignaturePtr sig, std::vector<Equation> equations)
      : sig_(std::move(sig)), equations_(std::move(equations)) {
    std::sort(equations_.begin(), equations_.end(), [](const Equation& a, const Equation& b) {
      return a.target < b.target;
    });
    order_ = validate_model(*sig_, equations_);
  }

  const Signature& signature() const noexcept { return *sig_; }
  const SignaturePtr& signature_ptr() const noexcept { return sig_; }
  const std::vector<Equation>& equations() const noexcept { return equations_; }
  const Equation& equation(std::size_t v) const { return equations_[v]; }
  const std::vector<std::size_t>& order() const noexcept { return order_; }

  // Solution of M_{iv} in `context`. Intervened variables keep their constants;
  // the original order stays valid because interventions only remove edges.
  World solve(const Context& context, const Intervention& iv = {}) const {
    if (context.values.size() != sig_->exogenous().size())
      throw Error(ErrorCode::InvalidSignature, "context does not match the signature");
    World w;
    w.values.assign(equations_.size(), 0);
    std::vector<char> fixed(equations_.size(), 0);
    for (const auto& [v, x] : iv.items()) {
      w.values[v] = x;
      fixed[v] = 1;
    }
    for (auto v : order_) {
      if (fixed[v]) continue;
      const Value val = evaluate(*equations_[v].body, *sig_, context.values, w.values);
      w.values[v] = *to_range_index(val, sig_->endo(v));
    }
    return w;
  }

 private:
  struct Trusted {};
  CausalModel(SignaturePtr sig, std::vector<Equation> equations, std::vector<std::size_t> order, Trusted)
      : sig_(std::move(sig)), equations_(std::move(equations)), order_(std::move(order)) {}
  friend CausalModel intervene(const CausalModel&, const Intervention&);

  SignaturePtr sig_;
  std::vector<Equation> equations_;
  std::vector<std::size_t> order_;
};

using CausalModelPtr = std::shared_ptr<const CausalModel>;

// M_{Y<-y}: the intervened equations become constants.
inline CausalModel intervene(const CausalModel& m, const Intervention& iv) {
  auto eqs = m.equations();
  for (const auto& [v, x] : iv.items()) {
    if (v >= eqs.size()) throw Error(ErrorCode::UnknownVariable, "intervention on an unknown variable");
    if (x < 0 || x >= static_cast<int>(m.signature().endo(v).size()))
      throw Error(ErrorCode::ValueNotInRange, "intervention value out of range for " + m.signature().endo(v).name());
    eqs[v] = constant_equation(m.signature(), v, x);
  }
  return CausalModel(m.signature_ptr(), std::move(eqs), m.order(), CausalModel::Trusted{});
}

struct CausalSetting {
  CausalModelPtr model;
  Context context;

  const Signature& signature() const { return model->signature(); }
};

inline World solve(const CausalSetting& s) { return s.model->solve(s.context); }

// w_{M, iv, u}
inline World world_under(const CausalSetting& s, const Intervention& iv) { return s.model->solve(s.context, iv); }

inline Intervention action_intervention(const Signature& sig, int action) {
  Intervention iv;
  iv.set(sig.action_index(), action);
  return iv;
}

// Values of `vars` when A is set to `action`: o_{A<-a}.
inline std::vector<int> outcome_under_action(const CausalSetting& s, std::span<const std::size_t> vars, int action) {
  const World w = world_under(s, action_intervention(s.signature(), action));
  std::vector<int> out;
  out.reserve(vars.size());
  for (auto v : vars) out.push_back(w[v]);
  return out;
}

inline std::string to_string(const Signature& sig, const World& w) {
  std::string s = "{";
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    if (i) s += ", ";
    s += sig.endo(i).name() + "=" + sig.endo(i).value(w[i]);
  }
  return s + "}";
}

inline std::string to_string(const Signature& sig, const Intervention& iv) {
  std::string s;
  for (const auto& [v, x] : iv.items()) {
    if (!s.empty()) s += ", ";
    s += sig.endo(v).name() + " <- " + sig.endo(v).value(x);
  }
  return s;
}

}  // namespace culpa
