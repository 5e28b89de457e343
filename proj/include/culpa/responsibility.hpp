#pragma once

#include "culpa/combinatorics.hpp"
#include "culpa/epistemic.hpp"
#include "culpa/error.hpp"
#include "culpa/intention.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace culpa {

struct CostViolation {
  std::size_t setting = 0;
  int action = 0;
  std::vector<std::size_t> subset;  // empty for the "actually costly" check
  std::string inequality;           // the inequality that failed, with values
};

struct CostModel {
  std::vector<std::size_t> cost_variables;  // sorted by index
  bool validated = false;
  std::vector<CostViolation> violations;
};

namespace detail {

inline World projected_world(const CausalSetting& s, const std::vector<std::size_t>& vars, int a) {
  const auto o = outcome_under_action(s, vars, a);
  Intervention iv;
  for (std::size_t i = 0; i < vars.size(); ++i) iv.set(vars[i], o[i]);
  return world_under(s, iv);
}

inline constexpr std::size_t kMaxCostVariables = 16;

}  // namespace detail

// Checks both cost axioms in every setting and for every action. Never
// throws on a failed axiom; the violations are returned.
inline CostModel validate_cost_vars(const EpistemicState& e, std::vector<std::size_t> vars) {
  const auto& sig = e.signature();
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  for (auto v : vars) {
    if (v >= sig.endogenous().size()) throw Error(ErrorCode::UnknownVariable, "cost variable index out of range");
    if (v == sig.action_index())
      throw Error(ErrorCode::PreconditionViolated, "the action variable cannot be a cost variable");
  }
  if (vars.size() > detail::kMaxCostVariables)
    throw Error(ErrorCode::LimitExceeded, "at most " + std::to_string(detail::kMaxCostVariables) + " cost variables");

  CostModel cm;
  cm.cost_variables = vars;
  const auto& u = e.utility();
  for (std::size_t k = 0; k < e.settings().size(); ++k) {
    const auto& s = e.settings()[k].setting;
    const Rational base = u(solve(s));
    for (int a = 0; a < static_cast<int>(e.action_count()); ++a) {
      const Rational full = u(detail::projected_world(s, vars, a));
      if (base < full)
        cm.violations.push_back({k, a, {}, "u(w) = " + to_string(base) + " < " + to_string(full) + " = u(w[O_c])"});
      for_each_subset_by_size(vars.size(), vars.size() - (vars.empty() ? 0 : 1), [&](const std::vector<std::size_t>& pick) {
        std::vector<std::size_t> sub;
        for (auto p : pick) sub.push_back(vars[p]);
        const Rational partial = u(detail::projected_world(s, sub, a));
        if (full > partial)
          cm.violations.push_back(
              {k, a, sub, "u(w[O_c]) = " + to_string(full) + " > " + to_string(partial) + " = u(w[subset])"});
        return false;
      });
    }
  }
  cm.validated = cm.violations.empty();
  return cm;
}

// Expected utility lost by projecting the cost variables onto their values under a.
inline Rational cost(const EpistemicState& e, int a, const CostModel& cm) {
  check_action(e, a);
  if (!cm.validated) throw Error(ErrorCode::InvalidCostModel, "cost variables violate the cost axioms");
  Rational c = 0;
  if (cm.cost_variables.empty()) return c;
  for (const auto& ws : e.settings()) {
    const auto& u = e.utility();
    c += ws.probability * (u(solve(ws.setting)) - u(detail::projected_world(ws.setting, cm.cost_variables, a)));
  }
  return c;
}

inline std::vector<Rational> all_costs(const EpistemicState& e, const CostModel& cm) {
  std::vector<Rational> out;
  for (int a = 0; a < static_cast<int>(e.action_count()); ++a) out.push_back(cost(e, a, cm));
  return out;
}

namespace detail {

inline void require_above_costs(const std::vector<Rational>& costs, const Rational& bound, ErrorCode code,
                                const char* name) {
  const Rational mx = costs.empty() ? Rational(0) : *std::max_element(costs.begin(), costs.end());
  if (!(bound > mx))
    throw Error(code, std::string(name) + " = " + to_string(bound) + " must exceed the largest action cost " +
                          to_string(mx));
}

inline Rational mitigation(const Rational& n, const Rational& c_a, const Rational& c_alt) {
  const Rational extra = c_alt - c_a;
  return (n - (extra > 0 ? extra : Rational(0))) / n;
}

}  // namespace detail

inline Rational blame_vs(const EpistemicState& e, int a, int a_alt, const CausalFormula& phi, const Rational& n,
                         const CostModel& cm) {
  check_action(e, a_alt);
  const auto costs = all_costs(e, cm);
  detail::require_above_costs(costs, n, ErrorCode::InvalidN, "N");
  return delta(e, a, a_alt, phi) * detail::mitigation(n, costs[a], costs[a_alt]);
}

struct BlameRow {
  int alternative = 0;
  Rational delta;
  Rational cost_action;
  Rational cost_alternative;
  Rational mitigation;
  Rational blame;
};

struct BlameReport {
  int action = 0;
  CausalFormula outcome;
  Rational n;
  std::vector<BlameRow> rows;  // one per alternative, in range order
  Rational overall;
  std::vector<int> argmax;
};

inline BlameReport blame(const EpistemicState& e, int a, const CausalFormula& phi, const Rational& n,
                         const CostModel& cm) {
  check_action(e, a);
  const auto costs = all_costs(e, cm);
  detail::require_above_costs(costs, n, ErrorCode::InvalidN, "N");
  BlameReport r;
  r.action = a;
  r.outcome = phi;
  r.n = n;
  for (int x = 0; x < static_cast<int>(e.action_count()); ++x) {
    BlameRow row;
    row.alternative = x;
    row.delta = delta(e, a, x, phi);
    row.cost_action = costs[a];
    row.cost_alternative = costs[x];
    row.mitigation = detail::mitigation(n, costs[a], costs[x]);
    row.blame = row.delta * row.mitigation;
    if (r.rows.empty() || row.blame > r.overall) r.overall = row.blame;
    r.rows.push_back(std::move(row));
  }
  for (const auto& row : r.rows)
    if (row.blame == r.overall) r.argmax.push_back(row.alternative);
  return r;
}

struct PraiseReport {
  bool intended = false;
  OutcomeIntent intent;
  Rational delta;  // delta(a, a0, phi)
  std::vector<int> comparable;  // a' with delta(a', a0) >= delta(a, a0)
  std::optional<Rational> min_factor;
  Rational raw;
  Rational value;  // raw clamped into [0, 1]
  Rational m;
};

inline PraiseReport praise(const EpistemicState& e, int a, const CausalFormula& phi, const Rational& m,
                           const ReferencePolicy& ref, const CostModel& cm,
                           std::size_t max_k = kDefaultMaxSuperset) {
  check_action(e, a);
  const int a0 = e.default_action();
  if (a == a0) throw Error(ErrorCode::PreconditionViolated, "praise is measured against the default action");
  const auto conj = as_conjunction(phi);
  if (!conj) throw Error(ErrorCode::NotAConjunction, "praise requires an outcome of the form X=x & Y=y ...");
  const auto costs = all_costs(e, cm);
  detail::require_above_costs(costs, m, ErrorCode::InvalidM, "M");

  PraiseReport r;
  r.m = m;
  r.intent = intends_outcome(e, a, *conj, ref, max_k);
  r.intended = r.intent.intends;
  r.delta = delta(e, a, a0, phi);
  if (!r.intended) return r;

  for (int x = 0; x < static_cast<int>(e.action_count()); ++x) {
    if (delta(e, x, a0, phi) < r.delta) continue;
    r.comparable.push_back(x);
    const Rational f = (m - costs[a0] + costs[x]) / m;
    if (!r.min_factor || f < *r.min_factor) r.min_factor = f;
  }
  // a itself is always comparable, so min_factor is set.
  const Rational second = (1 - r.delta) * *r.min_factor;
  r.raw = r.delta + (second > 0 ? second : Rational(0));
  r.value = r.raw > 1 ? Rational(1) : (r.raw < 0 ? Rational(0) : r.raw);
  return r;
}

}  // namespace culpa
