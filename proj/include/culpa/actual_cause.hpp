#pragma once

#include "culpa/combinatorics.hpp"
#include "culpa/error.hpp"
#include "culpa/formula.hpp"
#include "culpa/scm.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace culpa {

// X1 = x1 & ... & Xk = xk over distinct endogenous variables.
struct CauseCandidate {
  std::vector<std::pair<std::size_t, int>> conjuncts;

  static CauseCandidate parse(const Signature& sig, std::string_view text) {
    auto f = parse_formula(std::string(text), sig);
    auto c = as_conjunction(f);
    if (!c) throw Error(ErrorCode::NotAConjunction, "cause candidate must be a conjunction X=x & Y=y ...");
    return CauseCandidate{*c};
  }
  bool operator==(const CauseCandidate&) const = default;
};

struct AC2Witness {
  std::vector<std::size_t> w_vars;  // W, in name order
  std::vector<int> w_values;        // actual values of W
  std::vector<int> x_alt;           // x', aligned with the candidate's name-ordered variables
};

struct CauseVerdict {
  bool ac1 = false;
  std::optional<AC2Witness> ac2_witness;
  bool ac3 = false;
  bool is_cause = false;
  std::vector<std::size_t> cause_vars;               // candidate variables in name order
  std::optional<CauseCandidate> smaller_cause;  // strict subset satisfying AC1+AC2, when AC3 fails
};

struct CauseOptions {
  std::size_t max_endogenous = 20;
};

// Interface point for alternative definitions of actual causation.
class CausalityDefinition {
 public:
  virtual ~CausalityDefinition() = default;
  virtual std::string name() const = 0;
  virtual CauseVerdict check(const CausalSetting& setting, const CauseCandidate& cand,
                             const CausalFormula& phi) const = 0;
};

namespace detail {

inline std::vector<std::size_t> by_name(const Signature& sig, std::vector<std::size_t> vars) {
  std::sort(vars.begin(), vars.end(),
            [&](std::size_t a, std::size_t b) { return sig.endo(a).name() < sig.endo(b).name(); });
  return vars;
}

inline void require_plain(const CausalFormula& phi) {
  if (!phi.bound()) throw Error(ErrorCode::PreconditionViolated, "formula is not bound to a signature");
  if (phi.has_intervention())
    throw Error(ErrorCode::PreconditionViolated, "the caused formula must be intervention-free");
}

// AC2 search in canonical order: |W| ascending, W by name, x' lexicographic.
inline std::optional<AC2Witness> search_ac2(const CausalSetting& s, const World& actual,
                                            const std::vector<std::size_t>& xvars, const CausalFormula& phi) {
  const auto& sig = s.signature();
  std::vector<std::size_t> rest;
  for (std::size_t v = 0; v < sig.endogenous().size(); ++v)
    if (std::find(xvars.begin(), xvars.end(), v) == xvars.end()) rest.push_back(v);
  rest = by_name(sig, rest);
  std::vector<std::size_t> sizes;
  for (auto v : xvars) sizes.push_back(sig.endo(v).size());

  std::optional<AC2Witness> found;
  for_each_subset_by_size(rest.size(), rest.size(), [&](const std::vector<std::size_t>& pick) {
    Intervention w_iv;
    for (auto p : pick) w_iv.set(rest[p], actual[rest[p]]);
    return for_each_assignment(sizes, [&](const std::vector<int>& xalt) {
      Intervention iv = w_iv;
      for (std::size_t i = 0; i < xvars.size(); ++i) iv.set(xvars[i], xalt[i]);
      if (eval_body(*phi.body(), world_under(s, iv))) return false;
      AC2Witness w;
      for (auto p : pick) {
        w.w_vars.push_back(rest[p]);
        w.w_values.push_back(actual[rest[p]]);
      }
      w.x_alt = xalt;
      found = std::move(w);
      return true;
    });
  });
  return found;
}

}  // namespace detail

// Modified Halpern-Pearl definition (AC1-AC3).
class ModifiedHalpernPearl : public CausalityDefinition {
 public:
  explicit ModifiedHalpernPearl(CauseOptions opts = {}) : opts_(opts) {}

  std::string name() const override { return "modified-HP"; }

  CauseVerdict check(const CausalSetting& s, const CauseCandidate& cand, const CausalFormula& phi) const override {
    detail::require_plain(phi);
    const auto& sig = s.signature();
    if (sig.endogenous().size() > opts_.max_endogenous)
      throw Error(ErrorCode::LimitExceeded, "cause queries are limited to " + std::to_string(opts_.max_endogenous) +
                                                " endogenous variables (the problem is Sigma_2^p-complete)");
    if (cand.conjuncts.empty()) throw Error(ErrorCode::PreconditionViolated, "empty cause candidate");
    for (std::size_t i = 0; i < cand.conjuncts.size(); ++i)
      for (std::size_t j = i + 1; j < cand.conjuncts.size(); ++j)
        if (cand.conjuncts[i].first == cand.conjuncts[j].first)
          throw Error(ErrorCode::PreconditionViolated, "cause candidate repeats a variable");

    const World actual = solve(s);
    std::vector<std::pair<std::size_t, int>> conj = cand.conjuncts;
    std::sort(conj.begin(), conj.end(), [&](const auto& a, const auto& b) {
      return sig.endo(a.first).name() < sig.endo(b.first).name();
    });
    std::vector<std::size_t> xvars;
    for (const auto& [v, x] : conj) xvars.push_back(v);

    CauseVerdict r;
    r.cause_vars = xvars;
    auto ac1_for = [&](const std::vector<std::pair<std::size_t, int>>& c) {
      for (const auto& [v, x] : c)
        if (actual[v] != x) return false;
      return eval_body(*phi.body(), actual);
    };
    r.ac1 = ac1_for(conj);
    r.ac2_witness = detail::search_ac2(s, actual, xvars, phi);

    r.ac3 = true;
    if (conj.size() > 1) {
      for_each_subset_by_size(conj.size(), conj.size() - 1, [&](const std::vector<std::size_t>& pick) {
        if (pick.empty()) return false;
        std::vector<std::pair<std::size_t, int>> sub;
        std::vector<std::size_t> sub_vars;
        for (auto p : pick) {
          sub.push_back(conj[p]);
          sub_vars.push_back(conj[p].first);
        }
        if (ac1_for(sub) && detail::search_ac2(s, actual, sub_vars, phi)) {
          r.ac3 = false;
          r.smaller_cause = CauseCandidate{sub};
          return true;
        }
        return false;
      });
    }
    r.is_cause = r.ac1 && r.ac2_witness.has_value() && r.ac3;
    return r;
  }

 private:
  CauseOptions opts_;
};

inline CauseVerdict check_cause(const CausalSetting& s, const CauseCandidate& cand, const CausalFormula& phi,
                                CauseOptions opts = {}) {
  return ModifiedHalpernPearl(opts).check(s, cand, phi);
}

struct PartOfCause {
  bool is_part = false;
  std::optional<CauseCandidate> cause;
  std::optional<CauseVerdict> verdict;
};

// X=x is part of a cause of phi: some cause containing it, drawn from the
// actually-true primitive events, by size then name order.
inline PartOfCause is_part_of_cause(const CausalSetting& s, std::pair<std::size_t, int> conjunct,
                                    const CausalFormula& phi, CauseOptions opts = {}) {
  detail::require_plain(phi);
  const auto& sig = s.signature();
  if (sig.endogenous().size() > opts.max_endogenous)
    throw Error(ErrorCode::LimitExceeded, "cause queries are limited to " + std::to_string(opts.max_endogenous) +
                                              " endogenous variables");
  PartOfCause out;
  const World actual = solve(s);
  if (actual[conjunct.first] != conjunct.second || !eval_body(*phi.body(), actual)) return out;
  std::vector<std::size_t> others;
  for (std::size_t v = 0; v < sig.endogenous().size(); ++v)
    if (v != conjunct.first) others.push_back(v);
  others = detail::by_name(sig, others);
  const ModifiedHalpernPearl hp(opts);
  for_each_subset_by_size(others.size(), others.size(), [&](const std::vector<std::size_t>& pick) {
    CauseCandidate c;
    c.conjuncts.push_back(conjunct);
    for (auto p : pick) c.conjuncts.emplace_back(others[p], actual[others[p]]);
    auto v = hp.check(s, c, phi);
    if (!v.is_cause) return false;
    out.is_part = true;
    out.cause = c;
    out.verdict = std::move(v);
    return true;
  });
  return out;
}

// Switching X alone to some other value falsifies phi.
inline bool but_for(const CausalSetting& s, std::pair<std::size_t, int> conjunct, const CausalFormula& phi) {
  detail::require_plain(phi);
  const World actual = solve(s);
  if (actual[conjunct.first] != conjunct.second || !eval_body(*phi.body(), actual))
    throw Error(ErrorCode::PreconditionViolated, "but-for requires X=x and the outcome to hold actually");
  const auto& var = s.signature().endo(conjunct.first);
  for (int x = 0; x < static_cast<int>(var.size()); ++x) {
    Intervention iv;
    iv.set(conjunct.first, x);
    if (!eval_body(*phi.body(), world_under(s, iv))) return true;
  }
  return false;
}

}  // namespace culpa
