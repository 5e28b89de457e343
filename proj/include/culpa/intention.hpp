#pragma once

#include "culpa/combinatorics.hpp"
#include "culpa/epistemic.hpp"
#include "culpa/error.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace culpa {

struct ReferencePolicy {
  enum class Kind { DefaultOnly, AllOthers, Explicit, DefaultPlus };
  Kind kind = Kind::DefaultOnly;
  std::vector<int> actions;  // for Explicit / DefaultPlus

  static ReferencePolicy default_only() { return {Kind::DefaultOnly, {}}; }
  static ReferencePolicy all_others() { return {Kind::AllOthers, {}}; }
  static ReferencePolicy explicit_set(std::vector<int> a) { return {Kind::Explicit, std::move(a)}; }
  static ReferencePolicy default_plus(std::vector<int> a) { return {Kind::DefaultPlus, std::move(a)}; }

  bool operator==(const ReferencePolicy&) const = default;
};

// REF(a). Never contains a; never empty.
inline std::vector<int> resolve_ref(const ReferencePolicy& policy, int a, const EpistemicState& e) {
  check_action(e, a);
  const int n = static_cast<int>(e.action_count());
  if (n < 2) throw Error(ErrorCode::EmptyReferenceSet, "the action variable has a single value");
  std::vector<int> out;
  auto all_but_a = [&] {
    for (int x = 0; x < n; ++x)
      if (x != a) out.push_back(x);
  };
  switch (policy.kind) {
    case ReferencePolicy::Kind::DefaultOnly:
      if (a != e.default_action())
        out.push_back(e.default_action());
      else
        all_but_a();
      break;
    case ReferencePolicy::Kind::AllOthers: all_but_a(); break;
    case ReferencePolicy::Kind::DefaultPlus:
      out.push_back(e.default_action());
      [[fallthrough]];
    case ReferencePolicy::Kind::Explicit:
      for (int x : policy.actions) {
        check_action(e, x);
        out.push_back(x);
      }
      break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.erase(std::remove(out.begin(), out.end(), a), out.end());
  if (out.empty())
    throw Error(ErrorCode::EmptyReferenceSet, "reference set for action " + e.action_name(a) + " is empty");
  return out;
}

// a was not an accident: another action was available, it was performed in
// `actual` (when given), and no action has higher expected utility.
inline bool action_intended(const EpistemicState& e, int a, const CausalSetting* actual = nullptr) {
  check_action(e, a);
  if (e.action_count() < 2) return false;
  if (actual && solve(*actual)[e.signature().action_index()] != a) return false;
  const Rational eu = expected_utility(e, a);
  for (int x = 0; x < static_cast<int>(e.action_count()); ++x)
    if (expected_utility(e, x) > eu) return false;
  return true;
}

struct IntentTraceEntry {
  std::vector<std::size_t> candidate;  // O', name order
  Rational best_reference_value;       // max over REF of the pinned expected utility
  int best_reference_action = -1;
  bool clause_a = false;
  std::optional<bool> clause_b;                       // evaluated only when (a) holds
  std::optional<std::vector<std::size_t>> violating;  // strict subset breaking minimality
  std::string decided_by;                             // "a", "b" or "both"
};

struct IntentWitness {
  std::vector<std::size_t> vars;
  std::vector<std::vector<int>> pinned_values;  // per setting, o'_{A<-a}
};

struct IntentVerdict {
  bool intends = false;
  std::optional<IntentWitness> witness;
  std::vector<IntentTraceEntry> trace;
  std::vector<int> reference_set;
  Rational eu_action;
  std::size_t max_k = 0;
  bool truncated = false;     // candidates larger than max_k exist
  bool inconclusive = false;  // negative verdict that truncation leaves open
};

namespace detail {

class PinnedTable {
 public:
  PinnedTable(const EpistemicState& e, int a, std::vector<int> ref) : e_(e), a_(a), ref_(std::move(ref)) {}

  // max over REF(a) of pinned expected utility, with the maximizing action.
  const std::pair<Rational, int>& best(const std::vector<std::size_t>& vars) {
    auto key = vars;
    std::sort(key.begin(), key.end());
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    std::pair<Rational, int> b{0, -1};
    for (int r : ref_) {
      const Rational v = pinned_expected_utility(e_, r, key, a_);
      if (b.second < 0 || v > b.first) b = {v, r};
    }
    return memo_.emplace(std::move(key), std::move(b)).first->second;
  }

 private:
  const EpistemicState& e_;
  int a_;
  std::vector<int> ref_;
  std::map<std::vector<std::size_t>, std::pair<Rational, int>> memo_;
};

inline constexpr std::size_t kTruncationScanLimit = 1u << 16;

}  // namespace detail

inline constexpr std::size_t kDefaultMaxSuperset = 3;

// The agent intends to affect `vars` by doing a: some superset O' of vars,
// pinned at its values under a, makes a reference action at least as good
// as a (clause a), and no strict subset of O' does (clause b).
inline IntentVerdict intends_to_affect(const EpistemicState& e, int a, std::vector<std::size_t> vars,
                                       const ReferencePolicy& policy, std::size_t max_k = kDefaultMaxSuperset) {
  const auto& sig = e.signature();
  check_action(e, a);
  if (vars.empty()) throw Error(ErrorCode::PreconditionViolated, "the outcome variable set is empty");
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  for (auto v : vars)
    if (v == sig.action_index()) throw Error(ErrorCode::PreconditionViolated, "cannot intend to affect the action variable");
  if (max_k < vars.size())
    throw Error(ErrorCode::PreconditionViolated, "superset bound is smaller than the outcome set");

  auto name_less = [&](std::size_t x, std::size_t y) { return sig.endo(x).name() < sig.endo(y).name(); };

  IntentVerdict verdict;
  verdict.max_k = max_k;
  verdict.reference_set = resolve_ref(policy, a, e);
  verdict.eu_action = expected_utility(e, a);
  detail::PinnedTable table(e, a, verdict.reference_set);
  const Rational& eu_a = verdict.eu_action;

  std::vector<std::size_t> extra;
  for (std::size_t v = 0; v < sig.endogenous().size(); ++v)
    if (v != sig.action_index() && !std::binary_search(vars.begin(), vars.end(), v)) extra.push_back(v);
  std::sort(extra.begin(), extra.end(), name_less);
  const std::size_t universe = vars.size() + extra.size();
  verdict.truncated = universe > max_k;

  auto in_name_order = [&](std::vector<std::size_t> s) {
    std::sort(s.begin(), s.end(), name_less);
    return s;
  };

  for_each_subset_by_size(extra.size(), max_k - vars.size(), [&](const std::vector<std::size_t>& pick) {
    std::vector<std::size_t> cand = vars;
    for (auto p : pick) cand.push_back(extra[p]);
    cand = in_name_order(cand);

    IntentTraceEntry entry;
    entry.candidate = cand;
    const auto& [best, best_action] = table.best(cand);
    entry.best_reference_value = best;
    entry.best_reference_action = best_action;
    entry.clause_a = eu_a <= best;
    if (!entry.clause_a) {
      entry.decided_by = "a";
      verdict.trace.push_back(std::move(entry));
      return false;
    }
    // Minimality: every strict subset (including the empty set) must leave a
    // strictly better than all of REF(a).
    bool minimal = true;
    for_each_subset_by_size(cand.size(), cand.size() - 1, [&](const std::vector<std::size_t>& sub_pick) {
      std::vector<std::size_t> sub;
      for (auto p : sub_pick) sub.push_back(cand[p]);
      if (eu_a > table.best(sub).first) return false;
      minimal = false;
      entry.violating = sub;
      return true;
    });
    entry.clause_b = minimal;
    entry.decided_by = minimal ? "both" : "b";
    verdict.trace.push_back(entry);
    if (!minimal) return false;

    IntentWitness w;
    w.vars = cand;
    for (const auto& ws : e.settings()) w.pinned_values.push_back(outcome_under_action(ws.setting, cand, a));
    verdict.witness = std::move(w);
    verdict.intends = true;
    return true;
  });

  if (!verdict.intends && verdict.truncated) {
    // A larger candidate still fails minimality when one of its strict
    // subsets (of size <= max_k) already satisfies clause (a).
    std::size_t count = 0;
    for (std::size_t j = max_k - vars.size() + 1; j <= extra.size(); ++j) count += binomial(extra.size(), j);
    if (universe >= 63 || count > detail::kTruncationScanLimit) {
      verdict.inconclusive = true;
    } else {
      std::vector<std::size_t> all = vars;
      all.insert(all.end(), extra.begin(), extra.end());  // bit i <-> all[i]
      std::vector<std::uint64_t> satisfying;
      for_each_subset_by_size(all.size(), max_k, [&](const std::vector<std::size_t>& pick) {
        std::vector<std::size_t> s;
        std::uint64_t mask = 0;
        for (auto p : pick) {
          s.push_back(all[p]);
          mask |= std::uint64_t{1} << p;
        }
        if (eu_a <= table.best(s).first) satisfying.push_back(mask);
        return false;
      });
      const std::uint64_t base = (std::uint64_t{1} << vars.size()) - 1;
      bool refuted_all = true;
      for (std::size_t j = max_k - vars.size() + 1; j <= extra.size() && refuted_all; ++j) {
        for_each_combination(extra.size(), j, [&](const std::vector<std::size_t>& pick) {
          std::uint64_t mask = base;
          for (auto p : pick) mask |= std::uint64_t{1} << (vars.size() + p);
          const bool refuted = std::any_of(satisfying.begin(), satisfying.end(), [&](std::uint64_t s) {
            return (s & mask) == s && s != mask;
          });
          if (!refuted) refuted_all = false;
          return !refuted;
        });
      }
      verdict.inconclusive = !refuted_all;
    }
  }
  return verdict;
}

struct ReachableValue {
  std::vector<int> values;  // aligned with the outcome variables
  Rational score;           // sum over K of Pr * u(w_{M, O<-o*, u})
};

struct OutcomeIntent {
  bool intends = false;
  IntentVerdict affect;      // clause (a)
  bool possible = false;     // clause (b)
  bool best = false;         // clause (c)
  std::vector<std::size_t> vars;
  std::vector<int> values;
  Rational score;
  std::vector<ReachableValue> reachable;
  bool inconclusive = false;
};

// The agent intends to bring about O = o by doing a.
inline OutcomeIntent intends_outcome(const EpistemicState& e, int a,
                                     const std::vector<std::pair<std::size_t, int>>& outcome,
                                     const ReferencePolicy& policy, std::size_t max_k = kDefaultMaxSuperset) {
  if (outcome.empty()) throw Error(ErrorCode::NotAConjunction, "empty outcome");
  OutcomeIntent r;
  auto sorted = outcome;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [v, x] : sorted) {
    r.vars.push_back(v);
    r.values.push_back(x);
  }
  r.affect = intends_to_affect(e, a, r.vars, policy, max_k);

  auto score = [&](const std::vector<int>& vals) {
    Rational s = 0;
    for (const auto& ws : e.settings()) {
      Intervention iv;
      for (std::size_t i = 0; i < r.vars.size(); ++i) iv.set(r.vars[i], vals[i]);
      s += ws.probability * e.utility()(world_under(ws.setting, iv));
    }
    return s;
  };
  std::vector<std::vector<int>> seen;
  for (const auto& ws : e.settings()) {
    auto o = outcome_under_action(ws.setting, r.vars, a);
    if (std::find(seen.begin(), seen.end(), o) == seen.end()) seen.push_back(std::move(o));
  }
  std::sort(seen.begin(), seen.end());
  for (auto& o : seen) r.reachable.push_back({o, score(o)});

  r.score = score(r.values);
  r.possible = std::any_of(r.reachable.begin(), r.reachable.end(), [&](const auto& x) { return x.values == r.values; });
  r.best = std::all_of(r.reachable.begin(), r.reachable.end(), [&](const auto& x) { return r.score >= x.score; });
  r.intends = r.affect.intends && r.possible && r.best;
  r.inconclusive = !r.affect.intends && r.affect.inconclusive && r.possible && r.best;
  return r;
}

}  // namespace culpa
