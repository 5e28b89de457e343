#pragma once

// Test-only helpers: corpus loading, random models kept as truth tables, and
// brute-force oracles that share no search code with the library.

#include "culpa/culpa.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testing_support {

using namespace culpa;

inline std::string scenario_path(const std::string& name) { return std::string(CULPA_SCENARIO_DIR) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline LoadedScenario load_corpus(const std::string& name, Parameters overrides = {}) {
  LoadOptions o;
  o.parameter_overrides = std::move(overrides);
  auto s = load(read_file(scenario_path(name + ".scn.json")), name, o);
  if (!s.ok()) {
    std::string msg = "corpus scenario " + name + " failed to load:";
    for (const auto& d : s.diagnostics) msg += "\n  " + d.str();
    throw std::runtime_error(msg);
  }
  return s;
}

inline const std::vector<std::string>& corpus_names() {
  static const std::vector<std::string> names = {
      "trolley", "six",    "frankfurt", "rocks",      "loop",    "loop_merged", "louis1",  "louis2",   "daniel",
      "study",   "study_acc", "shoes", "job_choice", "bobtom", "rescue",      "doctor",  "seizure",  "chisholm"};
  return names;
}

inline int action(const EpistemicState& e, const std::string& name) { return e.action(name); }

inline std::size_t var(const LoadedScenario& s, const std::string& name) { return s.signature->endo_index(name); }

inline CausalFormula f(const LoadedScenario& s, const std::string& text) { return parse_formula(text, *s.signature); }

// ---- random models ----------------------------------------------------------

// Binary model stored as truth tables. Endogenous X0 is the action variable.
struct RandomModel {
  std::size_t n_exo = 0;
  std::size_t n_endo = 0;
  // parent ids: < n_exo is exogenous U_i, otherwise endogenous X_{id - n_exo}
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::vector<int>> table;  // row index: parent values as bits, first parent most significant
  SignaturePtr sig;
  CausalModelPtr model;
};

inline std::string exo_name(std::size_t i) { return "U" + std::to_string(i); }
inline std::string endo_name(std::size_t i) { return "X" + std::to_string(i); }

inline SignaturePtr binary_signature(std::size_t n_exo, std::size_t n_endo) {
  std::vector<Variable> exo, endo;
  for (std::size_t i = 0; i < n_exo; ++i) exo.emplace_back(exo_name(i), std::vector<std::string>{"0", "1"});
  for (std::size_t i = 0; i < n_endo; ++i) endo.emplace_back(endo_name(i), std::vector<std::string>{"0", "1"});
  return std::make_shared<const Signature>(std::move(exo), std::move(endo), "X0");
}

inline std::string parent_name(const RandomModel& m, std::size_t id) {
  return id < m.n_exo ? exo_name(id) : endo_name(id - m.n_exo);
}

// Table -> equation text: a disjunction of the rows that map to 1.
inline std::string table_to_expression(const RandomModel& m, std::size_t v) {
  const auto& ps = m.parents[v];
  const auto& t = m.table[v];
  int ones = 0;
  for (int x : t) ones += x;
  if (ones == 0) return "0";
  if (ones == static_cast<int>(t.size())) return "1";
  std::string out;
  for (std::size_t row = 0; row < t.size(); ++row) {
    if (!t[row]) continue;
    std::string conj;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const int bit = (row >> (ps.size() - 1 - k)) & 1;
      conj += (conj.empty() ? "" : " & ") + parent_name(m, ps[k]) + " = " + std::to_string(bit);
    }
    out += (out.empty() ? "(" : " | (") + conj + ")";
  }
  return out;
}

inline RandomModel random_model(std::mt19937& rng, std::size_t n_endo, std::size_t n_exo,
                                std::size_t max_parents = 3) {
  RandomModel m;
  m.n_exo = n_exo;
  m.n_endo = n_endo;
  m.parents.resize(n_endo);
  m.table.resize(n_endo);
  std::vector<std::size_t> order(n_endo);
  for (std::size_t i = 0; i < n_endo; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t pos = 0; pos < n_endo; ++pos) {
    const std::size_t v = order[pos];
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < n_exo; ++i) pool.push_back(i);
    for (std::size_t q = 0; q < pos; ++q) pool.push_back(n_exo + order[q]);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, std::min(max_parents, pool.size()))(rng);
    m.parents[v].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(m.parents[v].begin(), m.parents[v].end());
    m.table[v].resize(std::size_t{1} << k);
    for (auto& x : m.table[v]) x = std::uniform_int_distribution<int>(0, 1)(rng);
  }
  m.sig = binary_signature(n_exo, n_endo);
  std::vector<Equation> eqs;
  for (std::size_t v = 0; v < n_endo; ++v) eqs.push_back(make_equation(*m.sig, endo_name(v), table_to_expression(m, v)));
  m.model = std::make_shared<const CausalModel>(m.sig, std::move(eqs));
  return m;
}

inline std::vector<int> random_context(std::mt19937& rng, std::size_t n_exo) {
  std::vector<int> c(n_exo);
  for (auto& x : c) x = std::uniform_int_distribution<int>(0, 1)(rng);
  return c;
}

// Fixpoint iteration straight from the truth tables: n+1 sweeps in index
// order always converge for an acyclic model.
inline std::vector<int> oracle_solve(const RandomModel& m, const std::vector<int>& ctx,
                                     const std::map<std::size_t, int>& iv) {
  std::vector<int> w(m.n_endo, 0);
  for (std::size_t sweep = 0; sweep <= m.n_endo; ++sweep) {
    for (std::size_t v = 0; v < m.n_endo; ++v) {
      auto it = iv.find(v);
      if (it != iv.end()) {
        w[v] = it->second;
        continue;
      }
      std::size_t row = 0;
      for (auto p : m.parents[v]) row = (row << 1) | static_cast<std::size_t>(p < m.n_exo ? ctx[p] : w[p - m.n_exo]);
      w[v] = m.table[v][row];
    }
  }
  return w;
}

// Fixpoint iteration for any model, evaluating equation bodies directly.
inline std::vector<int> oracle_solve(const CausalModel& m, const Context& ctx, const std::map<std::size_t, int>& iv) {
  const auto& sig = m.signature();
  std::vector<int> w(sig.endogenous().size(), 0);
  for (std::size_t sweep = 0; sweep <= w.size(); ++sweep) {
    for (std::size_t v = 0; v < w.size(); ++v) {
      auto it = iv.find(v);
      if (it != iv.end()) {
        w[v] = it->second;
        continue;
      }
      const auto val = evaluate(*m.equation(v).body, sig, ctx.values, w);
      w[v] = *to_range_index(val, sig.endo(v));
    }
  }
  return w;
}

// ---- random formulas --------------------------------------------------------

struct RandomFormula {
  std::string text;
  std::function<bool(const std::vector<int>&)> eval;
};

inline RandomFormula random_formula(std::mt19937& rng, std::size_t n_endo, int depth = 2) {
  const int kind = depth == 0 ? 0 : std::uniform_int_distribution<int>(0, 3)(rng);
  if (kind == 0) {
    const std::size_t v = std::uniform_int_distribution<std::size_t>(0, n_endo - 1)(rng);
    const int x = std::uniform_int_distribution<int>(0, 1)(rng);
    return {endo_name(v) + " = " + std::to_string(x), [v, x](const std::vector<int>& w) { return w[v] == x; }};
  }
  if (kind == 1) {
    auto a = random_formula(rng, n_endo, depth - 1);
    return {"!(" + a.text + ")", [a](const std::vector<int>& w) { return !a.eval(w); }};
  }
  auto a = random_formula(rng, n_endo, depth - 1);
  auto b = random_formula(rng, n_endo, depth - 1);
  if (kind == 2)
    return {"(" + a.text + ") & (" + b.text + ")", [a, b](const std::vector<int>& w) { return a.eval(w) && b.eval(w); }};
  return {"(" + a.text + ") | (" + b.text + ")", [a, b](const std::vector<int>& w) { return a.eval(w) || b.eval(w); }};
}

// ---- naive actual-cause enumerator ------------------------------------------

using Solver = std::function<std::vector<int>(const std::map<std::size_t, int>&)>;
using Predicate = std::function<bool(const std::vector<int>&)>;

struct NaiveVerdict {
  bool ac1 = false;
  bool ac2 = false;
  bool ac3 = false;
  bool is_cause = false;
};

// Every W (as a bitmask over the remaining variables) and every x', no
// ordering, no early structure beyond "found one".
inline bool naive_ac2(const Solver& solve, const std::vector<std::size_t>& ranges, const std::vector<int>& actual,
                      const std::vector<std::size_t>& xs, const Predicate& phi) {
  std::vector<std::size_t> rest;
  for (std::size_t v = 0; v < ranges.size(); ++v)
    if (std::find(xs.begin(), xs.end(), v) == xs.end()) rest.push_back(v);
  std::size_t combos = 1;
  for (auto x : xs) combos *= ranges[x];
  for (std::size_t mask = 0; mask < (std::size_t{1} << rest.size()); ++mask) {
    for (std::size_t code = 0; code < combos; ++code) {
      std::map<std::size_t, int> iv;
      for (std::size_t i = 0; i < rest.size(); ++i)
        if (mask >> i & 1) iv[rest[i]] = actual[rest[i]];
      std::size_t c = code;
      for (auto x : xs) {
        iv[x] = static_cast<int>(c % ranges[x]);
        c /= ranges[x];
      }
      if (!phi(solve(iv))) return true;
    }
  }
  return false;
}

inline NaiveVerdict naive_cause(const Solver& solve, const std::vector<std::size_t>& ranges,
                                const std::vector<std::pair<std::size_t, int>>& cand, const Predicate& phi) {
  const auto actual = solve({});
  auto ac1 = [&](const std::vector<std::pair<std::size_t, int>>& c) {
    for (const auto& [v, x] : c)
      if (actual[v] != x) return false;
    return phi(actual);
  };
  auto vars_of = [](const std::vector<std::pair<std::size_t, int>>& c) {
    std::vector<std::size_t> out;
    for (const auto& p : c) out.push_back(p.first);
    return out;
  };
  NaiveVerdict r;
  r.ac1 = ac1(cand);
  r.ac2 = naive_ac2(solve, ranges, actual, vars_of(cand), phi);
  r.ac3 = true;
  const std::size_t k = cand.size();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << k); ++mask) {
    std::vector<std::pair<std::size_t, int>> sub;
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1) sub.push_back(cand[i]);
    if (ac1(sub) && naive_ac2(solve, ranges, actual, vars_of(sub), phi)) r.ac3 = false;
  }
  r.is_cause = r.ac1 && r.ac2 && r.ac3;
  return r;
}

// ---- random epistemic states ------------------------------------------------

struct RandomState {
  RandomModel base;
  std::vector<std::vector<int>> contexts;
  std::unique_ptr<EpistemicState> state;
};

inline RandomState random_state(std::mt19937& rng, std::size_t n_endo, std::size_t n_exo) {
  RandomState r;
  r.base = random_model(rng, n_endo, n_exo);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  std::vector<WeightedSetting> ws;
  std::vector<int> weights;
  int total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    weights.push_back(std::uniform_int_distribution<int>(1, 5)(rng));
    total += weights.back();
  }
  for (std::size_t i = 0; i < k; ++i) {
    auto ctx = random_context(rng, n_exo);
    r.contexts.push_back(ctx);
    ws.push_back({CausalSetting{r.base.model, Context{ctx}}, Rational(weights[i], total)});
  }
  std::vector<UtilityTerm> terms;
  const std::size_t nt = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  for (std::size_t i = 0; i < nt; ++i) {
    auto phi = random_formula(rng, n_endo, 1);
    terms.push_back({parse_formula(phi.text, *r.base.sig), Rational(std::uniform_int_distribution<int>(-5, 5)(rng))});
  }
  r.state = std::make_unique<EpistemicState>(std::move(ws), UtilityFunction(std::move(terms)),
                                             std::uniform_int_distribution<int>(0, 1)(rng));
  return r;
}

// ---- running the CLI --------------------------------------------------------

struct CliResult {
  int code = -1;
  std::string out;
};

inline CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CULPA_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace testing_support
