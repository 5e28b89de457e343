#pragma once

#include "culpa/actual_cause.hpp"
#include "culpa/intention.hpp"
#include "culpa/responsibility.hpp"
#include "culpa/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace culpa::cli {

enum ExitCode { kOk = 0, kUsage = 2, kValidation = 3, kLimit = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A query failed its preconditions against a valid scenario (bad N, ...).
struct QueryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline ordered_json rat_json(const Rational& r) { return {{"exact", to_string(r)}, {"decimal", to_decimal(r)}}; }

inline std::string rat_text(const Rational& r) {
  const auto exact = to_string(r);
  const auto dec = to_decimal(r);
  return exact == dec ? exact : exact + " (" + dec + ")";
}

struct Options {
  bool json = false;
  std::vector<std::string> params;
  std::string file;
  std::size_t setting = 0;
  std::string formula;
  std::string cand;
  std::string outcome;
  std::string action;
  std::string versus;
  std::string n;
  std::string m;
  std::string vars;
  std::string ref;
  std::size_t max_k = kDefaultMaxSuperset;
  bool setting_given = false;
  // generate-commons
  std::size_t commons_n = 3;
  std::size_t commons_m = 2;
  std::string commons_q = "1/2";
};

struct Output {
  ordered_json result = ordered_json::object();
  std::ostringstream text;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& x : out) {
    const auto b = x.find_first_not_of(" \t");
    const auto e = x.find_last_not_of(" \t");
    x = b == std::string::npos ? "" : x.substr(b, e - b + 1);
  }
  return out;
}

inline Parameters parse_params(const std::vector<std::string>& items) {
  Parameters p;
  for (const auto& it : items) {
    const auto eq = it.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + it + "'");
    try {
      p[it.substr(0, eq)] = eval_rational(it.substr(eq + 1));
    } catch (const Error& e) {
      throw UsageError("--param " + it + ": " + e.what());
    }
  }
  return p;
}

template <typename F>
auto query_input(const std::string& flag, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

inline CausalFormula formula_flag(const std::string& flag, const std::string& text, const Signature& sig) {
  return query_input(flag, [&] { return parse_formula(text, sig); });
}

// "X=x,Y=y" or "X=x & Y=y"
inline std::vector<std::pair<std::size_t, int>> conjunction_flag(const std::string& flag, const std::string& text,
                                                                 const Signature& sig) {
  std::string joined;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) throw UsageError(flag + ": empty conjunct");
    joined += (joined.empty() ? "" : " & ") + part;
  }
  const auto f = formula_flag(flag, joined, sig);
  auto c = as_conjunction(f);
  if (!c) throw UsageError(flag + ": expected a conjunction X=x[,Y=y]");
  return *c;
}

inline CausalFormula conjunction_formula(const Signature& sig, const std::vector<std::pair<std::size_t, int>>& c) {
  std::string text;
  for (const auto& [v, x] : c) text += (text.empty() ? "" : " & ") + sig.endo(v).name() + " = '" + sig.endo(v).value(x) + "'";
  return parse_formula(text, sig);
}

inline int action_flag(const std::string& flag, const std::string& name, const EpistemicState& e) {
  if (name.empty()) throw UsageError(flag + " is required");
  auto a = e.signature().action().find(name);
  if (!a) throw UsageError(flag + ": '" + name + "' is not a value of " + e.signature().action_name());
  return *a;
}

inline Rational rational_flag(const std::string& flag, const std::string& text, const Parameters& params) {
  return query_input(flag, [&] { return eval_rational(text, params); });
}

inline ReferencePolicy ref_flag(const std::string& text, const LoadedScenario& s) {
  if (text.empty()) return s.policy;
  if (text == "default") return ReferencePolicy::default_only();
  if (text == "all") return ReferencePolicy::all_others();
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (colon == std::string::npos || (kind != "list" && kind != "plus"))
    throw UsageError("--ref expects default, all, list:a,b or plus:a,b");
  std::vector<int> acts;
  for (const auto& a : split(text.substr(colon + 1), ',')) acts.push_back(action_flag("--ref", a, s.epistemic()));
  return kind == "list" ? ReferencePolicy::explicit_set(acts) : ReferencePolicy::default_plus(acts);
}

inline std::string names(const Signature& sig, const std::vector<std::size_t>& vars) {
  std::string s = "{";
  for (std::size_t i = 0; i < vars.size(); ++i) s += (i ? ", " : "") + sig.endo(vars[i]).name();
  return s + "}";
}

inline ordered_json names_json(const Signature& sig, const std::vector<std::size_t>& vars) {
  ordered_json a = ordered_json::array();
  for (auto v : vars) a.push_back(sig.endo(v).name());
  return a;
}

inline ordered_json diag_json(const Diagnostic& d) {
  return {{"severity", d.is_error() ? "error" : "warning"},
          {"file", d.file},
          {"line", d.line},
          {"column", d.col},
          {"code", d.code},
          {"message", d.message},
          {"path", d.path}};
}

inline std::string action_text(const EpistemicState& e, int a) {
  return e.signature().action_name() + "=" + e.action_name(a);
}

inline ordered_json eu_table(const EpistemicState& e, Output& o) {
  ordered_json rows = ordered_json::array();
  o.text << "expected utility:\n";
  for (int a = 0; a < static_cast<int>(e.action_count()); ++a) {
    const auto eu = expected_utility(e, a);
    rows.push_back({{"action", e.action_name(a)}, {"expected_utility", rat_json(eu)}});
    o.text << "  " << std::left << std::setw(16) << e.action_name(a) << rat_text(eu) << "\n";
  }
  return rows;
}

inline ordered_json ref_json(const EpistemicState& e, const std::vector<int>& ref) {
  ordered_json a = ordered_json::array();
  for (int x : ref) a.push_back(e.action_name(x));
  return a;
}

inline std::string ref_text(const EpistemicState& e, const std::vector<int>& ref) {
  std::string s = "{";
  for (std::size_t i = 0; i < ref.size(); ++i) s += (i ? ", " : "") + e.action_name(ref[i]);
  return s + "}";
}

inline ordered_json intent_json(const EpistemicState& e, const IntentVerdict& v) {
  const auto& sig = e.signature();
  ordered_json j;
  j["intends"] = v.intends;
  j["reference_set"] = ref_json(e, v.reference_set);
  j["expected_utility"] = rat_json(v.eu_action);
  j["max_superset"] = v.max_k;
  j["truncated"] = v.truncated;
  j["inconclusive"] = v.inconclusive;
  if (v.witness) {
    ordered_json pins = ordered_json::array();
    for (const auto& vals : v.witness->pinned_values) {
      ordered_json p = ordered_json::object();
      for (std::size_t i = 0; i < vals.size(); ++i)
        p[sig.endo(v.witness->vars[i]).name()] = sig.endo(v.witness->vars[i]).value(vals[i]);
      pins.push_back(p);
    }
    j["witness"] = {{"variables", names_json(sig, v.witness->vars)}, {"pinned_values", pins}};
  } else {
    j["witness"] = nullptr;
  }
  ordered_json trace = ordered_json::array();
  for (const auto& t : v.trace) {
    ordered_json r;
    r["candidate"] = names_json(sig, t.candidate);
    r["best_reference_value"] = rat_json(t.best_reference_value);
    r["best_reference_action"] = e.action_name(t.best_reference_action);
    r["clause_a"] = t.clause_a;
    r["clause_b"] = t.clause_b ? ordered_json(*t.clause_b) : ordered_json(nullptr);
    r["violating_subset"] = t.violating ? names_json(sig, *t.violating) : ordered_json(nullptr);
    r["decided_by"] = t.decided_by;
    trace.push_back(r);
  }
  j["trace"] = trace;
  return j;
}

inline void intent_text(const EpistemicState& e, const IntentVerdict& v, std::ostream& os) {
  const auto& sig = e.signature();
  os << "  EU(a) = " << rat_text(v.eu_action) << ", REF(a) = " << ref_text(e, v.reference_set) << "\n";
  for (const auto& t : v.trace) {
    os << "  " << std::left << std::setw(28) << names(sig, t.candidate) << " max pinned EU "
       << rat_text(t.best_reference_value) << " (" << e.action_name(t.best_reference_action) << "): ";
    if (!t.clause_a)
      os << "fails (a)";
    else if (t.clause_b && *t.clause_b)
      os << "passes (a) and (b)";
    else
      os << "passes (a), fails (b) on subset " << names(sig, *t.violating);
    os << "\n";
  }
  if (v.witness) os << "  witness: " << names(sig, v.witness->vars) << "\n";
  if (v.truncated)
    os << "  note: supersets larger than " << v.max_k << " were not searched"
       << (v.intends ? "" : (v.inconclusive ? "; the negative verdict is inconclusive"
                                            : "; each is ruled out by a smaller set satisfying (a)"))
       << "\n";
}

inline ordered_json blame_json(const EpistemicState& e, const BlameReport& r) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"alternative", e.action_name(row.alternative)},
                    {"delta", rat_json(row.delta)},
                    {"cost_action", rat_json(row.cost_action)},
                    {"cost_alternative", rat_json(row.cost_alternative)},
                    {"mitigation", rat_json(row.mitigation)},
                    {"blame", rat_json(row.blame)}});
  return {{"N", rat_json(r.n)}, {"rows", rows}, {"overall", rat_json(r.overall)}, {"argmax", ref_json(e, r.argmax)}};
}

inline void blame_text(const EpistemicState& e, const BlameReport& r, std::ostream& os) {
  os << "  " << std::left << std::setw(14) << "alternative" << std::setw(16) << "delta" << std::setw(12) << "c(a)"
     << std::setw(12) << "c(a')" << std::setw(20) << "mitigation"
     << "db\n";
  for (const auto& row : r.rows)
    os << "  " << std::left << std::setw(14) << e.action_name(row.alternative) << std::setw(16)
       << to_string(row.delta) << std::setw(12) << to_string(row.cost_action) << std::setw(12)
       << to_string(row.cost_alternative) << std::setw(20) << to_string(row.mitigation) << to_string(row.blame)
       << "\n";
  os << "  overall db_N = " << rat_text(r.overall) << ", attained against " << ref_text(e, r.argmax) << "\n";
}

inline ordered_json outcome_intent_json(const EpistemicState& e, const OutcomeIntent& r) {
  const auto& sig = e.signature();
  ordered_json reach = ordered_json::array();
  for (const auto& x : r.reachable) {
    ordered_json vals = ordered_json::object();
    for (std::size_t i = 0; i < r.vars.size(); ++i) vals[sig.endo(r.vars[i]).name()] = sig.endo(r.vars[i]).value(x.values[i]);
    reach.push_back({{"values", vals}, {"score", rat_json(x.score)}});
  }
  return {{"intends", r.intends},
          {"inconclusive", r.inconclusive},
          {"clause_a", r.affect.intends},
          {"clause_b", r.possible},
          {"clause_c", r.best},
          {"score", rat_json(r.score)},
          {"reachable", reach},
          {"affect", intent_json(e, r.affect)}};
}

inline void outcome_intent_text(const EpistemicState& e, const OutcomeIntent& r, std::ostream& os) {
  const auto& sig = e.signature();
  os << "  (a) intends to affect " << names(sig, r.vars) << ": " << (r.affect.intends ? "yes" : "no") << "\n";
  intent_text(e, r.affect, os);
  os << "  (b) possible under the action: " << (r.possible ? "yes" : "no") << "\n";
  os << "  (c) highest-scoring reachable value: " << (r.best ? "yes" : "no") << "\n";
  for (const auto& x : r.reachable) {
    os << "      ";
    for (std::size_t i = 0; i < r.vars.size(); ++i)
      os << (i ? ", " : "") << sig.endo(r.vars[i]).name() << "=" << sig.endo(r.vars[i]).value(x.values[i]);
    os << "  score " << rat_text(x.score) << "\n";
  }
}

inline ordered_json praise_json(const PraiseReport& p) {
  return {{"intended", p.intended},
          {"delta", rat_json(p.delta)},
          {"M", rat_json(p.m)},
          {"min_factor", p.min_factor ? rat_json(*p.min_factor) : ordered_json(nullptr)},
          {"raw", rat_json(p.raw)},
          {"praise", rat_json(p.value)},
          {"clamped", p.raw != p.value}};
}

// ---- subcommands ------------------------------------------------------------

inline const CausalSetting& setting_flag(const LoadedScenario& s, std::size_t i) {
  if (i >= s.settings.size())
    throw UsageError("--setting " + std::to_string(i) + " is out of range (the scenario has " +
                     std::to_string(s.settings.size()) + " settings)");
  return s.settings[i];
}

inline void cmd_validate(const LoadedScenario& s, Output& o) {
  const auto errors = std::count_if(s.diagnostics.begin(), s.diagnostics.end(), [](auto& d) { return d.is_error(); });
  const auto warnings = static_cast<std::ptrdiff_t>(s.diagnostics.size()) - errors;
  o.result["valid"] = errors == 0;
  o.result["errors"] = errors;
  o.result["warnings"] = warnings;
  o.text << s.doc.file << ": " << (errors ? "invalid" : "valid") << " (" << errors << " errors, " << warnings
         << " warnings)\n";
  if (s.ok()) {
    const auto& e = s.epistemic();
    o.result["name"] = s.doc.name;
    o.result["settings"] = s.settings.size();
    o.result["endogenous_variables"] = e.signature().endogenous().size();
    o.result["actions"] = ref_json(e, [&] {
      std::vector<int> all;
      for (int a = 0; a < static_cast<int>(e.action_count()); ++a) all.push_back(a);
      return all;
    }());
    o.text << "  " << s.doc.name << ": " << s.settings.size() << " settings, " << e.signature().endogenous().size()
           << " endogenous variables, action " << e.signature().action_name() << "\n";
  }
}

inline void cmd_eval(const LoadedScenario& s, const Options& opt, Output& o) {
  const auto& set = setting_flag(s, opt.setting);
  const auto f = formula_flag("--formula", opt.formula, *s.signature);
  const bool h = holds(set, f);
  const World w = world_under(set, f.intervention());
  o.result["setting"] = opt.setting;
  o.result["formula"] = to_string(f);
  o.result["holds"] = h;
  ordered_json world = ordered_json::object();
  for (std::size_t i = 0; i < w.values.size(); ++i) world[s.signature->endo(i).name()] = s.signature->endo(i).value(w[i]);
  o.result["world"] = world;
  o.text << to_string(f) << ": " << (h ? "TRUE" : "FALSE") << " in setting " << opt.setting << "\n";
  o.text << "  world: " << to_string(*s.signature, w) << "\n";
}

inline void cmd_cause(const LoadedScenario& s, const Options& opt, Output& o) {
  const auto& sig = *s.signature;
  const auto& set = setting_flag(s, opt.setting);
  const auto conj = conjunction_flag("--cand", opt.cand, sig);
  const auto phi = formula_flag("--outcome", opt.outcome, sig);
  if (phi.has_intervention()) throw UsageError("--outcome must be intervention-free");
  const auto v = check_cause(set, CauseCandidate{conj}, phi);

  o.result["setting"] = opt.setting;
  o.result["outcome"] = to_string(phi);
  o.result["is_cause"] = v.is_cause;
  o.result["ac1"] = v.ac1;
  o.result["ac2"] = v.ac2_witness.has_value();
  o.result["ac3"] = v.ac3;
  o.text << (v.is_cause ? "CAUSE" : "NOT A CAUSE") << "\n";
  o.text << "  AC1 " << (v.ac1 ? "holds" : "fails") << ", AC2 " << (v.ac2_witness ? "holds" : "fails") << ", AC3 "
         << (v.ac3 ? "holds" : "fails") << "\n";
  if (v.ac2_witness) {
    const auto& w = *v.ac2_witness;
    ordered_json wj = ordered_json::object(), xj = ordered_json::object();
    std::string wt, xt;
    for (std::size_t i = 0; i < w.w_vars.size(); ++i) {
      const auto& var = sig.endo(w.w_vars[i]);
      wj[var.name()] = var.value(w.w_values[i]);
      wt += (wt.empty() ? "" : ", ") + var.name() + " <- " + var.value(w.w_values[i]);
    }
    for (std::size_t i = 0; i < v.cause_vars.size(); ++i) {
      const auto& var = sig.endo(v.cause_vars[i]);
      xj[var.name()] = var.value(w.x_alt[i]);
      xt += (xt.empty() ? "" : ", ") + var.name() + " <- " + var.value(w.x_alt[i]);
    }
    o.result["witness"] = {{"W", wj}, {"x_alt", xj}};
    o.text << "  witness: W = {" << wt << "}, x' = (" << xt << ")\n";
  } else {
    o.result["witness"] = nullptr;
  }
  if (v.smaller_cause) {
    ordered_json sc = ordered_json::object();
    std::string t;
    for (const auto& [var, x] : v.smaller_cause->conjuncts) {
      sc[sig.endo(var).name()] = sig.endo(var).value(x);
      t += (t.empty() ? "" : " & ") + sig.endo(var).name() + "=" + sig.endo(var).value(x);
    }
    o.result["smaller_cause"] = sc;
    o.text << "  a strict subset already satisfies AC1 and AC2: " << t << "\n";
  }
  if (conj.size() == 1 && v.ac1) {
    const bool bf = but_for(set, conj.front(), phi);
    o.result["but_for"] = bf;
    o.text << "  but-for cause: " << (bf ? "yes" : "no") << "\n";
  } else {
    o.result["but_for"] = nullptr;
  }
}

inline void cmd_blame(const LoadedScenario& s, const Options& opt, Output& o) {
  const auto& e = s.epistemic();
  const int a = action_flag("--action", opt.action, e);
  const auto phi = formula_flag("--outcome", opt.outcome, *s.signature);
  if (phi.has_intervention()) throw UsageError("--outcome must be intervention-free");
  const Rational n = opt.n.empty() ? s.n : rational_flag("--N", opt.n, s.parameters);
  o.result["action"] = e.action_name(a);
  o.result["outcome"] = to_string(phi);
  o.text << "blame for " << action_text(e, a) << ", outcome " << to_string(phi) << ", N = " << rat_text(n) << "\n";
  if (!opt.versus.empty()) {
    const int b = action_flag("--versus", opt.versus, e);
    const Rational db = blame_vs(e, a, b, phi, n, s.cost_model);
    o.result["versus"] = e.action_name(b);
    o.result["N"] = rat_json(n);
    o.result["delta"] = rat_json(delta(e, a, b, phi));
    o.result["blame"] = rat_json(db);
    o.text << "  versus " << e.action_name(b) << ": delta " << rat_text(delta(e, a, b, phi)) << ", db_N "
           << rat_text(db) << "\n";
    return;
  }
  const auto r = blame(e, a, phi, n, s.cost_model);
  o.result.update(blame_json(e, r));
  blame_text(e, r, o.text);
}

inline void cmd_intended_action(const LoadedScenario& s, const Options& opt, Output& o) {
  const auto& e = s.epistemic();
  const int a = action_flag("--action", opt.action, e);
  const CausalSetting* actual = opt.setting_given ? &setting_flag(s, opt.setting) : nullptr;
  const bool v = action_intended(e, a, actual);
  o.result["action"] = e.action_name(a);
  o.result["setting"] = opt.setting_given ? ordered_json(opt.setting) : ordered_json(nullptr);
  o.result["single_action"] = e.action_count() < 2;
  if (actual) o.result["performed"] = solve(*actual)[e.signature().action_index()] == a;
  o.result["intended"] = v;
  o.result["expected_utility"] = eu_table(e, o);
  o.text << action_text(e, a) << ": " << (v ? "INTENDED" : "NOT INTENDED") << "\n";
  if (e.action_count() < 2) o.text << "  no other action was possible\n";
}

inline void cmd_intends_affect(const LoadedScenario& s, const Options& opt, Output& o) {
  const auto& e = s.epistemic();
  const auto& sig = *s.signature;
  const int a = action_flag("--action", opt.action, e);
  if (opt.vars.empty()) throw UsageError("--vars is required");
  std::vector<std::size_t> vars;
  for (const auto& name : split(opt.vars, ','))
    vars.push_back(query_input("--vars", [&] { return sig.endo_index(name); }));
  o.result["action"] = e.action_name(a);
  o.result["variables"] = names_json(sig, culpa::detail::by_name(sig, vars));
  if (e.action_count() < 2) {
    o.result["intends"] = false;
    o.result["single_action"] = true;
    o.text << "NOT INTENDED: " << sig.action_name() << " has a single value\n";
    return;
  }
  const auto v = intends_to_affect(e, a, vars, ref_flag(opt.ref, s), opt.max_k);
  o.result.update(intent_json(e, v));
  o.text << (v.intends ? "INTENDS" : "DOES NOT INTEND") << " to affect " << names(sig, culpa::detail::by_name(sig, vars))
         << " by " << action_text(e, a) << (v.inconclusive ? " (inconclusive)" : "") << "\n";
  intent_text(e, v, o.text);
}

inline void cmd_intends(const LoadedScenario& s, const Options& opt, Output& o) {
  const auto& e = s.epistemic();
  const auto& sig = *s.signature;
  const int a = action_flag("--action", opt.action, e);
  const auto conj = conjunction_flag("--outcome", opt.outcome, sig);
  const auto phi = conjunction_formula(sig, conj);
  o.result["action"] = e.action_name(a);
  o.result["outcome"] = to_string(phi);
  if (e.action_count() < 2) {
    o.result["intends"] = false;
    o.result["single_action"] = true;
    o.text << "NOT INTENDED: " << sig.action_name() << " has a single value\n";
    return;
  }
  const auto r = intends_outcome(e, a, conj, ref_flag(opt.ref, s), opt.max_k);
  o.result.update(outcome_intent_json(e, r));
  o.text << (r.intends ? "INTENDED" : "NOT INTENDED") << ": " << to_string(phi) << " by " << action_text(e, a)
         << (r.inconclusive ? " (inconclusive)" : "") << "\n";
  outcome_intent_text(e, r, o.text);
}

inline void cmd_praise(const LoadedScenario& s, const Options& opt, Output& o) {
  const auto& e = s.epistemic();
  const auto& sig = *s.signature;
  const int a = action_flag("--action", opt.action, e);
  const auto conj = conjunction_flag("--outcome", opt.outcome, sig);
  const auto phi = conjunction_formula(sig, conj);
  const Rational m = opt.m.empty() ? s.m : rational_flag("--M", opt.m, s.parameters);
  if (a == e.default_action()) throw QueryError("praise is measured against the default action; pick another action");
  const auto p = praise(e, a, phi, m, ref_flag(opt.ref, s), s.cost_model, opt.max_k);
  o.result["action"] = e.action_name(a);
  o.result["outcome"] = to_string(phi);
  o.result.update(praise_json(p));
  o.text << "praise for " << action_text(e, a) << ", outcome " << to_string(phi) << ", M = " << rat_text(m) << "\n";
  if (!p.intended) {
    o.text << "  outcome not intended: pw = 0\n";
    return;
  }
  o.text << "  delta(a, a0) = " << rat_text(p.delta) << ", min (M - c(a0) + c(a'))/M = " << rat_text(*p.min_factor)
         << "\n";
  o.text << "  pw = " << rat_text(p.value);
  if (p.raw != p.value) o.text << " (raw " << rat_text(p.raw) << ", clamped)";
  o.text << "\n";
}

inline void cmd_report(const LoadedScenario& s, const Options& opt, Output& o) {
  const auto& e = s.epistemic();
  const auto& sig = *s.signature;
  const int a = action_flag("--action", opt.action, e);
  const auto policy = ref_flag(opt.ref, s);
  o.text << "scenario " << s.doc.name << ", action " << action_text(e, a) << "\n";
  o.result["action"] = e.action_name(a);
  o.result["expected_utility"] = eu_table(e, o);
  const bool ai = action_intended(e, a);
  o.result["action_intended"] = ai;
  o.text << "action intended: " << (ai ? "yes" : "no") << "\n";
  ordered_json outs = ordered_json::array();
  for (const auto& phi : s.outcomes) {
    ordered_json j;
    j["outcome"] = to_string(phi);
    o.text << "\noutcome " << to_string(phi) << "\n";
    const auto b = blame(e, a, phi, s.n, s.cost_model);
    j["blame"] = blame_json(e, b);
    blame_text(e, b, o.text);
    const auto conj = as_conjunction(phi);
    if (conj && e.action_count() >= 2) {
      const auto r = intends_outcome(e, a, *conj, policy, opt.max_k);
      j["intention"] = outcome_intent_json(e, r);
      o.text << "  intended: " << (r.intends ? "yes" : "no") << (r.inconclusive ? " (inconclusive)" : "") << "\n";
      if (a != e.default_action()) {
        const auto p = praise(e, a, phi, s.m, policy, s.cost_model, opt.max_k);
        j["praise"] = praise_json(p);
        o.text << "  praise: " << rat_text(p.value);
        if (p.raw != p.value) o.text << " (raw " << rat_text(p.raw) << ")";
        o.text << "\n";
      }
    }
    outs.push_back(j);
  }
  o.result["outcomes"] = outs;
}

}  // namespace detail

// Runs one invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Causality, blame and intention queries over scenario files", "culpa"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", opt.json, "Machine-readable output (one JSON document)");
  app.add_option("--param", opt.params, "Override a scenario parameter: name=p/q")
      ->type_size(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto with_file = [&](CLI::App* sub) { sub->add_option("file", opt.file, "Scenario file")->required(); };
  auto with_refs = [&](CLI::App* sub) {
    sub->add_option("--ref", opt.ref, "Reference set: default, all, list:a,b or plus:a,b");
    sub->add_option("--max-superset", opt.max_k, "Largest superset searched")->check(CLI::Range(1, 64));
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  with_file(validate_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a causal formula in one setting");
  with_file(eval_cmd);
  eval_cmd->add_option("--setting", opt.setting, "Setting index")->required();
  eval_cmd->add_option("--formula", opt.formula, "Causal formula")->required();

  auto* cause_cmd = app.add_subcommand("cause", "Is X=x an actual cause of the outcome?");
  with_file(cause_cmd);
  cause_cmd->add_option("--setting", opt.setting, "Setting index")->required();
  cause_cmd->add_option("--cand", opt.cand, "Candidate cause X=x[,Y=y]")->required();
  cause_cmd->add_option("--outcome", opt.outcome, "Outcome formula")->required();

  auto* blame_cmd = app.add_subcommand("blame", "Degree of blameworthiness");
  with_file(blame_cmd);
  blame_cmd->add_option("--action", opt.action, "Action")->required();
  blame_cmd->add_option("--outcome", opt.outcome, "Outcome formula")->required();
  blame_cmd->add_option("--versus", opt.versus, "Compare against a single alternative");
  blame_cmd->add_option("--N", opt.n, "Cost importance N (p/q)");

  auto* ia_cmd = app.add_subcommand("intended-action", "Was the action intended?");
  with_file(ia_cmd);
  ia_cmd->add_option("--action", opt.action, "Action")->required();
  auto* ia_setting = ia_cmd->add_option("--setting", opt.setting, "Actual setting index");

  auto* affect_cmd = app.add_subcommand("intends-affect", "Does the agent intend to affect these variables?");
  with_file(affect_cmd);
  affect_cmd->add_option("--action", opt.action, "Action")->required();
  affect_cmd->add_option("--vars", opt.vars, "Variables X,Y")->required();
  with_refs(affect_cmd);

  auto* intends_cmd = app.add_subcommand("intends", "Does the agent intend to bring about the outcome?");
  with_file(intends_cmd);
  intends_cmd->add_option("--action", opt.action, "Action")->required();
  intends_cmd->add_option("--outcome", opt.outcome, "Outcome X=x[,Y=y]")->required();
  with_refs(intends_cmd);

  auto* praise_cmd = app.add_subcommand("praise", "Degree of praiseworthiness");
  with_file(praise_cmd);
  praise_cmd->add_option("--action", opt.action, "Action")->required();
  praise_cmd->add_option("--outcome", opt.outcome, "Outcome X=x[,Y=y]")->required();
  praise_cmd->add_option("--M", opt.m, "Praise scale M (p/q)");
  with_refs(praise_cmd);

  auto* report_cmd = app.add_subcommand("report", "Expected utilities, blame, intention and praise for every declared outcome");
  with_file(report_cmd);
  report_cmd->add_option("--action", opt.action, "Action")->required();
  with_refs(report_cmd);

  auto* gen_cmd = app.add_subcommand("generate-commons", "Print a tragedy-of-the-commons scenario");
  gen_cmd->add_option("--n", opt.commons_n, "Number of fishermen")->required();
  gen_cmd->add_option("--m", opt.commons_m, "Collapse threshold")->required();
  gen_cmd->add_option("--q", opt.commons_q, "Probability that another fisherman fishes (p/q)")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "culpa: " << e.what() << "\n";
    err << "usage: culpa <validate|eval|cause|blame|intended-action|intends-affect|intends|praise|report|"
           "generate-commons> <file> [options] [--json]; see culpa --help\n";
    return kUsage;
  }
  opt.setting_given = ia_setting->count() > 0;
  CLI::App* sub = app.get_subcommands().front();

  auto emit = [&](const Output& o, const std::vector<Diagnostic>& diags, int code) {
    for (const auto& d : diags) err << d.str() << "\n";
    if (opt.json) {
      ordered_json doc;
      doc["subcommand"] = sub->get_name();
      if (!opt.file.empty()) doc["file"] = opt.file;
      doc["result"] = o.result;
      ordered_json dj = ordered_json::array();
      for (const auto& d : diags) dj.push_back(detail::diag_json(d));
      doc["diagnostics"] = dj;
      out << doc.dump(2) << "\n";
    } else {
      out << o.text.str();
    }
    return code;
  };

  try {
    const Parameters overrides = detail::parse_params(opt.params);
    if (sub == gen_cmd) {
      const Rational q = detail::rational_flag("--q", opt.commons_q, {});
      ScenarioDoc d;
      try {
        d = generate_commons(opt.commons_n, opt.commons_m, q);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      out << serialize(d);
      return kOk;
    }

    std::ifstream in(opt.file, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + opt.file + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    LoadOptions lo;
    lo.parameter_overrides = overrides;
    const LoadedScenario s = load(buf.str(), opt.file, lo);

    Output o;
    if (sub == validate_cmd) {
      detail::cmd_validate(s, o);
      return emit(o, s.diagnostics, has_errors(s.diagnostics) ? kValidation : kOk);
    }
    if (!s.ok()) {
      for (const auto& d : s.diagnostics) err << d.str() << "\n";
      err << "culpa: " << opt.file << " is not a valid scenario\n";
      return kValidation;
    }
    if (sub == eval_cmd) detail::cmd_eval(s, opt, o);
    else if (sub == cause_cmd) detail::cmd_cause(s, opt, o);
    else if (sub == blame_cmd) detail::cmd_blame(s, opt, o);
    else if (sub == ia_cmd) detail::cmd_intended_action(s, opt, o);
    else if (sub == affect_cmd) detail::cmd_intends_affect(s, opt, o);
    else if (sub == intends_cmd) detail::cmd_intends(s, opt, o);
    else if (sub == praise_cmd) detail::cmd_praise(s, opt, o);
    else if (sub == report_cmd) detail::cmd_report(s, opt, o);
    return emit(o, s.diagnostics, kOk);
  } catch (const UsageError& e) {
    err << "culpa " << sub->get_name() << ": " << e.what() << "\n";
    err << sub->help("", CLI::AppFormatMode::Normal).substr(0, sub->help().find('\n')) << "\n";
    return kUsage;
  } catch (const QueryError& e) {
    err << "culpa " << sub->get_name() << ": " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    err << "culpa " << sub->get_name() << ": " << code_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::LimitExceeded ? kLimit : kValidation;
  }
}

}  // namespace culpa::cli
