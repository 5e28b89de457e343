#pragma once

#include "culpa/combinatorics.hpp"
#include "culpa/epistemic.hpp"
#include "culpa/error.hpp"
#include "culpa/intention.hpp"
#include "culpa/json_locate.hpp"
#include "culpa/lexer.hpp"
#include "culpa/responsibility.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace culpa {

using ordered_json = nlohmann::ordered_json;

// ---- document ---------------------------------------------------------------

struct VariableDoc {
  std::string name;
  std::vector<std::string> range;
  bool operator==(const VariableDoc&) const = default;
};

struct VariablesDoc {
  std::vector<VariableDoc> exogenous;
  std::vector<VariableDoc> endogenous;
  bool operator==(const VariablesDoc&) const = default;
};

struct CaseDoc {
  std::string when;
  std::string value;
  bool operator==(const CaseDoc&) const = default;
};

// Either a single expression or a case list with a fallback value.
struct EquationDoc {
  std::string expr;
  bool is_cases = false;
  std::vector<CaseDoc> cases;
  std::string fallback;
  bool operator==(const EquationDoc&) const = default;
};

using EquationsDoc = std::vector<std::pair<std::string, EquationDoc>>;

struct SettingDoc {
  std::string label;
  std::vector<std::pair<std::string, std::string>> context;
  std::string probability;
  EquationsDoc equations;                  // overrides of the top-level equations
  std::optional<VariablesDoc> variables;   // must agree with the top-level signature
  bool operator==(const SettingDoc&) const = default;
};

struct UtilityDoc {
  std::string when;
  std::string weight;
  bool operator==(const UtilityDoc&) const = default;
};

struct ReferencePolicyDoc {
  std::string kind = "default";  // default | all | explicit | default_plus
  std::vector<std::string> actions;
  bool operator==(const ReferencePolicyDoc&) const = default;
};

struct ScenarioDoc {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::string action_variable;
  std::string default_action;
  VariablesDoc variables;
  EquationsDoc equations;
  std::vector<SettingDoc> settings;
  std::vector<UtilityDoc> utility;
  std::vector<std::string> cost_variables;
  ReferencePolicyDoc reference_policy;
  std::optional<std::string> n;
  std::optional<std::string> m;
  std::vector<std::string> outcomes;

  std::string file;   // not part of the document
  SourceMap source;   // not part of the document

  bool operator==(const ScenarioDoc& o) const {
    return name == o.name && description == o.description && parameters == o.parameters &&
           action_variable == o.action_variable && default_action == o.default_action && variables == o.variables &&
           equations == o.equations && settings == o.settings && utility == o.utility &&
           cost_variables == o.cost_variables && reference_policy == o.reference_policy && n == o.n && m == o.m &&
           outcomes == o.outcomes;
  }
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string file;
  std::size_t line = 1;
  std::size_t col = 1;
  std::string code;
  std::string message;
  std::string path;  // JSON pointer

  bool is_error() const { return severity == Severity::Error; }
  std::string str() const {
    return file + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
           (is_error() ? "error" : "warning") + "[" + code + "]: " + message;
  }
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.is_error(); });
}

// ---- rational expressions ---------------------------------------------------

using Parameters = std::map<std::string, Rational, std::less<>>;

namespace detail {

// expr := term (('+'|'-') term)*; term := unary (('*'|'/') unary)*;
// unary := '-' unary | INT | IDENT | '(' expr ')'
class RationalExprParser {
 public:
  RationalExprParser(std::string_view src, const Parameters& params) : ts_(src), params_(params) {}

  Rational parse() {
    Rational r = expr();
    if (!ts_.done()) ts_.fail("unexpected trailing input");
    return r;
  }

 private:
  Rational expr() {
    Rational r = term();
    while (ts_.at_punct("+") || ts_.at_punct("-")) {
      const bool plus = ts_.next().text == "+";
      Rational t = term();
      r = plus ? Rational(r + t) : Rational(r - t);
    }
    return r;
  }
  Rational term() {
    Rational r = unary();
    while (ts_.at_punct("*") || ts_.at_punct("/")) {
      const auto op = ts_.next();
      Rational t = unary();
      if (op.text == "*") {
        r *= t;
      } else {
        if (t == 0) throw SyntaxError("division by zero", op.pos);
        r /= t;
      }
    }
    return r;
  }
  Rational unary() {
    if (ts_.accept("-")) return -unary();
    if (ts_.accept("(")) {
      Rational r = expr();
      ts_.expect(")");
      return r;
    }
    const auto& t = ts_.peek();
    if (t.kind == Tok::Int) return Rational(BigInt(ts_.next().text));
    if (t.kind == Tok::Ident) {
      auto it = params_.find(t.text);
      if (it == params_.end()) throw SyntaxError("unknown parameter '" + t.text + "'", t.pos);
      ts_.next();
      return it->second;
    }
    ts_.fail("expected a number or parameter");
  }

  TokenStream ts_;
  const Parameters& params_;
};

}  // namespace detail

// "3/10", "1 - p", "(1-q)*q". Throws SyntaxError.
inline Rational eval_rational(std::string_view text, const Parameters& params = {}) {
  return detail::RationalExprParser(text, params).parse();
}

// ---- parsing ----------------------------------------------------------------

namespace detail {

class DocReader {
 public:
  DocReader(std::string file, const SourceMap& src, std::vector<Diagnostic>& out)
      : file_(std::move(file)), src_(src), out_(out) {}

  void error(const std::string& ptr, std::string code, std::string msg) {
    const auto p = src_.find(ptr);
    out_.push_back({Diagnostic::Severity::Error, file_, p.line, p.col, std::move(code), std::move(msg), ptr});
  }

  const ordered_json* member(const ordered_json& obj, const std::string& ptr, const char* key, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) error(ptr, "missing-key", std::string("missing required key '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  bool object(const ordered_json& v, const std::string& ptr, const char* what) {
    if (v.is_object()) return true;
    error(ptr, "schema", std::string(what) + " must be an object");
    return false;
  }
  bool array(const ordered_json& v, const std::string& ptr, const char* what) {
    if (v.is_array()) return true;
    error(ptr, "schema", std::string(what) + " must be an array");
    return false;
  }
  bool string(const ordered_json& v, const std::string& ptr, const char* what, std::string& out) {
    if (v.is_string()) {
      out = v.get<std::string>();
      return true;
    }
    error(ptr, "schema", std::string(what) + " must be a string");
    return false;
  }
  // Range values and context values: strings or integers.
  bool scalar(const ordered_json& v, const std::string& ptr, const char* what, std::string& out) {
    if (v.is_string()) {
      out = v.get<std::string>();
      return true;
    }
    if (v.is_number_integer()) {
      out = v.dump();
      return true;
    }
    error(ptr, "schema", std::string(what) + " must be a string or an integer");
    return false;
  }
  // Exact quantities: strings ("p/q", expressions) or integers; never floats.
  bool rational(const ordered_json& v, const std::string& ptr, const char* what, std::string& out) {
    if (v.is_number_float()) {
      error(ptr, "float-not-allowed", std::string(what) + " must be exact: write it as a string such as \"1/5\"");
      return false;
    }
    return scalar(v, ptr, what, out);
  }

  void allowed_keys(const ordered_json& obj, const std::string& ptr, std::initializer_list<std::string_view> keys) {
    for (const auto& [k, v] : obj.items())
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        error(ptr + "/" + pointer_escape(k), "unknown-key", "unknown key '" + k + "'");
  }

  void variables(const ordered_json& v, const std::string& ptr, VariablesDoc& out) {
    if (!object(v, ptr, "variables")) return;
    allowed_keys(v, ptr, {"exogenous", "endogenous"});
    auto list = [&](const char* key, std::vector<VariableDoc>& dst) {
      const auto* arr = member(v, ptr, key, std::string_view(key) == "endogenous");
      const std::string p = ptr + "/" + key;
      if (!arr || !array(*arr, p, key)) return;
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto& e = (*arr)[i];
        const std::string ep = p + "/" + std::to_string(i);
        if (!object(e, ep, "variable declaration")) continue;
        allowed_keys(e, ep, {"name", "range"});
        VariableDoc d;
        const auto* name = member(e, ep, "name", true);
        const auto* range = member(e, ep, "range", true);
        if (!name || !range || !string(*name, ep + "/name", "variable name", d.name)) continue;
        if (!array(*range, ep + "/range", "range")) continue;
        bool ok = true;
        for (std::size_t k = 0; k < range->size(); ++k) {
          std::string val;
          ok = scalar((*range)[k], ep + "/range/" + std::to_string(k), "range value", val) && ok;
          d.range.push_back(std::move(val));
        }
        if (ok) dst.push_back(std::move(d));
      }
    };
    list("exogenous", out.exogenous);
    list("endogenous", out.endogenous);
  }

  void equations(const ordered_json& v, const std::string& ptr, EquationsDoc& out) {
    if (!object(v, ptr, "equations")) return;
    for (const auto& [name, body] : v.items()) {
      const std::string p = ptr + "/" + pointer_escape(name);
      EquationDoc eq;
      if (body.is_string()) {
        eq.expr = body.get<std::string>();
      } else if (body.is_object()) {
        allowed_keys(body, p, {"cases", "default"});
        eq.is_cases = true;
        const auto* cases = member(body, p, "cases", true);
        const auto* fallback = member(body, p, "default", true);
        if (!cases || !fallback || !array(*cases, p + "/cases", "cases")) continue;
        if (!scalar(*fallback, p + "/default", "default value", eq.fallback)) continue;
        bool ok = true;
        for (std::size_t i = 0; i < cases->size(); ++i) {
          const auto& c = (*cases)[i];
          const std::string cp = p + "/cases/" + std::to_string(i);
          if (!object(c, cp, "case")) {
            ok = false;
            continue;
          }
          allowed_keys(c, cp, {"when", "value"});
          CaseDoc cd;
          const auto* when = member(c, cp, "when", true);
          const auto* value = member(c, cp, "value", true);
          ok = when && value && string(*when, cp + "/when", "case condition", cd.when) &&
               scalar(*value, cp + "/value", "case value", cd.value) && ok;
          eq.cases.push_back(std::move(cd));
        }
        if (!ok) continue;
      } else {
        error(p, "schema", "an equation is an expression string or {\"cases\": [...], \"default\": ...}");
        continue;
      }
      out.emplace_back(name, std::move(eq));
    }
  }

  void setting(const ordered_json& v, const std::string& ptr, SettingDoc& out) {
    if (!object(v, ptr, "setting")) return;
    allowed_keys(v, ptr, {"label", "context", "probability", "equations", "variables"});
    if (const auto* l = member(v, ptr, "label", false)) string(*l, ptr + "/label", "label", out.label);
    if (const auto* c = member(v, ptr, "context", true); c && object(*c, ptr + "/context", "context"))
      for (const auto& [k, x] : c->items()) {
        std::string val;
        if (scalar(x, ptr + "/context/" + pointer_escape(k), "context value", val)) out.context.emplace_back(k, val);
      }
    if (const auto* p = member(v, ptr, "probability", true))
      rational(*p, ptr + "/probability", "probability", out.probability);
    if (const auto* e = member(v, ptr, "equations", false)) equations(*e, ptr + "/equations", out.equations);
    if (const auto* vs = member(v, ptr, "variables", false)) {
      VariablesDoc d;
      variables(*vs, ptr + "/variables", d);
      out.variables = std::move(d);
    }
  }

  void policy(const ordered_json& v, const std::string& ptr, ReferencePolicyDoc& out) {
    if (v.is_string()) {
      out.kind = v.get<std::string>();
      if (out.kind != "default" && out.kind != "all")
        error(ptr, "schema", "reference_policy must be \"default\", \"all\", {\"explicit\": [...]} or "
                             "{\"default_plus\": [...]}");
      return;
    }
    if (!v.is_object() || v.size() != 1 || (!v.contains("explicit") && !v.contains("default_plus"))) {
      error(ptr, "schema", "reference_policy must be \"default\", \"all\", {\"explicit\": [...]} or "
                           "{\"default_plus\": [...]}");
      return;
    }
    out.kind = v.begin().key();
    const auto& arr = v.begin().value();
    const std::string p = ptr + "/" + out.kind;
    if (!array(arr, p, "reference actions")) return;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string a;
      if (scalar(arr[i], p + "/" + std::to_string(i), "action", a)) out.actions.push_back(a);
    }
  }

  void document(const ordered_json& j, ScenarioDoc& d) {
    if (!object(j, "", "scenario")) return;
    allowed_keys(j, "", {"name", "description", "parameters", "action_variable", "default_action", "variables",
                         "equations", "settings", "utility", "cost_variables", "reference_policy", "N", "M",
                         "outcomes"});
    if (const auto* v = member(j, "", "name", true)) string(*v, "/name", "name", d.name);
    if (const auto* v = member(j, "", "description", false)) string(*v, "/description", "description", d.description);
    if (const auto* v = member(j, "", "parameters", false); v && object(*v, "/parameters", "parameters"))
      for (const auto& [k, x] : v->items()) {
        std::string val;
        if (rational(x, "/parameters/" + pointer_escape(k), "parameter", val)) d.parameters.emplace_back(k, val);
      }
    if (const auto* v = member(j, "", "action_variable", true))
      string(*v, "/action_variable", "action_variable", d.action_variable);
    if (const auto* v = member(j, "", "default_action", true))
      scalar(*v, "/default_action", "default_action", d.default_action);
    if (const auto* v = member(j, "", "variables", true)) variables(*v, "/variables", d.variables);
    if (const auto* v = member(j, "", "equations", false)) equations(*v, "/equations", d.equations);
    if (const auto* v = member(j, "", "settings", true); v && array(*v, "/settings", "settings")) {
      if (v->empty()) error("/settings", "schema", "at least one setting is required");
      for (std::size_t i = 0; i < v->size(); ++i) {
        SettingDoc s;
        setting((*v)[i], "/settings/" + std::to_string(i), s);
        d.settings.push_back(std::move(s));
      }
    }
    if (const auto* v = member(j, "", "utility", false); v && array(*v, "/utility", "utility"))
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string p = "/utility/" + std::to_string(i);
        const auto& t = (*v)[i];
        if (!object(t, p, "utility term")) continue;
        allowed_keys(t, p, {"when", "weight"});
        UtilityDoc u;
        const auto* when = member(t, p, "when", true);
        const auto* weight = member(t, p, "weight", true);
        if (when && weight && string(*when, p + "/when", "utility condition", u.when) &&
            rational(*weight, p + "/weight", "weight", u.weight))
          d.utility.push_back(std::move(u));
      }
    if (const auto* v = member(j, "", "cost_variables", false); v && array(*v, "/cost_variables", "cost_variables"))
      for (std::size_t i = 0; i < v->size(); ++i) {
        std::string name;
        if (string((*v)[i], "/cost_variables/" + std::to_string(i), "cost variable", name))
          d.cost_variables.push_back(name);
      }
    if (const auto* v = member(j, "", "reference_policy", false)) policy(*v, "/reference_policy", d.reference_policy);
    if (const auto* v = member(j, "", "N", false)) {
      std::string s;
      if (rational(*v, "/N", "N", s)) d.n = s;
    }
    if (const auto* v = member(j, "", "M", false)) {
      std::string s;
      if (rational(*v, "/M", "M", s)) d.m = s;
    }
    if (const auto* v = member(j, "", "outcomes", false); v && array(*v, "/outcomes", "outcomes"))
      for (std::size_t i = 0; i < v->size(); ++i) {
        std::string f;
        if (string((*v)[i], "/outcomes/" + std::to_string(i), "outcome", f)) d.outcomes.push_back(f);
      }
  }

 private:
  std::string file_;
  const SourceMap& src_;
  std::vector<Diagnostic>& out_;
};

inline std::string strip_json_error(const std::string& what) {
  // "[json.exception.parse_error.101] parse error at line 3, column 5: msg"
  auto col = what.find("column ");
  if (col != std::string::npos) {
    auto colon = what.find(": ", col);
    if (colon != std::string::npos) return what.substr(colon + 2);
  }
  auto br = what.find("] ");
  return br == std::string::npos ? what : what.substr(br + 2);
}

}  // namespace detail

struct ParseResult {
  std::optional<ScenarioDoc> doc;
  std::vector<Diagnostic> diagnostics;
};

inline ParseResult parse_scenario(std::string_view text, std::string file = "<input>") {
  ParseResult r;
  ordered_json j;
  try {
    j = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t off = e.byte > 0 ? e.byte - 1 : 0;
    const auto p = detail::LineIndex(text).at(std::min(off, text.size()));
    r.diagnostics.push_back({Diagnostic::Severity::Error, file, p.line, p.col, "json-syntax",
                             detail::strip_json_error(e.what()), ""});
    return r;
  } catch (const nlohmann::json::exception& e) {
    r.diagnostics.push_back(
        {Diagnostic::Severity::Error, file, 1, 1, "json-syntax", detail::strip_json_error(e.what()), ""});
    return r;
  }
  ScenarioDoc d;
  d.file = file;
  d.source = locate_json_values(text);
  detail::DocReader reader(file, d.source, r.diagnostics);
  reader.document(j, d);
  if (!has_errors(r.diagnostics)) r.doc = std::move(d);
  return r;
}

// ---- serialization ----------------------------------------------------------

namespace detail {

// Canonical integers go back out as JSON numbers, everything else as strings.
inline ordered_json scalar_json(const std::string& s) {
  std::int64_t n = 0;
  if (parse_int64(s, n) && std::to_string(n) == s) return n;
  return s;
}

inline ordered_json variables_json(const VariablesDoc& v) {
  auto list = [](const std::vector<VariableDoc>& vs) {
    ordered_json a = ordered_json::array();
    for (const auto& x : vs) {
      ordered_json r = ordered_json::array();
      for (const auto& val : x.range) r.push_back(scalar_json(val));
      a.push_back({{"name", x.name}, {"range", r}});
    }
    return a;
  };
  return {{"exogenous", list(v.exogenous)}, {"endogenous", list(v.endogenous)}};
}

inline ordered_json equations_json(const EquationsDoc& eqs) {
  ordered_json o = ordered_json::object();
  for (const auto& [name, eq] : eqs) {
    if (!eq.is_cases) {
      o[name] = eq.expr;
      continue;
    }
    ordered_json cases = ordered_json::array();
    for (const auto& c : eq.cases) cases.push_back({{"when", c.when}, {"value", scalar_json(c.value)}});
    o[name] = {{"cases", cases}, {"default", scalar_json(eq.fallback)}};
  }
  return o;
}

}  // namespace detail

inline ordered_json to_json(const ScenarioDoc& d) {
  using detail::scalar_json;
  ordered_json j;
  j["name"] = d.name;
  if (!d.description.empty()) j["description"] = d.description;
  if (!d.parameters.empty()) {
    ordered_json p = ordered_json::object();
    for (const auto& [k, v] : d.parameters) p[k] = scalar_json(v);
    j["parameters"] = p;
  }
  j["action_variable"] = d.action_variable;
  j["default_action"] = scalar_json(d.default_action);
  j["variables"] = detail::variables_json(d.variables);
  if (!d.equations.empty()) j["equations"] = detail::equations_json(d.equations);
  ordered_json settings = ordered_json::array();
  for (const auto& s : d.settings) {
    ordered_json o;
    if (!s.label.empty()) o["label"] = s.label;
    ordered_json ctx = ordered_json::object();
    for (const auto& [k, v] : s.context) ctx[k] = scalar_json(v);
    o["context"] = ctx;
    o["probability"] = s.probability;
    if (!s.equations.empty()) o["equations"] = detail::equations_json(s.equations);
    if (s.variables) o["variables"] = detail::variables_json(*s.variables);
    settings.push_back(o);
  }
  j["settings"] = settings;
  ordered_json util = ordered_json::array();
  for (const auto& u : d.utility) util.push_back({{"when", u.when}, {"weight", u.weight}});
  j["utility"] = util;
  j["cost_variables"] = d.cost_variables;
  if (d.reference_policy.kind == "default" || d.reference_policy.kind == "all") {
    j["reference_policy"] = d.reference_policy.kind;
  } else {
    ordered_json acts = ordered_json::array();
    for (const auto& a : d.reference_policy.actions) acts.push_back(scalar_json(a));
    j["reference_policy"] = {{d.reference_policy.kind, acts}};
  }
  if (d.n) j["N"] = *d.n;
  if (d.m) j["M"] = *d.m;
  if (!d.outcomes.empty()) j["outcomes"] = d.outcomes;
  return j;
}

inline std::string serialize(const ScenarioDoc& d) { return to_json(d).dump(2) + "\n"; }

// ---- validation and loading -------------------------------------------------

struct LoadOptions {
  Parameters parameter_overrides;
};

struct LoadedScenario {
  ScenarioDoc doc;
  Parameters parameters;
  SignaturePtr signature;
  std::vector<CausalSetting> settings;      // every setting, in document order
  std::vector<Rational> probabilities;      // aligned with `settings`
  std::optional<EpistemicState> state;      // settings with positive probability
  std::vector<std::size_t> state_settings;  // document index of each state setting
  CostModel cost_model;
  ReferencePolicy policy;
  Rational n = 1;
  Rational m = 1;
  std::vector<CausalFormula> outcomes;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return state.has_value() && !has_errors(diagnostics); }
  const EpistemicState& epistemic() const { return *state; }
};

namespace detail {

class Builder {
 public:
  Builder(LoadedScenario& out, const LoadOptions& opts) : r_(out), d_(out.doc), opts_(opts) {}

  void run() {
    params();
    if (!signature()) return;
    settings();
    if (has_errors(r_.diagnostics)) return;
    utility_and_state();
    if (!r_.state) return;
    costs();
    policy();
    bounds();
    outcomes();
  }

 private:
  void diag(Diagnostic::Severity sev, const std::string& ptr, std::string code, std::string msg,
            std::size_t col_shift = 0) {
    auto p = d_.source.find(ptr);
    if (col_shift) p.col += col_shift;
    r_.diagnostics.push_back({sev, d_.file, p.line, p.col, std::move(code), std::move(msg), ptr});
  }
  void error(const std::string& ptr, std::string code, std::string msg) {
    diag(Diagnostic::Severity::Error, ptr, std::move(code), std::move(msg));
  }
  void warning(const std::string& ptr, std::string code, std::string msg) {
    diag(Diagnostic::Severity::Warning, ptr, std::move(code), std::move(msg));
  }
  // Errors raised while reading the string at `ptr`; syntax errors point
  // inside the string when it sits on one line.
  void report(const std::string& ptr, const Error& e) {
    if (auto* se = dynamic_cast<const SyntaxError*>(&e))
      diag(Diagnostic::Severity::Error, ptr, code_name(e.code()), e.what(), se->position() + 1);
    else
      error(ptr, code_name(e.code()), e.what());
  }

  bool rational(const std::string& text, const std::string& ptr, Rational& out) {
    try {
      out = eval_rational(text, r_.parameters);
      return true;
    } catch (const Error& e) {
      report(ptr, e);
      return false;
    }
  }

  void params() {
    for (const auto& [k, v] : d_.parameters) {
      const std::string ptr = "/parameters/" + pointer_escape(k);
      if (!is_identifier(k)) {
        error(ptr, "schema", "invalid parameter name '" + k + "'");
        continue;
      }
      Rational x;
      if (rational(v, ptr, x)) r_.parameters[k] = x;
    }
    for (const auto& [k, v] : opts_.parameter_overrides) {
      if (!r_.parameters.count(k)) {
        error("/parameters", "unknown-parameter", "parameter '" + k + "' is not declared by the scenario");
        continue;
      }
      r_.parameters[k] = v;
    }
  }

  static SignaturePtr make_signature(const VariablesDoc& v, const std::string& action) {
    std::vector<Variable> exo, endo;
    for (const auto& x : v.exogenous) exo.emplace_back(x.name, x.range);
    for (const auto& x : v.endogenous) endo.emplace_back(x.name, x.range);
    return std::make_shared<const Signature>(std::move(exo), std::move(endo), action);
  }

  bool signature() {
    try {
      r_.signature = make_signature(d_.variables, d_.action_variable);
      return true;
    } catch (const Error& e) {
      error("/variables", code_name(e.code()), e.what());
      return false;
    }
  }

  std::optional<Equation> equation(const std::string& name, const EquationDoc& eq, const std::string& ptr) {
    const auto& sig = *r_.signature;
    try {
      if (!eq.is_cases) return make_equation(sig, name, eq.expr);
      std::vector<Case> cases;
      for (const auto& c : eq.cases) cases.push_back({c.when, c.value});
      return make_case_equation(sig, name, cases, eq.fallback);
    } catch (const Error& e) {
      report(ptr, e);
      return std::nullopt;
    }
  }

  // Equations for one setting, top-level overridden by the setting's own.
  std::optional<std::vector<Equation>> equations(const SettingDoc* s, const std::string& setting_ptr) {
    const auto& sig = *r_.signature;
    std::vector<std::optional<Equation>> eqs(sig.endogenous().size());
    bool ok = true;
    auto take = [&](const EquationsDoc& list, const std::string& base) {
      for (const auto& [name, eq] : list) {
        const std::string ptr = base + "/" + pointer_escape(name);
        auto ref = sig.find(name);
        if (!ref || ref->kind != VarKind::Endogenous) {
          error(ptr, "unknown-variable", "equation for '" + name + "', which is not an endogenous variable");
          ok = false;
          continue;
        }
        auto e = equation(name, eq, ptr);
        if (!e) {
          ok = false;
          continue;
        }
        eqs[ref->index] = std::move(e);
      }
    };
    take(d_.equations, "/equations");
    if (s) take(s->equations, setting_ptr + "/equations");
    std::vector<Equation> out;
    for (std::size_t v = 0; v < eqs.size(); ++v) {
      if (!eqs[v]) {
        if (ok)
          error(s ? setting_ptr : "/equations", "missing-equation",
                "no equation for endogenous variable " + sig.endo(v).name());
        ok = false;
        continue;
      }
      out.push_back(std::move(*eqs[v]));
    }
    if (!ok) return std::nullopt;
    return out;
  }

  CausalModelPtr model(std::vector<Equation> eqs, const std::string& ptr) {
    try {
      return std::make_shared<const CausalModel>(r_.signature, std::move(eqs));
    } catch (const Error& e) {
      error(ptr, code_name(e.code()), e.what());
      return nullptr;
    }
  }

  void settings() {
    const auto& sig = *r_.signature;
    CausalModelPtr shared;
    bool shared_tried = false;
    Rational total = 0;
    for (std::size_t i = 0; i < d_.settings.size(); ++i) {
      const auto& s = d_.settings[i];
      const std::string ptr = "/settings/" + std::to_string(i);
      if (s.variables) {
        try {
          if (!(*make_signature(*s.variables, d_.action_variable) == sig)) {
            error(ptr + "/variables", "signature-mismatch", "setting " + std::to_string(i) +
                                                                " declares a signature that differs from the "
                                                                "top-level variables");
            continue;
          }
        } catch (const Error& e) {
          error(ptr + "/variables", "signature-mismatch", e.what());
          continue;
        }
      }
      CausalModelPtr m;
      if (s.equations.empty()) {
        if (!shared_tried) {
          shared_tried = true;
          if (auto eqs = equations(nullptr, ptr)) shared = model(std::move(*eqs), "/equations");
        }
        m = shared;
      } else if (auto eqs = equations(&s, ptr)) {
        m = model(std::move(*eqs), ptr + "/equations");
      }

      Context ctx;
      ctx.values.assign(sig.exogenous().size(), -1);
      bool ctx_ok = true;
      for (const auto& [name, value] : s.context) {
        const std::string cp = ptr + "/context/" + pointer_escape(name);
        auto ref = sig.find(name);
        if (!ref || ref->kind != VarKind::Exogenous) {
          error(cp, "unknown-variable", "'" + name + "' is not an exogenous variable");
          ctx_ok = false;
          continue;
        }
        auto idx = sig.exo(ref->index).find(value);
        if (!idx) {
          error(cp, "value-not-in-range", "value '" + value + "' is not in the range of " + name);
          ctx_ok = false;
          continue;
        }
        ctx.values[ref->index] = *idx;
      }
      for (std::size_t x = 0; x < ctx.values.size(); ++x)
        if (ctx.values[x] < 0 && ctx_ok) {
          error(ptr + "/context", "incomplete-context", "context does not assign " + sig.exo(x).name());
          ctx_ok = false;
        }

      Rational p;
      const bool p_ok = rational(s.probability, ptr + "/probability", p);
      if (p_ok && p < 0) error(ptr + "/probability", "invalid-probability", "probability " + to_string(p) + " is negative");
      if (p_ok) total += p;
      if (!m || !ctx_ok || !p_ok) continue;
      r_.settings.push_back({m, ctx});
      r_.probabilities.push_back(p);
    }
    if (!has_errors(r_.diagnostics) && total != 1)
      error("/settings", "probability-sum", "probabilities sum to " + to_string(total) + ", expected 1");
  }

  void utility_and_state() {
    const auto& sig = *r_.signature;
    std::vector<UtilityTerm> terms;
    for (std::size_t i = 0; i < d_.utility.size(); ++i) {
      const std::string ptr = "/utility/" + std::to_string(i);
      const auto& u = d_.utility[i];
      UtilityTerm t;
      try {
        t.condition = parse_formula(u.when, sig);
      } catch (const Error& e) {
        report(ptr + "/when", e);
        continue;
      }
      if (t.condition.has_intervention()) {
        error(ptr + "/when", "schema", "utility conditions must be intervention-free");
        continue;
      }
      if (!rational(u.weight, ptr + "/weight", t.weight)) continue;
      std::vector<std::size_t> vars;
      collect_variables(*t.condition.body(), vars);
      if (std::find(vars.begin(), vars.end(), sig.action_index()) != vars.end())
        warning(ptr + "/when", "utility-mentions-action",
                "utility term mentions the action variable " + sig.action_name());
      terms.push_back(std::move(t));
    }
    auto a0 = sig.action().find(d_.default_action);
    if (!a0) {
      error("/default_action", "value-not-in-range",
            "default action '" + d_.default_action + "' is not in the range of " + sig.action_name());
    }
    if (has_errors(r_.diagnostics)) return;

    std::vector<WeightedSetting> ws;
    for (std::size_t i = 0; i < r_.settings.size(); ++i) {
      if (r_.probabilities[i] == 0) {
        warning("/settings/" + std::to_string(i) + "/probability", "zero-probability",
                "setting " + std::to_string(i) + " has probability 0 and is left out of the epistemic state");
        continue;
      }
      ws.push_back({r_.settings[i], r_.probabilities[i]});
      r_.state_settings.push_back(i);
    }
    try {
      r_.state.emplace(std::move(ws), UtilityFunction(std::move(terms)), *a0);
    } catch (const Error& e) {
      error("/settings", code_name(e.code()), e.what());
    }
  }

  void costs() {
    const auto& sig = *r_.signature;
    std::vector<std::size_t> vars;
    for (std::size_t i = 0; i < d_.cost_variables.size(); ++i) {
      const std::string ptr = "/cost_variables/" + std::to_string(i);
      auto ref = sig.find(d_.cost_variables[i]);
      if (!ref || ref->kind != VarKind::Endogenous) {
        error(ptr, "unknown-variable", "cost variable '" + d_.cost_variables[i] + "' is not an endogenous variable");
        continue;
      }
      if (ref->index == sig.action_index()) {
        error(ptr, "schema", "the action variable cannot be a cost variable");
        continue;
      }
      vars.push_back(ref->index);
    }
    if (vars.size() != d_.cost_variables.size()) return;
    try {
      r_.cost_model = validate_cost_vars(*r_.state, vars);
    } catch (const Error& e) {
      error("/cost_variables", code_name(e.code()), e.what());
      return;
    }
    const auto& e = *r_.state;
    for (const auto& v : r_.cost_model.violations)
      warning("/cost_variables", "cost-axiom",
              "cost-axiom violation at action=" + e.action_name(v.action) + " (setting " +
                  std::to_string(r_.state_settings[v.setting]) + "): " + v.inequality);
    if (!vars.empty())
      for (std::size_t k = 0; k < e.settings().size(); ++k) {
        const int acted = solve(e.settings()[k].setting)[sig.action_index()];
        if (acted != e.default_action())
          warning("/settings/" + std::to_string(r_.state_settings[k]) + "/context", "context-action",
                  "context solves " + sig.action_name() + " = " + e.action_name(acted) +
                      ", not the default action " + e.action_name(e.default_action()) +
                      "; costs are measured from this baseline");
      }
  }

  void policy() {
    const auto& e = *r_.state;
    const auto& rp = d_.reference_policy;
    const std::string ptr = "/reference_policy";
    std::vector<int> acts;
    for (std::size_t i = 0; i < rp.actions.size(); ++i) {
      auto a = e.signature().action().find(rp.actions[i]);
      if (!a) {
        error(ptr + "/" + rp.kind + "/" + std::to_string(i), "value-not-in-range",
              "'" + rp.actions[i] + "' is not an action");
        return;
      }
      acts.push_back(*a);
    }
    if (rp.kind == "default")
      r_.policy = ReferencePolicy::default_only();
    else if (rp.kind == "all")
      r_.policy = ReferencePolicy::all_others();
    else if (rp.kind == "explicit")
      r_.policy = ReferencePolicy::explicit_set(acts);
    else
      r_.policy = ReferencePolicy::default_plus(acts);
    // A single-valued action variable leaves nothing to compare against;
    // intention queries answer "not intended" without a reference set.
    if (e.action_count() < 2) return;
    for (int a = 0; a < static_cast<int>(e.action_count()); ++a) {
      try {
        resolve_ref(r_.policy, a, e);
      } catch (const Error& err) {
        error(ptr, code_name(err.code()), err.what());
      }
    }
  }

  void bounds() {
    Rational max_cost = 0;
    if (r_.cost_model.validated)
      for (const auto& c : all_costs(*r_.state, r_.cost_model)) max_cost = std::max(max_cost, c);
    auto one = [&](const std::optional<std::string>& text, const char* key, const char* code, Rational& out) {
      if (!text) {
        out = max_cost + 1;
        return;
      }
      if (!rational(*text, std::string("/") + key, out)) return;
      if (r_.cost_model.validated && !(out > max_cost))
        error(std::string("/") + key, code,
              std::string(key) + " = " + to_string(out) + " must exceed the largest action cost " + to_string(max_cost));
    };
    one(d_.n, "N", "invalid-N", r_.n);
    one(d_.m, "M", "invalid-M", r_.m);
  }

  void outcomes() {
    for (std::size_t i = 0; i < d_.outcomes.size(); ++i) {
      const std::string ptr = "/outcomes/" + std::to_string(i);
      try {
        auto f = parse_formula(d_.outcomes[i], *r_.signature);
        if (f.has_intervention()) {
          error(ptr, "schema", "declared outcomes must be intervention-free");
          continue;
        }
        r_.outcomes.push_back(std::move(f));
      } catch (const Error& e) {
        report(ptr, e);
      }
    }
  }

  LoadedScenario& r_;
  const ScenarioDoc& d_;
  const LoadOptions& opts_;
};

}  // namespace detail

inline LoadedScenario build(ScenarioDoc doc, const LoadOptions& opts = {}) {
  LoadedScenario r;
  r.doc = std::move(doc);
  detail::Builder(r, opts).run();
  return r;
}

inline std::vector<Diagnostic> validate(const ScenarioDoc& doc, const LoadOptions& opts = {}) {
  return build(doc, opts).diagnostics;
}

inline LoadedScenario load(std::string_view text, std::string file = "<input>", const LoadOptions& opts = {}) {
  auto parsed = parse_scenario(text, std::move(file));
  if (!parsed.doc) {
    LoadedScenario r;
    r.diagnostics = std::move(parsed.diagnostics);
    return r;
  }
  auto r = build(std::move(*parsed.doc), opts);
  r.diagnostics.insert(r.diagnostics.begin(), parsed.diagnostics.begin(), parsed.diagnostics.end());
  return r;
}

// ---- commons family ---------------------------------------------------------

// n fishermen, the lake collapses once at least m of them fish; each of the
// other n-1 fishes independently with probability q.
inline ScenarioDoc generate_commons(std::size_t n, std::size_t m, const Rational& q) {
  if (n < 2 || n > 17) throw Error(ErrorCode::LimitExceeded, "commons generator supports 2 <= n <= 17");
  if (m < 1 || m > n) throw Error(ErrorCode::PreconditionViolated, "commons requires 1 <= m <= n");
  if (q < 0 || q > 1) throw Error(ErrorCode::PreconditionViolated, "q must be a probability");
  ScenarioDoc d;
  d.name = "commons_n" + std::to_string(n) + "_m" + std::to_string(m);
  d.description = "Tragedy of the commons: " + std::to_string(n) + " fishermen, the lake collapses if at least " +
                  std::to_string(m) + " fish; each other fisherman fishes with probability " + to_string(q) + ".";
  d.action_variable = "A";
  d.default_action = "limit";
  const std::size_t others = n - 1;
  d.variables.exogenous.push_back({"U_A", {"limit", "fish"}});
  for (std::size_t i = 1; i <= others; ++i) d.variables.exogenous.push_back({"U_" + std::to_string(i), {"0", "1"}});
  d.variables.endogenous.push_back({"A", {"limit", "fish"}});
  for (std::size_t i = 1; i <= others; ++i) d.variables.endogenous.push_back({"F_" + std::to_string(i), {"0", "1"}});
  d.variables.endogenous.push_back({"Collapse", {"0", "1"}});
  d.equations.push_back({"A", {"U_A", false, {}, {}}});
  std::string sum = "(A = 'fish')";
  for (std::size_t i = 1; i <= others; ++i) {
    d.equations.push_back({"F_" + std::to_string(i), {"U_" + std::to_string(i), false, {}, {}}});
    sum += " + F_" + std::to_string(i);
  }
  d.equations.push_back({"Collapse", {sum + " >= " + std::to_string(m), false, {}, {}}});
  for_each_assignment(std::vector<std::size_t>(others, 2), [&](const std::vector<int>& bits) {
    SettingDoc s;
    s.context.emplace_back("U_A", "fish");
    Rational p = 1;
    for (std::size_t i = 0; i < others; ++i) {
      s.context.emplace_back("U_" + std::to_string(i + 1), std::to_string(bits[i]));
      p *= bits[i] ? q : Rational(1 - q);
    }
    s.probability = to_string(p);
    if (p != 0) d.settings.push_back(std::move(s));
    return false;
  });
  d.utility.push_back({"Collapse = 1", "-100"});
  d.outcomes.push_back("Collapse = 1");
  return d;
}

}  // namespace culpa
