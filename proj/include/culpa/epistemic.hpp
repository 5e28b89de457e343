#pragma once

#include "culpa/error.hpp"
#include "culpa/formula.hpp"
#include "culpa/rational.hpp"
#include "culpa/scm.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <vector>

namespace culpa {

struct UtilityTerm {
  CausalFormula condition;  // intervention-free, bound
  Rational weight;
};

// u(w) = sum of the weights whose condition w satisfies.
class UtilityFunction {
 public:
  UtilityFunction() = default;
  explicit UtilityFunction(std::vector<UtilityTerm> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      if (!t.condition.bound()) throw Error(ErrorCode::PreconditionViolated, "utility condition is not bound");
      if (t.condition.has_intervention())
        throw Error(ErrorCode::PreconditionViolated, "utility conditions must be intervention-free");
    }
  }

  Rational operator()(const World& w) const {
    Rational total = 0;
    for (const auto& t : terms_)
      if (eval_body(*t.condition.body(), w)) total += t.weight;
    return total;
  }

  bool mentions(std::size_t var) const {
    for (const auto& t : terms_) {
      std::vector<std::size_t> vars;
      collect_variables(*t.condition.body(), vars);
      if (std::find(vars.begin(), vars.end(), var) != vars.end()) return true;
    }
    return false;
  }

  const std::vector<UtilityTerm>& terms() const noexcept { return terms_; }

  UtilityFunction scaled(const Rational& k) const {
    auto t = terms_;
    for (auto& x : t) x.weight *= k;
    return UtilityFunction(std::move(t));
  }

 private:
  std::vector<UtilityTerm> terms_;
};

struct WeightedSetting {
  CausalSetting setting;
  Rational probability;
};

// E = (Pr, K, u) together with the default action a0.
class EpistemicState {
 public:
  EpistemicState(std::vector<WeightedSetting> settings, UtilityFunction utility, int default_action)
      : settings_(std::move(settings)), utility_(std::move(utility)), default_action_(default_action) {
    if (settings_.empty()) throw Error(ErrorCode::InvalidEpistemicState, "epistemic state has no settings");
    sig_ = settings_.front().setting.model->signature_ptr();
    Rational total = 0;
    for (const auto& ws : settings_) {
      if (!(ws.setting.signature() == *sig_))
        throw Error(ErrorCode::InvalidEpistemicState, "settings do not share one signature");
      if (ws.probability <= 0)
        throw Error(ErrorCode::InvalidEpistemicState, "setting probabilities must be strictly positive");
      total += ws.probability;
    }
    if (total != 1)
      throw Error(ErrorCode::InvalidEpistemicState, "probabilities sum to " + to_string(total) + ", expected 1");
    if (default_action < 0 || default_action >= static_cast<int>(sig_->action().size()))
      throw Error(ErrorCode::InvalidEpistemicState, "default action is not in the range of the action variable");
  }

  const std::vector<WeightedSetting>& settings() const noexcept { return settings_; }
  const UtilityFunction& utility() const noexcept { return utility_; }
  const Signature& signature() const noexcept { return *sig_; }
  int default_action() const noexcept { return default_action_; }
  std::size_t action_count() const { return sig_->action().size(); }

  int action(std::string_view name) const { return sig_->action().value_index(name); }
  const std::string& action_name(int a) const { return sig_->action().value(a); }

  EpistemicState with_utility(UtilityFunction u) const { return EpistemicState(settings_, std::move(u), default_action_); }

 private:
  std::vector<WeightedSetting> settings_;
  UtilityFunction utility_;
  int default_action_;
  SignaturePtr sig_;
};

inline void check_action(const EpistemicState& e, int a) {
  if (a < 0 || a >= static_cast<int>(e.action_count()))
    throw Error(ErrorCode::ValueNotInRange, "action is not in the range of the action variable");
}

// Pr([[K]] phi)
inline Rational prob(const EpistemicState& e, const CausalFormula& phi) {
  Rational p = 0;
  for (const auto& ws : e.settings())
    if (holds(ws.setting, phi)) p += ws.probability;
  return p;
}

// Pr([[K]] [A<-a] phi)
inline Rational prob_under_action(const EpistemicState& e, int a, const CausalFormula& phi) {
  check_action(e, a);
  return prob(e, phi.under(e.signature(), action_intervention(e.signature(), a)));
}

// max(0, Pr([A<-a]phi) - Pr([A<-a']phi))
inline Rational delta(const EpistemicState& e, int a, int a_alt, const CausalFormula& phi) {
  if (phi.has_intervention())
    throw Error(ErrorCode::PreconditionViolated, "delta is defined for intervention-free outcomes");
  const Rational d = prob_under_action(e, a, phi) - prob_under_action(e, a_alt, phi);
  return d > 0 ? d : Rational(0);
}

inline Rational expected_utility(const EpistemicState& e, int a) {
  check_action(e, a);
  const auto iv = action_intervention(e.signature(), a);
  Rational eu = 0;
  for (const auto& ws : e.settings()) eu += ws.probability * e.utility()(world_under(ws.setting, iv));
  return eu;
}

// sum over K of Pr * u(w_{M,(A<-a', pins<-o_{A<-a}),u}): act a' while the
// pinned variables keep the values they would have under a.
inline Rational pinned_expected_utility(const EpistemicState& e, int a_alt, std::span<const std::size_t> pins,
                                        int a) {
  check_action(e, a);
  check_action(e, a_alt);
  const auto& sig = e.signature();
  for (auto v : pins)
    if (v == sig.action_index())
      throw Error(ErrorCode::PreconditionViolated, "the action variable cannot be pinned");
  Rational eu = 0;
  for (const auto& ws : e.settings()) {
    const auto o = outcome_under_action(ws.setting, pins, a);
    Intervention iv = action_intervention(sig, a_alt);
    for (std::size_t i = 0; i < pins.size(); ++i) iv.set(pins[i], o[i]);
    eu += ws.probability * e.utility()(world_under(ws.setting, iv));
  }
  return eu;
}

}  // namespace culpa
