#include "support.hpp"

#include <gtest/gtest.h>

using namespace culpa;
using namespace testing_support;

namespace {

SignaturePtr sig_of(std::vector<Variable> exo, std::vector<Variable> endo, std::string action) {
  return std::make_shared<const Signature>(std::move(exo), std::move(endo), std::move(action));
}

std::vector<std::string> bin() { return {"0", "1"}; }

World world(const LoadedScenario& s, std::vector<std::pair<std::string, std::string>> values) {
  World w;
  w.values.assign(s.signature->endogenous().size(), 0);
  for (const auto& [v, x] : values) {
    const auto i = s.signature->endo_index(v);
    w.values[i] = s.signature->endo(i).value_index(x);
  }
  return w;
}

Intervention iv_of(const Signature& sig, std::vector<std::pair<std::string, std::string>> items) {
  Intervention iv;
  for (const auto& [v, x] : items) iv.set(sig, v, x);
  return iv;
}

}  // namespace

TEST(Signature, RejectsOverlapsAndBadAction) {
  EXPECT_THROW(Signature({Variable("X", bin())}, {Variable("X", bin())}, "X"), Error);
  EXPECT_THROW(Signature({}, {Variable("A", bin()), Variable("A", bin())}, "A"), Error);
  EXPECT_THROW(Signature({Variable("U", bin())}, {Variable("A", bin())}, "U"), Error);
  EXPECT_THROW(Variable("X", {}), Error);
  EXPECT_THROW(Variable("X", {"a", "a"}), Error);
}

TEST(Signature, IntegerTypedRanges) {
  EXPECT_TRUE(Variable("X", {"0", "2", "-3"}).is_integer());
  EXPECT_FALSE(Variable("X", {"0", "two"}).is_integer());
}

TEST(ValidateModel, TrolleyOrderPutsActionFirst) {
  auto s = load_corpus("trolley");
  const auto& order = s.settings[0].model->order();
  auto pos = [&](const std::string& n) {
    return std::find(order.begin(), order.end(), s.signature->endo_index(n)) - order.begin();
  };
  EXPECT_LT(pos("A"), pos("O1"));
  EXPECT_LT(pos("A"), pos("O2"));
}

TEST(ValidateModel, TwoCycleIsReported) {
  auto sig = sig_of({}, {Variable("A", bin()), Variable("X", bin()), Variable("Y", bin())}, "A");
  std::vector<Equation> eqs{make_equation(*sig, "A", "0"), make_equation(*sig, "X", "Y"),
                            make_equation(*sig, "Y", "X")};
  try {
    CausalModel m(sig, eqs);
    FAIL() << "cycle accepted";
  } catch (const CyclicModelError& e) {
    auto c = e.cycle();
    std::sort(c.begin(), c.end());
    EXPECT_EQ(c, (std::vector<std::string>{"X", "Y"}));
    EXPECT_EQ(e.code(), ErrorCode::CyclicModel);
  }
}

TEST(ValidateModel, RangeViolationNamesTheParentAssignment) {
  auto sig = sig_of({Variable("U", bin())}, {Variable("A", bin()), Variable("O", bin())}, "A");
  std::vector<Equation> eqs{make_equation(*sig, "A", "U"), make_equation(*sig, "O", "A + 1")};
  try {
    CausalModel m(sig, eqs);
    FAIL() << "overflow accepted";
  } catch (const RangeViolationError& e) {
    EXPECT_EQ(e.variable(), "O");
    EXPECT_NE(e.parent_assignment().find("A=1"), std::string::npos) << e.what();
    EXPECT_EQ(e.value(), "2");
  }
}

TEST(Expressions, ArithmeticComparisonsAndConditionals) {
  auto sig = sig_of({Variable("U", {"0", "1", "2"})},
                    {Variable("A", {"0", "1", "2"}), Variable("B", {"0", "1", "2", "3", "4"}),
                     Variable("C", bin()), Variable("D", {"lo", "hi"})},
                    "A");
  std::vector<Equation> eqs{make_equation(*sig, "A", "U"), make_equation(*sig, "B", "A * 2"),
                            make_equation(*sig, "C", "B >= 3 && !(A = 0)"),
                            make_equation(*sig, "D", "if C = 1 then 'hi' else 'lo'")};
  auto m = std::make_shared<const CausalModel>(sig, eqs);
  for (int u = 0; u < 3; ++u) {
    const auto w = m->solve(Context{{u}});
    EXPECT_EQ(w[0], u);
    EXPECT_EQ(sig->endo(1).int_value(w[1]), 2 * u);
    EXPECT_EQ(w[2], u == 2 ? 1 : 0);
    EXPECT_EQ(sig->endo(3).value(w[3]), u == 2 ? "hi" : "lo");
  }
}

TEST(Expressions, TypeErrors) {
  auto sig = sig_of({}, {Variable("A", {"x", "y"}), Variable("B", bin())}, "A");
  EXPECT_THROW(make_equation(*sig, "B", "A + 1"), Error);
  EXPECT_THROW(make_equation(*sig, "B", "A = 'z'"), Error);
  EXPECT_THROW(make_equation(*sig, "B", "B"), Error);
  EXPECT_THROW(make_equation(*sig, "B", "Q"), Error);
  EXPECT_THROW(make_equation(*sig, "B", "(1"), SyntaxError);
}

TEST(Expressions, CaseListDesugars) {
  auto s = load_corpus("daniel");
  const auto& e = s.epistemic();
  const std::size_t S = var(s, "S"), C = var(s, "C");
  for (const auto& [a, sv, cv] : std::vector<std::tuple<std::string, std::string, std::string>>{
           {"p1", "5", "4"}, {"p2", "2", "5"}, {"nothing", "0", "0"}}) {
    const auto w = world_under(e.settings()[0].setting, action_intervention(*s.signature, action(e, a)));
    EXPECT_EQ(s.signature->endo(S).value(w[S]), sv);
    EXPECT_EQ(s.signature->endo(C).value(w[C]), cv);
  }
}

TEST(Solve, TrolleyPulled) {
  auto s = load_corpus("trolley");
  EXPECT_EQ(solve(s.settings[0]), world(s, {{"A", "1"}, {"O1", "0"}, {"O2", "1"}}));
}

TEST(Solve, RocksSuzyThrows) {
  auto s = load_corpus("rocks");
  EXPECT_EQ(solve(s.settings[0]), world(s, {{"ST", "1"}, {"BT", "0"}, {"BS", "1"}}));
}

TEST(Solve, EmptyInterventionIsIdentity) {
  for (const auto& name : corpus_names()) {
    auto s = load_corpus(name);
    for (const auto& st : s.settings) EXPECT_EQ(world_under(st, {}), solve(st)) << name;
  }
}

TEST(Intervene, RocksBothStopped) {
  auto s = load_corpus("rocks");
  const auto& sig = *s.signature;
  auto m = intervene(*s.settings[0].model, iv_of(sig, {{"ST", "0"}, {"BT", "0"}}));
  EXPECT_EQ(m.solve(s.settings[0].context), world(s, {{"ST", "0"}, {"BT", "0"}, {"BS", "0"}}));
}

TEST(Intervene, LoopHitFromNoAction) {
  auto s = load_corpus("loop");
  const auto& sig = *s.signature;
  auto m = intervene(*s.settings[0].model, iv_of(sig, {{"TH", "1"}}));
  EXPECT_EQ(m.solve(Context{{0}}), world(s, {{"A", "0"}, {"TH", "1"}, {"D", "1"}, {"TS", "1"}, {"F", "0"}}));
}

TEST(Intervene, RejectsBadTargets) {
  auto s = load_corpus("rocks");
  Intervention bad;
  bad.set(7, 0);
  EXPECT_THROW(intervene(*s.settings[0].model, bad), Error);
  Intervention out_of_range;
  out_of_range.set(0, 5);
  EXPECT_THROW(intervene(*s.settings[0].model, out_of_range), Error);
  Intervention iv;
  EXPECT_THROW(iv.set(*s.signature, "Nope", "0"), Error);
  EXPECT_THROW(iv.set(*s.signature, "ST", "7"), Error);
}

TEST(Holds, PaperFormulas) {
  auto rocks = load_corpus("rocks");
  EXPECT_TRUE(holds(rocks.settings[0], f(rocks, "[ST <- 0, BT <- 0] BS = 0")));
  auto fr = load_corpus("frankfurt");
  EXPECT_TRUE(holds(fr.settings[1], f(fr, "JP = 1 & BP = 0 & JS = 0 & SD = 1")));
  for (const auto& name : corpus_names()) {
    auto s = load_corpus(name);
    const auto& v = s.signature->endo(0);
    const std::string prim = v.name() + " = " + (v.is_integer() ? v.value(0) : "'" + v.value(0) + "'");
    for (const auto& st : s.settings) {
      EXPECT_TRUE(holds(st, f(s, "true")));
      EXPECT_FALSE(holds(st, f(s, prim + " & !(" + prim + ")")));
    }
  }
}

TEST(WorldUnder, TrolleyAndStudy) {
  auto t = load_corpus("trolley");
  EXPECT_EQ(world_under(t.settings[0], iv_of(*t.signature, {{"A", "0"}})),
            world(t, {{"A", "0"}, {"O1", "1"}, {"O2", "0"}}));
  auto s = load_corpus("study");
  const CausalSetting ns{s.settings[0].model, Context{{s.signature->exo(0).value_index("ns")}}};
  EXPECT_EQ(world_under(ns, iv_of(*s.signature, {{"G", "1"}})),
            world(s, {{"A", "ns"}, {"G", "1"}, {"J", "1"}, {"Eff", "0"}}));
}

TEST(OutcomeUnderAction, Examples) {
  auto t = load_corpus("trolley");
  const std::vector<std::size_t> o2{var(t, "O2")};
  EXPECT_EQ(outcome_under_action(t.settings[0], o2, 1), std::vector<int>{1});
  EXPECT_TRUE(outcome_under_action(t.settings[0], std::vector<std::size_t>{}, 0).empty());
  auto d = load_corpus("daniel");
  const std::vector<std::size_t> sc{var(d, "S"), var(d, "C")};
  const auto o = outcome_under_action(d.settings[0], sc, action(d.epistemic(), "p1"));
  EXPECT_EQ(d.signature->endo(sc[0]).value(o[0]), "5");
  EXPECT_EQ(d.signature->endo(sc[1]).value(o[1]), "4");
}

TEST(Solve, FixedPointOnCorpus) {
  for (const auto& name : corpus_names()) {
    auto s = load_corpus(name);
    for (const auto& st : s.settings) {
      const auto w = solve(st);
      const auto& sig = *s.signature;
      for (std::size_t v = 0; v < w.values.size(); ++v) {
        const auto val = evaluate(*st.model->equation(v).body, sig, st.context.values, w.values);
        EXPECT_EQ(*to_range_index(val, sig.endo(v)), w[v]) << name << " " << sig.endo(v).name();
      }
      EXPECT_EQ(w.values, oracle_solve(*st.model, st.context, {})) << name;
    }
  }
}

TEST(Solve, RandomModelsMatchTruthTables) {
  std::mt19937 rng(11);
  for (int i = 0; i < 300; ++i) {
    auto m = random_model(rng, 1 + i % 5, 1 + i % 3);
    const auto ctx = random_context(rng, m.n_exo);
    std::map<std::size_t, int> iv;
    Intervention civ;
    for (std::size_t v = 0; v < m.n_endo; ++v)
      if (rng() % 3 == 0) {
        const int x = static_cast<int>(rng() % 2);
        iv[v] = x;
        civ.set(v, x);
      }
    EXPECT_EQ(m.model->solve(Context{ctx}, civ).values, oracle_solve(m, ctx, iv));
  }
}

TEST(Intervene, CompositionOnConstants) {
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto m = random_model(rng, 5, 2);
    const Context ctx{random_context(rng, 2)};
    Intervention small, big;
    for (std::size_t v = 0; v < 5; ++v) {
      const int x = static_cast<int>(rng() % 2);
      const auto r = rng() % 3;
      if (r == 0) {
        small.set(v, x);
        big.set(v, x);
      } else if (r == 1) {
        big.set(v, static_cast<int>(rng() % 2));
      }
    }
    const auto twice = intervene(intervene(*m.model, small), big);
    const auto once = intervene(*m.model, big);
    EXPECT_EQ(twice.solve(ctx), once.solve(ctx));
    const auto w = once.solve(ctx);
    for (const auto& [v, x] : big.items()) EXPECT_EQ(w[v], x);
  }
}
