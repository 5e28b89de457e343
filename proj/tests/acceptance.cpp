// Acceptance gate: one test per criterion, reported as a single PASS/FAIL line.

#include "property_suites.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace culpa;
using namespace testing_support;

namespace {

Rational R(long long p, long long q = 1) { return Rational(p, q); }

std::vector<std::string> names(const Signature& sig, const std::vector<std::size_t>& vars) {
  std::vector<std::string> out;
  for (auto v : vars) out.push_back(sig.endo(v).name());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> vars(const LoadedScenario& s, std::initializer_list<const char*> ns) {
  std::vector<std::size_t> out;
  for (auto n : ns) out.push_back(var(s, n));
  return out;
}

std::vector<std::pair<std::size_t, int>> conj(const LoadedScenario& s, const std::string& text) {
  return *as_conjunction(f(s, text));
}

ReferencePolicy only(const LoadedScenario& s, std::initializer_list<const char*> acts) {
  std::vector<int> out;
  for (auto a : acts) out.push_back(action(s.epistemic(), a));
  return ReferencePolicy::explicit_set(out);
}

IntentVerdict affect(const LoadedScenario& s, const char* a, std::initializer_list<const char*> ns,
                     const ReferencePolicy& p) {
  return intends_to_affect(s.epistemic(), action(s.epistemic(), a), vars(s, ns), p);
}

bool agrees_with_naive(const CausalSetting& s, const CauseCandidate& c, const CausalFormula& phi) {
  const auto lib = check_cause(s, c, phi);
  std::vector<std::size_t> ranges;
  for (const auto& v : s.signature().endogenous()) ranges.push_back(v.size());
  const auto naive = naive_cause(
      [&](const std::map<std::size_t, int>& m) {
        Intervention iv;
        for (const auto& [v, x] : m) iv.set(v, x);
        return world_under(s, iv).values;
      },
      ranges, c.conjuncts, [&](const std::vector<int>& w) { return eval_body(*phi.body(), World{w}); });
  return lib.ac1 == naive.ac1 && lib.ac2_witness.has_value() == naive.ac2 && lib.ac3 == naive.ac3 &&
         lib.is_cause == naive.is_cause && (!lib.ac2_witness || witness_replays(s, lib, phi));
}

std::vector<CauseCandidate> small_candidates(const CausalSetting& s) {
  const auto w = solve(s);
  std::vector<CauseCandidate> out;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    out.push_back({{{i, w[i]}}});
    for (std::size_t j = i + 1; j < w.values.size(); ++j) out.push_back({{{i, w[i]}, {j, w[j]}}});
  }
  return out;
}

// Prints one line per criterion; failure details are indented below it.
class CriterionPrinter : public ::testing::EmptyTestEventListener {
 public:
  void OnTestStart(const ::testing::TestInfo&) override {
    details_.clear();
    start_ = std::chrono::steady_clock::now();
  }
  void OnTestPartResult(const ::testing::TestPartResult& r) override {
    if (r.failed())
      details_ += std::string("    ") + (r.file_name() ? r.file_name() : "?") + ":" + std::to_string(r.line_number()) +
                  ": " + r.summary() + "\n";
  }
  void OnTestEnd(const ::testing::TestInfo& info) override {
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_).count();
    const bool ok = info.result()->Passed();
    std::printf("%s  %s  (%lld ms)\n", ok ? "PASS" : "FAIL", info.name(), static_cast<long long>(ms));
    if (!ok) std::printf("%s", details_.c_str());
    std::fflush(stdout);
  }
  void OnTestProgramEnd(const ::testing::UnitTest& u) override {
    std::printf("%d of %d criteria passed\n", u.successful_test_count(), u.total_test_count());
  }

 private:
  std::string details_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

TEST(Acceptance, Criterion01_TrolleyFullyBlameworthy) {
  auto s = load_corpus("trolley");
  const auto& e = s.epistemic();
  for (long long n : {1LL, 2LL, 10LL, 1000LL}) EXPECT_EQ(blame(e, 1, f(s, "O2 = 1"), R(n), s.cost_model).overall, R(1));
}

TEST(Acceptance, Criterion02_SixVictims) {
  auto s = load_corpus("six");
  const auto& e = s.epistemic();
  EXPECT_EQ(blame(e, 0, f(s, "O6 = 1"), R(1), s.cost_model).overall, R(4, 5));
  EXPECT_EQ(blame(e, 0, f(s, "O5 = 1"), R(1), s.cost_model).overall, R(0));
  // brute force: enumerate both settings, solve each by fixpoint iteration
  const std::size_t a_var = var(s, "A"), o6 = var(s, "O6");
  Rational p_stay = 0, p_pull = 0;
  for (std::size_t i = 0; i < s.settings.size(); ++i) {
    const auto& st = s.settings[i];
    if (oracle_solve(*st.model, st.context, {{a_var, 0}})[o6] == 1) p_stay += s.probabilities[i];
    if (oracle_solve(*st.model, st.context, {{a_var, 1}})[o6] == 1) p_pull += s.probabilities[i];
  }
  EXPECT_EQ(std::max(Rational(0), Rational(p_stay - p_pull)), R(4, 5));
}

TEST(Acceptance, Criterion03_FrankfurtFamily) {
  for (const auto& p : {R(0), R(1, 2), R(1)}) {
    auto s = load_corpus("frankfurt", {{"p", p}});
    const auto& e = s.epistemic();
    const int poison = action(e, "poison");
    EXPECT_EQ(blame(e, poison, f(s, "SD = 1"), R(1), s.cost_model).overall, 1 - p);
    if (p == 1) {
      EXPECT_TRUE(intends_outcome(e, poison, conj(s, "SD = 1"), s.policy).intends);
    }
  }
}

TEST(Acceptance, Criterion04_ActualCausation) {
  auto rocks = load_corpus("rocks");
  const auto rv = check_cause(rocks.settings[0], CauseCandidate::parse(*rocks.signature, "ST = 1"), f(rocks, "BS = 1"));
  ASSERT_TRUE(rv.is_cause);
  EXPECT_EQ(names(*rocks.signature, rv.ac2_witness->w_vars), std::vector<std::string>{"BT"});
  EXPECT_EQ(rv.ac2_witness->w_values, std::vector<int>{0});
  EXPECT_EQ(rv.ac2_witness->x_alt, std::vector<int>{0});
  EXPECT_FALSE(but_for(rocks.settings[0], {var(rocks, "ST"), 1}, f(rocks, "BS = 1")));

  auto fr = load_corpus("frankfurt");
  const auto fv = check_cause(fr.settings[0], CauseCandidate::parse(*fr.signature, "JP = 1"), f(fr, "SD = 1"));
  ASSERT_TRUE(fv.is_cause);
  EXPECT_EQ(names(*fr.signature, fv.ac2_witness->w_vars), std::vector<std::string>{"BP"});
  EXPECT_FALSE(but_for(fr.settings[0], {var(fr, "JP"), 1}, f(fr, "SD = 1")));

  std::size_t compared = 0;
  for (const auto& name : corpus_names()) {
    auto s = load_corpus(name);
    for (const auto& st : s.settings)
      for (const auto& c : small_candidates(st))
        for (const auto& phi : s.outcomes) {
          ++compared;
          EXPECT_TRUE(agrees_with_naive(st, c, phi)) << name << " " << to_string(phi);
        }
  }
  std::mt19937 rng(44);
  for (int i = 0; i < 100; ++i) {
    auto m = random_model(rng, 4, 2);
    const CausalSetting st{m.model, Context{random_context(rng, 2)}};
    const auto phi = parse_formula(random_formula(rng, 4, 2).text, *m.sig);
    for (const auto& c : small_candidates(st)) {
      ++compared;
      EXPECT_TRUE(agrees_with_naive(st, c, phi)) << "random model " << i;
    }
  }
  EXPECT_GT(compared, 1000u);
}

TEST(Acceptance, Criterion05_LouisPair) {
  auto l1 = load_corpus("louis1");
  EXPECT_TRUE(affect(l1, "bomb", {"D_R"}, l1.policy).intends);
  EXPECT_FALSE(affect(l1, "bomb", {"D_S"}, l1.policy).intends);
  auto l2 = load_corpus("louis2");
  const auto& e = l2.epistemic();
  for (const char* o : {"D_R = 1", "D_S = 1"}) {
    const auto r = intends_outcome(e, action(e, "bomb"), conj(l2, o), l2.policy);
    ASSERT_TRUE(r.intends) << o;
    EXPECT_EQ(names(*l2.signature, r.affect.witness->vars), (std::vector<std::string>{"D_R", "D_S"}));
  }
}

TEST(Acceptance, Criterion06_DanielReferenceSets) {
  auto s = load_corpus("daniel");
  const auto all = affect(s, "p1", {"S"}, ReferencePolicy::all_others());
  ASSERT_TRUE(all.intends);
  EXPECT_EQ(names(*s.signature, all.witness->vars), std::vector<std::string>{"S"});
  EXPECT_FALSE(affect(s, "p1", {"C"}, ReferencePolicy::all_others()).intends);
  const auto def = affect(s, "p1", {"S"}, ReferencePolicy::default_only());
  ASSERT_TRUE(def.intends);
  EXPECT_EQ(names(*s.signature, def.witness->vars), (std::vector<std::string>{"C", "S"}));
}

TEST(Acceptance, Criterion07_LoopPair) {
  auto loop = load_corpus("loop");
  EXPECT_TRUE(intends_outcome(loop.epistemic(), 1, conj(loop, "TH = 1"), loop.policy).intends);
  const auto d = intends_outcome(loop.epistemic(), 1, conj(loop, "D = 1"), loop.policy);
  EXPECT_FALSE(d.intends);
  EXPECT_FALSE(d.inconclusive);
  auto merged = load_corpus("loop_merged");
  EXPECT_TRUE(intends_outcome(merged.epistemic(), 1, conj(merged, "D = 1"), merged.policy).intends);
}

TEST(Acceptance, Criterion08_StudyPair) {
  auto s = load_corpus("study");
  const auto base = affect(s, "s", {"J"}, s.policy);
  EXPECT_FALSE(base.intends);
  EXPECT_FALSE(base.inconclusive);
  auto acc = load_corpus("study_acc");
  const auto r = affect(acc, "s", {"J"}, acc.policy);
  ASSERT_TRUE(r.intends);
  EXPECT_EQ(names(*acc.signature, r.witness->vars), (std::vector<std::string>{"Acc", "J"}));
}

TEST(Acceptance, Criterion09_ShoesPair) {
  auto s = load_corpus("shoes");
  const auto narrow = only(s, {"nothing"});
  EXPECT_TRUE(affect(s, "save_G", {"G"}, narrow).intends);
  EXPECT_FALSE(affect(s, "save_G", {"Shoes"}, narrow).intends);
  const auto wide = only(s, {"nothing", "save_TJ"});
  EXPECT_TRUE(affect(s, "save_G", {"G"}, wide).intends);
  EXPECT_TRUE(affect(s, "save_G", {"Shoes"}, wide).intends);
}

TEST(Acceptance, Criterion10_BobTomMitigation) {
  auto s = load_corpus("bobtom");
  const auto& e = s.epistemic();
  const int nothing = action(e, "nothing"), sacrifice = action(e, "sacrifice");
  EXPECT_EQ(cost(e, sacrifice, s.cost_model), R(100));
  EXPECT_EQ(cost(e, nothing, s.cost_model), R(0));
  const auto phi = f(s, "TA = 0");
  EXPECT_EQ(blame_vs(e, nothing, sacrifice, phi, R(101), s.cost_model), R(1, 101));
  Rational prev = -1;
  for (long long n : {101LL, 200LL, 1000LL}) {
    const auto b = blame_vs(e, nothing, sacrifice, phi, R(n), s.cost_model);
    EXPECT_GE(b, prev);
    prev = b;
  }
  const auto d = delta(e, nothing, sacrifice, phi);
  EXPECT_EQ(d, R(1));
  // the gap to delta is exactly 100/N, so it vanishes as N grows
  for (long long n : {101LL, 200LL, 1000LL, 1000000LL})
    EXPECT_EQ(d - blame_vs(e, nothing, sacrifice, phi, R(n), s.cost_model), R(100, n));
}

TEST(Acceptance, Criterion11_CommonsMonotonicity) {
  const Rational q = R(1, 2);
  const std::vector<Rational> expected{R(1, 2), R(3, 8), R(1, 4)};
  Rational prev = 2;
  for (std::size_t n = 3; n <= 5; ++n) {
    auto s = build(generate_commons(n, 2, q));
    ASSERT_TRUE(s.ok());
    const auto& e = s.epistemic();
    const auto b = blame(e, action(e, "fish"), f(s, "Collapse = 1"), s.n, s.cost_model).overall;
    // C(n-1, 1) q (1-q)^(n-2)
    Rational oracle = static_cast<long long>(n - 1);
    oracle *= q;
    for (std::size_t i = 0; i < n - 2; ++i) oracle *= 1 - q;
    EXPECT_EQ(b, oracle) << "n=" << n;
    EXPECT_EQ(b, expected[n - 3]) << "n=" << n;
    EXPECT_LE(b, prev);
    prev = b;
  }
}

TEST(Acceptance, Criterion12_PraiseClamping) {
  auto s = load_corpus("rescue");
  const auto& e = s.epistemic();
  const int rescue = action(e, "rescue");
  const auto p = praise(e, rescue, f(s, "Saved = 1"), s.m, s.policy, s.cost_model);
  EXPECT_EQ(p.raw, R(53, 50));
  EXPECT_EQ(p.value, R(1));
  const auto u = praise(e, rescue, f(s, "Saved = 0"), s.m, s.policy, s.cost_model);
  EXPECT_FALSE(u.intended);
  EXPECT_EQ(u.value, R(0));
}

TEST(Acceptance, Criterion13_PropertySuites) {
  const std::size_t n = 1000;
  for (const auto& [label, r] : std::vector<std::pair<std::string, SuiteResult>>{
           {"delta in [0,1], delta(a,a)=0", delta_bounds_suite(n, 101)},
           {"db <= delta", blame_below_delta_suite(n, 102)},
           {"prob(phi) + prob(!phi) = 1", prob_complement_suite(n, 103)},
           {"solve = fixpoint oracle", solve_oracle_suite(n, 104)},
           {"but_for => part of cause", but_for_suite(n, 105)},
           {"witnesses replay", witness_suite(n, 106)}}) {
    EXPECT_GE(r.cases, n) << label;
    EXPECT_EQ(r.failures, 0u) << label << ": " << r.first_failure;
  }
}

TEST(Acceptance, Criterion14_DeterministicJson) {
  std::vector<std::string> queries;
  for (const auto& name : corpus_names()) {
    auto s = load_corpus(name);
    const auto file = scenario_path(name + ".scn.json");
    queries.push_back("--json validate " + file);
    const auto& e = s.epistemic();
    for (int a = 0; a < static_cast<int>(e.action_count()); ++a)
      queries.push_back("--json report " + file + " --action " + e.action_name(a));
    for (const auto& phi : s.outcomes)
      queries.push_back("--json eval " + file + " --setting 0 --formula '" + to_string(phi) + "'");
  }
  queries.push_back("--json cause " + scenario_path("rocks.scn.json") + " --setting 0 --cand ST=1 --outcome BS=1");
  queries.push_back("--json cause " + scenario_path("frankfurt.scn.json") + " --setting 0 --cand JP=1 --outcome SD=1");
  for (const auto& q : queries) {
    const auto first = run_cli(q);
    ASSERT_EQ(first.code, 0) << q;
    ASSERT_FALSE(first.out.empty()) << q;
    for (int k = 0; k < 2; ++k) EXPECT_EQ(run_cli(q).out, first.out) << q;
  }
}

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  auto& listeners = ::testing::UnitTest::GetInstance()->listeners();
  delete listeners.Release(listeners.default_result_printer());
  listeners.Append(new CriterionPrinter);
  return RUN_ALL_TESTS();
}
