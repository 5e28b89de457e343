#include "support.hpp"

#include <gtest/gtest.h>

using namespace culpa;
using namespace testing_support;

namespace {

Rational R(long long p, long long q = 1) { return Rational(p, q); }

// Brute force over settings straight from the document probabilities.
Rational oracle_prob(const LoadedScenario& s, const CausalFormula& phi) {
  Rational total = 0;
  for (std::size_t i = 0; i < s.settings.size(); ++i)
    if (holds(s.settings[i], phi)) total += s.probabilities[i];
  return total;
}

}  // namespace

TEST(Prob, SixVictims) {
  auto s = load_corpus("six");
  const auto& e = s.epistemic();
  EXPECT_EQ(prob(e, f(s, "[A <- 1] O6 = 1")), R(1, 5));
  EXPECT_EQ(prob(e, f(s, "true")), R(1));
  EXPECT_EQ(prob_under_action(e, 1, f(s, "O6 = 1")), R(1, 5));
  EXPECT_EQ(prob(e, f(s, "[A <- 1] O6 = 1")), oracle_prob(s, f(s, "[A <- 1] O6 = 1")));
}

TEST(Prob, FrankfurtHalf) {
  auto s = load_corpus("frankfurt");
  EXPECT_EQ(prob(s.epistemic(), f(s, "[JP <- 0] SD = 1")), R(1, 2));
}

TEST(Delta, Examples) {
  auto t = load_corpus("trolley");
  EXPECT_EQ(delta(t.epistemic(), 1, 0, f(t, "O2 = 1")), R(1));
  EXPECT_EQ(delta(t.epistemic(), 0, 1, f(t, "O2 = 1")), R(0));
  auto s = load_corpus("six");
  EXPECT_EQ(delta(s.epistemic(), 0, 1, f(s, "O6 = 1")), R(4, 5));
  EXPECT_EQ(delta(s.epistemic(), 0, 1, f(s, "O5 = 1")), R(0));
  for (int a = 0; a < 2; ++a) EXPECT_EQ(delta(s.epistemic(), a, a, f(s, "O6 = 1")), R(0));
  EXPECT_THROW(delta(s.epistemic(), 0, 2, f(s, "O6 = 1")), Error);
  EXPECT_THROW(delta(s.epistemic(), 0, 1, f(s, "[A <- 0] O6 = 1")), Error);
}

TEST(ExpectedUtility, Daniel) {
  auto s = load_corpus("daniel");
  const auto& e = s.epistemic();
  EXPECT_EQ(expected_utility(e, action(e, "p1")), R(8));
  EXPECT_EQ(expected_utility(e, action(e, "p2")), R(6));
  EXPECT_EQ(expected_utility(e, action(e, "nothing")), R(0));
}

TEST(ExpectedUtility, Shoes) {
  auto s = load_corpus("shoes");
  const auto& e = s.epistemic();
  EXPECT_EQ(expected_utility(e, action(e, "save_TJ")), R(17, 2));
  EXPECT_EQ(expected_utility(e, action(e, "save_G")), R(9));
}

TEST(ExpectedUtility, ConstantUtilityIsFlat) {
  auto s = load_corpus("daniel");
  const auto e = s.epistemic().with_utility(UtilityFunction({{f(s, "true"), R(3)}}));
  for (int a = 0; a < 3; ++a) EXPECT_EQ(expected_utility(e, a), R(3));
}

TEST(PinnedExpectedUtility, Daniel) {
  auto s = load_corpus("daniel");
  const auto& e = s.epistemic();
  const std::vector<std::size_t> pins{var(s, "S"), var(s, "C")};
  EXPECT_EQ(pinned_expected_utility(e, action(e, "nothing"), pins, action(e, "p1")), R(9));
}

TEST(PinnedExpectedUtility, StudyPropagatesThroughG) {
  auto s = load_corpus("study");
  const auto& e = s.epistemic();
  const std::vector<std::size_t> pins{var(s, "G")};
  EXPECT_EQ(pinned_expected_utility(e, action(e, "ns"), pins, action(e, "s")), R(20));
}

TEST(PinnedExpectedUtility, NoPinsIsPlainExpectedUtility) {
  for (const auto& name : corpus_names()) {
    auto s = load_corpus(name);
    const auto& e = s.epistemic();
    for (int a = 0; a < static_cast<int>(e.action_count()); ++a)
      for (int b = 0; b < static_cast<int>(e.action_count()); ++b)
        EXPECT_EQ(pinned_expected_utility(e, b, std::span<const std::size_t>{}, a), expected_utility(e, b)) << name;
  }
}

TEST(PinnedExpectedUtility, RejectsPinningTheAction) {
  auto s = load_corpus("daniel");
  const std::vector<std::size_t> pins{var(s, "A")};
  EXPECT_THROW(pinned_expected_utility(s.epistemic(), 0, pins, 1), Error);
}

TEST(EpistemicState, ConstructionChecks) {
  auto s = load_corpus("six");
  const auto& e = s.epistemic();
  auto ws = e.settings();
  EXPECT_THROW(EpistemicState(ws, e.utility(), 2), Error);
  EXPECT_THROW(EpistemicState({}, e.utility(), 0), Error);
  auto halved = ws;
  halved[0].probability = R(1, 10);
  EXPECT_THROW(EpistemicState(halved, e.utility(), 0), Error);
  auto zero = ws;
  zero[0].probability = 0;
  zero[1].probability = 1;
  EXPECT_THROW(EpistemicState(zero, e.utility(), 0), Error);
  auto other = load_corpus("trolley");
  auto mixed = ws;
  mixed[1].setting = other.settings[0];
  EXPECT_THROW(EpistemicState(mixed, e.utility(), 0), Error);
}

TEST(Epistemic, ExactArithmeticIsRepeatable) {
  for (const auto& name : corpus_names()) {
    auto a = load_corpus(name);
    auto b = load_corpus(name);
    for (int x = 0; x < static_cast<int>(a.epistemic().action_count()); ++x)
      EXPECT_EQ(expected_utility(a.epistemic(), x), expected_utility(b.epistemic(), x));
  }
}

TEST(Epistemic, RandomStatesSatisfyIdentities) {
  std::mt19937 rng(77);
  for (int i = 0; i < 300; ++i) {
    auto r = random_state(rng, 1 + i % 5, 2);
    const auto& e = *r.state;
    const auto phi = parse_formula(random_formula(rng, r.base.n_endo, 2).text, *r.base.sig);
    EXPECT_EQ(prob(e, phi) + prob(e, phi.negated_body()), R(1));
    for (int a = 0; a < 2; ++a) {
      const auto d = delta(e, a, 1 - a, phi);
      EXPECT_GE(d, 0);
      EXPECT_LE(d, 1);
      if (d > 0) {
        EXPECT_EQ(delta(e, 1 - a, a, phi), 0);
      }
      // doubling every weight doubles the expected utility
      EXPECT_EQ(expected_utility(e.with_utility(e.utility().scaled(2)), a), 2 * expected_utility(e, a));
    }
    std::vector<std::size_t> rest;
    for (std::size_t v = 1; v < r.base.n_endo; ++v) rest.push_back(v);
    // with everything but A pinned, A only matters through the utility itself
    if (!e.utility().mentions(0)) {
      EXPECT_EQ(pinned_expected_utility(e, 0, rest, 1), pinned_expected_utility(e, 1, rest, 1));
    }
  }
}
