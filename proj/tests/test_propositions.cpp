#include <gtest/gtest.h>

#include <cmath>

#include "rcmi/propositions.hpp"

using namespace rcmi;

TEST(Propositions, ExactIdentitiesOnNarrowStrips) {
  for (int w : {1, 2, 3, 5}) {
    for (double theta : {0.2, 0.4, 0.8}) {
      const auto a = analyze_row_process(w, theta, 3);
      for (const auto& c : exact_proposition_checks(a)) EXPECT_TRUE(c.pass()) << w << " " << theta << " " << c.name;
    }
  }
}

TEST(Propositions, RateOrderingsAndSigns) {
  const auto a = analyze_row_process(5, 0.4, 3);
  EXPECT_LT(a.rate_2m, a.h_inf);
  EXPECT_LT(a.h_inf, a.rate_1m);
  EXPECT_LT(a.rate_1m, a.rate_0m);
  EXPECT_GT(a.div_0m, 0.0);
  EXPECT_GT(a.div_1m, 0.0);
  EXPECT_GT(a.theta0, 0.4);
}

TEST(Propositions, ZeroCouplingHasNoRedundancy) {
  const auto a = analyze_row_process(4, 0.0, 2);
  EXPECT_NEAR(a.rate_0m, 1.0, 1e-12);
  EXPECT_NEAR(a.rate_2m, 1.0, 1e-12);
  EXPECT_NEAR(a.div_0m, 0.0, 1e-12);
  EXPECT_NEAR(a.info_adjacent, 0.0, 1e-12);
}

TEST(Propositions, ChainRuleEqualDistributionsGiveZero) {
  Rng rng(1);
  auto ch = random_chain(rng, 2);
  ch.q_context = ch.p_context;
  ch.q_table = ch.p_table;
  EXPECT_NEAR(chain_divergence_direct(ch), 0.0, 1e-15);
  EXPECT_NEAR(chain_divergence_decomposed(ch), 0.0, 1e-15);
}

TEST(Propositions, ChainRuleOnRandomChains) {
  for (const auto& c : chain_rule_checks(77, 40, 5)) EXPECT_TRUE(c.pass()) << c.name << " gap " << c.gap();
}

// A hand-sized case: two binary variables, q ignores the context.
TEST(Propositions, ChainRuleHandExample) {
  RandomChain ch;
  ch.alphabet = {2, 2};
  ch.p_context = {{}, {0}};
  ch.q_context = {{}, {}};
  ch.p_table = {{0.5, 0.5}, {0.9, 0.1, 0.2, 0.8}};
  ch.q_table = {{0.5, 0.5}, {0.5, 0.5}};
  // D = 1 - mean over x0 of h2(p(x1|x0))
  const double h = 0.5 * (-0.9 * std::log2(0.9) - 0.1 * std::log2(0.1)) + 0.5 * (-0.2 * std::log2(0.2) - 0.8 * std::log2(0.8));
  EXPECT_NEAR(chain_divergence_direct(ch), 1.0 - h, 1e-14);
  EXPECT_NEAR(chain_divergence_decomposed(ch), 1.0 - h, 1e-14);
}
