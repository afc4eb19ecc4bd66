// Copyright 2026 The FPDM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fpdm/error.hpp"
#include "fpdm/mechanisms.hpp"
#include "fpdm/network.hpp"
#include "fpdm/pricing.hpp"
#include "fpdm/verification.hpp"
#include "support.hpp"

namespace fpdm {
namespace {

using testing::referral_tree;

ValuationProfile referral_values() {
  return ValuationProfile::of(testing::kReferralValues);
}

double p_direct(double x) {
  return x == 0.0 ? std::exp(-1.0) : std::pow(1.0 / (1.0 + x), 1.0 / x);
}

MechanismConfig literal(double alpha = 0.1) {
  MechanismConfig c;
  c.alpha = alpha;
  c.reward_mode = RewardMode::kLiteral;
  return c;
}

std::size_t depth_by_walk(const SocialTree& t, NodeId n) {
  std::size_t d = 0;
  for (; n != kSeller; n = t.parent(n)) ++d;
  return d;
}

TEST_SUITE("mechanisms") {

TEST_CASE("referral example outcome under both reward rules") {
  const SocialTree tree = referral_tree();
  const ActionProfile truthful = ActionProfile::truthful(tree);
  const double p_w = p_direct(5);
  const double p_base = p_direct(3);
  const double reward = (p_w - p_base) * 0.1 * 0.5;

  for (const MechanismConfig& cfg : {literal(), MechanismConfig{}}) {
    const OutcomeDistribution dist =
        run_fpdm(tree, truthful, referral_values(), cfg, 7);
    REQUIRE(dist.outcomes.size() == 1);
    const Outcome& o = dist.realized();
    REQUIRE(o.winner.has_value());
    CHECK(*o.winner == 5);
    CHECK(o.winning_branch == 1);
    CHECK(o.price == doctest::Approx(p_w).epsilon(1e-15));
    CHECK(std::abs(o.price - 0.699) < 5e-4);
    CHECK(o.payments[5] == o.price);
    CHECK(o.payments[1] == doctest::Approx(-reward).epsilon(1e-13));
    CHECK(std::abs(o.payments[1] + 0.0034433) < 1e-7);
    for (NodeId j : {2, 3, 4, 6, 7, 8, 9, 10}) CHECK(o.payments[j] == 0.0);
    CHECK(o.gross_revenue == o.price);
    CHECK(o.net_revenue == doctest::Approx(o.price - reward).epsilon(1e-14));

    const UtilityVector u = utilities(o, referral_values());
    CHECK(u[5] == doctest::Approx(0.8 - p_w).epsilon(1e-14));
    CHECK(std::abs(u[5] - 0.101) < 5e-4);
    CHECK(std::abs(u[1] - 0.00344) < 1e-5);
    for (NodeId j : {2, 3, 4, 6, 7, 8, 9, 10}) CHECK(u[j] == 0.0);

    REQUIRE(o.trace.visits.size() == 1);
    CHECK(o.trace.visits[0].root == 1);
    CHECK(o.trace.visits[0].claimers == std::vector<NodeId>{5, 6});
    CHECK(o.trace.shallowest == std::vector<NodeId>{5, 6});
    CHECK(o.trace.most_children == std::vector<NodeId>{5});
  }
}

TEST_CASE("hiding buyer five hands the item to buyer six") {
  const SocialTree tree = referral_tree();
  ActionProfile a = ActionProfile::truthful(tree);
  a.set(1, std::vector<NodeId>{4, 6});
  a = canonicalize(tree, a);
  ValuationProfile v = referral_values();
  v.clear(5);
  v.clear(10);
  const Outcome o = run_fpdm(tree, a, v, MechanismConfig{}, 1).realized();
  CHECK(o.winner == 6);
  // Branch one shrinks to three buyers, but its outside count is still five.
  CHECK(o.price == doctest::Approx(p_direct(5)).epsilon(1e-15));
  CHECK(o.payments[5] == 0.0);
  CHECK(o.payments[10] == 0.0);
}

TEST_CASE("the winner hiding her own child keeps her price") {
  const SocialTree tree = referral_tree();
  ActionProfile a = ActionProfile::truthful(tree);
  a.set(5, std::vector<NodeId>{});
  a = canonicalize(tree, a);
  const Outcome o = run_fpdm(tree, a, referral_values(), MechanismConfig{}, 1).realized();
  CHECK(o.winner == 5);
  CHECK(o.price == doctest::Approx(p_direct(5)).epsilon(1e-15));
  const auto u = utilities(o, referral_values());
  CHECK(u[5] == doctest::Approx(0.8 - p_direct(5)).epsilon(1e-14));
}

TEST_CASE("lone chain sells at the limit price") {
  const SocialTree tree = testing::chains({3});
  const ActionProfile truthful = ActionProfile::truthful(tree);
  const ValuationProfile v{0.1, 0.2, 0.95};
  const double p_w = std::exp(-1.0);

  const Outcome clamped = run_fpdm(tree, truthful, v, MechanismConfig{}, 1).realized();
  CHECK(clamped.winner == 3);
  CHECK(clamped.price == doctest::Approx(p_w).epsilon(1e-15));
  CHECK(std::abs(clamped.price - 0.36788) < 5e-6);
  CHECK(clamped.payments[1] == 0.0);
  CHECK(clamped.payments[2] == 0.0);
  CHECK_FALSE(std::signbit(clamped.payments[1]));
  CHECK(clamped.net_revenue == clamped.gross_revenue);

  const Outcome lit = run_fpdm(tree, truthful, v, literal(), 1).realized();
  CHECK(lit.winner == 3);
  CHECK(lit.payments[1] == doctest::Approx((0.5 - p_w) * 0.1 * 0.5).epsilon(1e-14));
  CHECK(lit.payments[2] == doctest::Approx((0.5 - p_w) * 0.1 * 0.25).epsilon(1e-14));
  const auto u = utilities(lit, v);
  CHECK(u[1] < 0.0);
  CHECK(u[2] < 0.0);
  CHECK(lit.net_revenue > lit.gross_revenue);
}

TEST_CASE("nothing sells when every value is below its price") {
  const SocialTree tree = referral_tree();
  const ValuationProfile low = ValuationProfile::of(std::vector<double>(10, 0.2));
  const Outcome o = run_fpdm(tree, ActionProfile::truthful(tree), low, MechanismConfig{}, 1).realized();
  CHECK_FALSE(o.winner.has_value());
  CHECK(o.gross_revenue == 0.0);
  CHECK(o.net_revenue == 0.0);
  CHECK(o.trace.visits.size() == 3);
  for (double p : o.payments) CHECK(p == 0.0);
  for (double u : utilities(o, low)) CHECK(u == 0.0);
}

TEST_CASE("weak threshold admits a buyer valued exactly at the price") {
  const SocialTree tree = testing::chains({1, 1});
  const double p = p_direct(1);
  const ValuationProfile v{p, 0.1};
  const Outcome o = run_fpdm(tree, ActionProfile::truthful(tree), v, MechanismConfig{}, 1).realized();
  CHECK(o.winner == 1);
  CHECK(utilities(o, v)[1] == 0.0);
  MechanismConfig strict;
  strict.threshold = ClaimThreshold::kStrict;
  const Outcome s = run_fpdm(tree, ActionProfile::truthful(tree), v, strict, 1).realized();
  CHECK_FALSE(s.winner.has_value());
}

TEST_CASE("baseline sale among the seller's neighbours") {
  const std::vector<NeighbourValuation> buyers{{1, 0.6}, {2, 0.7}, {3, 0.7}};
  const double p = optimal_price(3);
  MechanismConfig expect;
  expect.tie_mode = TieMode::kExpectation;
  const OutcomeDistribution dist = run_baseline(buyers, p, expect, 0);
  REQUIRE(dist.outcomes.size() == 2);
  CHECK(dist.outcomes[0].probability == 0.5);
  CHECK(dist.outcomes[0].outcome.winner == 2);
  CHECK(dist.outcomes[1].outcome.winner == 3);

  int wins_2 = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Outcome o = run_baseline(buyers, p, MechanismConfig{}, seed).realized();
    REQUIRE(o.winner.has_value());
    CHECK((*o.winner == 2 || *o.winner == 3));
    CHECK(o.price == p);
    if (*o.winner == 2) ++wins_2;
    CHECK(run_baseline(buyers, p, MechanismConfig{}, seed).realized().winner == o.winner);
  }
  CHECK(wins_2 > 60);
  CHECK(wins_2 < 140);

  const std::vector<NeighbourValuation> poor{{1, 0.1}, {2, 0.2}};
  CHECK_FALSE(run_baseline(poor, 0.5, MechanismConfig{}, 0).realized().winner);

  const std::vector<NeighbourValuation> one{{1, 0.9}};
  const OutcomeDistribution single = run_baseline(one, 0.5, MechanismConfig{}, 0);
  CHECK(single.realized().winner == 1);
  CHECK(single.realized().payments[1] == 0.5);
  CHECK(single.realized().gross_revenue == 0.5);
}

TEST_CASE("baseline on a tree ignores everyone beyond the neighbours") {
  const Outcome o = run_baseline(referral_tree(), referral_values(), MechanismConfig{}, 3).realized();
  REQUIRE(o.winner.has_value());
  CHECK((*o.winner == 2 || *o.winner == 3));
  CHECK(o.price == doctest::Approx(p_direct(3)).epsilon(1e-15));
  CHECK(o.payments.size() == 11);
}

TEST_CASE("input validation") {
  MechanismConfig bad;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  ValuationProfile v(3);
  CHECK_THROWS_AS(v.set(1, 1.2), Error);
  CHECK_THROWS_AS(v.set(1, -0.1), Error);
  CHECK_THROWS_AS(v.set(4, 0.5), Error);
  try {
    (void)v.at(2);
    FAIL("expected missing valuation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingValuation);
  }
  const SocialTree tree = referral_tree();
  ValuationProfile partial = referral_values();
  partial.clear(10);
  CHECK_THROWS_AS(run_fpdm(tree, ActionProfile::truthful(tree), partial, MechanismConfig{}, 1),
                  Error);
}

TEST_CASE("seeded ties are reproducible and expectation ties are uniform") {
  const SocialTree tree = testing::star(4);
  const ValuationProfile v{0.9, 0.95, 0.99, 0.1};
  MechanismConfig expect;
  expect.tie_mode = TieMode::kExpectation;
  const auto dist = run_fpdm(tree, ActionProfile::truthful(tree), v, expect, 0);
  // Singletons are visited in root order, so only buyer 1's branch is consulted.
  REQUIRE(dist.outcomes.size() == 1);
  CHECK(dist.realized().winner == 1);

  const SocialTree cherry = build_tree(std::vector<Edge>{{0, 1}, {1, 2}, {1, 3}, {0, 4}});
  const ValuationProfile w{0.1, 0.95, 0.97, 0.0};
  const auto tied = run_fpdm(cherry, ActionProfile::truthful(cherry), w, expect, 0);
  REQUIRE(tied.outcomes.size() == 2);
  CHECK(tied.outcomes[0].probability + tied.outcomes[1].probability == 1.0);
  const auto seeded = run_fpdm(cherry, ActionProfile::truthful(cherry), w, MechanismConfig{}, 99);
  const auto again = run_fpdm(cherry, ActionProfile::truthful(cherry), w, MechanismConfig{}, 99);
  CHECK(seeded.realized().winner == again.realized().winner);
  const auto eu = expected_utilities(tied, w);
  CHECK(eu[1] == doctest::Approx(0.5 * -tied.outcomes[0].outcome.payments[1] +
                                 0.5 * -tied.outcomes[1].outcome.payments[1]));
}

TEST_CASE("allocation and payment properties on every small instance") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const SocialTree& tree : enumerate_rooted_trees_up_to(5)) {
    const std::size_t k = tree.buyer_count();
    for (const ActionProfile& actions : enumerate_action_profiles(tree)) {
      const SocialTree eff = effective_tree(tree, actions);
      const BranchDecomposition d = branches(eff);
      const double p_base = p_direct(static_cast<double>(tree.seller_children().size()));
      for (int sample = 0; sample < 20; ++sample) {
        ValuationProfile v(k);
        for (std::size_t i = 1; i <= k; ++i) v.set(static_cast<NodeId>(i), u(g));
        for (RewardMode mode : {RewardMode::kClamped, RewardMode::kLiteral}) {
          MechanismConfig cfg;
          cfg.alpha = sample % 3 == 0 ? 1.0 : 0.1;
          cfg.reward_mode = mode;
          cfg.tie_mode = TieMode::kExpectation;
          const OutcomeDistribution dist = run_fpdm(tree, actions, v, cfg, 0);
          double total_probability = 0.0;
          for (const WeightedOutcome& wo : dist.outcomes) {
            total_probability += wo.probability;
            const Outcome& o = wo.outcome;

            // Oracle: first branch with a claimer, then depth, then children.
            std::optional<std::size_t> first;
            std::vector<NodeId> claimers;
            for (std::size_t b = 0; b < d.branches.size() && !first; ++b) {
              const double price = p_direct(static_cast<double>(d.branches[b].outside));
              for (NodeId m : d.branches[b].members) {
                if (v.at(m) >= price) claimers.push_back(m);
              }
              if (!claimers.empty()) first = b;
            }
            if (!first) {
              CHECK_FALSE(o.winner.has_value());
              for (double p : o.payments) CHECK(p == 0.0);
              continue;
            }
            REQUIRE(o.winner.has_value());
            const NodeId w = *o.winner;
            CHECK(eff.contains(w));
            CHECK(o.winning_branch == d.branches[*first].root);
            CHECK(std::find(claimers.begin(), claimers.end(), w) != claimers.end());
            CHECK(v.at(w) >= o.price);
            for (NodeId c : claimers) {
              const std::size_t dc = depth_by_walk(eff, c);
              const std::size_t dw = depth_by_walk(eff, w);
              CHECK(dw <= dc);
              if (dc == dw) CHECK(eff.children(w).size() >= eff.children(c).size());
            }

            const std::vector<NodeId> path = path_to(eff, w);
            double path_sum = 0.0;
            for (std::size_t j = 1; j <= k; ++j) {
              const auto node = static_cast<NodeId>(j);
              if (node == w) {
                CHECK(o.payments[j] == o.price);
                continue;
              }
              const bool on_path = std::find(path.begin(), path.end(), node) != path.end();
              if (!on_path) {
                CHECK(o.payments[j] == 0.0);
                continue;
              }
              double expected = (p_base - o.price) * cfg.alpha *
                                std::pow(0.5, static_cast<double>(depth_by_walk(eff, node)));
              if (mode == RewardMode::kClamped) expected = std::min(0.0, expected);
              CHECK(o.payments[j] == doctest::Approx(expected).epsilon(1e-12));
              path_sum += o.payments[j];
            }
            CHECK(o.gross_revenue == o.price);
            CHECK(o.net_revenue == doctest::Approx(o.gross_revenue + path_sum).epsilon(1e-12));
            if (mode == RewardMode::kClamped) {
              CHECK(o.net_revenue <= o.gross_revenue);
              for (double x : utilities(o, v)) CHECK(x >= 0.0);
            }
          }
          CHECK(total_probability == doctest::Approx(1.0).epsilon(1e-15));
        }
      }
    }
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace fpdm
