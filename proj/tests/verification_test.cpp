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
#include <functional>
#include <limits>
#include <set>
#include <string>
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

// Independent AHU encoding over a parent array (index 0 is the root).
std::string ahu(const std::vector<int>& parent, int node) {
  std::vector<std::string> kids;
  for (std::size_t c = 1; c < parent.size(); ++c) {
    if (parent[c] == node) kids.push_back(ahu(parent, static_cast<int>(c)));
  }
  std::sort(kids.begin(), kids.end());
  std::string out = "(";
  for (const auto& k : kids) out += k;
  return out + ")";
}

// Every labelled tree whose parents precede their children covers each
// isomorphism class at least once.
std::set<std::string> brute_force_shapes(int buyers) {
  std::set<std::string> shapes;
  std::vector<int> parent(buyers + 1, 0);
  parent[0] = -1;
  std::function<void(int)> rec = [&](int i) {
    if (i > buyers) {
      shapes.insert(ahu(parent, 0));
      return;
    }
    for (int p = 0; p < i; ++p) {
      parent[i] = p;
      rec(i + 1);
    }
  };
  rec(1);
  return shapes;
}

std::string shape_of(const SocialTree& t) {
  std::vector<int> parent(t.buyer_count() + 1, -1);
  for (std::size_t i = 1; i <= t.buyer_count(); ++i) {
    parent[i] = t.parent(static_cast<NodeId>(i));
  }
  return ahu(parent, 0);
}

MechanismConfig config_for(double alpha, RewardMode mode) {
  MechanismConfig c;
  c.alpha = alpha;
  c.reward_mode = mode;
  c.tie_mode = TieMode::kExpectation;
  return c;
}

// Full-grid IR count through the public mechanism, one profile at a time.
std::pair<std::uint64_t, std::uint64_t> naive_ir(const SocialTree& tree,
                                                 const MechanismConfig& cfg) {
  const auto points = grid_points(ValuationGrid{0.1});
  const std::size_t k = tree.buyer_count();
  const ActionProfile truthful = ActionProfile::truthful(tree);
  std::uint64_t profiles = 0, violations = 0;
  std::vector<std::size_t> digit(k, 0);
  while (true) {
    ValuationProfile v(k);
    for (std::size_t i = 0; i < k; ++i) v.set(static_cast<NodeId>(i + 1), points[digit[i]]);
    ++profiles;
    const OutcomeDistribution dist = run_fpdm(tree, truthful, v, cfg, 0);
    for (std::size_t i = 1; i <= k; ++i) {
      double lowest = std::numeric_limits<double>::infinity();
      for (const auto& wo : dist.outcomes) lowest = std::min(lowest, utilities(wo.outcome, v)[i]);
      if (lowest < 0.0) ++violations;
    }
    std::size_t pos = 0;
    while (pos < k && ++digit[pos] == points.size()) digit[pos++] = 0;
    if (pos == k) break;
  }
  return {profiles, violations};
}

TEST_SUITE("verification") {

TEST_CASE("rooted tree counts") {
  const int expected[] = {1, 2, 4, 9, 20, 48};
  std::size_t cumulative = 0;
  for (int n = 1; n <= 6; ++n) {
    const auto trees = enumerate_rooted_trees(n);
    CHECK(trees.size() == static_cast<std::size_t>(expected[n - 1]));
    std::set<std::string> canon, shapes;
    for (const SocialTree& t : trees) {
      CHECK(t.buyer_count() == static_cast<std::size_t>(n));
      canon.insert(canonical_form(t));
      shapes.insert(shape_of(t));
    }
    CHECK(canon.size() == trees.size());
    CHECK(shapes == brute_force_shapes(n));
    cumulative += trees.size();
  }
  CHECK(enumerate_rooted_trees_up_to(6).size() == cumulative);
  CHECK(cumulative == 84);
  CHECK(enumerate_rooted_trees(9).size() == 719);
}

TEST_CASE("canonical form ignores labelling") {
  const SocialTree a = build_tree(std::vector<Edge>{{0, 1}, {0, 2}, {1, 3}});
  const SocialTree b = build_tree(std::vector<Edge>{{0, 1}, {0, 2}, {2, 3}});
  const SocialTree c = build_tree(std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}});
  CHECK(canonical_form(a) == canonical_form(b));
  CHECK(canonical_form(a) != canonical_form(c));
}

TEST_CASE("offset valuation grid") {
  const auto points = grid_points(ValuationGrid{0.1});
  REQUIRE(points.size() == 10);
  CHECK(points.front() == doctest::Approx(0.05));
  CHECK(points.back() == doctest::Approx(0.95));
  CHECK_THROWS_AS(grid_points(ValuationGrid{0.0}), Error);
}

TEST_CASE("class-reduced IR check equals the full grid") {
  for (const SocialTree& tree : enumerate_rooted_trees_up_to(4)) {
    for (RewardMode mode : {RewardMode::kClamped, RewardMode::kLiteral}) {
      for (double alpha : {0.0, 0.1, 1.0}) {
        const MechanismConfig cfg = config_for(alpha, mode);
        const PropertyReport r = check_ir(tree, ValuationGrid{0.1}, cfg);
        const auto [profiles, violations] = naive_ir(tree, cfg);
        CHECK(r.instances == profiles);
        CHECK(r.violation_count == violations);
        if (mode == RewardMode::kClamped) CHECK(r.violation_count == 0);
      }
    }
  }
}

TEST_CASE("IR on the referral example tree") {
  const SocialTree tree = testing::referral_tree();
  for (RewardMode mode : {RewardMode::kClamped, RewardMode::kLiteral}) {
    const PropertyReport r = check_ir(tree, ValuationGrid{0.1}, config_for(0.1, mode));
    CHECK(r.instances == 10000000000ULL);
    // Every branch price exceeds the baseline price here, so even the literal
    // rule only pays rewards out.
    CHECK(r.violation_count == 0);
  }
}

TEST_CASE("literal rewards break IR when the winning price is below baseline") {
  const SocialTree tree = testing::chains({3, 1, 1, 1, 1});
  CHECK(optimal_price(4) < optimal_price(5));
  const PropertyReport r =
      check_ir(tree, ValuationGrid{0.1}, config_for(0.1, RewardMode::kLiteral));
  CHECK(r.violation_count > 0);
  REQUIRE_FALSE(r.violations.empty());
  for (const Violation& v : r.violations) {
    CHECK(v.truthful_utility < 0.0);
    const ReplayedUtilities again = replay(v);
    CHECK(again.truthful == v.truthful_utility);
    CHECK(again.deviant == v.deviant_utility);
  }
  CHECK(check_ir(tree, ValuationGrid{0.1}, config_for(0.1, RewardMode::kClamped))
            .violation_count == 0);
}

TEST_CASE("sampled IR is deterministic") {
  const SocialTree tree = testing::chains({3, 1, 1, 1, 1});
  const MechanismConfig cfg = config_for(1.0, RewardMode::kLiteral);
  CheckOptions one, four;
  four.workers = 4;
  const PropertyReport a = check_ir(tree, ValuationSample{5000, 3}, cfg, one);
  const PropertyReport b = check_ir(tree, ValuationSample{5000, 3}, cfg, four);
  CHECK(a.instances == 5000);
  CHECK(a.violation_count == b.violation_count);
  REQUIRE(a.violations.size() == b.violations.size());
  for (std::size_t i = 0; i < a.violations.size(); ++i) {
    CHECK(a.violations[i].key == b.violations[i].key);
  }
}

TEST_CASE("IC on a two-buyer chain") {
  const SocialTree tree = testing::chains({2});
  const PropertyReport clamped =
      check_ic(tree, ValuationGrid{0.1}, config_for(0.1, RewardMode::kClamped),
               IcScope::kUnilateral);
  CHECK(clamped.instances == 100);
  CHECK(clamped.deviations == 200);  // buyer 1 hides buyer 2, buyer 2 opts out
  CHECK(clamped.violation_count == 0);
  CHECK(clamped.invariant_failure_count == 0);
  REQUIRE(clamped.verdicts.size() == 2);
  CHECK(clamped.verdicts[0].profitable == 0);

  // Literal rule: buyer 1 pays a positive reward when buyer 2 wins, which
  // happens when v_1 misses 1/e and v_2 meets it (4 x 6 grid points).
  for (double alpha : {0.0, 0.1, 1.0}) {
    const PropertyReport lit = check_ic(
        tree, ValuationGrid{0.1}, config_for(alpha, RewardMode::kLiteral),
        IcScope::kUnilateral);
    CHECK(lit.violation_count == (alpha == 0.0 ? 0U : 24U));
    CHECK(lit.invariant_failure_count == 0);
    for (const Violation& v : lit.violations) {
      CHECK(v.buyer == 1);
      CHECK(v.valuations.at(1) < std::exp(-1.0));
      CHECK(v.valuations.at(2) >= std::exp(-1.0));
      const ReplayedUtilities again = replay(v);
      CHECK(again.truthful == v.truthful_utility);
      CHECK(again.deviant == v.deviant_utility);
    }
  }
}

TEST_CASE("a star has nothing to deviate with") {
  const PropertyReport r =
      check_ic(testing::star(4), ValuationGrid{0.1}, config_for(0.1, RewardMode::kClamped),
               IcScope::kUnilateral);
  CHECK(r.deviations == 0);
  CHECK(r.holds());
}

TEST_CASE("IC sub-invariants hold on every small tree") {
  for (const SocialTree& tree : enumerate_rooted_trees_up_to(4)) {
    for (RewardMode mode : {RewardMode::kClamped, RewardMode::kLiteral}) {
      for (IcScope scope : {IcScope::kUnilateral, IcScope::kFull}) {
        const PropertyReport r =
            check_ic(tree, ValuationGrid{0.25}, config_for(0.5, mode), scope);
        CHECK(r.invariant_failure_count == 0);
        if (mode == RewardMode::kClamped && scope == IcScope::kUnilateral) {
          CHECK(r.violation_count == 0);
        }
        for (const Violation& v : r.violations) {
          const ReplayedUtilities again = replay(v);
          CHECK(again.truthful == v.truthful_utility);
          CHECK(again.deviant == v.deviant_utility);
          CHECK(v.deviant_utility > v.truthful_utility);
        }
      }
    }
  }
}

TEST_CASE("scope limits") {
  const SocialTree seven = testing::chains({7});
  try {
    check_ic(seven, ValuationGrid{0.5}, MechanismConfig{}, IcScope::kFull);
    FAIL("expected scope refusal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kScopeTooLarge);
  }
  CheckOptions tiny;
  tiny.max_work = 10;
  CHECK_THROWS_AS(check_ir(testing::chains({3, 3}), ValuationSample{100, 1},
                           MechanismConfig{}, tiny),
                  Error);
}

TEST_CASE("suite reports are identical across worker counts") {
  SuiteOptions o;
  o.property = Property::kIC;
  o.max_buyers = 4;
  o.reward_mode = RewardMode::kLiteral;
  o.source = ValuationGrid{0.2};
  const SuiteReport a = run_suite(o);
  o.check.workers = 3;
  const SuiteReport b = run_suite(o);
  CHECK(format_report(a) == format_report(b));
  CHECK(a.trees == 16);
  CHECK(a.violations_are_findings());
  CHECK(a.hard_invariants_hold());
  CHECK(a.report.violation_count > 0);
  CHECK(format_report(a).find("[deviations]") != std::string::npos);
}

TEST_CASE("clamped IR suite over six buyers finds nothing") {
  SuiteOptions o;
  o.property = Property::kIR;
  o.max_buyers = 6;
  const SuiteReport s = run_suite(o);
  CHECK(s.trees == 84);
  CHECK(s.report.violation_count == 0);
  CHECK_FALSE(s.violations_are_findings());
  o.reward_mode = RewardMode::kLiteral;
  const SuiteReport lit = run_suite(o);
  CHECK(lit.report.violation_count > 0);
  CHECK(lit.violations_are_findings());
}

TEST_CASE("Monte Carlo agrees with the closed form") {
  const SocialTree ref = testing::referral_tree();
  const MonteCarloEstimate e =
      monte_carlo_revenue(ref, ActionProfile::truthful(ref), MechanismConfig{}, 100000, 17);
  const double target = expected_revenue_fpdm(std::vector<std::int64_t>{5, 3, 2});
  CHECK(std::abs(e.mean - target) <= 3.0 * e.standard_error);

  const SocialTree s3 = testing::star(3);
  const MonteCarloEstimate b = monte_carlo_revenue(
      s3, ActionProfile::truthful(s3), MechanismConfig{}, 100000, 17, MechanismKind::kBaseline);
  CHECK(std::abs(b.mean - expected_revenue_base(3)) <= 3.0 * b.standard_error);

  const MonteCarloEstimate w1 =
      monte_carlo_revenue(ref, ActionProfile::truthful(ref), MechanismConfig{}, 5000, 5, MechanismKind::kFpdm, 1);
  const MonteCarloEstimate w4 =
      monte_carlo_revenue(ref, ActionProfile::truthful(ref), MechanismConfig{}, 5000, 5, MechanismKind::kFpdm, 4);
  CHECK(w1.mean == w4.mean);
  CHECK(w1.standard_error == w4.standard_error);

  const MonteCarloEstimate one =
      monte_carlo_revenue(ref, ActionProfile::truthful(ref), MechanismConfig{}, 1, 42);
  CHECK(one.mean ==
        monte_carlo_revenue(ref, ActionProfile::truthful(ref), MechanismConfig{}, 1, 42).mean);
  CHECK_THROWS_AS(
      monte_carlo_revenue(ref, ActionProfile::truthful(ref), MechanismConfig{}, 0, 42), Error);
}

TEST_CASE("standard error shrinks like one over root n") {
  const SocialTree tree = testing::chains({3, 2});
  const ActionProfile truthful = ActionProfile::truthful(tree);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const double se1 = monte_carlo_revenue(tree, truthful, MechanismConfig{}, 20000, seed).standard_error;
    const double se2 = monte_carlo_revenue(tree, truthful, MechanismConfig{}, 40000, seed).standard_error;
    CHECK(se2 / se1 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
  }
}

TEST_CASE("revenue dominance scan") {
  const DominanceReport r = revenue_dominance_scan(12);
  const auto bad = r.non_dominant();
  CHECK(bad.size() == 12);
  for (const DominanceEntry& e : bad) {
    CHECK(std::all_of(e.sizes.begin(), e.sizes.end(), [](auto s) { return s == 1; }));
  }
  const auto single = std::find_if(r.entries.begin(), r.entries.end(), [](const auto& e) {
    return e.sizes == std::vector<std::int64_t>{1};
  });
  REQUIRE(single != r.entries.end());
  CHECK(single->e_fpdm == doctest::Approx(std::exp(-1.0) * (1.0 - std::exp(-1.0))));
  CHECK(single->e_base == doctest::Approx(0.25));
  CHECK_THROWS_AS(revenue_dominance_scan(15), Error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace fpdm
