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

#ifndef FPDM_VERIFICATION_HPP_
#define FPDM_VERIFICATION_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fpdm/mechanisms.hpp"
#include "fpdm/network.hpp"

namespace fpdm {

// ---------------------------------------------------------------------------
// Rooted trees

// All non-isomorphic rooted trees with exactly n buyers (n + 1 nodes counting
// the seller root), 1 <= n <= 9. Generated from canonical level sequences in
// a fixed order; ids are assigned breadth-first.
void for_each_rooted_tree(int n,
                          const std::function<void(const SocialTree&)>& visit);
std::vector<SocialTree> enumerate_rooted_trees(int n);
// Trees with 1..n buyers, by size then generation order.
std::vector<SocialTree> enumerate_rooted_trees_up_to(int n);

// Isomorphism-invariant encoding of the present part of a rooted tree.
std::string canonical_form(const SocialTree& tree);

// ---------------------------------------------------------------------------
// Property checks

// Offset grid {step/2, 3 step/2, ...} below 1 for every buyer.
struct ValuationGrid {
  double step = 0.1;
};

// `count` independent U[0,1] profiles.
struct ValuationSample {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
};

using ValuationSource = std::variant<ValuationGrid, ValuationSample>;

std::vector<double> grid_points(const ValuationGrid& grid);

enum class Property { kIR, kIC };
enum class IcScope { kUnilateral, kFull };

const char* to_string(Property property);

// Orders violations; fields compare lexicographically.
struct InstanceKey {
  std::size_t tree = 0;
  std::size_t base_profile = 0;
  std::uint64_t valuation = 0;
  NodeId buyer = kNoNode;
  std::size_t deviation = 0;

  friend auto operator<=>(const InstanceKey&, const InstanceKey&) = default;
};

struct Violation {
  Property property = Property::kIR;
  InstanceKey key;
  SocialTree tree;
  ActionProfile base_actions;
  ValuationProfile valuations;
  NodeId buyer = kNoNode;
  // IC only: the buyer's alternative report (nil = opting out).
  Report deviant_report;
  bool opt_out = false;
  // IR: the lowest utility over tied outcomes (deviant == truthful).
  // IC: expected utilities over the tie-break.
  double truthful_utility = 0.0;
  double deviant_utility = 0.0;
  MechanismConfig config;
};

struct InvariantFailure {
  char invariant = '?';  // 'a', 'b' or 'c'
  InstanceKey key;
  std::string detail;
};

// How one IC deviation fared across every valuation profile examined.
struct DeviationVerdict {
  InstanceKey key;  // valuation unused
  std::vector<Edge> tree;
  Report report;
  bool opt_out = false;
  double alpha = 0.0;
  std::uint64_t profiles = 0;
  std::uint64_t profitable = 0;
  double max_gain = 0.0;  // largest deviant minus truthful utility
};

struct PropertyReport {
  Property property = Property::kIR;
  std::uint64_t instances = 0;   // valuation profiles (x base profiles for IC)
  std::uint64_t deviations = 0;  // IC comparisons made
  std::uint64_t violation_count = 0;
  std::vector<Violation> violations;  // first `max_recorded` by key
  std::uint64_t invariant_failure_count = 0;
  std::vector<InvariantFailure> invariant_failures;
  std::vector<DeviationVerdict> verdicts;  // IC only, one per deviation

  bool holds() const {
    return violation_count == 0 && invariant_failure_count == 0;
  }
  void merge(PropertyReport&& other, std::size_t max_recorded);
};

struct CheckOptions {
  std::size_t workers = 1;
  std::size_t max_recorded = 1000;
  // IC: also try nil for buyers that are not seller children.
  bool include_opt_out = true;
  // Refuse enumerations larger than this many (profile, deviation) pairs.
  std::uint64_t max_work = 4'000'000'000ULL;
  std::size_t tree_index = 0;
};

// Every buyer utility under truthful reports is non-negative, for every tied
// outcome. Grid sources are checked exactly through claim classes: only
// whether a buyer claims matters to the allocation and to non-winner payments,
// and the winner's utility is smallest at the lowest claiming grid value.
PropertyReport check_ir(const SocialTree& tree, const ValuationSource& source,
                        const MechanismConfig& config,
                        const CheckOptions& options = {});

// Searches profitable diffusion deviations (expected utility over the
// tie-break) and asserts the exact sub-invariants:
//   (a) a deviation inside branch j leaves branch j's price unchanged;
//   (b) a path buyer's payment is unchanged by her own deviation whenever the
//       winner is unchanged;
//   (c) buyers that are neither the winner nor on her path pay exactly 0.
// Full scope quantifies over every feasible profile of the others and is
// limited to 6 buyers.
PropertyReport check_ic(const SocialTree& tree, const ValuationSource& source,
                        const MechanismConfig& config, IcScope scope,
                        const CheckOptions& options = {});

struct ReplayedUtilities {
  double truthful = 0.0;
  double deviant = 0.0;
};

// Recomputes a recorded violation through run_fpdm.
ReplayedUtilities replay(const Violation& violation);

// ---------------------------------------------------------------------------
// Suites over all small trees

struct SuiteOptions {
  Property property = Property::kIR;
  int max_buyers = 6;
  ValuationSource source = ValuationGrid{0.1};
  std::vector<double> alphas = {0.0, 0.1, 1.0};
  RewardMode reward_mode = RewardMode::kClamped;
  std::optional<ClaimThreshold> threshold;
  IcScope scope = IcScope::kUnilateral;
  CheckOptions check;
};

struct SuiteReport {
  SuiteOptions options;
  std::size_t trees = 0;
  PropertyReport report;

  // Violations that are findings rather than broken guarantees: IC
  // deviations, and IR failures under literal rewards.
  bool violations_are_findings() const;
  bool hard_invariants_hold() const;
};

SuiteReport run_suite(const SuiteOptions& options);

std::string format_report(const SuiteReport& report);

// ---------------------------------------------------------------------------
// Revenue oracles

enum class MechanismKind { kFpdm, kBaseline };

struct MonteCarloEstimate {
  std::size_t replications = 0;
  double mean = 0.0;
  double standard_error = 0.0;  // sample stddev / sqrt(replications)
  std::uint64_t seed = 0;
};

// Mean gross revenue over i.i.d. U[0,1] valuations. Replication r draws from
// derive_seed(seed, r), so the estimate does not depend on `workers`.
MonteCarloEstimate monte_carlo_revenue(
    const SocialTree& tree, const ActionProfile& actions,
    const MechanismConfig& config, std::size_t replications,
    std::uint64_t seed, MechanismKind mechanism = MechanismKind::kFpdm,
    std::size_t workers = 1);

struct DominanceEntry {
  std::vector<std::int64_t> sizes;
  double e_fpdm = 0.0;
  double e_base = 0.0;
  bool dominant = false;  // e_fpdm > e_base
};

struct DominanceReport {
  std::int64_t max_total = 0;
  std::vector<DominanceEntry> entries;

  std::vector<DominanceEntry> non_dominant() const;
};

// Every descending branch-size vector with total <= max_total (<= 14).
DominanceReport revenue_dominance_scan(std::int64_t max_total);

}  // namespace fpdm

#endif  // FPDM_VERIFICATION_HPP_
