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

#ifndef FPDM_MECHANISMS_HPP_
#define FPDM_MECHANISMS_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "fpdm/network.hpp"

namespace fpdm {

enum class RewardMode {
  kClamped,       // path buyers receive max(0, p_w - p_base) * alpha / 2^d
  kLiteral,  // path buyers pay (p_base - p_w) * alpha / 2^d, any sign
};

enum class ClaimThreshold { kStrict, kWeak };

enum class TieMode {
  kSeededRandom,  // one uniformly chosen winner per run
  kExpectation,   // every tied winner with probability 1/t
};

struct MechanismConfig {
  double alpha = 0.1;
  RewardMode reward_mode = RewardMode::kClamped;
  // Unset: strict for the baseline sale, weak for the diffusion mechanism.
  std::optional<ClaimThreshold> threshold;
  TieMode tie_mode = TieMode::kSeededRandom;

  // Throws kInvalidArgument unless alpha is in [0, 1].
  void validate() const;
};

inline bool claims(double value, double price, ClaimThreshold threshold) {
  return threshold == ClaimThreshold::kWeak ? value >= price : value > price;
}

// Private values in [0, 1], indexed by buyer id.
class ValuationProfile {
 public:
  ValuationProfile() = default;
  explicit ValuationProfile(std::size_t buyer_count);
  // values[j] is the valuation of buyer j + 1.
  ValuationProfile(std::initializer_list<double> values);
  static ValuationProfile of(std::span<const double> values);

  std::size_t buyer_count() const {
    return values_.empty() ? 0 : values_.size() - 1;
  }
  bool has(NodeId buyer) const;
  // Throws kMissingValuation.
  double at(NodeId buyer) const;
  void set(NodeId buyer, double value);
  void clear(NodeId buyer);

  // Raw values by id; unknown entries hold 0.
  std::span<const double> dense() const { return values_; }

  friend bool operator==(const ValuationProfile&,
                         const ValuationProfile&) = default;

 private:
  std::vector<double> values_;
  std::vector<bool> known_;
};

struct BranchVisit {
  NodeId root = kNoNode;  // kSeller for the baseline sale
  double price = 0.0;
  std::size_t size = 0;
  std::size_t outside = 0;
  std::vector<NodeId> claimers;  // ascending ids
};

struct DecisionTrace {
  std::vector<BranchVisit> visits;
  // Claimers of the winning branch at minimal depth, then those of them with
  // the most reported children. Empty when unsold.
  std::vector<NodeId> shallowest;
  std::vector<NodeId> most_children;
  // Candidates left for the final tie-break (equals most_children).
  std::vector<NodeId> tied;
};

struct Outcome {
  std::optional<NodeId> winner;
  std::optional<NodeId> winning_branch;  // root id of the winner's branch
  double price = 0.0;                    // charged to the winner
  std::vector<double> payments;          // by id; negative = received
  double gross_revenue = 0.0;
  double net_revenue = 0.0;
  DecisionTrace trace;
};

struct WeightedOutcome {
  double probability = 1.0;
  Outcome outcome;
};

struct OutcomeDistribution {
  std::vector<WeightedOutcome> outcomes;

  // The single outcome of a seeded run. Throws if several are present.
  const Outcome& realized() const;
};

// u_i = pi_i v_i - p_i, indexed by id.
using UtilityVector = std::vector<double>;

UtilityVector utilities(const Outcome& outcome,
                        const ValuationProfile& valuations);
UtilityVector expected_utilities(const OutcomeDistribution& distribution,
                                 const ValuationProfile& valuations);

struct NeighbourValuation {
  NodeId buyer = kNoNode;
  double value = 0.0;
};

// Posted-price sale to the listed buyers at `price`.
OutcomeDistribution run_baseline(std::span<const NeighbourValuation> buyers,
                                 double price, const MechanismConfig& config,
                                 std::uint64_t seed);

// Posted-price sale to the seller's children at optimal_price(x).
OutcomeDistribution run_baseline(const SocialTree& tree,
                                 const ValuationProfile& valuations,
                                 const MechanismConfig& config,
                                 std::uint64_t seed);

// The diffusion mechanism with the valuation-independent work done once:
// effective tree, branches, prices, depths and the within-branch claim order.
class FpdmInstance {
 public:
  FpdmInstance(const SocialTree& tree, const ActionProfile& actions,
               Participation participation = Participation::kStrict);

  const SocialTree& effective() const { return effective_; }
  const BranchDecomposition& decomposition() const { return decomposition_; }
  std::span<const double> prices() const { return prices_; }
  double base_price() const { return base_price_; }
  std::size_t buyer_count() const { return effective_.buyer_count(); }

  // Price posted to the branch containing `node` (present buyer).
  double price_for(NodeId node) const;
  std::size_t depth_of(NodeId node) const { return depth_[node]; }
  std::size_t reported_children(NodeId node) const {
    return effective_.children(node).size();
  }

  struct Allocation {
    std::optional<std::size_t> branch;  // index into the decomposition
    std::vector<NodeId> tied;           // winners left for the tie-break
  };

  // Allocation rule only. `values` is indexed by id and must cover every
  // present buyer.
  void allocate(std::span<const double> values, ClaimThreshold threshold,
                Allocation& out) const;

  // Payment of a present buyer when `winner` receives the item.
  double payment(NodeId buyer, NodeId winner,
                 const MechanismConfig& config) const;

  // Throws kMissingValuation when a present buyer has no valuation.
  OutcomeDistribution run(const ValuationProfile& valuations,
                          const MechanismConfig& config,
                          std::uint64_t seed) const;

 private:
  Outcome outcome_for(NodeId winner, std::size_t branch,
                      const MechanismConfig& config) const;

  SocialTree effective_;
  BranchDecomposition decomposition_;
  std::vector<double> prices_;
  double base_price_ = 0.0;
  std::vector<std::size_t> depth_;          // by id
  std::vector<std::size_t> branch_of_;      // by id, index into branches
  // Per branch: members ordered by (depth asc, reported children desc, id).
  std::vector<std::vector<NodeId>> claim_order_;
};

OutcomeDistribution run_fpdm(const SocialTree& tree,
                             const ActionProfile& actions,
                             const ValuationProfile& valuations,
                             const MechanismConfig& config, std::uint64_t seed,
                             Participation participation = Participation::kStrict);

}  // namespace fpdm

#endif  // FPDM_MECHANISMS_HPP_
