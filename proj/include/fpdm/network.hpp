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

#ifndef FPDM_NETWORK_HPP_
#define FPDM_NETWORK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace fpdm {

using NodeId = std::int32_t;

inline constexpr NodeId kSeller = 0;
inline constexpr NodeId kNoNode = -1;

class ActionProfile;

struct Edge {
  NodeId parent;
  NodeId child;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// A rooted tree over the dense id space {0, 1, ..., k}; 0 is the seller.
//
// Trees produced by build_tree contain every id. Trees produced by
// effective_tree keep the same id space but mark buyers that were never
// informed as absent, so valuations and reports index both alike.
class SocialTree {
 public:
  SocialTree() : parent_{kNoNode}, children_(1), present_{true} {}

  // Number of buyer ids (k). Absent buyers are counted.
  std::size_t buyer_count() const { return parent_.size() - 1; }
  // Number of buyers actually present.
  std::size_t present_buyer_count() const { return present_count_; }

  bool contains(NodeId node) const;
  NodeId parent(NodeId node) const;
  std::span<const NodeId> children(NodeId node) const;
  std::span<const NodeId> seller_children() const { return children(kSeller); }

  // Edges of present nodes, ordered by child id.
  std::vector<Edge> edges() const;

  friend bool operator==(const SocialTree&, const SocialTree&) = default;

 private:
  friend SocialTree build_tree(std::span<const Edge> edges);
  friend SocialTree effective_tree(const SocialTree& tree,
                                   const ActionProfile& actions);

  std::vector<NodeId> parent_;
  std::vector<std::vector<NodeId>> children_;  // ascending ids
  std::vector<bool> present_;
  std::size_t present_count_ = 0;
};

// Throws Error with kCycle, kDisconnected, kDuplicateParent,
// kNonContiguousIds or kInvalidArgument (negative id, seller as child).
SocialTree build_tree(std::span<const Edge> edges);

// nullopt is the nil action. A non-nil report is a sorted set of children.
using Report = std::optional<std::vector<NodeId>>;

class ActionProfile {
 public:
  ActionProfile() = default;
  // All entries nil.
  explicit ActionProfile(std::size_t buyer_count)
      : reports_(buyer_count + 1) {}

  // Every buyer reports all of her children.
  static ActionProfile truthful(const SocialTree& tree);

  std::size_t buyer_count() const {
    return reports_.empty() ? 0 : reports_.size() - 1;
  }
  const Report& report(NodeId buyer) const;
  void set(NodeId buyer, Report report);

  friend bool operator==(const ActionProfile&, const ActionProfile&) = default;

 private:
  std::vector<Report> reports_;  // index 0 unused
};

enum class Participation {
  kStrict,        // a_i = nil iff i is not informed
  kAllowOptOut,   // informed buyers may also report nil
};

// Buyers informed under `actions`: seller children always, and every reported
// child of an informed, non-nil buyer.
std::vector<bool> informed_set(const SocialTree& tree,
                               const ActionProfile& actions);

// Throws kInfeasibleProfile when reports are not subsets of true children or
// violate the feasibility closure for the chosen participation rule.
void validate_profile(const SocialTree& tree, const ActionProfile& actions,
                      Participation participation = Participation::kStrict);

// Sorts reports and sets uninformed buyers to nil. Reports of informed buyers
// are kept as given.
ActionProfile canonicalize(const SocialTree& tree, ActionProfile actions);

// The subtree actually reached by the sale. An informed buyer reporting nil is
// absent together with her subtree. Pruning is total: report entries naming
// non-children are ignored.
SocialTree effective_tree(const SocialTree& tree, const ActionProfile& actions);

struct Branch {
  NodeId root = kNoNode;
  std::vector<NodeId> members;  // ascending ids
  std::size_t size = 0;         // k_i
  std::size_t outside = 0;      // k_{-i}
};

struct BranchDecomposition {
  // Descending by size, ties by ascending root id.
  std::vector<Branch> branches;
  std::size_t reachable = 0;

  std::optional<std::size_t> index_of_root(NodeId root) const;
};

BranchDecomposition branches(const SocialTree& effective);

// Root of the branch containing `node` (the seller child on its path).
NodeId branch_root(const SocialTree& tree, NodeId node);

// Edge distance from the seller; seller children have depth 1.
std::size_t depth(const SocialTree& tree, NodeId node);

// Strict buyer ancestors of `node`, ordered from the seller side.
std::vector<NodeId> path_to(const SocialTree& tree, NodeId node);

// Streams every feasible profile (strict participation). With a deviator, only
// her report ranges over subsets of her children (bit j of the subset index
// selects children[j]); everyone else is truthful. Profiles are canonical.
void for_each_action_profile(
    const SocialTree& tree, std::optional<NodeId> deviator,
    const std::function<void(const ActionProfile&)>& visit);

std::vector<ActionProfile> enumerate_action_profiles(
    const SocialTree& tree, std::optional<NodeId> deviator = std::nullopt);

}  // namespace fpdm

#endif  // FPDM_NETWORK_HPP_
