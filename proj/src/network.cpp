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

#include "fpdm/network.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "fpdm/error.hpp"

namespace fpdm {

namespace {

std::string node_name(NodeId node) { return "node " + std::to_string(node); }

void require_buyer(const SocialTree& tree, NodeId node) {
  if (node <= kSeller || static_cast<std::size_t>(node) > tree.buyer_count()) {
    throw Error(ErrorCode::kInvalidArgument,
                node_name(node) + " is not a buyer id");
  }
}

void require_present(const SocialTree& tree, NodeId node) {
  require_buyer(tree, node);
  if (!tree.contains(node)) {
    throw Error(ErrorCode::kInvalidArgument,
                node_name(node) + " is absent from the tree");
  }
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kCycle: return "cycle detected";
    case ErrorCode::kDisconnected: return "disconnected node";
    case ErrorCode::kDuplicateParent: return "duplicate parent";
    case ErrorCode::kNonContiguousIds: return "non-contiguous ids";
    case ErrorCode::kInfeasibleProfile: return "infeasible action profile";
    case ErrorCode::kMissingValuation: return "missing valuation";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kScopeTooLarge: return "scope too large";
  }
  return "unknown error";
}

bool SocialTree::contains(NodeId node) const {
  return node >= 0 && static_cast<std::size_t>(node) < present_.size() &&
         present_[node];
}

NodeId SocialTree::parent(NodeId node) const {
  require_present(*this, node);
  return parent_[node];
}

std::span<const NodeId> SocialTree::children(NodeId node) const {
  if (node != kSeller) require_present(*this, node);
  return children_[node];
}

std::vector<Edge> SocialTree::edges() const {
  std::vector<Edge> out;
  out.reserve(present_count_);
  for (std::size_t i = 1; i < parent_.size(); ++i) {
    if (present_[i]) out.push_back({parent_[i], static_cast<NodeId>(i)});
  }
  return out;
}

SocialTree build_tree(std::span<const Edge> edges) {
  SocialTree tree;
  if (edges.empty()) return tree;

  NodeId max_id = 0;
  for (const Edge& e : edges) {
    if (e.parent < 0 || e.child < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative node id");
    }
    if (e.child == kSeller) {
      throw Error(ErrorCode::kInvalidArgument,
                  "the seller (id 0) cannot have a parent");
    }
    if (e.parent == e.child) {
      throw Error(ErrorCode::kCycle, node_name(e.child) + " is its own parent");
    }
    max_id = std::max({max_id, e.parent, e.child});
  }

  const std::size_t n = static_cast<std::size_t>(max_id) + 1;
  std::vector<bool> seen(n, false);
  std::vector<NodeId> parent(n, kNoNode);
  for (const Edge& e : edges) {
    seen[e.parent] = seen[e.child] = true;
    if (parent[e.child] != kNoNode) {
      throw Error(ErrorCode::kDuplicateParent,
                  node_name(e.child) + " has more than one parent");
    }
    parent[e.child] = e.parent;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) {
      throw Error(ErrorCode::kNonContiguousIds,
                  "ids must be exactly 0.." + std::to_string(max_id) +
                      "; missing " + std::to_string(i));
    }
  }

  std::vector<std::vector<NodeId>> children(n);
  for (std::size_t i = 1; i < n; ++i) {
    if (parent[i] != kNoNode) children[parent[i]].push_back(static_cast<NodeId>(i));
  }

  std::vector<bool> reached(n, false);
  reached[kSeller] = true;
  std::deque<NodeId> queue{kSeller};
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId c : children[u]) {
      reached[c] = true;
      queue.push_back(c);
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (reached[i]) continue;
    // Walk upwards: a parentless ancestor means a detached component,
    // otherwise the walk must revisit a node.
    std::vector<bool> on_walk(n, false);
    NodeId u = static_cast<NodeId>(i);
    while (u != kNoNode && !on_walk[u]) {
      on_walk[u] = true;
      u = parent[u];
    }
    if (u == kNoNode) {
      throw Error(ErrorCode::kDisconnected,
                  node_name(static_cast<NodeId>(i)) +
                      " is not reachable from the seller");
    }
    throw Error(ErrorCode::kCycle,
                node_name(static_cast<NodeId>(i)) + " lies on a cycle");
  }

  tree.parent_ = std::move(parent);
  tree.children_ = std::move(children);
  tree.present_.assign(n, true);
  tree.present_count_ = n - 1;
  return tree;
}

ActionProfile ActionProfile::truthful(const SocialTree& tree) {
  ActionProfile actions(tree.buyer_count());
  for (std::size_t i = 1; i <= tree.buyer_count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (!tree.contains(id)) continue;
    auto kids = tree.children(id);
    actions.reports_[i] = std::vector<NodeId>(kids.begin(), kids.end());
  }
  return actions;
}

const Report& ActionProfile::report(NodeId buyer) const {
  if (buyer <= kSeller || static_cast<std::size_t>(buyer) >= reports_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                node_name(buyer) + " is outside the action profile");
  }
  return reports_[buyer];
}

void ActionProfile::set(NodeId buyer, Report report) {
  if (buyer <= kSeller || static_cast<std::size_t>(buyer) >= reports_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                node_name(buyer) + " is outside the action profile");
  }
  if (report) {
    std::sort(report->begin(), report->end());
    report->erase(std::unique(report->begin(), report->end()), report->end());
  }
  reports_[buyer] = std::move(report);
}

namespace {

void require_same_size(const SocialTree& tree, const ActionProfile& actions) {
  if (actions.buyer_count() != tree.buyer_count()) {
    throw Error(ErrorCode::kInvalidArgument,
                "action profile covers " + std::to_string(actions.buyer_count()) +
                    " buyers, tree has " + std::to_string(tree.buyer_count()));
  }
}

}  // namespace

std::vector<bool> informed_set(const SocialTree& tree,
                               const ActionProfile& actions) {
  require_same_size(tree, actions);
  std::vector<bool> informed(tree.buyer_count() + 1, false);
  std::deque<NodeId> queue;
  for (NodeId c : tree.seller_children()) {
    informed[c] = true;
    queue.push_back(c);
  }
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    const Report& r = actions.report(u);
    if (!r) continue;
    auto kids = tree.children(u);
    for (NodeId c : *r) {
      if (!std::binary_search(kids.begin(), kids.end(), c)) continue;
      informed[c] = true;
      queue.push_back(c);
    }
  }
  return informed;
}

void validate_profile(const SocialTree& tree, const ActionProfile& actions,
                      Participation participation) {
  require_same_size(tree, actions);
  for (std::size_t i = 1; i <= tree.buyer_count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    const Report& r = actions.report(id);
    if (!r) continue;
    if (!tree.contains(id)) {
      throw Error(ErrorCode::kInfeasibleProfile,
                  node_name(id) + " is not in the network but reports");
    }
    auto kids = tree.children(id);
    for (NodeId c : *r) {
      if (!std::binary_search(kids.begin(), kids.end(), c)) {
        throw Error(ErrorCode::kInfeasibleProfile,
                    node_name(id) + " reports " + node_name(c) +
                        ", which is not one of her children");
      }
    }
  }
  const std::vector<bool> informed = informed_set(tree, actions);
  for (std::size_t i = 1; i <= tree.buyer_count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (!tree.contains(id)) continue;
    const bool nil = !actions.report(id).has_value();
    if (!informed[i] && !nil) {
      throw Error(ErrorCode::kInfeasibleProfile,
                  node_name(id) + " is not informed but reports an action");
    }
    if (informed[i] && nil && participation == Participation::kStrict) {
      throw Error(ErrorCode::kInfeasibleProfile,
                  node_name(id) + " is informed but reports nil");
    }
  }
}

ActionProfile canonicalize(const SocialTree& tree, ActionProfile actions) {
  const std::vector<bool> informed = informed_set(tree, actions);
  for (std::size_t i = 1; i <= tree.buyer_count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (!informed[i]) {
      actions.set(id, std::nullopt);
    } else if (const Report& r = actions.report(id)) {
      actions.set(id, r);  // sorts
    }
  }
  return actions;
}

SocialTree effective_tree(const SocialTree& tree, const ActionProfile& actions) {
  require_same_size(tree, actions);
  const std::size_t n = tree.buyer_count() + 1;
  SocialTree out;
  out.parent_.assign(n, kNoNode);
  out.children_.assign(n, {});
  out.present_.assign(n, false);
  out.present_[kSeller] = true;

  std::deque<NodeId> queue;
  for (NodeId c : tree.seller_children()) {
    if (!actions.report(c)) continue;  // opted out
    out.present_[c] = true;
    out.parent_[c] = kSeller;
    out.children_[kSeller].push_back(c);
    queue.push_back(c);
  }
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    const Report& r = actions.report(u);
    auto kids = tree.children(u);
    for (NodeId c : *r) {
      if (!std::binary_search(kids.begin(), kids.end(), c)) continue;
      if (!actions.report(c)) continue;
      out.present_[c] = true;
      out.parent_[c] = u;
      out.children_[u].push_back(c);
      queue.push_back(c);
    }
  }
  for (auto& kids : out.children_) std::sort(kids.begin(), kids.end());
  out.present_count_ = static_cast<std::size_t>(
      std::count(out.present_.begin() + 1, out.present_.end(), true));
  return out;
}

std::optional<std::size_t> BranchDecomposition::index_of_root(
    NodeId root) const {
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (branches[i].root == root) return i;
  }
  return std::nullopt;
}

BranchDecomposition branches(const SocialTree& effective) {
  BranchDecomposition out;
  for (NodeId root : effective.seller_children()) {
    Branch b;
    b.root = root;
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      b.members.push_back(u);
      for (NodeId c : effective.children(u)) stack.push_back(c);
    }
    std::sort(b.members.begin(), b.members.end());
    b.size = b.members.size();
    out.reachable += b.size;
    out.branches.push_back(std::move(b));
  }
  for (Branch& b : out.branches) b.outside = out.reachable - b.size;
  std::stable_sort(out.branches.begin(), out.branches.end(),
                   [](const Branch& a, const Branch& b) {
                     if (a.size != b.size) return a.size > b.size;
                     return a.root < b.root;
                   });
  return out;
}

NodeId branch_root(const SocialTree& tree, NodeId node) {
  require_present(tree, node);
  while (tree.parent(node) != kSeller) node = tree.parent(node);
  return node;
}

std::size_t depth(const SocialTree& tree, NodeId node) {
  require_present(tree, node);
  std::size_t d = 1;
  while (tree.parent(node) != kSeller) {
    node = tree.parent(node);
    ++d;
  }
  return d;
}

std::vector<NodeId> path_to(const SocialTree& tree, NodeId node) {
  require_present(tree, node);
  std::vector<NodeId> path;
  for (NodeId u = tree.parent(node); u != kSeller; u = tree.parent(u)) {
    path.push_back(u);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

std::vector<NodeId> subset(std::span<const NodeId> items, std::uint64_t mask) {
  std::vector<NodeId> out;
  for (std::size_t j = 0; j < items.size(); ++j) {
    if (mask >> j & 1U) out.push_back(items[j]);
  }
  return out;
}

// Decides reports for informed buyers in BFS order; `frontier` holds the
// informed buyers whose report is still open.
void extend(const SocialTree& tree, ActionProfile& current,
            std::deque<NodeId> frontier,
            const std::function<void(const ActionProfile&)>& visit) {
  if (frontier.empty()) {
    visit(current);
    return;
  }
  const NodeId u = frontier.front();
  frontier.pop_front();
  auto kids = tree.children(u);
  const std::uint64_t count = std::uint64_t{1} << kids.size();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    std::vector<NodeId> chosen = subset(kids, mask);
    std::deque<NodeId> next = frontier;
    next.insert(next.end(), chosen.begin(), chosen.end());
    current.set(u, std::move(chosen));
    extend(tree, current, std::move(next), visit);
  }
  current.set(u, std::nullopt);
}

}  // namespace

void for_each_action_profile(
    const SocialTree& tree, std::optional<NodeId> deviator,
    const std::function<void(const ActionProfile&)>& visit) {
  if (deviator) {
    require_present(tree, *deviator);
    auto kids = tree.children(*deviator);
    if (kids.size() >= 63) {
      throw Error(ErrorCode::kScopeTooLarge, "too many children to enumerate");
    }
    const ActionProfile truthful = ActionProfile::truthful(tree);
    const std::uint64_t count = std::uint64_t{1} << kids.size();
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      ActionProfile a = truthful;
      a.set(*deviator, subset(kids, mask));
      visit(canonicalize(tree, std::move(a)));
    }
    return;
  }
  ActionProfile current(tree.buyer_count());
  std::deque<NodeId> frontier;
  for (NodeId c : tree.seller_children()) frontier.push_back(c);
  extend(tree, current, std::move(frontier), visit);
}

std::vector<ActionProfile> enumerate_action_profiles(
    const SocialTree& tree, std::optional<NodeId> deviator) {
  std::vector<ActionProfile> out;
  for_each_action_profile(tree, deviator,
                          [&](const ActionProfile& a) { out.push_back(a); });
  return out;
}

}  // namespace fpdm
