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
#include <deque>
#include <string>
#include <vector>

#include "fpdm/error.hpp"
#include "fpdm/verification.hpp"

namespace fpdm {

namespace {

// Level sequence (preorder depths, root at level 1) to a tree whose ids are
// assigned breadth-first, children kept in preorder order.
SocialTree tree_from_levels(const std::vector<int>& levels) {
  const std::size_t m = levels.size();
  std::vector<std::size_t> parent(m, 0);
  std::vector<std::vector<std::size_t>> kids(m);
  std::vector<std::size_t> last_at_level(m + 2, 0);
  last_at_level[1] = 0;
  for (std::size_t i = 1; i < m; ++i) {
    parent[i] = last_at_level[levels[i] - 1];
    kids[parent[i]].push_back(i);
    last_at_level[levels[i]] = i;
  }

  std::vector<NodeId> id(m, kNoNode);
  id[0] = kSeller;
  NodeId next = 1;
  std::vector<Edge> edges;
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t c : kids[u]) {
      id[c] = next++;
      edges.push_back({id[u], id[c]});
      queue.push_back(c);
    }
  }
  return build_tree(edges);
}

std::string encode(const SocialTree& tree, NodeId node) {
  std::vector<std::string> parts;
  for (NodeId c : tree.children(node)) parts.push_back(encode(tree, c));
  std::sort(parts.begin(), parts.end());
  std::string out = "(";
  for (const auto& p : parts) out += p;
  out += ')';
  return out;
}

}  // namespace

void for_each_rooted_tree(int n,
                          const std::function<void(const SocialTree&)>& visit) {
  if (n < 1 || n > 9) {
    throw Error(ErrorCode::kInvalidArgument,
                "tree enumeration supports 1..9 buyers, got " + std::to_string(n));
  }
  // Beyer-Hedetniemi successor rule, from the path down to the star.
  const std::size_t m = static_cast<std::size_t>(n) + 1;
  std::vector<int> levels(m);
  for (std::size_t i = 0; i < m; ++i) levels[i] = static_cast<int>(i) + 1;
  while (true) {
    visit(tree_from_levels(levels));
    std::size_t p = m;
    for (std::size_t i = m; i-- > 1;) {
      if (levels[i] > 2) {
        p = i;
        break;
      }
    }
    if (p == m) return;
    std::size_t q = p;
    while (levels[q] != levels[p] - 1) --q;
    const std::size_t shift = p - q;
    for (std::size_t i = p; i < m; ++i) levels[i] = levels[i - shift];
  }
}

std::vector<SocialTree> enumerate_rooted_trees(int n) {
  std::vector<SocialTree> out;
  for_each_rooted_tree(n, [&](const SocialTree& t) { out.push_back(t); });
  return out;
}

std::vector<SocialTree> enumerate_rooted_trees_up_to(int n) {
  if (n < 1 || n > 9) {
    throw Error(ErrorCode::kInvalidArgument,
                "tree enumeration supports 1..9 buyers, got " + std::to_string(n));
  }
  std::vector<SocialTree> out;
  for (int size = 1; size <= n; ++size) {
    for_each_rooted_tree(size, [&](const SocialTree& t) { out.push_back(t); });
  }
  return out;
}

std::string canonical_form(const SocialTree& tree) {
  return encode(tree, kSeller);
}

}  // namespace fpdm
