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

// Fixtures shared by the unit tests.
#ifndef FPDM_TESTS_SUPPORT_HPP_
#define FPDM_TESTS_SUPPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fpdm/network.hpp"

namespace fpdm::testing {

inline const std::vector<Edge> kReferralEdges = {
    {0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5}, {1, 6}, {5, 10}, {2, 7}, {2, 8}, {3, 9}};

inline const std::vector<double> kReferralValues = {0.6, 0.7, 0.7, 0.5, 0.8,
                                                     0.9, 0.3, 0.4, 0.1, 0.5};

inline SocialTree referral_tree() { return build_tree(kReferralEdges); }

// Seller neighbours rooting chains of the given lengths.
inline SocialTree chains(const std::vector<std::int64_t>& lengths) {
  std::vector<Edge> edges;
  NodeId next = 1;
  for (std::int64_t len : lengths) {
    NodeId parent = kSeller;
    for (std::int64_t i = 0; i < len; ++i, ++next) {
      edges.push_back({parent, next});
      parent = next;
    }
  }
  return build_tree(edges);
}

inline SocialTree star(int x) { return chains(std::vector<std::int64_t>(x, 1)); }

inline std::string data_path(const std::string& name) {
  return std::string(FPDM_TEST_DATA_DIR) + "/" + name;
}

}  // namespace fpdm::testing

#endif  // FPDM_TESTS_SUPPORT_HPP_
