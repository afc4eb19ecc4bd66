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

#ifndef FPDM_PRICING_HPP_
#define FPDM_PRICING_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "fpdm/network.hpp"

namespace fpdm {

// Revenue-maximising posted price for x buyers with U[0,1] valuations:
// (1/(1+x))^(1/x). At x = 0 the continuous limit 1/e is returned so that a
// lone branch still has a price.
double optimal_price(std::int64_t x);

// Expected revenue of the posted-price sale to x buyers at optimal_price(x).
double expected_revenue_base(std::int64_t x);

// Same quantity when every one of the k buyers is a seller neighbour.
double expected_revenue_opt(std::int64_t k);

// One price per branch, in decomposition order: optimal_price(k_{-i}).
std::vector<double> branch_prices(const BranchDecomposition& decomposition);

// Expected gross revenue of the diffusion mechanism for branch sizes given in
// descending order. Evaluated in log space; empty input yields 0.
double expected_revenue_fpdm(std::span<const std::int64_t> sizes);

// Closed form for one branch of size k - x + 1 plus x - 1 singleton branches.
// Requires x >= 2 and k >= x.
double chain_case_revenue(std::int64_t x, std::int64_t k);

struct RevenuePoint {
  std::int64_t k = 0;
  std::int64_t x = 0;
  double e_fpdm = 0.0;
  double e_base = 0.0;
  double e_opt = 0.0;
  double ratio = 0.0;  // e_fpdm / e_opt, 0 when e_opt is 0
};

struct ChainScenario {
  std::int64_t neighbours = 5;
};

// All buyers are seller neighbours (k = x).
struct StarScenario {};

RevenuePoint revenue_point(std::span<const std::int64_t> sizes);

// One point per k in [k_min, k_max]; chain requires k_min >= neighbours.
std::vector<RevenuePoint> revenue_curve(ChainScenario scenario,
                                        std::int64_t k_min, std::int64_t k_max);
std::vector<RevenuePoint> revenue_curve(StarScenario scenario,
                                        std::int64_t k_min, std::int64_t k_max);
std::vector<RevenuePoint> revenue_curve(
    std::span<const std::vector<std::int64_t>> size_vectors);

// Grid argmax of (1 - p^x) p over {step, 2 step, ...} below 1; ties keep the
// smaller price. step must lie in (0, 0.01].
double brute_force_optimal_price(std::int64_t x, double step);

}  // namespace fpdm

#endif  // FPDM_PRICING_HPP_
