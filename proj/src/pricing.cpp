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

#include "fpdm/pricing.hpp"

#include <cmath>
#include <string>

#include "fpdm/error.hpp"

namespace fpdm {

namespace {

void require_non_negative(std::int64_t value, const char* what) {
  if (value < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must be non-negative, got " +
                    std::to_string(value));
  }
}

// log of optimal_price(x).
double log_optimal_price(std::int64_t x) {
  if (x == 0) return -1.0;
  const double xd = static_cast<double>(x);
  return -std::log1p(xd) / xd;
}

}  // namespace

double optimal_price(std::int64_t x) {
  require_non_negative(x, "buyer count");
  return std::exp(log_optimal_price(x));
}

double expected_revenue_base(std::int64_t x) {
  require_non_negative(x, "buyer count");
  if (x == 0) return 0.0;
  const double xd = static_cast<double>(x);
  return xd / (1.0 + xd) * optimal_price(x);
}

double expected_revenue_opt(std::int64_t k) {
  require_non_negative(k, "buyer count");
  return expected_revenue_base(k);
}

std::vector<double> branch_prices(const BranchDecomposition& decomposition) {
  std::vector<double> prices;
  prices.reserve(decomposition.branches.size());
  for (const Branch& b : decomposition.branches) {
    prices.push_back(optimal_price(static_cast<std::int64_t>(b.outside)));
  }
  return prices;
}

double expected_revenue_fpdm(std::span<const std::int64_t> sizes) {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "branch sizes must be positive");
    }
    if (i > 0 && sizes[i] > sizes[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "branch sizes must be in descending order");
    }
    total += sizes[i];
  }
  // log of the probability that no earlier branch sold
  double log_unsold = 0.0;
  double revenue = 0.0;
  for (std::int64_t size : sizes) {
    const double log_p = log_optimal_price(total - size);
    const double log_none_claims = static_cast<double>(size) * log_p;
    revenue += std::exp(log_p + log_unsold) * -std::expm1(log_none_claims);
    log_unsold += log_none_claims;
  }
  return revenue;
}

double chain_case_revenue(std::int64_t x, std::int64_t k) {
  if (x < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "chain case needs at least two seller neighbours");
  }
  if (k < x) {
    throw Error(ErrorCode::kInvalidArgument,
                "chain case needs k >= x (got k=" + std::to_string(k) +
                    ", x=" + std::to_string(x) + ")");
  }
  const double xd = static_cast<double>(x);
  const double kd = static_cast<double>(k);
  const double log_inv_x = -std::log(xd);
  const double log_inv_k = -std::log(kd);
  // (1/x)^{(k-x+1)/(x-1)}: the long branch has no claimer
  const double log_big_unsold = log_inv_x * (kd - xd + 1.0) / (xd - 1.0);
  const double big_price = std::exp(log_inv_x / (xd - 1.0));
  const double small_price = std::exp(log_inv_k / (kd - 1.0));
  const double small_any = -std::expm1(log_inv_k * (xd - 1.0) / (kd - 1.0));
  return -std::expm1(log_big_unsold) * big_price +
         std::exp(log_big_unsold) * small_any * small_price;
}

RevenuePoint revenue_point(std::span<const std::int64_t> sizes) {
  RevenuePoint point;
  for (std::int64_t s : sizes) point.k += s;
  point.x = static_cast<std::int64_t>(sizes.size());
  point.e_fpdm = expected_revenue_fpdm(sizes);
  point.e_base = expected_revenue_base(point.x);
  point.e_opt = expected_revenue_opt(point.k);
  point.ratio = point.e_opt > 0.0 ? point.e_fpdm / point.e_opt : 0.0;
  return point;
}

namespace {

void require_range(std::int64_t k_min, std::int64_t k_max) {
  if (k_min < 1 || k_max < k_min) {
    throw Error(ErrorCode::kInvalidArgument,
                "k range must satisfy 1 <= k_min <= k_max");
  }
}

}  // namespace

std::vector<RevenuePoint> revenue_curve(ChainScenario scenario,
                                        std::int64_t k_min, std::int64_t k_max) {
  require_range(k_min, k_max);
  const std::int64_t x = scenario.neighbours;
  if (x < 1 || k_min < x) {
    throw Error(ErrorCode::kInvalidArgument,
                "chain scenario needs 1 <= x <= k_min");
  }
  std::vector<RevenuePoint> curve;
  curve.reserve(static_cast<std::size_t>(k_max - k_min + 1));
  for (std::int64_t k = k_min; k <= k_max; ++k) {
    RevenuePoint point;
    point.k = k;
    point.x = x;
    if (x == 1) {
      const std::int64_t single[] = {k};
      point.e_fpdm = expected_revenue_fpdm(single);
    } else {
      point.e_fpdm = chain_case_revenue(x, k);
    }
    point.e_base = expected_revenue_base(x);
    point.e_opt = expected_revenue_opt(k);
    point.ratio = point.e_fpdm / point.e_opt;
    curve.push_back(point);
  }
  return curve;
}

std::vector<RevenuePoint> revenue_curve(StarScenario,
                                        std::int64_t k_min, std::int64_t k_max) {
  require_range(k_min, k_max);
  std::vector<RevenuePoint> curve;
  for (std::int64_t k = k_min; k <= k_max; ++k) {
    const std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 1);
    curve.push_back(revenue_point(sizes));
  }
  return curve;
}

std::vector<RevenuePoint> revenue_curve(
    std::span<const std::vector<std::int64_t>> size_vectors) {
  std::vector<RevenuePoint> curve;
  curve.reserve(size_vectors.size());
  for (const auto& sizes : size_vectors) curve.push_back(revenue_point(sizes));
  return curve;
}

double brute_force_optimal_price(std::int64_t x, double step) {
  if (x < 1) {
    throw Error(ErrorCode::kInvalidArgument, "grid oracle needs x >= 1");
  }
  if (!(step > 0.0 && step <= 0.01)) {
    throw Error(ErrorCode::kInvalidArgument, "grid step must lie in (0, 0.01]");
  }
  const double xd = static_cast<double>(x);
  double best_price = step;
  double best_value = -1.0;
  for (std::int64_t i = 1;; ++i) {
    const double p = static_cast<double>(i) * step;
    if (p > 1.0 - step * 0.5) break;
    const double value = (1.0 - std::pow(p, xd)) * p;
    if (value > best_value) {
      best_value = value;
      best_price = p;
    }
  }
  return best_price;
}

}  // namespace fpdm
