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

#include "fpdm/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpdm/error.hpp"
#include "fpdm/pricing.hpp"
#include "fpdm/rng.hpp"

namespace fpdm {

namespace {

std::string buyer_name(NodeId buyer) { return "buyer " + std::to_string(buyer); }

// Seeded runs keep one tied winner, expectation runs keep them all.
std::vector<std::pair<double, NodeId>> resolve_ties(
    const std::vector<NodeId>& tied, TieMode mode, std::uint64_t seed) {
  std::vector<std::pair<double, NodeId>> out;
  if (mode == TieMode::kExpectation) {
    const double weight = 1.0 / static_cast<double>(tied.size());
    for (NodeId w : tied) out.emplace_back(weight, w);
  } else if (tied.size() == 1) {
    out.emplace_back(1.0, tied.front());
  } else {
    std::mt19937_64 engine(seed);
    out.emplace_back(1.0, tied[uniform_index(engine, tied.size())]);
  }
  return out;
}

}  // namespace

void MechanismConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

ValuationProfile::ValuationProfile(std::size_t buyer_count)
    : values_(buyer_count + 1, 0.0), known_(buyer_count + 1, false) {}

ValuationProfile::ValuationProfile(std::initializer_list<double> values)
    : ValuationProfile(values.size()) {
  NodeId id = 1;
  for (double v : values) set(id++, v);
}

ValuationProfile ValuationProfile::of(std::span<const double> values) {
  ValuationProfile out(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    out.set(static_cast<NodeId>(j + 1), values[j]);
  }
  return out;
}

bool ValuationProfile::has(NodeId buyer) const {
  return buyer > kSeller && static_cast<std::size_t>(buyer) < known_.size() &&
         known_[buyer];
}

double ValuationProfile::at(NodeId buyer) const {
  if (!has(buyer)) {
    throw Error(ErrorCode::kMissingValuation,
                "no valuation for " + buyer_name(buyer));
  }
  return values_[buyer];
}

void ValuationProfile::set(NodeId buyer, double value) {
  if (buyer <= kSeller || static_cast<std::size_t>(buyer) >= values_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                buyer_name(buyer) + " is outside the valuation profile");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "valuation of " + buyer_name(buyer) + " must lie in [0, 1]");
  }
  values_[buyer] = value;
  known_[buyer] = true;
}

void ValuationProfile::clear(NodeId buyer) {
  if (has(buyer)) {
    values_[buyer] = 0.0;
    known_[buyer] = false;
  }
}

const Outcome& OutcomeDistribution::realized() const {
  if (outcomes.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "distribution holds " + std::to_string(outcomes.size()) +
                    " outcomes, not one");
  }
  return outcomes.front().outcome;
}

UtilityVector utilities(const Outcome& outcome,
                        const ValuationProfile& valuations) {
  UtilityVector u(outcome.payments.size(), 0.0);
  for (std::size_t i = 1; i < u.size(); ++i) u[i] = -outcome.payments[i];
  if (outcome.winner) {
    const NodeId w = *outcome.winner;
    u[w] = valuations.at(w) - outcome.payments[w];
  }
  return u;
}

UtilityVector expected_utilities(const OutcomeDistribution& distribution,
                                 const ValuationProfile& valuations) {
  UtilityVector total;
  for (const WeightedOutcome& wo : distribution.outcomes) {
    const UtilityVector u = utilities(wo.outcome, valuations);
    if (total.empty()) total.assign(u.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) total[i] += wo.probability * u[i];
  }
  return total;
}

OutcomeDistribution run_baseline(std::span<const NeighbourValuation> buyers,
                                 double price, const MechanismConfig& config,
                                 std::uint64_t seed) {
  config.validate();
  if (!(price >= 0.0 && price <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "price must lie in [0, 1]");
  }
  const ClaimThreshold threshold =
      config.threshold.value_or(ClaimThreshold::kStrict);

  NodeId max_id = 0;
  BranchVisit visit;
  visit.root = kSeller;
  visit.price = price;
  visit.size = buyers.size();
  for (const NeighbourValuation& b : buyers) {
    if (b.buyer <= kSeller) {
      throw Error(ErrorCode::kInvalidArgument, "buyer ids must be positive");
    }
    if (!(b.value >= 0.0 && b.value <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "valuation of " + buyer_name(b.buyer) + " must lie in [0, 1]");
    }
    max_id = std::max(max_id, b.buyer);
    if (claims(b.value, price, threshold)) visit.claimers.push_back(b.buyer);
  }
  std::sort(visit.claimers.begin(), visit.claimers.end());

  Outcome unsold;
  unsold.payments.assign(static_cast<std::size_t>(max_id) + 1, 0.0);
  unsold.trace.visits.push_back(visit);

  OutcomeDistribution dist;
  if (visit.claimers.empty()) {
    dist.outcomes.push_back({1.0, std::move(unsold)});
    return dist;
  }
  unsold.trace.tied = visit.claimers;
  for (auto [weight, w] : resolve_ties(visit.claimers, config.tie_mode, seed)) {
    Outcome o = unsold;
    o.winner = w;
    o.price = price;
    o.payments[w] = price;
    o.gross_revenue = o.net_revenue = price;
    dist.outcomes.push_back({weight, std::move(o)});
  }
  return dist;
}

OutcomeDistribution run_baseline(const SocialTree& tree,
                                 const ValuationProfile& valuations,
                                 const MechanismConfig& config,
                                 std::uint64_t seed) {
  std::vector<NeighbourValuation> buyers;
  for (NodeId c : tree.seller_children()) {
    buyers.push_back({c, valuations.at(c)});
  }
  const double price =
      optimal_price(static_cast<std::int64_t>(buyers.size()));
  OutcomeDistribution dist = run_baseline(buyers, price, config, seed);
  for (WeightedOutcome& wo : dist.outcomes) {
    wo.outcome.payments.resize(tree.buyer_count() + 1, 0.0);
  }
  return dist;
}

FpdmInstance::FpdmInstance(const SocialTree& tree, const ActionProfile& actions,
                           Participation participation) {
  validate_profile(tree, actions, participation);
  effective_ = effective_tree(tree, actions);
  decomposition_ = branches(effective_);
  prices_ = branch_prices(decomposition_);
  base_price_ = optimal_price(
      static_cast<std::int64_t>(tree.seller_children().size()));

  const std::size_t n = effective_.buyer_count() + 1;
  depth_.assign(n, 0);
  branch_of_.assign(n, 0);
  claim_order_.resize(decomposition_.branches.size());
  for (std::size_t b = 0; b < decomposition_.branches.size(); ++b) {
    const Branch& branch = decomposition_.branches[b];
    for (NodeId m : branch.members) {
      depth_[m] = depth(effective_, m);
      branch_of_[m] = b;
    }
    auto& order = claim_order_[b];
    order = branch.members;
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId c) {
      if (depth_[a] != depth_[c]) return depth_[a] < depth_[c];
      const std::size_t ka = effective_.children(a).size();
      const std::size_t kc = effective_.children(c).size();
      if (ka != kc) return ka > kc;
      return a < c;
    });
  }
}

double FpdmInstance::price_for(NodeId node) const {
  if (!effective_.contains(node) || node == kSeller) {
    throw Error(ErrorCode::kInvalidArgument,
                buyer_name(node) + " is not in the effective network");
  }
  return prices_[branch_of_[node]];
}

void FpdmInstance::allocate(std::span<const double> values,
                            ClaimThreshold threshold, Allocation& out) const {
  out.branch.reset();
  out.tied.clear();
  for (std::size_t b = 0; b < claim_order_.size(); ++b) {
    const double price = prices_[b];
    const auto& order = claim_order_[b];
    std::size_t i = 0;
    while (i < order.size() && !claims(values[order[i]], price, threshold)) ++i;
    if (i == order.size()) continue;
    const NodeId first = order[i];
    const std::size_t d = depth_[first];
    const std::size_t kids = effective_.children(first).size();
    out.branch = b;
    for (; i < order.size(); ++i) {
      const NodeId m = order[i];
      if (depth_[m] != d || effective_.children(m).size() != kids) break;
      if (claims(values[m], price, threshold)) out.tied.push_back(m);
    }
    return;
  }
}

double FpdmInstance::payment(NodeId buyer, NodeId winner,
                             const MechanismConfig& config) const {
  if (buyer == winner) return prices_[branch_of_[winner]];
  // Only strict ancestors of the winner pay or receive anything.
  if (!effective_.contains(buyer) || depth_[buyer] >= depth_[winner]) return 0.0;
  NodeId u = winner;
  while (depth_[u] > depth_[buyer]) u = effective_.parent(u);
  if (u != buyer) return 0.0;

  double gap = base_price_ - prices_[branch_of_[winner]];
  if (config.reward_mode == RewardMode::kClamped) gap = std::min(gap, 0.0);
  const double p = std::ldexp(gap * config.alpha, -static_cast<int>(depth_[buyer]));
  return p == 0.0 ? 0.0 : p;
}

Outcome FpdmInstance::outcome_for(NodeId winner, std::size_t branch,
                                  const MechanismConfig& config) const {
  Outcome o;
  o.payments.assign(effective_.buyer_count() + 1, 0.0);
  o.winner = winner;
  o.winning_branch = decomposition_.branches[branch].root;
  o.price = prices_[branch];
  o.payments[winner] = o.price;
  for (NodeId l : path_to(effective_, winner)) {
    o.payments[l] = payment(l, winner, config);
  }
  o.gross_revenue = o.price;
  double net = 0.0;
  for (double p : o.payments) net += p;
  o.net_revenue = net;
  return o;
}

OutcomeDistribution FpdmInstance::run(const ValuationProfile& valuations,
                                      const MechanismConfig& config,
                                      std::uint64_t seed) const {
  config.validate();
  for (const Branch& b : decomposition_.branches) {
    for (NodeId m : b.members) (void)valuations.at(m);
  }
  if (valuations.buyer_count() < effective_.buyer_count()) {
    throw Error(ErrorCode::kMissingValuation,
                "valuation profile is smaller than the network");
  }
  const ClaimThreshold threshold =
      config.threshold.value_or(ClaimThreshold::kWeak);

  DecisionTrace trace;
  std::optional<std::size_t> winning;
  for (std::size_t b = 0; b < decomposition_.branches.size(); ++b) {
    const Branch& branch = decomposition_.branches[b];
    BranchVisit visit{branch.root, prices_[b], branch.size, branch.outside, {}};
    for (NodeId m : branch.members) {
      if (claims(valuations.at(m), prices_[b], threshold)) {
        visit.claimers.push_back(m);
      }
    }
    const bool sold = !visit.claimers.empty();
    trace.visits.push_back(std::move(visit));
    if (sold) {
      winning = b;
      break;
    }
  }

  OutcomeDistribution dist;
  if (!winning) {
    Outcome unsold;
    unsold.payments.assign(effective_.buyer_count() + 1, 0.0);
    unsold.trace = std::move(trace);
    dist.outcomes.push_back({1.0, std::move(unsold)});
    return dist;
  }

  const auto& claimers = trace.visits.back().claimers;
  std::size_t min_depth = SIZE_MAX;
  for (NodeId c : claimers) min_depth = std::min(min_depth, depth_[c]);
  for (NodeId c : claimers) {
    if (depth_[c] == min_depth) trace.shallowest.push_back(c);
  }
  std::size_t max_kids = 0;
  for (NodeId c : trace.shallowest) {
    max_kids = std::max(max_kids, effective_.children(c).size());
  }
  for (NodeId c : trace.shallowest) {
    if (effective_.children(c).size() == max_kids) trace.most_children.push_back(c);
  }
  trace.tied = trace.most_children;

  for (auto [weight, w] : resolve_ties(trace.tied, config.tie_mode, seed)) {
    Outcome o = outcome_for(w, *winning, config);
    o.trace = trace;
    dist.outcomes.push_back({weight, std::move(o)});
  }
  return dist;
}

OutcomeDistribution run_fpdm(const SocialTree& tree,
                             const ActionProfile& actions,
                             const ValuationProfile& valuations,
                             const MechanismConfig& config, std::uint64_t seed,
                             Participation participation) {
  return FpdmInstance(tree, actions, participation).run(valuations, config, seed);
}

}  // namespace fpdm
