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

#include "fpdm/verification.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "fpdm/error.hpp"
#include "fpdm/io.hpp"
#include "fpdm/pricing.hpp"
#include "fpdm/rng.hpp"

namespace fpdm {

namespace {

// IC comparisons tolerate this much floating-point noise.
constexpr double kUtilityTolerance = 1e-12;

// Runs body(chunk, begin, end) over `chunks` contiguous slices of [0, total).
template <typename Body>
void run_chunks(std::uint64_t total, std::size_t chunks, Body&& body) {
  if (chunks <= 1) {
    body(std::size_t{0}, std::uint64_t{0}, total);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::uint64_t begin = total * c / chunks;
    const std::uint64_t end = total * (c + 1) / chunks;
    threads.emplace_back([&, c, begin, end] {
      try {
        body(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::size_t chunk_count(std::uint64_t total, std::size_t workers) {
  const std::uint64_t w = std::max<std::size_t>(1, workers);
  return static_cast<std::size_t>(std::max<std::uint64_t>(1, std::min(w, total)));
}

std::uint64_t checked_power(std::uint64_t base, std::size_t exponent,
                            std::uint64_t limit) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (out > limit / std::max<std::uint64_t>(base, 1)) return limit + 1;
    out *= base;
  }
  return out;
}

void refuse(const std::string& what) {
  throw Error(ErrorCode::kScopeTooLarge, what);
}

// Values of buyers 1..k for profile `index`: digit j (base |points|) picks
// buyer j + 1's grid point.
void decode_grid(std::uint64_t index, const std::vector<double>& points,
                 std::vector<double>& values) {
  const std::uint64_t base = points.size();
  for (std::size_t i = 1; i < values.size(); ++i) {
    values[i] = points[index % base];
    index /= base;
  }
}

void draw_sample(std::uint64_t seed, std::uint64_t index,
                 std::vector<double>& values) {
  std::mt19937_64 engine(derive_seed(seed, index));
  for (std::size_t i = 1; i < values.size(); ++i) values[i] = uniform01(engine);
}

ValuationProfile profile_of(const std::vector<double>& values) {
  ValuationProfile out(values.size() - 1);
  for (std::size_t i = 1; i < values.size(); ++i) {
    out.set(static_cast<NodeId>(i), values[i]);
  }
  return out;
}

double winner_or_path_utility(const FpdmInstance& inst, NodeId buyer,
                              NodeId winner, std::span<const double> values,
                              const MechanismConfig& config) {
  if (buyer == winner) return values[buyer] - inst.payment(buyer, buyer, config);
  return -inst.payment(buyer, winner, config);
}

// Mirrors expected_utilities: sum of probability * utility in tie order.
double expected_utility(const FpdmInstance& inst,
                        const FpdmInstance::Allocation& alloc, NodeId buyer,
                        std::span<const double> values,
                        const MechanismConfig& config) {
  if (!alloc.branch) return 0.0;
  const double weight = 1.0 / static_cast<double>(alloc.tied.size());
  double total = 0.0;
  for (NodeId w : alloc.tied) {
    total += weight * winner_or_path_utility(inst, buyer, w, values, config);
  }
  return total;
}

std::vector<std::vector<NodeId>> all_paths(const FpdmInstance& inst) {
  std::vector<std::vector<NodeId>> paths(inst.buyer_count() + 1);
  for (const Branch& b : inst.decomposition().branches) {
    for (NodeId m : b.members) paths[m] = path_to(inst.effective(), m);
  }
  return paths;
}

bool on_path(const std::vector<NodeId>& path, NodeId buyer) {
  return std::find(path.begin(), path.end(), buyer) != path.end();
}

void sort_and_truncate(PropertyReport& report, std::size_t max_recorded) {
  auto by_key = [](const auto& a, const auto& b) { return a.key < b.key; };
  std::stable_sort(report.violations.begin(), report.violations.end(), by_key);
  std::stable_sort(report.invariant_failures.begin(),
                   report.invariant_failures.end(), by_key);
  if (report.violations.size() > max_recorded) {
    report.violations.resize(max_recorded);
  }
  if (report.invariant_failures.size() > max_recorded) {
    report.invariant_failures.resize(max_recorded);
  }
}

}  // namespace

const char* to_string(Property property) {
  return property == Property::kIR ? "IR" : "IC";
}

std::vector<double> grid_points(const ValuationGrid& grid) {
  if (!(grid.step > 0.0 && grid.step <= 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "grid step must lie in (0, 0.5]");
  }
  std::vector<double> points;
  for (std::int64_t i = 0;; ++i) {
    const double v = (2.0 * static_cast<double>(i) + 1.0) * grid.step / 2.0;
    if (v >= 1.0) break;
    points.push_back(v);
  }
  return points;
}

void PropertyReport::merge(PropertyReport&& other, std::size_t max_recorded) {
  instances += other.instances;
  deviations += other.deviations;
  violation_count += other.violation_count;
  invariant_failure_count += other.invariant_failure_count;
  for (auto& v : other.violations) violations.push_back(std::move(v));
  for (auto& f : other.invariant_failures) {
    invariant_failures.push_back(std::move(f));
  }
  for (auto& d : other.verdicts) verdicts.push_back(std::move(d));
  sort_and_truncate(*this, max_recorded);
}

PropertyReport check_ir(const SocialTree& tree, const ValuationSource& source,
                        const MechanismConfig& config,
                        const CheckOptions& options) {
  config.validate();
  MechanismConfig cfg = config;
  cfg.tie_mode = TieMode::kExpectation;
  const ClaimThreshold threshold = cfg.threshold.value_or(ClaimThreshold::kWeak);
  const ActionProfile truthful = ActionProfile::truthful(tree);
  const FpdmInstance inst(tree, truthful);
  const std::size_t k = tree.buyer_count();

  // Per buyer: (representative value, multiplicity) for each claim class.
  std::vector<std::vector<std::pair<double, std::uint64_t>>> classes(k + 1);
  std::uint64_t total = 0;
  const bool grid = std::holds_alternative<ValuationGrid>(source);
  if (grid) {
    const std::vector<double> points = grid_points(std::get<ValuationGrid>(source));
    total = 1;
    for (std::size_t i = 1; i <= k; ++i) {
      const double price = inst.price_for(static_cast<NodeId>(i));
      std::optional<double> lowest_claim;
      std::optional<double> highest_idle;
      std::uint64_t n_claim = 0;
      std::uint64_t n_idle = 0;
      for (double v : points) {
        if (claims(v, price, threshold)) {
          ++n_claim;
          if (!lowest_claim || v < *lowest_claim) lowest_claim = v;
        } else {
          ++n_idle;
          if (!highest_idle || v > *highest_idle) highest_idle = v;
        }
      }
      if (highest_idle) classes[i].emplace_back(*highest_idle, n_idle);
      if (lowest_claim) classes[i].emplace_back(*lowest_claim, n_claim);
      total *= classes[i].size();
    }
  } else {
    total = std::get<ValuationSample>(source).count;
  }
  if (total > options.max_work) refuse("IR check exceeds the work limit");

  const std::size_t chunks = chunk_count(total, options.workers);
  std::vector<PropertyReport> partial(chunks);
  run_chunks(total, chunks, [&](std::size_t c, std::uint64_t begin,
                                std::uint64_t end) {
    PropertyReport& out = partial[c];
    out.property = Property::kIR;
    std::vector<double> values(k + 1, 0.0);
    FpdmInstance::Allocation alloc;
    for (std::uint64_t index = begin; index < end; ++index) {
      std::uint64_t weight = 1;
      if (grid) {
        std::uint64_t rest = index;
        for (std::size_t i = 1; i <= k; ++i) {
          const auto& cls = classes[i][rest % classes[i].size()];
          rest /= classes[i].size();
          values[i] = cls.first;
          weight *= cls.second;
        }
      } else {
        draw_sample(std::get<ValuationSample>(source).seed, index, values);
      }
      out.instances += weight;
      inst.allocate(values, threshold, alloc);
      if (!alloc.branch) continue;
      for (std::size_t i = 1; i <= k; ++i) {
        const auto buyer = static_cast<NodeId>(i);
        double lowest = std::numeric_limits<double>::infinity();
        for (NodeId w : alloc.tied) {
          lowest = std::min(lowest, winner_or_path_utility(inst, buyer, w, values, cfg));
        }
        if (!(lowest < 0.0)) continue;
        out.violation_count += weight;
        if (out.violations.size() >= options.max_recorded) continue;
        Violation v;
        v.property = Property::kIR;
        v.key = {options.tree_index, 0, index, buyer, 0};
        v.tree = tree;
        v.base_actions = truthful;
        v.valuations = profile_of(values);
        v.buyer = buyer;
        v.truthful_utility = v.deviant_utility = lowest;
        v.config = cfg;
        out.violations.push_back(std::move(v));
      }
    }
  });

  PropertyReport report;
  report.property = Property::kIR;
  for (auto& p : partial) report.merge(std::move(p), options.max_recorded);
  return report;
}

namespace {

struct Deviation {
  NodeId buyer;
  std::size_t index;  // subset mask, or 2^children for opting out
  Report report;
  bool opt_out;
  FpdmInstance instance;
  std::vector<std::vector<NodeId>> paths;
};

struct BaseCase {
  ActionProfile actions;
  FpdmInstance instance;
  std::vector<std::vector<NodeId>> paths;
  std::vector<Deviation> deviations;
};

// (c): nobody other than the winner and her path pays anything.
void check_off_path(const FpdmInstance& inst,
                    const std::vector<std::vector<NodeId>>& paths,
                    const FpdmInstance::Allocation& alloc,
                    const MechanismConfig& config, const InstanceKey& key,
                    PropertyReport& out, std::size_t max_recorded) {
  if (!alloc.branch) return;
  for (NodeId w : alloc.tied) {
    for (std::size_t i = 1; i <= inst.buyer_count(); ++i) {
      const auto buyer = static_cast<NodeId>(i);
      if (buyer == w || on_path(paths[w], buyer)) continue;
      const double p = inst.payment(buyer, w, config);
      if (p == 0.0) continue;
      ++out.invariant_failure_count;
      if (out.invariant_failures.size() < max_recorded) {
        out.invariant_failures.push_back(
            {'c', key,
             "buyer " + std::to_string(buyer) + " pays " + format_double(p) +
                 " although winner " + std::to_string(w) +
                 " is not her descendant"});
      }
    }
  }
}

}  // namespace

PropertyReport check_ic(const SocialTree& tree, const ValuationSource& source,
                        const MechanismConfig& config, IcScope scope,
                        const CheckOptions& options) {
  config.validate();
  MechanismConfig cfg = config;
  cfg.tie_mode = TieMode::kExpectation;
  const ClaimThreshold threshold = cfg.threshold.value_or(ClaimThreshold::kWeak);
  const std::size_t k = tree.buyer_count();
  if (scope == IcScope::kFull && k > 6) {
    refuse("full-scope IC checking is limited to 6 buyers, tree has " +
           std::to_string(k));
  }

  std::vector<ActionProfile> base_profiles;
  if (scope == IcScope::kFull) {
    base_profiles = enumerate_action_profiles(tree);
  } else {
    base_profiles.push_back(ActionProfile::truthful(tree));
  }

  PropertyReport report;
  report.property = Property::kIC;

  std::vector<BaseCase> bases;
  std::uint64_t comparisons_per_profile = 0;
  for (std::size_t b = 0; b < base_profiles.size(); ++b) {
    const ActionProfile& actions = base_profiles[b];
    FpdmInstance inst(tree, actions);
    BaseCase base{actions, inst, all_paths(inst), {}};
    for (std::size_t i = 1; i <= k; ++i) {
      const auto buyer = static_cast<NodeId>(i);
      const Report& r = actions.report(buyer);
      const auto kids = tree.children(buyer);
      if (!r || r->size() != kids.size()) continue;  // not informed, or not truthful
      if (kids.size() >= 20) refuse("buyer has too many children to enumerate");
      const std::size_t full = (std::size_t{1} << kids.size()) - 1;
      std::vector<std::pair<std::size_t, Report>> alternatives;
      for (std::size_t mask = 0; mask < full; ++mask) {
        std::vector<NodeId> chosen;
        for (std::size_t j = 0; j < kids.size(); ++j) {
          if (mask >> j & 1U) chosen.push_back(kids[j]);
        }
        alternatives.emplace_back(mask, std::move(chosen));
      }
      if (options.include_opt_out && tree.parent(buyer) != kSeller) {
        alternatives.emplace_back(full + 1, std::nullopt);
      }
      for (auto& [index, report_choice] : alternatives) {
        ActionProfile deviant = actions;
        deviant.set(buyer, report_choice);
        deviant = canonicalize(tree, std::move(deviant));
        const bool opt_out = !report_choice.has_value();
        FpdmInstance dev_inst(tree, deviant,
                              opt_out ? Participation::kAllowOptOut
                                      : Participation::kStrict);

        // (a) the deviator's own branch keeps its price.
        const NodeId root = branch_root(inst.effective(), buyer);
        const auto base_idx = inst.decomposition().index_of_root(root);
        const auto dev_idx = dev_inst.decomposition().index_of_root(root);
        if (!dev_idx || inst.prices()[*base_idx] != dev_inst.prices()[*dev_idx]) {
          ++report.invariant_failure_count;
          if (report.invariant_failures.size() < options.max_recorded) {
            report.invariant_failures.push_back(
                {'a', {options.tree_index, b, 0, buyer, index},
                 "price of branch " + std::to_string(root) +
                     " changed under a deviation by buyer " +
                     std::to_string(buyer)});
          }
        }
        auto paths = all_paths(dev_inst);
        base.deviations.push_back({buyer, index, report_choice, opt_out,
                                   std::move(dev_inst), std::move(paths)});
      }
    }
    comparisons_per_profile += base.deviations.size();
    bases.push_back(std::move(base));
  }

  const bool grid = std::holds_alternative<ValuationGrid>(source);
  std::vector<double> points;
  std::uint64_t total = 0;
  if (grid) {
    points = grid_points(std::get<ValuationGrid>(source));
    total = checked_power(points.size(), k, options.max_work);
  } else {
    total = std::get<ValuationSample>(source).count;
  }
  const std::uint64_t work = total * (bases.size() + comparisons_per_profile);
  if (total > options.max_work ||
      (total > 0 && work / total != bases.size() + comparisons_per_profile) ||
      work > options.max_work) {
    refuse("IC check would examine more than " +
           std::to_string(options.max_work) +
           " (profile, deviation) pairs; use a coarser grid or sampling");
  }

  struct Tally {
    std::uint64_t profitable = 0;
    double max_gain = -std::numeric_limits<double>::infinity();
  };
  const std::size_t chunks = chunk_count(total, options.workers);
  std::vector<PropertyReport> partial(chunks);
  std::vector<std::vector<std::vector<Tally>>> tallies(chunks);
  run_chunks(total, chunks, [&](std::size_t c, std::uint64_t begin,
                                std::uint64_t end) {
    PropertyReport& out = partial[c];
    out.property = Property::kIC;
    auto& tally = tallies[c];
    for (const BaseCase& base : bases) tally.emplace_back(base.deviations.size());
    std::vector<double> values(k + 1, 0.0);
    FpdmInstance::Allocation base_alloc;
    FpdmInstance::Allocation dev_alloc;
    for (std::uint64_t index = begin; index < end; ++index) {
      if (grid) {
        decode_grid(index, points, values);
      } else {
        draw_sample(std::get<ValuationSample>(source).seed, index, values);
      }
      for (std::size_t b = 0; b < bases.size(); ++b) {
        const BaseCase& base = bases[b];
        ++out.instances;
        base.instance.allocate(values, threshold, base_alloc);
        check_off_path(base.instance, base.paths, base_alloc, cfg,
                       {options.tree_index, b, index, kNoNode, 0}, out,
                       options.max_recorded);
        for (std::size_t d = 0; d < base.deviations.size(); ++d) {
          const Deviation& dev = base.deviations[d];
          ++out.deviations;
          const InstanceKey key{options.tree_index, b, index, dev.buyer, dev.index};
          dev.instance.allocate(values, threshold, dev_alloc);
          check_off_path(dev.instance, dev.paths, dev_alloc, cfg, key, out,
                         options.max_recorded);

          // (b) path payment unchanged when the winner is unchanged.
          if (base_alloc.branch && dev_alloc.branch) {
            for (NodeId w : base_alloc.tied) {
              if (!on_path(base.paths[w], dev.buyer)) continue;
              if (std::find(dev_alloc.tied.begin(), dev_alloc.tied.end(), w) ==
                  dev_alloc.tied.end()) {
                continue;
              }
              const double before = base.instance.payment(dev.buyer, w, cfg);
              const double after = dev.instance.payment(dev.buyer, w, cfg);
              if (before == after) continue;
              ++out.invariant_failure_count;
              if (out.invariant_failures.size() < options.max_recorded) {
                out.invariant_failures.push_back(
                    {'b', key,
                     "path payment of buyer " + std::to_string(dev.buyer) +
                         " moved from " + format_double(before) + " to " +
                         format_double(after) + " with winner " +
                         std::to_string(w) + " unchanged"});
              }
            }
          }

          const double truthful =
              expected_utility(base.instance, base_alloc, dev.buyer, values, cfg);
          const double deviant =
              dev.instance.effective().contains(dev.buyer)
                  ? expected_utility(dev.instance, dev_alloc, dev.buyer, values, cfg)
                  : 0.0;
          Tally& t = tally[b][d];
          t.max_gain = std::max(t.max_gain, deviant - truthful);
          if (!(deviant > truthful + kUtilityTolerance)) continue;
          ++t.profitable;
          ++out.violation_count;
          if (out.violations.size() >= options.max_recorded) continue;
          Violation v;
          v.property = Property::kIC;
          v.key = key;
          v.tree = tree;
          v.base_actions = base.actions;
          v.valuations = profile_of(values);
          v.buyer = dev.buyer;
          v.deviant_report = dev.report;
          v.opt_out = dev.opt_out;
          v.truthful_utility = truthful;
          v.deviant_utility = deviant;
          v.config = cfg;
          out.violations.push_back(std::move(v));
        }
      }
    }
  });

  for (auto& p : partial) report.merge(std::move(p), options.max_recorded);
  const std::vector<Edge> edges = tree.edges();
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (std::size_t d = 0; d < bases[b].deviations.size(); ++d) {
      const Deviation& dev = bases[b].deviations[d];
      DeviationVerdict v;
      v.key = {options.tree_index, b, 0, dev.buyer, dev.index};
      v.tree = edges;
      v.report = dev.report;
      v.opt_out = dev.opt_out;
      v.alpha = cfg.alpha;
      v.profiles = total;
      double gain = -std::numeric_limits<double>::infinity();
      for (const auto& tally : tallies) {
        if (tally.empty()) continue;
        v.profitable += tally[b][d].profitable;
        gain = std::max(gain, tally[b][d].max_gain);
      }
      v.max_gain = total == 0 ? 0.0 : gain;
      if (v.max_gain == 0.0) v.max_gain = 0.0;
      report.verdicts.push_back(std::move(v));
    }
  }
  return report;
}

ReplayedUtilities replay(const Violation& violation) {
  const auto run = [&](const ActionProfile& actions, Participation part) {
    return run_fpdm(violation.tree, actions, violation.valuations,
                    violation.config, 0, part);
  };
  ReplayedUtilities out;
  if (violation.property == Property::kIR) {
    const OutcomeDistribution dist =
        run(violation.base_actions, Participation::kStrict);
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& wo : dist.outcomes) {
      lowest = std::min(lowest,
                        utilities(wo.outcome, violation.valuations)[violation.buyer]);
    }
    out.truthful = out.deviant = lowest;
    return out;
  }
  out.truthful = expected_utilities(
      run(violation.base_actions, Participation::kStrict),
      violation.valuations)[violation.buyer];
  ActionProfile deviant = violation.base_actions;
  deviant.set(violation.buyer, violation.deviant_report);
  deviant = canonicalize(violation.tree, std::move(deviant));
  const Participation part =
      violation.opt_out ? Participation::kAllowOptOut : Participation::kStrict;
  const UtilityVector u =
      expected_utilities(run(deviant, part), violation.valuations);
  out.deviant = u[violation.buyer];
  return out;
}

bool SuiteReport::violations_are_findings() const {
  return options.property == Property::kIC ||
         options.reward_mode == RewardMode::kLiteral;
}

bool SuiteReport::hard_invariants_hold() const {
  if (report.invariant_failure_count != 0) return false;
  return violations_are_findings() || report.violation_count == 0;
}

SuiteReport run_suite(const SuiteOptions& options) {
  if (options.alphas.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one alpha is required");
  }
  if (options.property == Property::kIC && options.scope == IcScope::kFull &&
      options.max_buyers > 6) {
    refuse("full-scope IC checking is limited to 6 buyers");
  }
  SuiteReport suite;
  suite.options = options;
  suite.report.property = options.property;
  const std::vector<SocialTree> trees =
      enumerate_rooted_trees_up_to(options.max_buyers);
  suite.trees = trees.size();
  for (std::size_t a = 0; a < options.alphas.size(); ++a) {
    MechanismConfig config;
    config.alpha = options.alphas[a];
    config.reward_mode = options.reward_mode;
    config.threshold = options.threshold;
    config.tie_mode = TieMode::kExpectation;
    for (std::size_t t = 0; t < trees.size(); ++t) {
      CheckOptions check = options.check;
      check.tree_index = a * trees.size() + t;
      PropertyReport r =
          options.property == Property::kIR
              ? check_ir(trees[t], options.source, config, check)
              : check_ic(trees[t], options.source, config, options.scope, check);
      suite.report.merge(std::move(r), options.check.max_recorded);
    }
  }
  return suite;
}

namespace {

std::string edges_text(const SocialTree& tree) {
  std::string out;
  for (const Edge& e : tree.edges()) {
    if (!out.empty()) out += ' ';
    out += std::to_string(e.parent) + "-" + std::to_string(e.child);
  }
  return out;
}

std::string valuations_text(const ValuationProfile& v) {
  std::string out;
  for (std::size_t i = 1; i <= v.buyer_count(); ++i) {
    if (!v.has(static_cast<NodeId>(i))) continue;
    if (!out.empty()) out += ' ';
    out += std::to_string(i) + ":" + format_double(v.at(static_cast<NodeId>(i)));
  }
  return out;
}

std::string report_text(const Report& r) {
  if (!r) return "nil";
  std::string out = "{";
  for (std::size_t j = 0; j < r->size(); ++j) {
    if (j) out += ',';
    out += std::to_string((*r)[j]);
  }
  return out + "}";
}

std::string profile_text(const ActionProfile& actions) {
  std::string out;
  for (std::size_t i = 1; i <= actions.buyer_count(); ++i) {
    if (!out.empty()) out += ' ';
    out += std::to_string(i) + ":" + report_text(actions.report(static_cast<NodeId>(i)));
  }
  return out;
}

const char* source_text(const ValuationSource& source, std::string& buffer) {
  if (const auto* g = std::get_if<ValuationGrid>(&source)) {
    buffer = "grid " + format_double(g->step);
  } else {
    const auto& s = std::get<ValuationSample>(source);
    buffer = "sample " + std::to_string(s.count) + " seed " + std::to_string(s.seed);
  }
  return buffer.c_str();
}

}  // namespace

std::string format_report(const SuiteReport& suite) {
  const SuiteOptions& o = suite.options;
  const PropertyReport& r = suite.report;
  std::ostringstream out;
  std::string buffer;
  out << "property = " << to_string(o.property) << '\n';
  out << "max_buyers = " << o.max_buyers << '\n';
  out << "valuations = " << source_text(o.source, buffer) << '\n';
  out << "alphas =";
  for (double a : o.alphas) out << ' ' << format_double(a);
  out << '\n';
  out << "reward_mode = "
      << (o.reward_mode == RewardMode::kClamped ? "clamped" : "literal") << '\n';
  out << "threshold = "
      << (!o.threshold ? "default"
                       : *o.threshold == ClaimThreshold::kWeak ? "weak" : "strict")
      << '\n';
  if (o.property == Property::kIC) {
    out << "scope = " << (o.scope == IcScope::kFull ? "full" : "unilateral") << '\n';
    out << "opt_out = " << (o.check.include_opt_out ? "yes" : "no") << '\n';
  }
  out << "trees = " << suite.trees << '\n';
  out << "instances = " << r.instances << '\n';
  if (o.property == Property::kIC) out << "deviations = " << r.deviations << '\n';
  out << "violations = " << r.violation_count << '\n';
  out << "violations_recorded = " << r.violations.size() << '\n';
  out << "invariant_failures = " << r.invariant_failure_count << '\n';
  out << "violations_are_findings = "
      << (suite.violations_are_findings() ? "yes" : "no") << '\n';
  out << "hard_invariants = " << (suite.hard_invariants_hold() ? "pass" : "fail")
      << '\n';
  if (o.property == Property::kIC && !r.verdicts.empty()) {
    out << "\n[deviations]\n";
    for (const DeviationVerdict& d : r.verdicts) {
      std::string edges;
      for (const Edge& e : d.tree) {
        if (!edges.empty()) edges += ',';
        edges += std::to_string(e.parent) + "-" + std::to_string(e.child);
      }
      out << "alpha=" << format_double(d.alpha) << " tree=" << edges
          << " profile=" << d.key.base_profile << " buyer=" << d.key.buyer
          << " report=" << report_text(d.report) << (d.opt_out ? "(opt-out)" : "")
          << " profiles=" << d.profiles << " profitable=" << d.profitable
          << " max_gain=" << format_double(d.max_gain) << " verdict="
          << (d.profitable == 0 ? "not-profitable" : "profitable") << '\n';
    }
  }
  for (std::size_t i = 0; i < r.invariant_failures.size(); ++i) {
    const InvariantFailure& f = r.invariant_failures[i];
    out << "\n[invariant_failure " << i << "]\n";
    out << "invariant = " << f.invariant << '\n';
    out << "key = " << f.key.tree << ' ' << f.key.base_profile << ' '
        << f.key.valuation << ' ' << f.key.buyer << ' ' << f.key.deviation << '\n';
    out << "detail = " << f.detail << '\n';
  }
  for (std::size_t i = 0; i < r.violations.size(); ++i) {
    const Violation& v = r.violations[i];
    out << "\n[violation " << i << "]\n";
    out << "tree = " << edges_text(v.tree) << '\n';
    out << "actions = " << profile_text(v.base_actions) << '\n';
    out << "valuations = " << valuations_text(v.valuations) << '\n';
    out << "alpha = " << format_double(v.config.alpha) << '\n';
    out << "buyer = " << v.buyer << '\n';
    if (v.property == Property::kIC) {
      out << "deviation = " << report_text(v.deviant_report)
          << (v.opt_out ? " (opt-out)" : "") << '\n';
      out << "truthful_utility = " << format_double(v.truthful_utility) << '\n';
      out << "deviant_utility = " << format_double(v.deviant_utility) << '\n';
    } else {
      out << "utility = " << format_double(v.truthful_utility) << '\n';
    }
  }
  return out.str();
}

MonteCarloEstimate monte_carlo_revenue(const SocialTree& tree,
                                       const ActionProfile& actions,
                                       const MechanismConfig& config,
                                       std::size_t replications,
                                       std::uint64_t seed,
                                       MechanismKind mechanism,
                                       std::size_t workers) {
  config.validate();
  if (replications == 0) {
    throw Error(ErrorCode::kInvalidArgument, "at least one replication is required");
  }
  const std::size_t k = tree.buyer_count();
  std::optional<FpdmInstance> inst;
  ClaimThreshold threshold;
  double base_price = 0.0;
  std::vector<NodeId> neighbours(tree.seller_children().begin(),
                                 tree.seller_children().end());
  if (mechanism == MechanismKind::kFpdm) {
    inst.emplace(tree, actions);
    threshold = config.threshold.value_or(ClaimThreshold::kWeak);
  } else {
    threshold = config.threshold.value_or(ClaimThreshold::kStrict);
    base_price = optimal_price(static_cast<std::int64_t>(neighbours.size()));
  }

  // Gross revenue is the posted price of the winning branch whichever tied
  // buyer is picked, so ties need no resolution here.
  std::vector<double> revenue(replications, 0.0);
  const std::size_t chunks = chunk_count(replications, workers);
  run_chunks(replications, chunks, [&](std::size_t, std::uint64_t begin,
                                       std::uint64_t end) {
    std::vector<double> values(k + 1, 0.0);
    FpdmInstance::Allocation alloc;
    for (std::uint64_t r = begin; r < end; ++r) {
      draw_sample(seed, r, values);
      if (inst) {
        inst->allocate(values, threshold, alloc);
        if (alloc.branch) revenue[r] = inst->prices()[*alloc.branch];
      } else {
        for (NodeId c : neighbours) {
          if (claims(values[c], base_price, threshold)) {
            revenue[r] = base_price;
            break;
          }
        }
      }
    }
  });

  MonteCarloEstimate est;
  est.replications = replications;
  est.seed = seed;
  double sum = 0.0;
  for (double x : revenue) sum += x;
  est.mean = sum / static_cast<double>(replications);
  if (replications > 1) {
    double squares = 0.0;
    for (double x : revenue) squares += (x - est.mean) * (x - est.mean);
    const double variance = squares / static_cast<double>(replications - 1);
    est.standard_error = std::sqrt(variance / static_cast<double>(replications));
  }
  return est;
}

std::vector<DominanceEntry> DominanceReport::non_dominant() const {
  std::vector<DominanceEntry> out;
  for (const auto& e : entries) {
    if (!e.dominant) out.push_back(e);
  }
  return out;
}

namespace {

void partitions(std::int64_t remaining, std::int64_t largest,
                std::vector<std::int64_t>& current,
                std::vector<std::vector<std::int64_t>>& out) {
  if (remaining == 0) {
    out.push_back(current);
    return;
  }
  for (std::int64_t part = std::min(remaining, largest); part >= 1; --part) {
    current.push_back(part);
    partitions(remaining - part, part, current, out);
    current.pop_back();
  }
}

}  // namespace

DominanceReport revenue_dominance_scan(std::int64_t max_total) {
  if (max_total < 1 || max_total > 14) {
    throw Error(ErrorCode::kInvalidArgument,
                "dominance scan supports totals 1..14");
  }
  DominanceReport report;
  report.max_total = max_total;
  for (std::int64_t total = 1; total <= max_total; ++total) {
    std::vector<std::vector<std::int64_t>> all;
    std::vector<std::int64_t> current;
    partitions(total, total, current, all);
    for (auto& sizes : all) {
      DominanceEntry e;
      e.e_fpdm = expected_revenue_fpdm(sizes);
      e.e_base = expected_revenue_base(static_cast<std::int64_t>(sizes.size()));
      e.dominant = e.e_fpdm > e.e_base;
      e.sizes = std::move(sizes);
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

}  // namespace fpdm
