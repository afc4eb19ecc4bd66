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

#include "fpdm/fpdm.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <random>
#include <string>

#include "fpdm/error.hpp"
#include "fpdm/io.hpp"
#include "fpdm/mechanisms.hpp"
#include "fpdm/network.hpp"
#include "fpdm/pricing.hpp"
#include "fpdm/rng.hpp"
#include "fpdm/verification.hpp"

struct fpdm_instance {
  fpdm::TreeFile file;
  fpdm::ActionProfile actions;
  fpdm::ValuationProfile valuations;
};

struct fpdm_result {
  std::string mechanism;
  fpdm::OutcomeDistribution distribution;
  fpdm::TreeFile file;
  fpdm::ValuationProfile valuations;
};

struct fpdm_curve {
  std::vector<fpdm::RevenuePoint> points;
};

struct fpdm_report {
  fpdm::SuiteReport suite;
  std::string text;
};

namespace {

thread_local std::string last_error;

fpdm_status to_status(fpdm::ErrorCode code) {
  using fpdm::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return FPDM_ERROR_INVALID_ARGUMENT;
    case ErrorCode::kCycle:
    case ErrorCode::kDisconnected:
    case ErrorCode::kDuplicateParent:
    case ErrorCode::kNonContiguousIds: return FPDM_ERROR_INVALID_TREE;
    case ErrorCode::kInfeasibleProfile: return FPDM_ERROR_INFEASIBLE_PROFILE;
    case ErrorCode::kMissingValuation: return FPDM_ERROR_MISSING_VALUATION;
    case ErrorCode::kParse: return FPDM_ERROR_PARSE;
    case ErrorCode::kIo: return FPDM_ERROR_IO;
    case ErrorCode::kScopeTooLarge: return FPDM_ERROR_SCOPE;
  }
  return FPDM_ERROR_INTERNAL;
}

fpdm_status fail(fpdm_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename Fn>
fpdm_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return FPDM_OK;
  } catch (const fpdm::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FPDM_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FPDM_ERROR_INTERNAL, e.what());
  }
}

void require(bool condition, const char* message) {
  if (!condition) throw fpdm::Error(fpdm::ErrorCode::kInvalidArgument, message);
}

fpdm::MechanismConfig to_config(const fpdm_config* config) {
  const fpdm_config c = config ? *config : fpdm_default_config();
  fpdm::MechanismConfig out;
  out.alpha = c.alpha;
  out.reward_mode = c.reward_mode == FPDM_REWARD_LITERAL
                        ? fpdm::RewardMode::kLiteral
                        : fpdm::RewardMode::kClamped;
  if (c.threshold == FPDM_THRESHOLD_STRICT) out.threshold = fpdm::ClaimThreshold::kStrict;
  if (c.threshold == FPDM_THRESHOLD_WEAK) out.threshold = fpdm::ClaimThreshold::kWeak;
  out.tie_mode = c.tie_mode == FPDM_TIE_EXPECTATION ? fpdm::TieMode::kExpectation
                                                    : fpdm::TieMode::kSeededRandom;
  out.validate();
  return out;
}

fpdm::NodeId buyer_of(const fpdm_instance& inst, int64_t label) {
  require(label != 0, "label 0 is the seller");
  return inst.file.id_of(label);
}

const fpdm::Outcome& outcome_at(const fpdm_result* result, size_t outcome) {
  require(result != nullptr, "null result");
  require(outcome < result->distribution.outcomes.size(), "outcome index out of range");
  return result->distribution.outcomes[outcome].outcome;
}

fpdm_status copy_text(const std::string& text, char* buffer, size_t capacity,
                      size_t* required) {
  if (required) *required = text.size() + 1;
  if (buffer && capacity >= text.size() + 1) {
    std::memcpy(buffer, text.data(), text.size());
    buffer[text.size()] = '\0';
    return FPDM_OK;
  }
  if (!buffer && capacity == 0) return FPDM_OK;
  return fail(FPDM_ERROR_INVALID_ARGUMENT, "buffer too small");
}

fpdm_instance* make_instance(fpdm::TreeFile file) {
  auto* inst = new fpdm_instance{std::move(file), {}, {}};
  inst->actions = fpdm::ActionProfile::truthful(inst->file.tree);
  inst->valuations = fpdm::ValuationProfile(inst->file.tree.buyer_count());
  return inst;
}

}  // namespace

extern "C" {

const char* fpdm_last_error(void) { return last_error.c_str(); }

const char* fpdm_status_name(fpdm_status status) {
  switch (status) {
    case FPDM_OK: return "ok";
    case FPDM_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case FPDM_ERROR_INVALID_TREE: return "invalid tree";
    case FPDM_ERROR_INFEASIBLE_PROFILE: return "infeasible action profile";
    case FPDM_ERROR_MISSING_VALUATION: return "missing valuation";
    case FPDM_ERROR_PARSE: return "parse error";
    case FPDM_ERROR_IO: return "i/o error";
    case FPDM_ERROR_SCOPE: return "scope too large";
    case FPDM_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

fpdm_config fpdm_default_config(void) {
  return fpdm_config{0.1, FPDM_REWARD_CLAMPED, FPDM_THRESHOLD_DEFAULT,
                     FPDM_TIE_SEEDED};
}

fpdm_status fpdm_optimal_price(int64_t buyers, double* out) {
  return guarded([&] {
    require(out, "null output");
    *out = fpdm::optimal_price(buyers);
  });
}

fpdm_status fpdm_expected_revenue_base(int64_t buyers, double* out) {
  return guarded([&] {
    require(out, "null output");
    *out = fpdm::expected_revenue_base(buyers);
  });
}

fpdm_status fpdm_expected_revenue_opt(int64_t buyers, double* out) {
  return guarded([&] {
    require(out, "null output");
    *out = fpdm::expected_revenue_opt(buyers);
  });
}

fpdm_status fpdm_expected_revenue_fpdm(const int64_t* sizes, size_t count,
                                       double* out) {
  return guarded([&] {
    require(out && (sizes || count == 0), "null argument");
    *out = fpdm::expected_revenue_fpdm(std::span<const std::int64_t>(sizes, count));
  });
}

fpdm_status fpdm_chain_case_revenue(int64_t neighbours, int64_t buyers,
                                    double* out) {
  return guarded([&] {
    require(out, "null output");
    *out = fpdm::chain_case_revenue(neighbours, buyers);
  });
}

fpdm_status fpdm_brute_force_optimal_price(int64_t buyers, double step,
                                           double* out) {
  return guarded([&] {
    require(out, "null output");
    *out = fpdm::brute_force_optimal_price(buyers, step);
  });
}

fpdm_status fpdm_instance_load(const char* tree_path, const char* valuations_path,
                               const char* actions_path, fpdm_instance** out) {
  return guarded([&] {
    require(tree_path && out, "null argument");
    *out = nullptr;
    fpdm::TreeFile file = fpdm::parse_tree(fpdm::read_file(tree_path));
    auto* inst = make_instance(std::move(file));
    try {
      if (actions_path) {
        inst->actions = fpdm::parse_actions(fpdm::read_file(actions_path), inst->file);
      }
      if (valuations_path) {
        inst->valuations =
            fpdm::parse_valuations(fpdm::read_file(valuations_path), inst->file);
      }
    } catch (...) {
      delete inst;
      throw;
    }
    *out = inst;
  });
}

fpdm_status fpdm_instance_from_edges(const int64_t* parents, const int64_t* children,
                                     size_t edge_count, fpdm_instance** out) {
  return guarded([&] {
    require(out && ((parents && children) || edge_count == 0), "null argument");
    *out = nullptr;
    std::string text;
    for (size_t i = 0; i < edge_count; ++i) {
      require(parents[i] >= 0 && children[i] >= 0, "labels must be non-negative");
      text += "edge " + std::to_string(parents[i]) + " " +
              std::to_string(children[i]) + "\n";
    }
    *out = make_instance(fpdm::parse_tree(text));
  });
}

void fpdm_instance_free(fpdm_instance* instance) { delete instance; }

size_t fpdm_instance_buyer_count(const fpdm_instance* instance) {
  return instance ? instance->file.tree.buyer_count() : 0;
}

fpdm_status fpdm_instance_label(const fpdm_instance* instance, size_t id,
                                int64_t* label) {
  return guarded([&] {
    require(instance && label, "null argument");
    require(id >= 1 && id <= instance->file.tree.buyer_count(), "id out of range");
    *label = instance->file.label_of(static_cast<fpdm::NodeId>(id));
  });
}

fpdm_status fpdm_instance_set_valuation(fpdm_instance* instance, int64_t buyer,
                                        double value) {
  return guarded([&] {
    require(instance, "null instance");
    instance->valuations.set(buyer_of(*instance, buyer), value);
  });
}

fpdm_status fpdm_instance_sample_valuations(fpdm_instance* instance,
                                            uint64_t seed) {
  return guarded([&] {
    require(instance, "null instance");
    std::mt19937_64 engine(seed);
    for (size_t i = 1; i <= instance->file.tree.buyer_count(); ++i) {
      const double v = fpdm::uniform01(engine);
      const auto id = static_cast<fpdm::NodeId>(i);
      if (!instance->valuations.has(id)) instance->valuations.set(id, v);
    }
  });
}

fpdm_status fpdm_instance_set_report(fpdm_instance* instance, int64_t buyer,
                                     const int64_t* children, size_t count) {
  return guarded([&] {
    require(instance && (children || count == 0), "null argument");
    const fpdm::NodeId id = buyer_of(*instance, buyer);
    const auto kids = instance->file.tree.children(id);
    std::vector<fpdm::NodeId> reported;
    for (size_t j = 0; j < count; ++j) {
      const fpdm::NodeId c = buyer_of(*instance, children[j]);
      if (!std::binary_search(kids.begin(), kids.end(), c)) {
        throw fpdm::Error(fpdm::ErrorCode::kInfeasibleProfile,
                          "buyer " + std::to_string(buyer) + " has no child " +
                              std::to_string(children[j]));
      }
      reported.push_back(c);
    }
    instance->actions.set(id, std::move(reported));
  });
}

fpdm_status fpdm_instance_set_nil(fpdm_instance* instance, int64_t buyer) {
  return guarded([&] {
    require(instance, "null instance");
    instance->actions.set(buyer_of(*instance, buyer), std::nullopt);
  });
}

fpdm_status fpdm_run(const fpdm_instance* instance, fpdm_mechanism mechanism,
                     const fpdm_config* config, uint64_t seed, fpdm_result** out) {
  return guarded([&] {
    require(instance && out, "null argument");
    *out = nullptr;
    const fpdm::MechanismConfig cfg = to_config(config);
    const auto& tree = instance->file.tree;
    auto result = std::make_unique<fpdm_result>();
    if (mechanism == FPDM_MECHANISM_BASELINE) {
      result->mechanism = "baseline";
      result->distribution =
          fpdm::run_baseline(tree, instance->valuations, cfg, seed);
    } else {
      result->mechanism = "fpdm";
      const fpdm::ActionProfile actions =
          fpdm::canonicalize(tree, instance->actions);
      result->distribution =
          fpdm::run_fpdm(tree, actions, instance->valuations, cfg, seed);
    }
    result->file = instance->file;
    result->valuations = instance->valuations;
    *out = result.release();
  });
}

void fpdm_result_free(fpdm_result* result) { delete result; }

size_t fpdm_result_outcome_count(const fpdm_result* result) {
  return result ? result->distribution.outcomes.size() : 0;
}

fpdm_status fpdm_result_summary(const fpdm_result* result, size_t outcome,
                                fpdm_outcome_summary* out) {
  return guarded([&] {
    require(out, "null output");
    const fpdm::Outcome& o = outcome_at(result, outcome);
    out->probability = result->distribution.outcomes[outcome].probability;
    out->has_winner = o.winner.has_value();
    out->winner = o.winner ? result->file.label_of(*o.winner) : -1;
    out->branch_root = o.winning_branch ? result->file.label_of(*o.winning_branch) : -1;
    out->price = o.price;
    out->gross_revenue = o.gross_revenue;
    out->net_revenue = o.net_revenue;
    out->visits = o.trace.visits.size();
  });
}

fpdm_status fpdm_result_payment(const fpdm_result* result, size_t outcome,
                                int64_t buyer, double* payment, double* utility) {
  return guarded([&] {
    const fpdm::Outcome& o = outcome_at(result, outcome);
    require(buyer != 0, "label 0 is the seller");
    const fpdm::NodeId id = result->file.id_of(buyer);
    require(static_cast<size_t>(id) < o.payments.size(), "buyer out of range");
    if (payment) *payment = o.payments[id];
    if (utility) {
      *utility = o.winner == id ? result->valuations.at(id) - o.payments[id]
                                : -o.payments[id];
    }
  });
}

fpdm_status fpdm_result_visit(const fpdm_result* result, size_t outcome,
                              size_t visit, fpdm_branch_visit* out) {
  return guarded([&] {
    require(out, "null output");
    const fpdm::Outcome& o = outcome_at(result, outcome);
    require(visit < o.trace.visits.size(), "visit index out of range");
    const fpdm::BranchVisit& v = o.trace.visits[visit];
    out->root = result->file.label_of(v.root);
    out->price = v.price;
    out->size = v.size;
    out->outside = v.outside;
    out->claimer_count = v.claimers.size();
  });
}

fpdm_status fpdm_result_visit_claimer(const fpdm_result* result, size_t outcome,
                                      size_t visit, size_t j, int64_t* label) {
  return guarded([&] {
    require(label, "null output");
    const fpdm::Outcome& o = outcome_at(result, outcome);
    require(visit < o.trace.visits.size(), "visit index out of range");
    const auto& claimers = o.trace.visits[visit].claimers;
    require(j < claimers.size(), "claimer index out of range");
    *label = result->file.label_of(claimers[j]);
  });
}

fpdm_status fpdm_result_tied(const fpdm_result* result, size_t outcome,
                             int64_t* labels, size_t capacity, size_t* count) {
  return guarded([&] {
    const fpdm::Outcome& o = outcome_at(result, outcome);
    if (count) *count = o.trace.tied.size();
    require(labels || capacity == 0, "null buffer");
    for (size_t j = 0; j < o.trace.tied.size() && j < capacity; ++j) {
      labels[j] = result->file.label_of(o.trace.tied[j]);
    }
  });
}

fpdm_status fpdm_result_record(const fpdm_result* result, char* buffer,
                               size_t capacity, size_t* required) {
  std::string text;
  const fpdm_status s = guarded([&] {
    require(result, "null result");
    text = fpdm::format_outcome_record(result->distribution, result->valuations,
                                       result->file, result->mechanism);
  });
  return s == FPDM_OK ? copy_text(text, buffer, capacity, required) : s;
}

fpdm_status fpdm_result_write_record(const fpdm_result* result, const char* path) {
  return guarded([&] {
    require(result && path, "null argument");
    fpdm::write_file(path, fpdm::format_outcome_record(result->distribution,
                                                       result->valuations,
                                                       result->file,
                                                       result->mechanism));
  });
}

fpdm_status fpdm_simulate(const fpdm_instance* instance, fpdm_mechanism mechanism,
                          const fpdm_config* config, uint64_t replications,
                          uint64_t seed, size_t workers, fpdm_estimate* out) {
  return guarded([&] {
    require(instance && out, "null argument");
    const fpdm::MechanismConfig cfg = to_config(config);
    const auto& tree = instance->file.tree;
    const fpdm::ActionProfile actions = fpdm::canonicalize(tree, instance->actions);
    const bool baseline = mechanism == FPDM_MECHANISM_BASELINE;
    const fpdm::MonteCarloEstimate est = fpdm::monte_carlo_revenue(
        tree, actions, cfg, replications, seed,
        baseline ? fpdm::MechanismKind::kBaseline : fpdm::MechanismKind::kFpdm,
        workers);
    double closed_form = 0.0;
    if (baseline) {
      closed_form = fpdm::expected_revenue_base(
          static_cast<std::int64_t>(tree.seller_children().size()));
    } else {
      fpdm::validate_profile(tree, actions);
      const auto decomposition = fpdm::branches(fpdm::effective_tree(tree, actions));
      std::vector<std::int64_t> sizes;
      for (const auto& b : decomposition.branches) {
        sizes.push_back(static_cast<std::int64_t>(b.size));
      }
      closed_form = fpdm::expected_revenue_fpdm(sizes);
    }
    out->replications = est.replications;
    out->mean = est.mean;
    out->standard_error = est.standard_error;
    out->seed = est.seed;
    out->closed_form = closed_form;
    out->z_score = est.standard_error > 0.0
                       ? (est.mean - closed_form) / est.standard_error
                       : 0.0;
  });
}

fpdm_status fpdm_curve_chain(int64_t neighbours, int64_t k_min, int64_t k_max,
                             fpdm_curve** out) {
  return guarded([&] {
    require(out, "null output");
    *out = new fpdm_curve{
        fpdm::revenue_curve(fpdm::ChainScenario{neighbours}, k_min, k_max)};
  });
}

fpdm_status fpdm_curve_star(int64_t k_min, int64_t k_max, fpdm_curve** out) {
  return guarded([&] {
    require(out, "null output");
    *out = new fpdm_curve{fpdm::revenue_curve(fpdm::StarScenario{}, k_min, k_max)};
  });
}

fpdm_status fpdm_curve_sizes(const int64_t* sizes, const size_t* lengths,
                             size_t count, fpdm_curve** out) {
  return guarded([&] {
    require(out && (count == 0 || (sizes && lengths)), "null argument");
    std::vector<std::vector<std::int64_t>> vectors;
    size_t offset = 0;
    for (size_t i = 0; i < count; ++i) {
      vectors.emplace_back(sizes + offset, sizes + offset + lengths[i]);
      offset += lengths[i];
    }
    *out = new fpdm_curve{fpdm::revenue_curve(vectors)};
  });
}

void fpdm_curve_free(fpdm_curve* curve) { delete curve; }

size_t fpdm_curve_size(const fpdm_curve* curve) {
  return curve ? curve->points.size() : 0;
}

fpdm_status fpdm_curve_point(const fpdm_curve* curve, size_t index,
                             fpdm_revenue_point* out) {
  return guarded([&] {
    require(curve && out, "null argument");
    require(index < curve->points.size(), "index out of range");
    const auto& p = curve->points[index];
    *out = fpdm_revenue_point{p.k, p.x, p.e_fpdm, p.e_base, p.e_opt, p.ratio};
  });
}

fpdm_status fpdm_curve_write_csv(const fpdm_curve* curve, const char* path) {
  return guarded([&] {
    require(curve && path, "null argument");
    fpdm::write_file(path, fpdm::format_curve_csv(curve->points));
  });
}

fpdm_verify_options fpdm_default_verify_options(void) {
  fpdm_verify_options o{};
  o.property = FPDM_PROPERTY_IR;
  o.max_buyers = 6;
  o.grid_step = 0.1;
  o.samples = 0;
  o.seed = 1;
  o.alphas = nullptr;
  o.alpha_count = 0;
  o.reward_mode = FPDM_REWARD_CLAMPED;
  o.threshold = FPDM_THRESHOLD_DEFAULT;
  o.scope = FPDM_SCOPE_UNILATERAL;
  o.include_opt_out = 1;
  o.workers = 1;
  o.max_recorded = 1000;
  return o;
}

fpdm_status fpdm_verify(const fpdm_verify_options* options, fpdm_report** out) {
  return guarded([&] {
    require(options && out, "null argument");
    *out = nullptr;
    fpdm::SuiteOptions s;
    s.property = options->property == FPDM_PROPERTY_IC ? fpdm::Property::kIC
                                                       : fpdm::Property::kIR;
    s.max_buyers = options->max_buyers;
    if (options->samples > 0) {
      s.source = fpdm::ValuationSample{options->samples, options->seed};
    } else {
      s.source = fpdm::ValuationGrid{options->grid_step};
    }
    if (options->alphas && options->alpha_count > 0) {
      s.alphas.assign(options->alphas, options->alphas + options->alpha_count);
    }
    for (double a : s.alphas) {
      fpdm::MechanismConfig c;
      c.alpha = a;
      c.validate();
    }
    s.reward_mode = options->reward_mode == FPDM_REWARD_LITERAL
                        ? fpdm::RewardMode::kLiteral
                        : fpdm::RewardMode::kClamped;
    if (options->threshold == FPDM_THRESHOLD_STRICT) s.threshold = fpdm::ClaimThreshold::kStrict;
    if (options->threshold == FPDM_THRESHOLD_WEAK) s.threshold = fpdm::ClaimThreshold::kWeak;
    s.scope = options->scope == FPDM_SCOPE_FULL ? fpdm::IcScope::kFull
                                                : fpdm::IcScope::kUnilateral;
    s.check.include_opt_out = options->include_opt_out != 0;
    s.check.workers = std::max<size_t>(1, options->workers);
    s.check.max_recorded = options->max_recorded;
    auto report = std::make_unique<fpdm_report>();
    report->suite = fpdm::run_suite(s);
    report->text = fpdm::format_report(report->suite);
    *out = report.release();
  });
}

void fpdm_report_free(fpdm_report* report) { delete report; }

fpdm_status fpdm_report_summary(const fpdm_report* report, fpdm_verify_summary* out) {
  return guarded([&] {
    require(report && out, "null argument");
    const auto& r = report->suite.report;
    out->trees = report->suite.trees;
    out->instances = r.instances;
    out->deviations = r.deviations;
    out->violations = r.violation_count;
    out->violations_recorded = r.violations.size();
    out->invariant_failures = r.invariant_failure_count;
    out->violations_are_findings = report->suite.violations_are_findings();
    out->hard_invariants_hold = report->suite.hard_invariants_hold();
  });
}

fpdm_status fpdm_report_replay(const fpdm_report* report, size_t index,
                               double recorded[2], double replayed[2]) {
  return guarded([&] {
    require(report && recorded && replayed, "null argument");
    const auto& violations = report->suite.report.violations;
    require(index < violations.size(), "violation index out of range");
    const fpdm::Violation& v = violations[index];
    const fpdm::ReplayedUtilities r = fpdm::replay(v);
    recorded[0] = v.truthful_utility;
    recorded[1] = v.deviant_utility;
    replayed[0] = r.truthful;
    replayed[1] = r.deviant;
  });
}

fpdm_status fpdm_report_text(const fpdm_report* report, char* buffer,
                             size_t capacity, size_t* required) {
  if (!report) return fail(FPDM_ERROR_INVALID_ARGUMENT, "null report");
  return copy_text(report->text, buffer, capacity, required);
}

fpdm_status fpdm_report_write(const fpdm_report* report, const char* path) {
  return guarded([&] {
    require(report && path, "null argument");
    fpdm::write_file(path, report->text);
  });
}

}  // extern "C"
