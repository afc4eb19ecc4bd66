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

// fpdm: command-line front end over the C API in libfpdm.

#include <cinttypes>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpdm/fpdm.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

// Thrown when a library call fails; main() turns it into exit status 2.
struct CallFailed {
  std::string message;
};

void check(fpdm_status status, const char* what) {
  if (status == FPDM_OK) return;
  std::string message = std::string(what) + ": " + fpdm_status_name(status);
  const char* detail = fpdm_last_error();
  if (detail && *detail) message += std::string(" (") + detail + ")";
  throw CallFailed{message};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};

using Instance = Handle<fpdm_instance, fpdm_instance_free>;
using Result = Handle<fpdm_result, fpdm_result_free>;
using Curve = Handle<fpdm_curve, fpdm_curve_free>;
using Report = Handle<fpdm_report, fpdm_report_free>;

std::string show(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct MechanismFlags {
  double alpha = 0.1;
  std::string mode = "clamped";
  std::optional<std::string> threshold;
  std::string tiebreak = "seeded";
  std::uint64_t seed = 1;
};

void add_mechanism_flags(CLI::App* cmd, MechanismFlags& f) {
  cmd->add_option("--alpha", f.alpha, "Reward scale in [0,1]")->capture_default_str();
  cmd->add_option("--mode", f.mode, "Path reward rule")
      ->check(CLI::IsMember({"clamped", "literal"}))
      ->capture_default_str();
  cmd->add_option("--threshold", f.threshold, "Claim threshold")
      ->check(CLI::IsMember({"strict", "weak"}));
  cmd->add_option("--tiebreak", f.tiebreak, "Tie resolution")
      ->check(CLI::IsMember({"seeded", "expect"}))
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
}

fpdm_reward_mode reward_mode(const std::string& mode) {
  return mode == "literal" ? FPDM_REWARD_LITERAL : FPDM_REWARD_CLAMPED;
}

fpdm_threshold threshold(const std::optional<std::string>& t) {
  if (!t) return FPDM_THRESHOLD_DEFAULT;
  return *t == "weak" ? FPDM_THRESHOLD_WEAK : FPDM_THRESHOLD_STRICT;
}

fpdm_config to_config(const MechanismFlags& f) {
  fpdm_config c = fpdm_default_config();
  c.alpha = f.alpha;
  c.reward_mode = reward_mode(f.mode);
  c.threshold = threshold(f.threshold);
  c.tie_mode = f.tiebreak == "expect" ? FPDM_TIE_EXPECTATION : FPDM_TIE_SEEDED;
  return c;
}

std::vector<std::int64_t> parse_sizes(const std::string& text) {
  std::vector<std::int64_t> sizes;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v <= 0) {
      throw CLI::ValidationError("--sizes", "expected positive integers, got '" + item + "'");
    }
    sizes.push_back(v);
  }
  if (sizes.empty()) throw CLI::ValidationError("--sizes", "empty size list");
  return sizes;
}

// Builds a tree whose seller neighbours root chains of the given lengths.
void chains_instance(const std::vector<std::int64_t>& sizes, Instance& inst) {
  std::vector<std::int64_t> parents, children;
  std::int64_t next = 1;
  for (std::int64_t s : sizes) {
    std::int64_t parent = 0;
    for (std::int64_t i = 0; i < s; ++i, ++next) {
      parents.push_back(parent);
      children.push_back(next);
      parent = next;
    }
  }
  check(fpdm_instance_from_edges(parents.data(), children.data(), parents.size(),
                                 &inst.ptr),
        "building tree");
}

// ---- price -----------------------------------------------------------------

int cmd_price(std::int64_t x) {
  double p = 0.0, e = 0.0;
  check(fpdm_optimal_price(x, &p), "price");
  check(fpdm_expected_revenue_base(x, &e), "revenue");
  std::printf("x=%" PRId64 " p_opt=%.6f E_base=%.6f\n", x, p, e);
  if (x == 0) {
    std::printf("note: with no neighbours the price is the x -> 0 limit 1/e "
                "and nothing can be sold\n");
  }
  return kExitOk;
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
  std::string tree;
  std::string valuations;
  std::optional<std::string> actions;
  std::optional<std::string> out;
  bool baseline = false;
  MechanismFlags mech;
};

int cmd_run(const RunArgs& a) {
  Instance inst;
  check(fpdm_instance_load(a.tree.c_str(), a.valuations.c_str(),
                           a.actions ? a.actions->c_str() : nullptr, &inst.ptr),
        "loading instance");
  const fpdm_config config = to_config(a.mech);
  Result result;
  check(fpdm_run(inst.ptr,
                 a.baseline ? FPDM_MECHANISM_BASELINE : FPDM_MECHANISM_DIFFUSION,
                 &config, a.mech.seed, &result.ptr),
        "running mechanism");

  const std::size_t n = fpdm_instance_buyer_count(inst.ptr);
  std::vector<std::int64_t> labels(n);
  for (std::size_t id = 1; id <= n; ++id) {
    check(fpdm_instance_label(inst.ptr, id, &labels[id - 1]), "label");
  }
  const std::size_t outcomes = fpdm_result_outcome_count(result.ptr);
  std::printf("mechanism: %s\n", a.baseline ? "baseline" : "fpdm");
  std::printf("outcomes: %zu\n", outcomes);
  for (std::size_t o = 0; o < outcomes; ++o) {
    fpdm_outcome_summary s;
    check(fpdm_result_summary(result.ptr, o, &s), "summary");
    std::printf("\noutcome %zu (probability %s)\n", o + 1, show(s.probability).c_str());
    if (s.has_winner) {
      std::printf("  winner: %" PRId64 "\n", s.winner);
      if (!a.baseline) std::printf("  branch: %" PRId64 "\n", s.branch_root);
      std::printf("  price: %s\n", show(s.price).c_str());
    } else {
      std::printf("  winner: none\n");
    }
    std::printf("  gross revenue: %s\n", show(s.gross_revenue).c_str());
    std::printf("  net revenue: %s\n", show(s.net_revenue).c_str());
    std::printf("  payments:\n");
    for (std::int64_t label : labels) {
      double pay = 0.0, util = 0.0;
      check(fpdm_result_payment(result.ptr, o, label, &pay, &util), "payment");
      std::printf("    %" PRId64 ": payment %s utility %s\n", label,
                  show(pay).c_str(), show(util).c_str());
    }
    std::printf("  trace:\n");
    for (std::size_t v = 0; v < s.visits; ++v) {
      fpdm_branch_visit visit;
      check(fpdm_result_visit(result.ptr, o, v, &visit), "trace");
      std::printf("    branch %" PRId64 " size %zu outside %zu price %s claimers",
                  visit.root, visit.size, visit.outside, show(visit.price).c_str());
      if (visit.claimer_count == 0) std::printf(" none");
      for (std::size_t j = 0; j < visit.claimer_count; ++j) {
        std::int64_t c = 0;
        check(fpdm_result_visit_claimer(result.ptr, o, v, j, &c), "trace");
        std::printf("%s%" PRId64, j == 0 ? " " : ",", c);
      }
      std::printf("\n");
    }
    std::size_t tied = 0;
    check(fpdm_result_tied(result.ptr, o, nullptr, 0, &tied), "ties");
    if (tied > 1) {
      std::vector<std::int64_t> t(tied);
      check(fpdm_result_tied(result.ptr, o, t.data(), t.size(), &tied), "ties");
      std::printf("    tied:");
      for (std::int64_t l : t) std::printf(" %" PRId64, l);
      std::printf("\n");
    }
  }
  if (a.out) {
    check(fpdm_result_write_record(result.ptr, a.out->c_str()), "writing record");
    std::printf("\nrecord written to %s\n", a.out->c_str());
  }
  return kExitOk;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::optional<std::string> tree;
  std::optional<std::string> actions;
  std::optional<std::string> sizes;
  std::optional<std::int64_t> star;
  bool baseline = false;
  std::uint64_t reps = 100000;
  std::size_t workers = 1;
  MechanismFlags mech;
};

int cmd_simulate(const SimulateArgs& a) {
  Instance inst;
  if (a.tree) {
    check(fpdm_instance_load(a.tree->c_str(), nullptr,
                             a.actions ? a.actions->c_str() : nullptr, &inst.ptr),
          "loading instance");
  } else if (a.sizes) {
    chains_instance(parse_sizes(*a.sizes), inst);
  } else {
    chains_instance(std::vector<std::int64_t>(static_cast<std::size_t>(*a.star), 1),
                    inst);
  }
  const fpdm_config config = to_config(a.mech);
  fpdm_estimate e;
  check(fpdm_simulate(inst.ptr,
                      a.baseline ? FPDM_MECHANISM_BASELINE : FPDM_MECHANISM_DIFFUSION,
                      &config, a.reps, a.mech.seed, a.workers, &e),
        "simulating");
  std::printf("mechanism: %s\n", a.baseline ? "baseline" : "fpdm");
  std::printf("replications: %" PRIu64 "\n", e.replications);
  std::printf("seed: %" PRIu64 "\n", e.seed);
  std::printf("mean: %s\n", show(e.mean).c_str());
  std::printf("standard error: %s\n", show(e.standard_error).c_str());
  std::printf("closed form: %s\n", show(e.closed_form).c_str());
  std::printf("z-score: %s\n", show(e.z_score).c_str());
  return kExitOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::optional<std::int64_t> chain;
  bool star = false;
  std::vector<std::string> sizes;
  std::int64_t k_min = 0;
  std::int64_t k_max = 200;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  Curve curve;
  if (a.chain) {
    const std::int64_t k_min = a.k_min > 0 ? a.k_min : *a.chain;
    check(fpdm_curve_chain(*a.chain, k_min, a.k_max, &curve.ptr), "sweep");
  } else if (a.star) {
    const std::int64_t k_min = a.k_min > 0 ? a.k_min : 1;
    check(fpdm_curve_star(k_min, a.k_max, &curve.ptr), "sweep");
  } else {
    std::vector<std::int64_t> flat;
    std::vector<std::size_t> lengths;
    for (const std::string& s : a.sizes) {
      const auto v = parse_sizes(s);
      flat.insert(flat.end(), v.begin(), v.end());
      lengths.push_back(v.size());
    }
    check(fpdm_curve_sizes(flat.data(), lengths.data(), lengths.size(), &curve.ptr),
          "sweep");
  }
  check(fpdm_curve_write_csv(curve.ptr, a.out.c_str()), "writing csv");

  const std::size_t rows = fpdm_curve_size(curve.ptr);
  double min_ratio = 1.0;
  std::int64_t min_k = 0;
  std::size_t dominated = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    fpdm_revenue_point p;
    check(fpdm_curve_point(curve.ptr, i, &p), "sweep");
    if (i == 0 || p.ratio < min_ratio) {
      min_ratio = p.ratio;
      min_k = p.k;
    }
    if (p.e_fpdm > p.e_base) ++dominated;
  }
  std::printf("rows: %zu\n", rows);
  std::printf("min ratio: %s at k=%" PRId64 "\n", show(min_ratio).c_str(), min_k);
  std::printf("rows with e_fpdm > e_base: %zu\n", dominated);
  std::printf("csv written to %s\n", a.out.c_str());
  return kExitOk;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::string property;
  int max_nodes = 0;
  double grid_step = 0.1;
  std::uint64_t samples = 0;
  std::uint64_t seed = 1;
  std::vector<double> alphas;
  std::string mode = "clamped";
  std::optional<std::string> threshold;
  std::string scope = "unilateral";
  bool no_opt_out = false;
  std::size_t workers = 1;
  std::size_t max_recorded = 1000;
  std::optional<std::string> out;
  bool findings_ok = false;
};

int cmd_verify(const VerifyArgs& a) {
  fpdm_verify_options o = fpdm_default_verify_options();
  const bool ic = a.property == "ic";
  o.property = ic ? FPDM_PROPERTY_IC : FPDM_PROPERTY_IR;
  o.max_buyers = a.max_nodes > 0 ? a.max_nodes : (ic ? 5 : 6);
  o.grid_step = a.grid_step;
  o.samples = a.samples;
  o.seed = a.seed;
  o.alphas = a.alphas.empty() ? nullptr : a.alphas.data();
  o.alpha_count = a.alphas.size();
  o.reward_mode = reward_mode(a.mode);
  o.threshold = threshold(a.threshold);
  o.scope = a.scope == "full" ? FPDM_SCOPE_FULL : FPDM_SCOPE_UNILATERAL;
  o.include_opt_out = a.no_opt_out ? 0 : 1;
  o.workers = a.workers;
  o.max_recorded = a.max_recorded;

  Report report;
  check(fpdm_verify(&o, &report.ptr), "verifying");
  fpdm_verify_summary s;
  check(fpdm_report_summary(report.ptr, &s), "summary");

  if (a.out) {
    check(fpdm_report_write(report.ptr, a.out->c_str()), "writing report");
    std::printf("property: %s\n", ic ? "ic" : "ir");
    std::printf("trees: %zu\n", s.trees);
    std::printf("instances: %" PRIu64 "\n", s.instances);
    if (ic) std::printf("deviations: %" PRIu64 "\n", s.deviations);
    std::printf("violations: %" PRIu64 "\n", s.violations);
    std::printf("invariant failures: %" PRIu64 "\n", s.invariant_failures);
    std::printf("report written to %s\n", a.out->c_str());
  } else {
    std::size_t size = 0;
    check(fpdm_report_text(report.ptr, nullptr, 0, &size), "report");
    std::string text(size, '\0');
    check(fpdm_report_text(report.ptr, text.data(), text.size(), &size), "report");
    text.resize(size - 1);
    std::fputs(text.c_str(), stdout);
  }

  if (!s.hard_invariants_hold) {
    std::fprintf(stderr, "hard invariants failed\n");
    return kExitViolation;
  }
  if (s.violations > 0) {
    if (a.findings_ok && s.violations_are_findings) {
      std::fprintf(stderr, "%" PRIu64 " findings reported\n", s.violations);
      return kExitOk;
    }
    std::fprintf(stderr, "%" PRIu64 " violations\n", s.violations);
    return kExitViolation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-price diffusion mechanism toolkit"};
  app.require_subcommand(1);

  std::int64_t price_x = 0;
  auto* price = app.add_subcommand("price", "Optimal fixed price for x neighbours");
  price->add_option("x", price_x, "Number of seller neighbours")
      ->required()
      ->check(CLI::NonNegativeNumber);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run the mechanism on an instance");
  run->add_option("--tree", run_args.tree, "Tree file")->required()->check(CLI::ExistingFile);
  run->add_option("--valuations", run_args.valuations, "Valuations file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--actions", run_args.actions, "Actions file")->check(CLI::ExistingFile);
  run->add_flag("--baseline", run_args.baseline, "Sell to seller neighbours only");
  run->add_option("--out", run_args.out, "Write the outcome record here");
  add_mechanism_flags(run, run_args.mech);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo revenue against the closed form");
  auto* sim_tree =
      sim->add_option("--tree", sim_args.tree, "Tree file")->check(CLI::ExistingFile);
  sim->add_option("--actions", sim_args.actions, "Actions file")
      ->check(CLI::ExistingFile)
      ->needs(sim_tree);
  auto* sim_sizes = sim->add_option("--sizes", sim_args.sizes,
                                    "Seller neighbours rooting chains of these lengths");
  auto* sim_star = sim->add_option("--star", sim_args.star, "Star with x buyers")
                       ->check(CLI::PositiveNumber);
  sim_tree->excludes(sim_sizes)->excludes(sim_star);
  sim_sizes->excludes(sim_star);
  sim->add_flag("--baseline", sim_args.baseline, "Sell to seller neighbours only");
  sim->add_option("--reps", sim_args.reps, "Replications")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim->add_option("--workers", sim_args.workers, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_mechanism_flags(sim, sim_args.mech);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Revenue curves as CSV");
  auto* sw_chain = sweep->add_option("--chain", sweep_args.chain,
                                     "Chain case with x seller neighbours")
                       ->check(CLI::PositiveNumber);
  auto* sw_star = sweep->add_flag("--star", sweep_args.star, "Every buyer a neighbour");
  auto* sw_sizes = sweep->add_option("--sizes", sweep_args.sizes,
                                     "Explicit branch sizes, e.g. 5,3,2 (repeatable)");
  sw_chain->excludes(sw_star)->excludes(sw_sizes);
  sw_star->excludes(sw_sizes);
  sweep->add_option("--k-min", sweep_args.k_min, "Smallest k (default: x)");
  sweep->add_option("--k-max", sweep_args.k_max, "Largest k")->capture_default_str();
  sweep->add_option("--out", sweep_args.out, "CSV output path")->required();

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Exhaustive IR or IC check");
  verify->add_option("property", ver.property, "ir or ic")
      ->required()
      ->check(CLI::IsMember({"ir", "ic"}));
  verify->add_option("--max-nodes", ver.max_nodes,
                     "Largest buyer count (default 6 for ir, 5 for ic)")
      ->check(CLI::Range(1, 9));
  verify->add_option("--grid-step", ver.grid_step, "Valuation grid step")
      ->capture_default_str();
  verify->add_option("--samples", ver.samples, "Sampled profiles instead of the grid");
  verify->add_option("--seed", ver.seed, "Sampling seed")->capture_default_str();
  verify->add_option("--alpha", ver.alphas, "Reward scales (default 0 0.1 1)");
  verify->add_option("--mode", ver.mode, "Path reward rule")
      ->check(CLI::IsMember({"clamped", "literal"}))
      ->capture_default_str();
  verify->add_option("--threshold", ver.threshold, "Claim threshold")
      ->check(CLI::IsMember({"strict", "weak"}));
  verify->add_option("--scope", ver.scope, "IC deviation scope")
      ->check(CLI::IsMember({"unilateral", "full"}))
      ->capture_default_str();
  verify->add_flag("--no-opt-out", ver.no_opt_out, "Skip opt-out deviations");
  verify->add_option("--workers", ver.workers, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  verify->add_option("--max-recorded", ver.max_recorded, "Violations kept in the report")
      ->capture_default_str();
  verify->add_option("--out", ver.out, "Write the report here");
  verify->add_flag("--findings-ok", ver.findings_ok,
                   "Exit 0 when the only violations are findings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*price) return cmd_price(price_x);
    if (*run) return cmd_run(run_args);
    if (*sim) {
      if (!sim_args.tree && !sim_args.sizes && !sim_args.star) {
        throw CLI::ValidationError("simulate", "one of --tree, --sizes, --star is required");
      }
      return cmd_simulate(sim_args);
    }
    if (*sweep) {
      if (!sweep_args.chain && !sweep_args.star && sweep_args.sizes.empty()) {
        throw CLI::ValidationError("sweep", "one of --chain, --star, --sizes is required");
      }
      return cmd_sweep(sweep_args);
    }
    if (*verify) return cmd_verify(ver);
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const CallFailed& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return kExitUsage;
  }
  return kExitUsage;
}
