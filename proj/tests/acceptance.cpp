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

// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fpdm/io.hpp"
#include "fpdm/mechanisms.hpp"
#include "fpdm/network.hpp"
#include "fpdm/pricing.hpp"
#include "fpdm/verification.hpp"

namespace {

using namespace fpdm;
using Sizes = std::vector<std::int64_t>;

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
    pass = pass && ok;
  }
};

std::string num(double v, int digits = 7) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const std::vector<Edge> kReferral = {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5},
                                      {1, 6}, {5, 10}, {2, 7}, {2, 8}, {3, 9}};
const std::vector<double> kReferralValues = {0.6, 0.7, 0.7, 0.5, 0.8,
                                              0.9, 0.3, 0.4, 0.1, 0.5};

SocialTree chains(const Sizes& lengths) {
  std::vector<Edge> edges;
  NodeId next = 1;
  for (auto len : lengths) {
    NodeId parent = kSeller;
    for (std::int64_t i = 0; i < len; ++i, ++next) {
      edges.push_back({parent, next});
      parent = next;
    }
  }
  return build_tree(edges);
}

Verdict pricing_goldens() {
  Verdict v;
  const double p3 = optimal_price(3);
  v.check(std::abs(p3 - 0.6300) <= 5e-4, "p_opt(3)=" + num(p3, 6));
  const auto prices = branch_prices(branches(build_tree(kReferral)));
  const double expected[] = {0.699, 0.743, 0.760};
  for (std::size_t i = 0; i < 3; ++i) {
    v.check(prices.size() == 3 && std::abs(prices[i] - expected[i]) <= 5e-4,
            "branch " + std::to_string(i + 1) + " price=" + num(prices[i], 6));
  }
  return v;
}

Verdict referral_tree() {
  Verdict v;
  MechanismConfig cfg;
  cfg.alpha = 0.1;
  cfg.reward_mode = RewardMode::kLiteral;
  const SocialTree tree = build_tree(kReferral);
  const ValuationProfile vals = ValuationProfile::of(kReferralValues);
  const Outcome o = run_fpdm(tree, ActionProfile::truthful(tree), vals, cfg, 1).realized();
  v.check(o.winner == 5, "winner=" + (o.winner ? std::to_string(*o.winner) : "none"));
  if (!o.winner) return v;
  v.check(std::abs(o.payments[5] - 0.699) <= 5e-4, "winner pays " + num(o.payments[5], 6));
  v.check(std::abs(o.payments[1] - -0.00345) <= 5e-6,
          "buyer 1 pays " + num(o.payments[1], 6) + " (target -0.00345 +/- 5e-6)");
  const double u5 = utilities(o, vals)[5];
  v.check(std::abs(u5 - 0.101) <= 5e-4, "u5=" + num(u5, 6));
  bool zero = true;
  for (NodeId j : {2, 3, 4, 6, 7, 8, 9, 10}) zero = zero && o.payments[j] == 0.0;
  v.check(zero, "other payments exactly 0");
  return v;
}

Verdict asymptotic_ratio() {
  Verdict v;
  const std::int64_t k = 1000000;
  const double ratio = chain_case_revenue(5, k) / expected_revenue_opt(k);
  const double target = std::pow(0.2, 0.25);
  v.check(std::abs(ratio - target) <= 1e-3,
          "ratio=" + num(ratio, 6) + " vs " + num(target, 6));
  return v;
}

Verdict chain_sweep() {
  Verdict v;
  const auto curve = revenue_curve(ChainScenario{5}, 5, 200);
  std::vector<std::int64_t> losing;
  double min_ratio = 1.0;
  for (const RevenuePoint& p : curve) {
    if (!(p.e_fpdm > p.e_base)) losing.push_back(p.k);
    min_ratio = std::min(min_ratio, p.ratio);
  }
  std::string ks;
  for (auto k : losing) ks += (ks.empty() ? "" : ",") + std::to_string(k);
  v.check(losing.empty(), "E_FPDM > E_base for all k in [5,200]" +
                              (losing.empty() ? std::string()
                                              : " (fails at k=" + ks + ": " +
                                                    num(curve.front().e_fpdm, 6) + " < " +
                                                    num(curve.front().e_base, 6) + ")"));
  v.check(min_ratio >= 0.5, "min ratio=" + num(min_ratio, 6));
  return v;
}

Verdict simulation() {
  Verdict v;
  const std::uint64_t reps = 100000;
  for (const Sizes& s : {Sizes{5, 3, 2}, Sizes{3, 2}}) {
    const SocialTree tree = chains(s);
    const auto est = monte_carlo_revenue(tree, ActionProfile::truthful(tree),
                                         MechanismConfig{}, reps, 2024);
    const double target = expected_revenue_fpdm(s);
    const double z = (est.mean - target) / est.standard_error;
    std::string name;
    for (auto x : s) name += (name.empty() ? "" : ",") + std::to_string(x);
    v.check(std::abs(z) <= 3.0, "[" + name + "] z=" + num(z, 3));
  }
  const SocialTree star = chains({1, 1, 1});
  const auto est = monte_carlo_revenue(star, ActionProfile::truthful(star), MechanismConfig{},
                                       reps, 2024, MechanismKind::kBaseline);
  const double z = (est.mean - expected_revenue_base(3)) / est.standard_error;
  v.check(std::abs(z) <= 3.0, "baseline star x=3 z=" + num(z, 3));
  return v;
}

Verdict oracle_agreement() {
  Verdict v;
  double worst = 0.0;
  for (std::int64_t x = 1; x <= 20; ++x) {
    worst = std::max(worst, std::abs(brute_force_optimal_price(x, 1e-5) - optimal_price(x)));
  }
  v.check(worst <= 1e-5, "grid 1e-5 max gap=" + num(worst, 3));
  bool increasing = true;
  double last_p = 0.0, last_e = 0.0;
  for (std::int64_t x = 1; x <= 10000; ++x) {
    const double p = optimal_price(x), e = expected_revenue_base(x);
    increasing = increasing && p > last_p && e > last_e;
    last_p = p;
    last_e = e;
  }
  v.check(increasing, "p_opt and E_base strictly increasing on [1,1e4]");
  return v;
}

Verdict ir_suite() {
  Verdict v;
  SuiteOptions o;
  o.property = Property::kIR;
  o.max_buyers = 6;
  o.source = ValuationGrid{0.1};
  o.alphas = {0.0, 0.1, 1.0};
  const SuiteReport clamped = run_suite(o);
  v.check(clamped.trees == 84 && clamped.report.violation_count == 0,
          "clamped: " + std::to_string(clamped.report.violation_count) + " negative utilities over " +
              std::to_string(clamped.trees) + " trees");
  o.reward_mode = RewardMode::kLiteral;
  const SuiteReport literal = run_suite(o);
  std::size_t below_base = 0;
  for (const Violation& viol : literal.report.violations) {
    const OutcomeDistribution dist =
        run_fpdm(viol.tree, viol.base_actions, viol.valuations, viol.config, 0);
    const double p_base =
        optimal_price(static_cast<std::int64_t>(viol.tree.seller_children().size()));
    const bool below = std::any_of(dist.outcomes.begin(), dist.outcomes.end(),
                                   [&](const WeightedOutcome& wo) {
                                     return wo.outcome.winner && wo.outcome.price < p_base;
                                   });
    if (below && viol.truthful_utility < 0.0) ++below_base;
  }
  v.check(below_base > 0, "literal: " + std::to_string(literal.report.violation_count) +
                              " violations, " + std::to_string(below_base) +
                              " recorded with winning price below p_base");
  return v;
}

Verdict ic_suite() {
  Verdict v;
  SuiteOptions o;
  o.property = Property::kIC;
  o.max_buyers = 5;
  o.source = ValuationGrid{0.1};
  for (RewardMode mode : {RewardMode::kClamped, RewardMode::kLiteral}) {
    o.reward_mode = mode;
    const SuiteReport s = run_suite(o);
    const std::string name = mode == RewardMode::kClamped ? "clamped" : "literal";
    v.check(s.report.invariant_failure_count == 0,
            name + ": sub-invariants (a)-(c) failures=" +
                std::to_string(s.report.invariant_failure_count));
    const std::string text = format_report(s);
    v.check(text.find("[deviations]") != std::string::npos && !s.report.verdicts.empty(),
            name + ": " + std::to_string(s.report.verdicts.size()) + " deviation verdicts");
    std::size_t replayed = 0;
    bool exact = true;
    for (const Violation& viol : s.report.violations) {
      const ReplayedUtilities r = replay(viol);
      exact = exact && r.truthful == viol.truthful_utility && r.deviant == viol.deviant_utility;
      ++replayed;
    }
    v.check(exact, name + ": " + std::to_string(replayed) + " recorded deviations replay exactly");
  }
  return v;
}

// ---- determinism through the CLI ---------------------------------------------

struct Run {
  int status;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(FPDM_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Verdict determinism() {
  Verdict v;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("fpdm_acceptance_" + std::to_string(getpid()));
  fs::create_directories(dir);
  const std::string data = FPDM_TEST_DATA_DIR;
  const std::string ref = "--tree " + data + "/referral.tree";
  const std::string vals = " --valuations " + data + "/referral.val";

  struct Case {
    std::string name;
    std::string args;  // {out}: output path, {workers}: worker count
  };
  const std::vector<Case> cases = {
      {"price", "price 7"},
      {"run", "run " + ref + vals + " --mode literal --seed 3 --out {out}"},
      {"run-baseline", "run " + ref + vals + " --baseline --seed 11 --out {out}"},
      {"simulate", "simulate " + ref + " --reps 20000 --seed 9 --workers {workers}"},
      {"sweep", "sweep --chain 5 --k-max 200 --out {out}"},
      {"verify-ir",
       "verify ir --max-nodes 6 --mode literal --findings-ok --workers {workers} --out {out}"},
      {"verify-ic",
       "verify ic --max-nodes 4 --mode literal --findings-ok --workers {workers} --out {out}"},
  };
  for (const Case& c : cases) {
    std::vector<std::string> outputs;
    for (int attempt = 0; attempt < 3; ++attempt) {
      const std::string path = (dir / (c.name + std::to_string(attempt))).string();
      std::string args = c.args;
      if (const auto at = args.find("{out}"); at != std::string::npos) {
        args.replace(at, 5, path);
      }
      if (const auto at = args.find("{workers}"); at != std::string::npos) {
        args.replace(at, 9, attempt == 2 ? "3" : "1");
      }
      const Run r = cli(args);
      // Paths differ between runs; strip them from the echoed summary.
      std::string out = r.out;
      for (auto at = out.find(path); at != std::string::npos; at = out.find(path)) {
        out.replace(at, path.size(), "<out>");
      }
      outputs.push_back(std::to_string(r.status) + "\n" + out + "\n" +
                        (fs::exists(path) ? slurp(path) : std::string()));
    }
    const bool same = outputs[0] == outputs[1] && outputs[1] == outputs[2];
    v.check(same, c.name);
  }
  fs::remove_all(dir);
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "pricing goldens", pricing_goldens},
      {2, "referral example reproduction", referral_tree},
      {3, "asymptotic chain ratio", asymptotic_ratio},
      {4, "chain sweep dominance and bound", chain_sweep},
      {5, "closed form vs simulation", simulation},
      {6, "price oracle and monotonicity", oracle_agreement},
      {7, "IR property suite", ir_suite},
      {8, "IC hard sub-invariants", ic_suite},
      {9, "CLI determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
