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

/* C interface to the fixed-price diffusion mechanism library.
 *
 * Every function returns an fpdm_status; on failure the calling thread's
 * fpdm_last_error() describes what went wrong. Handles are opaque and owned by
 * the caller, who releases them with the matching *_free function. Buyers are
 * addressed by the labels used in the instance files (0 is the seller).
 */
#ifndef FPDM_FPDM_H_
#define FPDM_FPDM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(FPDM_BUILDING_LIBRARY)
#define FPDM_API __attribute__((visibility("default")))
#else
#define FPDM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fpdm_status {
  FPDM_OK = 0,
  FPDM_ERROR_INVALID_ARGUMENT = 1,
  FPDM_ERROR_INVALID_TREE = 2,
  FPDM_ERROR_INFEASIBLE_PROFILE = 3,
  FPDM_ERROR_MISSING_VALUATION = 4,
  FPDM_ERROR_PARSE = 5,
  FPDM_ERROR_IO = 6,
  FPDM_ERROR_SCOPE = 7,
  FPDM_ERROR_INTERNAL = 8
} fpdm_status;

FPDM_API const char* fpdm_last_error(void);
FPDM_API const char* fpdm_status_name(fpdm_status status);

typedef enum fpdm_reward_mode {
  FPDM_REWARD_CLAMPED = 0,
  FPDM_REWARD_LITERAL = 1
} fpdm_reward_mode;

typedef enum fpdm_threshold {
  FPDM_THRESHOLD_DEFAULT = 0, /* strict for the baseline, weak for FPDM */
  FPDM_THRESHOLD_STRICT = 1,
  FPDM_THRESHOLD_WEAK = 2
} fpdm_threshold;

typedef enum fpdm_tie_mode {
  FPDM_TIE_SEEDED = 0,
  FPDM_TIE_EXPECTATION = 1
} fpdm_tie_mode;

typedef enum fpdm_mechanism {
  FPDM_MECHANISM_DIFFUSION = 0,
  FPDM_MECHANISM_BASELINE = 1
} fpdm_mechanism;

typedef struct fpdm_config {
  double alpha;
  fpdm_reward_mode reward_mode;
  fpdm_threshold threshold;
  fpdm_tie_mode tie_mode;
} fpdm_config;

/* alpha 0.1, clamped rewards, default thresholds, seeded ties. */
FPDM_API fpdm_config fpdm_default_config(void);

/* ---- pricing ---------------------------------------------------------- */

FPDM_API fpdm_status fpdm_optimal_price(int64_t buyers, double* out);
FPDM_API fpdm_status fpdm_expected_revenue_base(int64_t buyers, double* out);
FPDM_API fpdm_status fpdm_expected_revenue_opt(int64_t buyers, double* out);
/* Branch sizes in descending order. */
FPDM_API fpdm_status fpdm_expected_revenue_fpdm(const int64_t* sizes,
                                                size_t count, double* out);
FPDM_API fpdm_status fpdm_chain_case_revenue(int64_t neighbours, int64_t buyers,
                                             double* out);
FPDM_API fpdm_status fpdm_brute_force_optimal_price(int64_t buyers, double step,
                                                    double* out);

/* ---- instances -------------------------------------------------------- */

typedef struct fpdm_instance fpdm_instance;

/* valuations_path and actions_path may be NULL. */
FPDM_API fpdm_status fpdm_instance_load(const char* tree_path,
                                        const char* valuations_path,
                                        const char* actions_path,
                                        fpdm_instance** out);
/* Edge i is parents[i] -> children[i]; labels are used as given. */
FPDM_API fpdm_status fpdm_instance_from_edges(const int64_t* parents,
                                              const int64_t* children,
                                              size_t edge_count,
                                              fpdm_instance** out);
FPDM_API void fpdm_instance_free(fpdm_instance* instance);

FPDM_API size_t fpdm_instance_buyer_count(const fpdm_instance* instance);
/* Label of dense id 1..buyer_count. */
FPDM_API fpdm_status fpdm_instance_label(const fpdm_instance* instance,
                                         size_t id, int64_t* label);
FPDM_API fpdm_status fpdm_instance_set_valuation(fpdm_instance* instance,
                                                 int64_t buyer, double value);
/* Fills every missing valuation with a U[0,1] draw from `seed`. */
FPDM_API fpdm_status fpdm_instance_sample_valuations(fpdm_instance* instance,
                                                     uint64_t seed);
FPDM_API fpdm_status fpdm_instance_set_report(fpdm_instance* instance,
                                              int64_t buyer,
                                              const int64_t* children,
                                              size_t count);
FPDM_API fpdm_status fpdm_instance_set_nil(fpdm_instance* instance,
                                           int64_t buyer);

/* ---- running the mechanisms ------------------------------------------- */

typedef struct fpdm_result fpdm_result;

typedef struct fpdm_outcome_summary {
  double probability;
  int has_winner;
  int64_t winner;      /* label, valid when has_winner */
  int64_t branch_root; /* label, valid when has_winner */
  double price;
  double gross_revenue;
  double net_revenue;
  size_t visits;
} fpdm_outcome_summary;

typedef struct fpdm_branch_visit {
  int64_t root; /* 0 for the baseline sale */
  double price;
  size_t size;
  size_t outside;
  size_t claimer_count;
} fpdm_branch_visit;

FPDM_API fpdm_status fpdm_run(const fpdm_instance* instance,
                              fpdm_mechanism mechanism,
                              const fpdm_config* config, uint64_t seed,
                              fpdm_result** out);
FPDM_API void fpdm_result_free(fpdm_result* result);

FPDM_API size_t fpdm_result_outcome_count(const fpdm_result* result);
FPDM_API fpdm_status fpdm_result_summary(const fpdm_result* result,
                                         size_t outcome,
                                         fpdm_outcome_summary* out);
FPDM_API fpdm_status fpdm_result_payment(const fpdm_result* result,
                                         size_t outcome, int64_t buyer,
                                         double* payment, double* utility);
FPDM_API fpdm_status fpdm_result_visit(const fpdm_result* result,
                                       size_t outcome, size_t visit,
                                       fpdm_branch_visit* out);
/* Label of claimer j of the given visit. */
FPDM_API fpdm_status fpdm_result_visit_claimer(const fpdm_result* result,
                                               size_t outcome, size_t visit,
                                               size_t j, int64_t* label);
/* Candidates left after the depth and child-count rules. */
FPDM_API fpdm_status fpdm_result_tied(const fpdm_result* result,
                                      size_t outcome, int64_t* labels,
                                      size_t capacity, size_t* count);

/* Copies the key = value record (NUL-terminated) into buffer when it fits;
 * `required` always receives the size including the terminator. */
FPDM_API fpdm_status fpdm_result_record(const fpdm_result* result,
                                        char* buffer, size_t capacity,
                                        size_t* required);
FPDM_API fpdm_status fpdm_result_write_record(const fpdm_result* result,
                                              const char* path);

/* ---- simulation --------------------------------------------------------- */

typedef struct fpdm_estimate {
  uint64_t replications;
  double mean;
  double standard_error;
  uint64_t seed;
  double closed_form;
  double z_score; /* (mean - closed_form) / standard_error, 0 if SE is 0 */
} fpdm_estimate;

FPDM_API fpdm_status fpdm_simulate(const fpdm_instance* instance,
                                   fpdm_mechanism mechanism,
                                   const fpdm_config* config,
                                   uint64_t replications, uint64_t seed,
                                   size_t workers, fpdm_estimate* out);

/* ---- revenue curves ----------------------------------------------------- */

typedef struct fpdm_curve fpdm_curve;

typedef struct fpdm_revenue_point {
  int64_t k;
  int64_t x;
  double e_fpdm;
  double e_base;
  double e_opt;
  double ratio;
} fpdm_revenue_point;

/* One long branch plus neighbours - 1 singletons, k in [k_min, k_max]. */
FPDM_API fpdm_status fpdm_curve_chain(int64_t neighbours, int64_t k_min,
                                      int64_t k_max, fpdm_curve** out);
/* Every buyer a seller neighbour. */
FPDM_API fpdm_status fpdm_curve_star(int64_t k_min, int64_t k_max,
                                     fpdm_curve** out);
/* `count` explicit size vectors stored back to back in `sizes`. */
FPDM_API fpdm_status fpdm_curve_sizes(const int64_t* sizes,
                                      const size_t* lengths, size_t count,
                                      fpdm_curve** out);
FPDM_API void fpdm_curve_free(fpdm_curve* curve);
FPDM_API size_t fpdm_curve_size(const fpdm_curve* curve);
FPDM_API fpdm_status fpdm_curve_point(const fpdm_curve* curve, size_t index,
                                      fpdm_revenue_point* out);
FPDM_API fpdm_status fpdm_curve_write_csv(const fpdm_curve* curve,
                                          const char* path);

/* ---- property verification ---------------------------------------------- */

typedef enum fpdm_property {
  FPDM_PROPERTY_IR = 0,
  FPDM_PROPERTY_IC = 1
} fpdm_property;

typedef enum fpdm_scope {
  FPDM_SCOPE_UNILATERAL = 0,
  FPDM_SCOPE_FULL = 1
} fpdm_scope;

typedef struct fpdm_verify_options {
  fpdm_property property;
  int max_buyers;
  double grid_step;     /* used when samples == 0 */
  uint64_t samples;     /* > 0 selects sampled valuation profiles */
  uint64_t seed;
  const double* alphas; /* NULL selects {0, 0.1, 1} */
  size_t alpha_count;
  fpdm_reward_mode reward_mode;
  fpdm_threshold threshold;
  fpdm_scope scope;
  int include_opt_out;
  size_t workers;
  size_t max_recorded;
} fpdm_verify_options;

typedef struct fpdm_verify_summary {
  size_t trees;
  uint64_t instances;
  uint64_t deviations;
  uint64_t violations;
  size_t violations_recorded;
  uint64_t invariant_failures;
  int violations_are_findings;
  int hard_invariants_hold;
} fpdm_verify_summary;

typedef struct fpdm_report fpdm_report;

FPDM_API fpdm_verify_options fpdm_default_verify_options(void);
FPDM_API fpdm_status fpdm_verify(const fpdm_verify_options* options,
                                 fpdm_report** out);
FPDM_API void fpdm_report_free(fpdm_report* report);
FPDM_API fpdm_status fpdm_report_summary(const fpdm_report* report,
                                         fpdm_verify_summary* out);
/* Replays recorded violation `index`; returns the recorded and recomputed
 * utilities of the affected buyer. */
FPDM_API fpdm_status fpdm_report_replay(const fpdm_report* report, size_t index,
                                        double recorded[2], double replayed[2]);
FPDM_API fpdm_status fpdm_report_text(const fpdm_report* report, char* buffer,
                                      size_t capacity, size_t* required);
FPDM_API fpdm_status fpdm_report_write(const fpdm_report* report,
                                       const char* path);

#ifdef __cplusplus
}
#endif

#endif /* FPDM_FPDM_H_ */
