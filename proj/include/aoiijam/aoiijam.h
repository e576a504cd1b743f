#ifndef AOIIJAM_H
#define AOIIJAM_H

/* C interface to the aoiijam library. Every call returns a status code;
 * on failure aoiijam_last_error() describes the most recent error on the
 * calling thread. Handles are opaque and released with their _destroy
 * function; destroying NULL is a no-op. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AOIIJAM_API __declspec(dllexport)
#else
#define AOIIJAM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aoiijam_status {
    AOIIJAM_OK = 0,
    AOIIJAM_INVALID_ARGUMENT = 1,
    AOIIJAM_NOT_CONVERGED = 2,
    AOIIJAM_STRUCTURE = 3,  /* policy is not a threshold policy */
    AOIIJAM_AMBIGUOUS = 4,  /* brute-force cap too small */
    AOIIJAM_SCAN_BOUND = 5, /* infimum scan hit its bound */
    AOIIJAM_INTERNAL = 6
} aoiijam_status;

AOIIJAM_API const char* aoiijam_last_error(void);
AOIIJAM_API const char* aoiijam_version(void);

/* 0 < p <= 1, 0 <= q < 1, 0 < r <= 1/2 */
typedef struct aoiijam_params {
    double p;
    double q;
    double r;
} aoiijam_params;

typedef struct aoiijam_threshold {
    int infinite; /* nonzero: never jam, index unused */
    uint64_t index;
} aoiijam_threshold;

typedef struct aoiijam_steady_state {
    double avg_eaoii;
    double avg_aat;
    double lambda_n;
} aoiijam_steady_state;

typedef struct aoiijam_estimate {
    double mean;
    double se;
} aoiijam_estimate;

AOIIJAM_API aoiijam_status aoiijam_params_validate(const aoiijam_params* params);

/* Single-source closed forms. */
AOIIJAM_API aoiijam_status aoiijam_eaoii_value(const aoiijam_params* params, uint64_t k, double* out);
AOIIJAM_API aoiijam_status aoiijam_delivery_probability(const aoiijam_params* params, int jammed, double* out);
AOIIJAM_API aoiijam_status aoiijam_stationary_pmf(const aoiijam_params* params, uint64_t n, uint64_t i, double* out);
AOIIJAM_API aoiijam_status aoiijam_no_jam_pmf(const aoiijam_params* params, uint64_t i, double* out);
AOIIJAM_API aoiijam_status aoiijam_avg_eaoii(const aoiijam_params* params, uint64_t n, double* out);
AOIIJAM_API aoiijam_status aoiijam_avg_eaoii_no_jam(const aoiijam_params* params, double* out);
AOIIJAM_API aoiijam_status aoiijam_avg_aat(const aoiijam_params* params, uint64_t n, double* out);
AOIIJAM_API aoiijam_status aoiijam_lambda_seq(const aoiijam_params* params, uint64_t n, double* out);
AOIIJAM_API aoiijam_status aoiijam_lambda_increment(const aoiijam_params* params, uint64_t n, double* out);
AOIIJAM_API aoiijam_status aoiijam_lambda_limit(const aoiijam_params* params, double* out);
AOIIJAM_API aoiijam_status aoiijam_steady_state_get(const aoiijam_params* params, uint64_t n, aoiijam_steady_state* out);
/* s̄ - λd̄ for a threshold; the infinite threshold uses the never-jam mean. */
AOIIJAM_API aoiijam_status aoiijam_steady_reward(const aoiijam_params* params, aoiijam_threshold threshold,
                                                 double lambda, double* out);
AOIIJAM_API aoiijam_status aoiijam_optimal_threshold(const aoiijam_params* params, double lambda,
                                                     aoiijam_threshold* out);

/* Numeric oracles. */
typedef struct aoiijam_oracle_config {
    uint64_t state_cap;
    double tolerance;
    uint64_t max_iterations;
} aoiijam_oracle_config;

AOIIJAM_API aoiijam_oracle_config aoiijam_oracle_config_default(void);

AOIIJAM_API aoiijam_status aoiijam_brute_force_threshold(const aoiijam_params* params, double lambda,
                                                         uint64_t n_max, aoiijam_threshold* out);

typedef struct aoiijam_vi_result aoiijam_vi_result;

AOIIJAM_API aoiijam_status aoiijam_value_iteration(const aoiijam_params* params, double lambda,
                                                   const aoiijam_oracle_config* cfg, aoiijam_vi_result** out);
AOIIJAM_API void aoiijam_vi_destroy(aoiijam_vi_result* result);
AOIIJAM_API double aoiijam_vi_theta(const aoiijam_vi_result* result);
AOIIJAM_API uint64_t aoiijam_vi_iterations(const aoiijam_vi_result* result);
/* Number of states K + 1. */
AOIIJAM_API size_t aoiijam_vi_size(const aoiijam_vi_result* result);
/* Copy aoiijam_vi_size() entries; len must be at least that. */
AOIIJAM_API aoiijam_status aoiijam_vi_values(const aoiijam_vi_result* result, double* out, size_t len);
AOIIJAM_API aoiijam_status aoiijam_vi_policy(const aoiijam_vi_result* result, unsigned char* out, size_t len);
AOIIJAM_API aoiijam_status aoiijam_vi_threshold(const aoiijam_vi_result* result, aoiijam_threshold* out);

/* Whittle index. */
typedef struct aoiijam_whittle_table aoiijam_whittle_table;

AOIIJAM_API aoiijam_status aoiijam_whittle_index(const aoiijam_params* params, uint64_t k, double* out);
AOIIJAM_API aoiijam_status aoiijam_whittle_table_closed(const aoiijam_params* params, uint64_t k_max,
                                                        aoiijam_whittle_table** out);
/* Infimum-of-ratios construction; p = 1 is rejected. */
AOIIJAM_API aoiijam_status aoiijam_whittle_table_iterative(const aoiijam_params* params, uint64_t k_max,
                                                           aoiijam_whittle_table** out);
AOIIJAM_API void aoiijam_whittle_table_destroy(aoiijam_whittle_table* table);
AOIIJAM_API size_t aoiijam_whittle_table_size(const aoiijam_whittle_table* table);
AOIIJAM_API aoiijam_status aoiijam_whittle_table_values(const aoiijam_whittle_table* table, double* out, size_t len);

AOIIJAM_API aoiijam_status aoiijam_indexability(const aoiijam_params* params, uint64_t n_max, int* indexable,
                                                int* strictly_decreasing);

/* Ids of the `budget` subsystems with the largest index at their ages,
 * ties to the lower id, sorted ascending. out_ids needs `count` slots. */
AOIIJAM_API aoiijam_status aoiijam_select_jam_set(const int64_t* ids, const aoiijam_params* params,
                                                  const uint64_t* ages, size_t count, size_t budget,
                                                  int64_t* out_ids, size_t* out_count);

/* Simulation. */
typedef struct aoiijam_fleet aoiijam_fleet;
typedef struct aoiijam_policy aoiijam_policy;
typedef struct aoiijam_stats aoiijam_stats;

AOIIJAM_API aoiijam_status aoiijam_fleet_create(size_t budget, aoiijam_fleet** out);
AOIIJAM_API aoiijam_status aoiijam_fleet_add(aoiijam_fleet* fleet, int64_t id, const aoiijam_params* params);
AOIIJAM_API void aoiijam_fleet_destroy(aoiijam_fleet* fleet);

/* "threshold:<n|inf>", "always", "never", "random:<prob>", "whittle:<M>",
 * "random-multi:<M>" */
AOIIJAM_API aoiijam_status aoiijam_policy_parse(const char* text, aoiijam_policy** out);
AOIIJAM_API int aoiijam_policy_is_multi(const aoiijam_policy* policy);
AOIIJAM_API void aoiijam_policy_destroy(aoiijam_policy* policy);

typedef struct aoiijam_trace_row {
    int64_t slot;
    int64_t subsystem_id;
    uint64_t age_index;
    int64_t true_aoii;
    int jammed;
    int delivered;
} aoiijam_trace_row;

typedef void (*aoiijam_trace_fn)(const aoiijam_trace_row* row, void* user);

AOIIJAM_API aoiijam_status aoiijam_simulate_single(const aoiijam_params* params, const aoiijam_policy* policy,
                                                   double lambda, uint64_t horizon, uint64_t seed,
                                                   aoiijam_trace_fn trace, void* user, aoiijam_stats** out);
AOIIJAM_API aoiijam_status aoiijam_simulate_multi(const aoiijam_fleet* fleet, const aoiijam_policy* policy,
                                                  uint64_t horizon, uint64_t seed, aoiijam_trace_fn trace,
                                                  void* user, aoiijam_stats** out);

typedef struct aoiijam_stats_summary {
    uint64_t slots;
    uint64_t seed;
    uint64_t batches;
    aoiijam_estimate reward;
    aoiijam_estimate eaoii;
    aoiijam_estimate true_aoii;
    aoiijam_estimate aat;
} aoiijam_stats_summary;

typedef struct aoiijam_subsystem_stats {
    int64_t id;
    aoiijam_estimate eaoii;
    aoiijam_estimate true_aoii;
    aoiijam_estimate aat;
} aoiijam_subsystem_stats;

AOIIJAM_API void aoiijam_stats_destroy(aoiijam_stats* stats);
AOIIJAM_API aoiijam_status aoiijam_stats_summary_get(const aoiijam_stats* stats, aoiijam_stats_summary* out);
/* Reward s(t) - λd(t) of the recorded trajectory at another cost. */
AOIIJAM_API aoiijam_status aoiijam_stats_reward_at(const aoiijam_stats* stats, double lambda, aoiijam_estimate* out);
AOIIJAM_API size_t aoiijam_stats_subsystem_count(const aoiijam_stats* stats);
AOIIJAM_API aoiijam_status aoiijam_stats_subsystem(const aoiijam_stats* stats, size_t i, aoiijam_subsystem_stats* out);
/* Single source: slots spent at each age. */
AOIIJAM_API size_t aoiijam_stats_age_histogram_size(const aoiijam_stats* stats);
AOIIJAM_API aoiijam_status aoiijam_stats_age_histogram(const aoiijam_stats* stats, uint64_t* out, size_t len);

/* Verification suite. config_json may be NULL for the defaults. On success
 * *report_json holds a JSON document to release with aoiijam_string_free. */
AOIIJAM_API aoiijam_status aoiijam_verify_run(const char* config_json, char** report_json, int* passed);
AOIIJAM_API void aoiijam_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif
