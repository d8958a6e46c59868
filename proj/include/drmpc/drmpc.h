/*
 * Copyright 2026 The drmpc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DRMPC_DRMPC_H_
#define DRMPC_DRMPC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(DRMPC_BUILDING_LIBRARY)
#define DRMPC_API __attribute__((visibility("default")))
#else
#define DRMPC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Nonzero values 1..16 mirror drmpc::ErrorCode. */
typedef enum drmpc_status {
    DRMPC_OK = 0,
    DRMPC_INVALID_ARGUMENT = 1,
    DRMPC_DIMENSION_MISMATCH = 2,
    DRMPC_NOT_PSD = 3,
    DRMPC_EMPTY_SAMPLE_SET = 4,
    DRMPC_SAMPLE_OUTSIDE_SUPPORT = 5,
    DRMPC_INVALID_CONFIDENCE = 6,
    DRMPC_INVALID_SAMPLE_COUNT = 7,
    DRMPC_INVALID_ALPHA = 8,
    DRMPC_CAUSALITY_VIOLATION = 9,
    DRMPC_SOLVER_FAILURE = 10,
    DRMPC_UNBOUNDED = 11,
    DRMPC_MISSING_VARIABLE = 12,
    DRMPC_REJECTION_STALL = 13,
    DRMPC_INFEASIBLE_STEP = 14,
    DRMPC_CONFIG_ERROR = 15,
    DRMPC_IO_ERROR = 16,
    DRMPC_INTERNAL_ERROR = 99
} drmpc_status;

typedef enum drmpc_mode { DRMPC_MODE_OFFLINE = 0, DRMPC_MODE_ONLINE = 1, DRMPC_MODE_ROBUST = 2 } drmpc_mode;

typedef struct drmpc_experiment drmpc_experiment;
typedef struct drmpc_result drmpc_result;
typedef struct drmpc_report drmpc_report;

typedef struct drmpc_experiment_info {
    drmpc_mode mode;
    long samples;
    int steps;
    int repetitions;
    uint64_t seed;
    int n_x;
    int n_u;
    int n_w;
    int horizon;
} drmpc_experiment_info;

typedef struct drmpc_summary {
    double min_cost;
    double median_cost;
    double max_cost;
    int feasible_runs;
    int infeasible_runs;
} drmpc_summary;

typedef struct drmpc_run_info {
    uint64_t seed;
    int steps;
    double cumulative_cost;
    int infeasible;
    int infeasible_step;
} drmpc_run_info;

typedef struct drmpc_step {
    double objective;
    double beta;
    double stage_cost;
    int feasible;
} drmpc_step;

typedef struct drmpc_check {
    const char* name;
    const char* detail;
    double margin;
    double tolerance;
    int passed;
} drmpc_check;

DRMPC_API const char* drmpc_version(void);
DRMPC_API const char* drmpc_status_name(drmpc_status status);
/* Message of the last failing call on this thread. */
DRMPC_API const char* drmpc_last_error(void);
DRMPC_API void drmpc_string_free(char* s);

DRMPC_API drmpc_status drmpc_hoeffding_radius(long m, int n_w, double r, double c, double delta, double* out);

/* name_or_path: bundled config name ("offline2d") or a JSON file path.
   overrides: "dotted.key=value" strings applied before validation. */
DRMPC_API drmpc_status drmpc_experiment_load(const char* name_or_path, const char* const* overrides,
                                             size_t n_overrides, drmpc_experiment** out);
DRMPC_API void drmpc_experiment_free(drmpc_experiment* exp);
DRMPC_API drmpc_status drmpc_experiment_info_get(const drmpc_experiment* exp, drmpc_experiment_info* out);
/* Canonical JSON; release with drmpc_string_free. */
DRMPC_API drmpc_status drmpc_experiment_to_json(const drmpc_experiment* exp, char** out);
DRMPC_API drmpc_status drmpc_experiment_set_verbose(drmpc_experiment* exp, int verbose);

/* Monte-Carlo batch. threads <= 0 uses the hardware concurrency. */
DRMPC_API drmpc_status drmpc_experiment_run(const drmpc_experiment* exp, int threads, drmpc_result** out);
DRMPC_API void drmpc_result_free(drmpc_result* res);
DRMPC_API int drmpc_result_runs(const drmpc_result* res);
DRMPC_API drmpc_status drmpc_result_summary(const drmpc_result* res, drmpc_summary* out);
DRMPC_API drmpc_status drmpc_result_run_info(const drmpc_result* res, int run, drmpc_run_info* out);
DRMPC_API drmpc_status drmpc_result_step(const drmpc_result* res, int run, int step, drmpc_step* out);
/* Solver message of an infeasible run, or "" when the run was feasible. Owned by res. */
DRMPC_API const char* drmpc_result_failure(const drmpc_result* res, int run);
DRMPC_API drmpc_status drmpc_result_write_trajectory(const drmpc_result* res, int run, const char* path);
DRMPC_API drmpc_status drmpc_result_write_snapshot(const drmpc_result* res, int run, const char* path);
/* Appends summary rows (writes the header first unless append is set). */
DRMPC_API drmpc_status drmpc_result_write_summary(const drmpc_result* res, const char* path, int append);

/* suite: "risk-duality", "dynamics" or "feasibility-audit". */
DRMPC_API drmpc_status drmpc_validate(const char* suite, uint64_t seed, drmpc_report** out);
DRMPC_API void drmpc_report_free(drmpc_report* report);
DRMPC_API int drmpc_report_checks(const drmpc_report* report);
/* Strings stay valid until the report is freed. */
DRMPC_API drmpc_status drmpc_report_check(const drmpc_report* report, int index, drmpc_check* out);
DRMPC_API int drmpc_report_passed(const drmpc_report* report);

#ifdef __cplusplus
}
#endif

#endif  // DRMPC_DRMPC_H_
