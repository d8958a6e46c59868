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

#include "drmpc/drmpc.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "drmpc/error.hpp"
#include "drmpc/experiment.hpp"
#include "drmpc/simulate.hpp"
#include "drmpc/validate.hpp"

struct drmpc_experiment {
    drmpc::Experiment exp;
};

struct drmpc_result {
    drmpc::MonteCarloResult mc;
    long samples = 0;
};

struct drmpc_report {
    drmpc::SuiteReport report;
};

namespace {

thread_local std::string last_error;

template <typename F>
drmpc_status guarded(F&& f) {
    try {
        f();
        last_error.clear();
        return DRMPC_OK;
    } catch (const drmpc::Error& e) {
        last_error = e.what();
        return static_cast<drmpc_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return DRMPC_INTERNAL_ERROR;
    } catch (const std::exception& e) {
        last_error = e.what();
        return DRMPC_INTERNAL_ERROR;
    }
}

void need(bool ok, const char* what) {
    drmpc::require(ok, drmpc::ErrorCode::InvalidArgument, what);
}

const drmpc::RunResult& run_at(const drmpc_result* res, int run) {
    need(res != nullptr, "null result handle");
    need(run >= 0 && run < static_cast<int>(res->mc.runs.size()), "run index out of range");
    return res->mc.runs[static_cast<size_t>(run)];
}

std::ofstream open_out(const char* path, bool append) {
    need(path != nullptr, "null path");
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    drmpc::require(static_cast<bool>(out), drmpc::ErrorCode::IoError, std::string("cannot write '") + path + "'");
    return out;
}

}  // namespace

extern "C" {

const char* drmpc_version(void) { return "0.1.0"; }

const char* drmpc_status_name(drmpc_status status) {
    if (status == DRMPC_OK) {
        return "Ok";
    }
    if (status == DRMPC_INTERNAL_ERROR) {
        return "InternalError";
    }
    return drmpc::error_code_name(static_cast<drmpc::ErrorCode>(status));
}

const char* drmpc_last_error(void) { return last_error.c_str(); }

void drmpc_string_free(char* s) { delete[] s; }

drmpc_status drmpc_hoeffding_radius(long m, int n_w, double r, double c, double delta, double* out) {
    return guarded([&] {
        need(out != nullptr, "null output");
        *out = drmpc::hoeffding_radius(m, n_w, r, c, delta);
    });
}

drmpc_status drmpc_experiment_load(const char* name_or_path, const char* const* overrides, size_t n_overrides,
                                   drmpc_experiment** out) {
    return guarded([&] {
        need(name_or_path != nullptr && out != nullptr, "null argument");
        need(n_overrides == 0 || overrides != nullptr, "null override list");
        std::vector<std::string> list;
        for (size_t i = 0; i < n_overrides; ++i) {
            need(overrides[i] != nullptr, "null override");
            list.emplace_back(overrides[i]);
        }
        auto handle = std::make_unique<drmpc_experiment>();
        handle->exp = drmpc::load_experiment(name_or_path, list);
        *out = handle.release();
    });
}

void drmpc_experiment_free(drmpc_experiment* exp) { delete exp; }

drmpc_status drmpc_experiment_info_get(const drmpc_experiment* exp, drmpc_experiment_info* out) {
    return guarded([&] {
        need(exp != nullptr && out != nullptr, "null argument");
        const drmpc::RunConfig& run = exp->exp.run;
        out->mode = static_cast<drmpc_mode>(static_cast<int>(run.mode));
        out->samples = run.samples;
        out->steps = run.steps;
        out->repetitions = run.repetitions;
        out->seed = run.seed;
        out->n_x = run.system.n_x();
        out->n_u = run.system.n_u();
        out->n_w = run.system.n_w();
        out->horizon = run.controller.horizon;
    });
}

drmpc_status drmpc_experiment_to_json(const drmpc_experiment* exp, char** out) {
    return guarded([&] {
        need(exp != nullptr && out != nullptr, "null argument");
        const std::string text = drmpc::serialize_experiment(exp->exp).dump(2);
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out = buf;
    });
}

drmpc_status drmpc_experiment_set_verbose(drmpc_experiment* exp, int verbose) {
    return guarded([&] {
        need(exp != nullptr, "null experiment");
        exp->exp.run.solver.verbose = verbose != 0;
    });
}

drmpc_status drmpc_experiment_run(const drmpc_experiment* exp, int threads, drmpc_result** out) {
    return guarded([&] {
        need(exp != nullptr && out != nullptr, "null argument");
        auto handle = std::make_unique<drmpc_result>();
        handle->mc = drmpc::monte_carlo(exp->exp.run, threads);
        handle->samples = exp->exp.run.mode == drmpc::RunMode::Robust ? 0 : exp->exp.run.samples;
        *out = handle.release();
    });
}

void drmpc_result_free(drmpc_result* res) { delete res; }

int drmpc_result_runs(const drmpc_result* res) { return res == nullptr ? 0 : static_cast<int>(res->mc.runs.size()); }

drmpc_status drmpc_result_summary(const drmpc_result* res, drmpc_summary* out) {
    return guarded([&] {
        need(res != nullptr && out != nullptr, "null argument");
        out->min_cost = res->mc.min_cost;
        out->median_cost = res->mc.median_cost;
        out->max_cost = res->mc.max_cost;
        out->feasible_runs = res->mc.feasible_runs;
        out->infeasible_runs = res->mc.infeasible_runs;
    });
}

drmpc_status drmpc_result_run_info(const drmpc_result* res, int run, drmpc_run_info* out) {
    return guarded([&] {
        need(out != nullptr, "null output");
        const drmpc::RunResult& r = run_at(res, run);
        out->seed = r.seed;
        out->steps = static_cast<int>(r.steps.size());
        out->cumulative_cost = r.cumulative_cost;
        out->infeasible = r.infeasible ? 1 : 0;
        out->infeasible_step = r.infeasible_step;
    });
}

drmpc_status drmpc_result_step(const drmpc_result* res, int run, int step, drmpc_step* out) {
    return guarded([&] {
        need(out != nullptr, "null output");
        const drmpc::RunResult& r = run_at(res, run);
        need(step >= 0 && step < static_cast<int>(r.steps.size()), "step index out of range");
        const drmpc::StepRecord& s = r.steps[static_cast<size_t>(step)];
        out->objective = s.objective;
        out->beta = s.beta;
        out->stage_cost = s.stage_cost;
        out->feasible = s.feasible ? 1 : 0;
    });
}

const char* drmpc_result_failure(const drmpc_result* res, int run) {
    if (res == nullptr || run < 0 || run >= static_cast<int>(res->mc.runs.size())) {
        return "";
    }
    return res->mc.runs[static_cast<size_t>(run)].failure.c_str();
}

drmpc_status drmpc_result_write_trajectory(const drmpc_result* res, int run, const char* path) {
    return guarded([&] {
        const drmpc::RunResult& r = run_at(res, run);
        std::ofstream out = open_out(path, false);
        drmpc::write_trajectory_csv(out, r);
    });
}

drmpc_status drmpc_result_write_snapshot(const drmpc_result* res, int run, const char* path) {
    return guarded([&] {
        const drmpc::RunResult& r = run_at(res, run);
        std::ofstream out = open_out(path, false);
        out << r.snapshot;
    });
}

drmpc_status drmpc_result_write_summary(const drmpc_result* res, const char* path, int append) {
    return guarded([&] {
        need(res != nullptr, "null result handle");
        std::ofstream out = open_out(path, append != 0);
        if (append == 0) {
            drmpc::write_summary_header(out);
        }
        drmpc::write_summary_rows(out, res->samples, res->mc);
    });
}

drmpc_status drmpc_validate(const char* suite, uint64_t seed, drmpc_report** out) {
    return guarded([&] {
        need(suite != nullptr && out != nullptr, "null argument");
        auto handle = std::make_unique<drmpc_report>();
        handle->report = drmpc::run_validation_suite(suite, seed);
        *out = handle.release();
    });
}

void drmpc_report_free(drmpc_report* report) { delete report; }

int drmpc_report_checks(const drmpc_report* report) {
    return report == nullptr ? 0 : static_cast<int>(report->report.checks.size());
}

drmpc_status drmpc_report_check(const drmpc_report* report, int index, drmpc_check* out) {
    return guarded([&] {
        need(report != nullptr && out != nullptr, "null argument");
        need(index >= 0 && index < static_cast<int>(report->report.checks.size()), "check index out of range");
        const drmpc::CheckResult& c = report->report.checks[static_cast<size_t>(index)];
        out->name = c.name.c_str();
        out->detail = c.detail.c_str();
        out->margin = c.margin;
        out->tolerance = c.tolerance;
        out->passed = c.passed ? 1 : 0;
    });
}

int drmpc_report_passed(const drmpc_report* report) { return report != nullptr && report->report.passed() ? 1 : 0; }

}  // extern "C"
