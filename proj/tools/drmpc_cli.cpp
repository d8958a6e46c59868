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

// drmpc command-line front end. Links only the C API.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "drmpc/drmpc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

int report_error(drmpc_status status) {
    std::cerr << "drmpc: " << drmpc_status_name(status) << ": " << drmpc_last_error() << "\n";
    return kExitError;
}

bool env_verbose() {
    const char* v = std::getenv("DRMPC_VERBOSE");
    return v != nullptr && *v != '\0' && std::string(v) != "0";
}

struct RunArgs {
    std::string config;
    std::string out = ".";
    std::vector<std::string> sets;
    std::int64_t seed = -1;
    int reps = 0;
    std::vector<long> sweep;
    int threads = 0;
};

int run_one(const RunArgs& args, const std::vector<std::string>& overrides, bool append, bool& infeasible) {
    std::vector<const char*> ptrs;
    for (const auto& o : overrides) {
        ptrs.push_back(o.c_str());
    }
    drmpc_experiment* exp = nullptr;
    drmpc_status st = drmpc_experiment_load(args.config.c_str(), ptrs.data(), ptrs.size(), &exp);
    if (st != DRMPC_OK) {
        return report_error(st);
    }
    drmpc_experiment_set_verbose(exp, env_verbose() ? 1 : 0);
    drmpc_experiment_info info{};
    drmpc_experiment_info_get(exp, &info);
    drmpc_result* res = nullptr;
    st = drmpc_experiment_run(exp, args.threads, &res);
    drmpc_experiment_free(exp);
    if (st != DRMPC_OK) {
        return report_error(st);
    }
    namespace fs = std::filesystem;
    const std::string tag = info.mode == DRMPC_MODE_ROBUST ? std::string("robust") : "M" + std::to_string(info.samples);
    int code = kExitOk;
    for (int i = 0; i < drmpc_result_runs(res) && code == kExitOk; ++i) {
        const std::string base = (fs::path(args.out) / ("trajectory_" + tag + "_rep" + std::to_string(i))).string();
        st = drmpc_result_write_trajectory(res, i, (base + ".csv").c_str());
        if (st != DRMPC_OK) {
            code = report_error(st);
            break;
        }
        drmpc_run_info ri{};
        drmpc_result_run_info(res, i, &ri);
        if (ri.infeasible != 0) {
            infeasible = true;
            const std::string snap = base + "_snapshot.txt";
            drmpc_result_write_snapshot(res, i, snap.c_str());
            std::cerr << "drmpc: InfeasibleStep: " << tag << " rep " << i << " " << drmpc_result_failure(res, i) << " (program dumped to " << snap << ")\n";
        }
    }
    if (code == kExitOk) {
        st = drmpc_result_write_summary(res, (fs::path(args.out) / "summary.csv").string().c_str(), append ? 1 : 0);
        if (st != DRMPC_OK) {
            code = report_error(st);
        }
    }
    if (code == kExitOk) {
        drmpc_summary sum{};
        drmpc_result_summary(res, &sum);
        std::cout << tag << ": runs=" << drmpc_result_runs(res) << " feasible=" << sum.feasible_runs
                  << " cost min/median/max=" << sum.min_cost << "/" << sum.median_cost << "/" << sum.max_cost << "\n";
    }
    drmpc_result_free(res);
    return code;
}

int cmd_run(const RunArgs& args) {
    std::error_code ec;
    std::filesystem::create_directories(args.out, ec);
    if (ec) {
        std::cerr << "drmpc: IoError: cannot create output directory '" << args.out << "': " << ec.message() << "\n";
        return kExitError;
    }
    std::vector<std::string> overrides = args.sets;
    if (args.seed >= 0) {
        overrides.push_back("disturbance.seed=" + std::to_string(args.seed));
    }
    if (args.reps > 0) {
        overrides.push_back("run.repetitions=" + std::to_string(args.reps));
    }
    bool infeasible = false;
    if (args.sweep.empty()) {
        const int code = run_one(args, overrides, false, infeasible);
        return code != kExitOk ? code : (infeasible ? kExitInfeasible : kExitOk);
    }
    bool append = false;
    for (long m : args.sweep) {
        std::vector<std::string> with_m = overrides;
        with_m.push_back("run.M=" + std::to_string(m));
        const int code = run_one(args, with_m, append, infeasible);
        if (code != kExitOk) {
            return code;
        }
        append = true;
    }
    return infeasible ? kExitInfeasible : kExitOk;
}

struct RadiusArgs {
    long m = 10;
    int n_w = 1;
    double r = 1.0;
    double c = 0.25;
    double delta = 0.05;
    bool sweep = false;
};

// The c = 1/4 specialization: 0.5 (1 + sqrt 2) r^2 sqrt(2 ln(2 (n_w + 1) / delta) / M).
double closed_form_quarter(long m, int n_w, double r, double delta) {
    return 0.5 * (1.0 + std::sqrt(2.0)) * r * r *
           std::sqrt(2.0 * std::log(2.0 * (n_w + 1) / delta) / static_cast<double>(m));
}

int cmd_radius(const RadiusArgs& a) {
    std::vector<long> ms;
    if (a.sweep) {
        for (long m = 10; m <= 1000000; m *= 10) {
            ms.push_back(m);
        }
    } else {
        ms.push_back(a.m);
    }
    const bool quarter = std::abs(a.c - 0.25) <= 1e-15;
    std::cout << std::setprecision(12);
    if (a.sweep) {
        std::cout << "M,beta" << (quarter ? ",closed_form" : "") << "\n";
    }
    for (long m : ms) {
        double beta = 0.0;
        const drmpc_status st = drmpc_hoeffding_radius(m, a.n_w, a.r, a.c, a.delta, &beta);
        if (st != DRMPC_OK) {
            return report_error(st);
        }
        if (a.sweep) {
            std::cout << m << "," << beta;
            if (quarter) {
                std::cout << "," << closed_form_quarter(m, a.n_w, a.r, a.delta);
            }
            std::cout << "\n";
        } else {
            std::cout << "beta = " << beta << "\n";
            if (quarter) {
                std::cout << "closed-form (Remark) = " << closed_form_quarter(m, a.n_w, a.r, a.delta) << "\n";
            }
        }
    }
    return kExitOk;
}

int cmd_validate(const std::string& suite, std::uint64_t seed) {
    drmpc_report* rep = nullptr;
    const drmpc_status st = drmpc_validate(suite.c_str(), seed, &rep);
    if (st != DRMPC_OK) {
        return report_error(st);
    }
    std::cout << std::setprecision(6);
    for (int i = 0; i < drmpc_report_checks(rep); ++i) {
        drmpc_check c{};
        drmpc_report_check(rep, i, &c);
        std::cout << (c.passed != 0 ? "PASS " : "FAIL ") << c.name << "  margin=" << c.margin
                  << " tol=" << c.tolerance << "  " << c.detail << "\n";
    }
    const bool ok = drmpc_report_passed(rep) != 0;
    std::cout << suite << ": " << (ok ? "all checks passed" : "FAILED") << "\n";
    drmpc_report_free(rep);
    return ok ? kExitOk : kExitError;
}

int cmd_show(const std::string& config, const std::vector<std::string>& sets) {
    std::vector<const char*> ptrs;
    for (const auto& s : sets) {
        ptrs.push_back(s.c_str());
    }
    drmpc_experiment* exp = nullptr;
    drmpc_status st = drmpc_experiment_load(config.c_str(), ptrs.data(), ptrs.size(), &exp);
    if (st != DRMPC_OK) {
        return report_error(st);
    }
    char* text = nullptr;
    st = drmpc_experiment_to_json(exp, &text);
    drmpc_experiment_free(exp);
    if (st != DRMPC_OK) {
        return report_error(st);
    }
    std::cout << text << "\n";
    drmpc_string_free(text);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven distributionally robust MPC"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(drmpc_version()));

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a closed-loop experiment and write CSV files");
    run_cmd->add_option("--config", run.config, "Bundled config name or JSON path")->required();
    run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
    run_cmd->add_option("--set", run.sets, "Override key=value (dotted keys, repeatable)");
    run_cmd->add_option("--seed", run.seed, "Base seed (repetition i uses seed + i)");
    run_cmd->add_option("--reps", run.reps, "Repetitions");
    run_cmd->add_option("--sweep-M", run.sweep, "Run once per sample count, e.g. --sweep-M 10,1000,100000")
        ->delimiter(',');
    run_cmd->add_option("--threads", run.threads, "Worker threads (0: all cores)");

    RadiusArgs radius;
    auto* radius_cmd = app.add_subcommand("radius", "Print the ambiguity radius beta");
    radius_cmd->add_option("-M,--samples", radius.m, "Sample count")->capture_default_str();
    radius_cmd->add_option("--nw", radius.n_w, "Disturbance dimension")->capture_default_str();
    radius_cmd->add_option("--r", radius.r, "Support radius")->capture_default_str();
    radius_cmd->add_option("--c", radius.c, "Scaling c")->capture_default_str();
    radius_cmd->add_option("--delta", radius.delta, "Confidence parameter")->capture_default_str();
    radius_cmd->add_flag("--sweep", radius.sweep, "Tabulate M = 10 .. 10^6");

    std::string suite;
    std::uint64_t vseed = 1;
    auto* val_cmd = app.add_subcommand("validate", "Run an oracle suite");
    val_cmd->add_option("suite", suite, "risk-duality | dynamics | feasibility-audit")->required();
    val_cmd->add_option("--seed", vseed, "Seed")->capture_default_str();

    std::string show_config;
    std::vector<std::string> show_sets;
    auto* show_cmd = app.add_subcommand("show", "Print the canonical form of a config");
    show_cmd->add_option("--config", show_config, "Bundled config name or JSON path")->required();
    show_cmd->add_option("--set", show_sets, "Override key=value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }
    if (*run_cmd) {
        return cmd_run(run);
    }
    if (*radius_cmd) {
        return cmd_radius(radius);
    }
    if (*val_cmd) {
        return cmd_validate(suite, vseed);
    }
    return cmd_show(show_config, show_sets);
}
