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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "drmpc/ambiguity.hpp"
#include "drmpc/conic.hpp"
#include "drmpc/dynamics.hpp"
#include "drmpc/reform.hpp"

namespace drmpc {

/// Gaussian N(mean, covariance) conditioned on |w|_2 <= r.
struct DisturbanceModel {
    Vector mean;
    Matrix covariance;
    SupportBall support;

    void validate() const;
};

using Rng = std::mt19937_64;

/// Independent stream `stream` of run seed `seed`.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Rejection sampling; throws RejectionStall when fewer than 1 in 10^4 draws
/// land in the support.
std::vector<Vector> sample_truncated_gaussian(const DisturbanceModel& model, long count, Rng& rng);

/// Uniform direction on the support sphere.
Vector sample_sphere(const SupportBall& support, Rng& rng);

enum class RunMode { Offline, Online, Robust };

const char* run_mode_name(RunMode mode) noexcept;
RunMode parse_run_mode(const std::string& name);

struct RunConfig {
    RunMode mode = RunMode::Offline;
    long samples = 10;  // M (offline) or M_0 (online)
    int steps = 15;     // T
    int repetitions = 1;
    std::uint64_t seed = 0;
    double boundary_probability = 0.0;  // chance of replacing w_t by a sphere draw
    LtiSystem system;
    ControllerConfig controller;
    DisturbanceModel disturbance;
    Vector x0;
    SolverOptions solver;

    void validate() const;
};

struct StepRecord {
    int t = 0;
    Vector x;
    Vector u;
    Vector w;
    double objective = 0.0;
    double beta = 0.0;  // radius in force when the step was solved (0 when robust)
    double stage_cost = 0.0;
    bool feasible = true;
    bool ambiguity_accepted = false;  // online: candidate accepted after this step
    SolveStatus status = SolveStatus::Optimal;
};

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<StepRecord> steps;
    Vector x_final;
    double cumulative_cost = 0.0;
    bool infeasible = false;
    int infeasible_step = -1;
    std::string failure;   // solver message of the failing step
    std::string snapshot;  // program dump of the failing step
    /// Ambiguity in force at each step, plus the one after the last update.
    std::vector<MomentAmbiguity> ambiguities;
};

/// One closed-loop run with seed cfg.seed + repetition.
RunResult run_closed_loop(const RunConfig& cfg, int repetition = 0);

struct MonteCarloResult {
    std::vector<RunResult> runs;
    double min_cost = 0.0;
    double median_cost = 0.0;
    double max_cost = 0.0;
    int feasible_runs = 0;
    int infeasible_runs = 0;
};

/// cfg.repetitions independent runs; `threads` <= 0 uses the hardware count.
MonteCarloResult monte_carlo(const RunConfig& cfg, int threads = 0);

struct AuditReport {
    int points = 0;
    double worst_stage = 0.0;     // max phi(f(x, pi_f(x), w)) over sampled x in X_N, w in W
    double worst_terminal = 0.0;  // max psi(f(x, pi_f(x), w))
    bool passed = false;
    std::string message;
};

/// Samples X_N = {psi <= 0} (boundary and interior) and W (sphere and
/// interior) and checks the terminal ingredients numerically.
AuditReport audit_feasibility_assumptions(const RunConfig& cfg, int points = 10000, std::uint64_t seed = 1);

double median(std::vector<double> v);

/// t, x..., u..., w..., objective, beta, feasible.
void write_trajectory_csv(std::ostream& os, const RunResult& run);
/// M, rep, seed, cumulative_cost, feasible.
void write_summary_header(std::ostream& os);
void write_summary_rows(std::ostream& os, long samples, const MonteCarloResult& mc);

}  // namespace drmpc
