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
#include <limits>
#include <string>
#include <vector>

#include "drmpc/ambiguity.hpp"
#include "drmpc/dynamics.hpp"
#include "drmpc/reform.hpp"
#include "drmpc/risk.hpp"

namespace drmpc {

struct CheckResult {
    std::string name;
    double margin = 0.0;     // measured discrepancy
    double tolerance = 0.0;  // pass iff margin <= tolerance (and any lower bound holds)
    bool passed = false;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;

    bool passed() const;
};

/// Dense two-phase simplex for max c'x s.t. a_ub x <= b_ub, a_eq x = b_eq,
/// x >= 0. Throws SolverFailure if infeasible or unbounded.
struct LpResult {
    double objective = 0.0;
    Vector x;
};
LpResult solve_lp(const Vector& c, const Matrix& a_ub, const Vector& b_ub, const Matrix& a_eq, const Vector& b_eq);

/// Worst-case expectation of z (n_w = 1) over measures supported on a uniform
/// grid of `points` nodes in [-r, r] whose second moment lies in the moment
/// set. The norm ball is inner-approximated by a `directions`-gon, so the value
/// never exceeds the exact worst case.
double grid_moment_risk_lp(const HomQuadratic& z, const MomentAmbiguity& amb, int points = 2001,
                           int directions = 128);

/// max of z (n_w = 1) over a uniform grid of [-r, r].
double grid_sup(const HomQuadratic& z, double r, int points);

/// Max absolute difference between the stacked response [H, h](w, 1) and a
/// step-by-step simulation under u = F w + f.
double rollout_discrepancy(const LtiSystem& sys, const AffinePolicy& policy, const Vector& x0, const Vector& w,
                           int horizon);

/// Largest pointwise violation of the certified inequalities of a solved
/// controller program over the given disturbance sequences (each N n_w long):
/// the stage AVaR certificates, phi(x_t) <= upper certificate and the
/// nonnegativity certificate, and psi(x_N) <= 0. Also includes the AVaR
/// inequalities themselves. Nonpositive means sound.
struct SoundnessReport {
    double worst_stage = -std::numeric_limits<double>::infinity();
    double worst_nonneg = -std::numeric_limits<double>::infinity();
    double worst_terminal = -std::numeric_limits<double>::infinity();
    double worst_avar = -std::numeric_limits<double>::infinity();
    double worst() const;
};
SoundnessReport check_block_soundness(const ControllerProgram& cp, const ControllerConfig& config,
                                      const Solution& sol, const std::vector<Vector>& sequences);

SuiteReport validate_risk_duality(std::uint64_t seed, int instances = 20);
SuiteReport validate_dynamics(std::uint64_t seed, int triples = 100);
SuiteReport validate_feasibility_audit(const std::vector<std::string>& configs, std::uint64_t seed,
                                       int points = 10000);

/// Suite names: risk-duality, dynamics, feasibility-audit.
SuiteReport run_validation_suite(const std::string& suite, std::uint64_t seed);

}  // namespace drmpc
