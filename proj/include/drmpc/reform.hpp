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

#include <string>
#include <vector>

#include "drmpc/ambiguity.hpp"
#include "drmpc/conic.hpp"
#include "drmpc/dynamics.hpp"
#include "drmpc/risk.hpp"

namespace drmpc {

/// phi(x) = x' G x + 2 g' x + gamma.
struct QuadraticConstraint {
    Matrix g_mat;
    Vector g_vec;
    double gamma = 0.0;

    double evaluate(const Vector& x) const;
};

/// Radius used when a pointwise inequality over k balls is discharged by the
/// S-procedure.
enum class SLemmaRadius {
    Nominal,       // support radius r for every k (sound; default)
    BallCount,     // inflated_radius(r, k)
    FixedHorizon,  // inflated_radius(r, N-1) for every k >= 2
};

const char* slemma_radius_name(SLemmaRadius rule) noexcept;
SLemmaRadius parse_slemma_radius(const std::string& name);

struct ControllerConfig {
    int horizon = 1;
    double alpha = 0.2;
    QuadraticConstraint stage;
    QuadraticConstraint terminal;
    Matrix q;
    Matrix r;
    Matrix q_f;
    Matrix k_f;         // terminal controller u = K_f x + k_f
    Vector k_f_offset;
    SupportBall support;
    double c = 0.25;
    double delta = 0.05;
    SLemmaRadius radius_rule = SLemmaRadius::Nominal;

    void validate(const LtiSystem& sys) const;
};

/// r scaled by 9.19 sqrt(ln k) for k >= 2; r itself for k = 1.
double inflated_radius(double r, int k);

/// Radius applied to an inequality over k balls under `config.radius_rule`.
double slemma_radius(const ControllerConfig& config, int k);

/// Affine decision variables of the controller.
struct PolicyVariables {
    LinMatrix gain;         // N n_u x N n_w, zero on and above the block diagonal
    LinMatrix offset;       // N n_u x 1
    LinMatrix response;     // [B F + E, A x0 + B f]: (N+1) n_x x (N n_w + 1)
    LinMatrix input;        // [F, f]
};

PolicyVariables add_policy_variables(ConicProgram& program, const StackedSystem& stacked, const Vector& x0);

/// Risk of the stage cost over W^N. Sets the program objective.
void build_cost_blocks(ConicProgram& program, const StackedSystem& stacked, const ControllerConfig& config,
                       const AmbiguityKind& amb, const PolicyVariables& vars);

/// Robust AVaR constraint on phi(x_t), 1 <= t <= N-1.
/// Returns the AVaR dual blocks so callers can evaluate the certificates.
RavarBlocks build_stage_risk_blocks(ConicProgram& program, const StackedSystem& stacked, const ControllerConfig& config,
                             const AmbiguityKind& amb, int t, const PolicyVariables& vars);

/// psi(x_N) <= 0 for every w in W^N.
void build_terminal_block(ConicProgram& program, const StackedSystem& stacked, const ControllerConfig& config,
                          const PolicyVariables& vars);

struct ControllerProgram {
    ConicProgram program;
    StackedSystem stacked;
    PolicyVariables vars;
    Vector x0;
    std::vector<RavarBlocks> stage_blocks;  // t = 1..N-1
};

ControllerProgram assemble(const ControllerConfig& config, const LtiSystem& sys, const Vector& x0,
                           const AmbiguityKind& amb);

struct ControllerSolution {
    Solution raw;
    AffinePolicy policy;
    Vector u0;
};

ControllerSolution solve_controller(const ControllerProgram& cp, const SolverOptions& options = {});

}  // namespace drmpc
