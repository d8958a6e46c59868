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

#include <optional>
#include <string>
#include <vector>

#include "drmpc/ambiguity.hpp"
#include "drmpc/conic.hpp"

namespace drmpc {

/// z(w) = (w,1)' P (w,1) with P symmetric of size d+1.
struct HomQuadratic {
    Matrix p;

    HomQuadratic() = default;
    explicit HomQuadratic(Matrix p_in);

    int d() const { return static_cast<int>(p.rows()) - 1; }
    double evaluate(const Vector& w) const;

    static HomQuadratic constant(int d, double kappa);
};

struct MomentDualCertificate {
    Matrix lambda;
    Matrix lambda_bar;
    double tau = 0.0;
    double s = 0.0;
};

struct RiskValue {
    double value = 0.0;
    std::optional<MomentDualCertificate> certificate;
    SolverStats stats;
};

// ---------------------------------------------------------------------------
// Program pieces shared by the standalone evaluations and the controller.

/// Dual variables of one moment factor. `lambda` and `lambda_bar` hold the
/// scaled multipliers R_w Lambda R_w and R_w Lambda_bar R_w, so
/// delta = R_w (Lambda - Lambda_bar) R_w is their difference and the
/// objective term tr[Lambda (R C R + beta I)] + tr[Lambda_bar (beta I - R C R)]
/// reads tr[lambda (C + beta R^-2)] + tr[lambda_bar (beta R^-2 - C)].
struct MomentMultipliers {
    SymMatVar lambda;
    SymMatVar lambda_bar;
    LinMatrix delta;
    LinExpr objective;
};

MomentMultipliers add_moment_multipliers(ConicProgram& program, const MomentAmbiguity& amb, const std::string& name);

/// Embeds an (n_w+1)-square homogeneous matrix acting on (w_stage, 1) into the
/// homogeneous coordinates (w_0, ..., w_{k-1}, 1).
LinMatrix embed_stage(const LinMatrix& m, int stage, int k, int n_w);

/// Adds the S-procedure LMI certifying
///   (w,1)' base (w,1) - sum_j |factor_j (w,1)|^2 >= 0   for all |w_i| <= radius,
/// i = 0..k-1, with one multiplier s_i >= 0 per ball. The squared terms are
/// carried by a Schur complement so `factors` may be affine in the program
/// variables. Returns the multipliers.
std::vector<VarId> add_s_procedure(ConicProgram& program, const std::string& name, const LinMatrix& base,
                                   const std::vector<LinMatrix>& factors, int k, int n_w, double radius);

/// Lemma-4 style dual of a risk over a product of per-stage ambiguity sets.
/// `certificate` is tau + sum_i (w_i,1)' delta_i (w_i,1) in homogeneous
/// coordinates over W^N; support-only stages contribute nothing.
struct ProductRiskBlocks {
    VarId tau = -1;
    std::vector<std::optional<MomentMultipliers>> stages;
    LinExpr objective;
    LinMatrix certificate;
};

ProductRiskBlocks product_risk_dual_blocks(ConicProgram& program, const std::vector<AmbiguityKind>& per_stage,
                                           const std::string& name);

/// Robust AVaR dual over P(W)^{t-1} x core. Emits
///   tau_t + alpha^{-1} (tau_core + b.lambda) <= 0        (when requested)
/// and returns the two certificate matrices over W^t:
///   nonneg:  tau_core + (w_{t-1},1)' delta (w_{t-1},1)          >= 0
///   upper:   tau_core + tau_t + (w_{t-1},1)' delta (w_{t-1},1)  >= z
struct RavarBlocks {
    VarId tau = -1;
    VarId tau_core = -1;
    std::optional<MomentMultipliers> core;
    LinExpr risk;  // tau_t + alpha^{-1} (tau_core + b.lambda)
    LinMatrix nonneg;
    LinMatrix upper;
};

RavarBlocks ravar_dual_blocks(ConicProgram& program, int t, const AmbiguityKind& core, double alpha,
                              const std::string& name, bool emit_constraint = true);

// ---------------------------------------------------------------------------
// Standalone evaluations.

/// Worst-case expectation over the moment set (exact S-lemma, one ball).
RiskValue moment_risk(const HomQuadratic& z, const MomentAmbiguity& amb, const SolverOptions& options = {});

/// max over |w| <= r of z(w), via the exact S-lemma.
RiskValue robust_sup(const HomQuadratic& z, const SupportBall& support, const SolverOptions& options = {});

/// Risk of z over W^N under a product ambiguity. With N >= 2 the pointwise
/// inequality is discharged over N balls of the given radius (pass the
/// support radius for the plain S-procedure).
RiskValue product_risk(const HomQuadratic& z, const std::vector<AmbiguityKind>& per_stage, double radius,
                       const SolverOptions& options = {});

/// Robust AVaR of z over P(W)^{t-1} x core, with z defined on W^t.
RiskValue ravar_risk(const HomQuadratic& z, int t, const AmbiguityKind& core, double alpha, double radius,
                     const SolverOptions& options = {});

/// Empirical AVaR_alpha: the mean of the upper alpha-tail, with the boundary
/// sample weighted fractionally.
double avar_empirical(std::vector<double> z_samples, double alpha);

}  // namespace drmpc
