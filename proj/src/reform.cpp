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

#include "drmpc/reform.hpp"

#include <algorithm>
#include <cmath>

#include "drmpc/error.hpp"
#include "drmpc/risk.hpp"

namespace drmpc {

namespace {

std::string idx(const std::string& base, int i) { return base + "[" + std::to_string(i) + "]"; }

// [H_{t,:t-1}, h_t]: block row t of the response restricted to the
// disturbances it can depend on.
LinMatrix stage_response(const LinMatrix& response, int t, int n_x, int n_w) {
    const auto cols = response.cols();
    LinMatrix out(n_x, t * n_w + 1);
    out.set_block(0, 0, response.block(static_cast<Eigen::Index>(t) * n_x, 0, n_x, t * n_w));
    out.set_block(0, t * n_w, response.block(static_cast<Eigen::Index>(t) * n_x, cols - 1, n_x, 1));
    return out;
}

// Part of phi(H w_hat) that is affine in the decision variables:
// [[0, H'g], [g'H, 2 h'g + gamma]].
LinMatrix linear_part(const LinMatrix& ht, const QuadraticConstraint& qc) {
    const auto d = ht.cols();
    const auto nx = ht.rows();
    LinMatrix out(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        LinExpr v;
        for (Eigen::Index a = 0; a < nx; ++a) {
            if (qc.g_vec(a) != 0.0) {
                v.add_scaled(ht(a, j), qc.g_vec(a));
            }
        }
        if (j + 1 < d) {
            out(j, d - 1) = v;
            out(d - 1, j) = v;
        } else {
            out(d - 1, d - 1) = v * 2.0 + LinExpr(qc.gamma);
        }
    }
    return out;
}

std::vector<LinMatrix> schur_factors(const Matrix& factor, const LinMatrix& m) {
    if (factor.rows() == 0) {
        return {};
    }
    return {factor * m};
}

void require_quadratic(const QuadraticConstraint& qc, int n_x, const std::string& what) {
    require(qc.g_mat.rows() == n_x && qc.g_mat.cols() == n_x, ErrorCode::DimensionMismatch,
            what + ": G must be n_x x n_x");
    require(qc.g_vec.size() == n_x, ErrorCode::DimensionMismatch, what + ": g must have n_x entries");
    require(std::isfinite(qc.gamma), ErrorCode::InvalidArgument, what + ": gamma must be finite");
    require_psd(qc.g_mat, what + ".G");
}

}  // namespace

double QuadraticConstraint::evaluate(const Vector& x) const {
    return x.dot(g_mat * x) + 2.0 * g_vec.dot(x) + gamma;
}

const char* slemma_radius_name(SLemmaRadius rule) noexcept {
    switch (rule) {
        case SLemmaRadius::Nominal:
            return "nominal";
        case SLemmaRadius::BallCount:
            return "ball-count";
        case SLemmaRadius::FixedHorizon:
            return "fixed-horizon";
    }
    return "unknown";
}

SLemmaRadius parse_slemma_radius(const std::string& name) {
    if (name == "nominal") {
        return SLemmaRadius::Nominal;
    }
    if (name == "ball-count") {
        return SLemmaRadius::BallCount;
    }
    if (name == "fixed-horizon") {
        return SLemmaRadius::FixedHorizon;
    }
    fail(ErrorCode::ConfigError, "unknown S-lemma radius rule '" + name +
                                     "' (expected nominal, ball-count or fixed-horizon)");
}

void ControllerConfig::validate(const LtiSystem& sys) const {
    sys.validate();
    const int nx = sys.n_x();
    const int nu = sys.n_u();
    require(horizon >= 1, ErrorCode::InvalidArgument, "horizon N must be >= 1");
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidAlpha, "alpha must lie in (0,1)");
    require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidConfidence, "delta must lie in (0,1)");
    require(c > 0.0, ErrorCode::InvalidArgument, "scaling c must be positive");
    support.validate();
    require(support.n_w == sys.n_w(), ErrorCode::DimensionMismatch, "support dimension differs from E columns");
    require(q.rows() == nx && q.cols() == nx, ErrorCode::DimensionMismatch, "Q must be n_x x n_x");
    require(q_f.rows() == nx && q_f.cols() == nx, ErrorCode::DimensionMismatch, "Q_f must be n_x x n_x");
    require(r.rows() == nu && r.cols() == nu, ErrorCode::DimensionMismatch, "R must be n_u x n_u");
    require_psd(q, "Q");
    require_psd(q_f, "Q_f");
    require_psd(r, "R");
    require(k_f.rows() == nu && k_f.cols() == nx, ErrorCode::DimensionMismatch, "K_f must be n_u x n_x");
    require(k_f_offset.size() == nu, ErrorCode::DimensionMismatch, "k_f must have n_u entries");
    require_quadratic(stage, nx, "stage constraint");
    require_quadratic(terminal, nx, "terminal constraint");
}

double inflated_radius(double r, int k) {
    require(k >= 1, ErrorCode::InvalidArgument, "ball count k must be >= 1");
    if (k == 1) {
        return r;
    }
    return r * 9.19 * std::sqrt(std::log(static_cast<double>(std::max(k, 2))));
}

double slemma_radius(const ControllerConfig& config, int k) {
    const double r = config.support.r;
    switch (config.radius_rule) {
        case SLemmaRadius::Nominal:
            return r;
        case SLemmaRadius::BallCount:
            return inflated_radius(r, k);
        case SLemmaRadius::FixedHorizon:
            return k == 1 ? r : inflated_radius(r, std::max(config.horizon - 1, 2));
    }
    return r;
}

PolicyVariables add_policy_variables(ConicProgram& program, const StackedSystem& stacked, const Vector& x0) {
    const int n = stacked.horizon;
    const int nu = stacked.n_u;
    const int nw = stacked.n_w;
    require(x0.size() == stacked.n_x, ErrorCode::DimensionMismatch, "initial state has wrong dimension");
    PolicyVariables v;
    v.gain = LinMatrix(n * nu, n * nw);
    v.offset = LinMatrix(n * nu, 1);
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < nu; ++a) {
            v.offset(i * nu + a, 0) = LinExpr::variable(program.add_variable(
                "f[" + std::to_string(i) + "](" + std::to_string(a) + ")"));
        }
        for (int j = 0; j < i; ++j) {
            for (int a = 0; a < nu; ++a) {
                for (int b = 0; b < nw; ++b) {
                    v.gain(i * nu + a, j * nw + b) = LinExpr::variable(program.add_variable(
                        "F[" + std::to_string(i) + "," + std::to_string(j) + "](" + std::to_string(a) + "," +
                        std::to_string(b) + ")"));
                }
            }
        }
    }
    const auto rows = static_cast<Eigen::Index>(n + 1) * stacked.n_x;
    v.response = LinMatrix(rows, n * nw + 1);
    v.response.set_block(0, 0, stacked.b * v.gain + LinMatrix(stacked.e));
    v.response.set_block(0, n * nw, stacked.b * v.offset + LinMatrix(Matrix(stacked.a * x0)));
    v.input = LinMatrix(n * nu, n * nw + 1);
    v.input.set_block(0, 0, v.gain);
    v.input.set_block(0, n * nw, v.offset);
    return v;
}

void build_cost_blocks(ConicProgram& program, const StackedSystem& stacked, const ControllerConfig& config,
                       const AmbiguityKind& amb, const PolicyVariables& vars) {
    const int n = stacked.horizon;
    const std::vector<AmbiguityKind> per_stage(static_cast<size_t>(n), amb);
    ProductRiskBlocks blocks = product_risk_dual_blocks(program, per_stage, "cost");
    std::vector<LinMatrix> factors;
    const Matrix qf = psd_factor(stacked.q, "Q stack");
    const Matrix rf = psd_factor(stacked.r, "R stack");
    if (qf.rows() > 0) {
        factors.push_back(qf * vars.response);
    }
    if (rf.rows() > 0) {
        factors.push_back(rf * vars.input);
    }
    add_s_procedure(program, "cost.pointwise", blocks.certificate, factors, n, stacked.n_w, slemma_radius(config, n));
    program.set_objective(blocks.objective);
}

RavarBlocks build_stage_risk_blocks(ConicProgram& program, const StackedSystem& stacked, const ControllerConfig& config,
                             const AmbiguityKind& amb, int t, const PolicyVariables& vars) {
    require(t >= 1 && t <= stacked.horizon - 1, ErrorCode::InvalidArgument, "stage index must lie in 1..N-1");
    const int nw = stacked.n_w;
    const std::string name = idx("stage", t);
    const LinMatrix ht = stage_response(vars.response, t, stacked.n_x, nw);
    RavarBlocks rb = ravar_dual_blocks(program, t, amb, config.alpha, name);
    const double radius = slemma_radius(config, t);
    add_s_procedure(program, name + ".nonneg", rb.nonneg, {}, t, nw, radius);
    add_s_procedure(program, name + ".upper", rb.upper - linear_part(ht, config.stage),
                    schur_factors(psd_factor(config.stage.g_mat, "G"), ht), t, nw, radius);
    return rb;
}

void build_terminal_block(ConicProgram& program, const StackedSystem& stacked, const ControllerConfig& config,
                          const PolicyVariables& vars) {
    const int n = stacked.horizon;
    const LinMatrix hn = stage_response(vars.response, n, stacked.n_x, stacked.n_w);
    LinMatrix base = LinMatrix(hn.cols(), hn.cols()) - linear_part(hn, config.terminal);
    add_s_procedure(program, "terminal", base, schur_factors(psd_factor(config.terminal.g_mat, "G_f"), hn), n,
                    stacked.n_w, slemma_radius(config, n));
}

ControllerProgram assemble(const ControllerConfig& config, const LtiSystem& sys, const Vector& x0,
                           const AmbiguityKind& amb) {
    config.validate(sys);
    require(support_of(amb).n_w == sys.n_w(), ErrorCode::DimensionMismatch, "ambiguity dimension differs from n_w");
    ControllerProgram cp;
    cp.stacked = stack_system(sys, config.q, config.r, config.q_f, config.horizon);
    cp.x0 = x0;
    cp.vars = add_policy_variables(cp.program, cp.stacked, x0);
    build_cost_blocks(cp.program, cp.stacked, config, amb, cp.vars);
    for (int t = 1; t <= config.horizon - 1; ++t) {
        cp.stage_blocks.push_back(build_stage_risk_blocks(cp.program, cp.stacked, config, amb, t, cp.vars));
    }
    build_terminal_block(cp.program, cp.stacked, config, cp.vars);
    return cp;
}

ControllerSolution solve_controller(const ControllerProgram& cp, const SolverOptions& options) {
    ControllerSolution out;
    out.raw = solve(cp.program, options);
    if (!out.raw.optimal()) {
        return out;
    }
    out.policy.gain = cp.vars.gain.evaluate(out.raw.values);
    out.policy.offset = cp.vars.offset.evaluate(out.raw.values).col(0);
    out.policy.check_causal(cp.stacked.n_u, cp.stacked.n_w);
    out.u0 = out.policy.offset.head(cp.stacked.n_u);
    return out;
}

}  // namespace drmpc
