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

#include "drmpc/risk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "drmpc/error.hpp"

namespace drmpc {

namespace {

Solution solve_or_throw(const ConicProgram& program, const SolverOptions& options, const std::string& what) {
    Solution sol = solve(program, options);
    if (sol.status == SolveStatus::DualInfeasible) {
        fail(ErrorCode::Unbounded, what + ": risk program is unbounded below");
    }
    if (!sol.optimal()) {
        fail(ErrorCode::SolverFailure, what + ": " + sol.message);
    }
    return sol;
}

int common_n_w(const std::vector<AmbiguityKind>& per_stage) {
    require(!per_stage.empty(), ErrorCode::InvalidArgument, "product ambiguity needs at least one stage");
    const int n_w = support_of(per_stage.front()).n_w;
    for (const auto& a : per_stage) {
        require(support_of(a).n_w == n_w, ErrorCode::DimensionMismatch, "stages of a product ambiguity differ in n_w");
        if (const auto* m = std::get_if<MomentAmbiguity>(&a)) {
            require(m->beta >= 0.0, ErrorCode::Unbounded, "ambiguity radius beta is negative");
        }
    }
    return n_w;
}

MomentDualCertificate certificate_from(const Solution& sol, const ProductRiskBlocks& blocks,
                                       const std::vector<VarId>& s, const Matrix& rw) {
    MomentDualCertificate cert;
    cert.tau = sol.value(blocks.tau);
    cert.s = s.empty() ? 0.0 : sol.value(s.front());
    if (!blocks.stages.empty() && blocks.stages.front()) {
        const Matrix rinv = rw.diagonal().cwiseInverse().asDiagonal();
        cert.lambda = rinv * sol.value(blocks.stages.front()->lambda) * rinv;
        cert.lambda_bar = rinv * sol.value(blocks.stages.front()->lambda_bar) * rinv;
    }
    return cert;
}

}  // namespace

HomQuadratic::HomQuadratic(Matrix p_in) : p(std::move(p_in)) {
    require(p.rows() == p.cols() && p.rows() >= 2, ErrorCode::DimensionMismatch,
            "homogeneous quadratic needs a square matrix of size >= 2");
    require(is_symmetric(p, 1e-12 * (1.0 + p.cwiseAbs().maxCoeff())), ErrorCode::InvalidArgument,
            "homogeneous quadratic matrix is not symmetric");
    p = symmetrize(p);
}

double HomQuadratic::evaluate(const Vector& w) const {
    require(w.size() == d(), ErrorCode::DimensionMismatch, "disturbance dimension does not match quadratic");
    Vector wh(d() + 1);
    wh.head(d()) = w;
    wh(d()) = 1.0;
    return wh.dot(p * wh);
}

HomQuadratic HomQuadratic::constant(int d, double kappa) {
    Matrix p = Matrix::Zero(d + 1, d + 1);
    p(d, d) = kappa;
    return HomQuadratic(p);
}

MomentMultipliers add_moment_multipliers(ConicProgram& program, const MomentAmbiguity& amb, const std::string& name) {
    const int d = amb.n_w() + 1;
    require(amb.c_hat.rows() == d && amb.c_hat.cols() == d, ErrorCode::DimensionMismatch,
            name + ": ambiguity center has wrong size");
    // The program carries R Lambda R and R Lambda_bar R (PSD iff Lambda,
    // Lambda_bar are), which keeps the corner entries on the same scale as
    // the rest of the block when c r is small.
    MomentMultipliers mm;
    mm.lambda = program.add_psd_variable(name + ".Lambda", d);
    mm.lambda_bar = program.add_psd_variable(name + ".Lambda_bar", d);
    const Vector rinv2 = amb.r_w().diagonal().cwiseInverse().cwiseAbs2();
    // Lambda_bar multiplies the lower bound R C R >= R C_hat R - beta I, so its
    // weight is beta I - R C_hat R.
    const Matrix upper = amb.c_hat + amb.beta * Matrix(rinv2.asDiagonal());
    const Matrix lower = amb.beta * Matrix(rinv2.asDiagonal()) - amb.c_hat;
    mm.delta = mm.lambda.expr() - mm.lambda_bar.expr();
    for (int j = 0; j < d; ++j) {
        for (int i = j; i < d; ++i) {
            const double w = i == j ? 1.0 : 2.0;
            mm.objective.add_scaled(LinExpr::variable(mm.lambda.at(i, j)), w * upper(i, j));
            mm.objective.add_scaled(LinExpr::variable(mm.lambda_bar.at(i, j)), w * lower(i, j));
        }
    }
    return mm;
}

LinMatrix embed_stage(const LinMatrix& m, int stage, int k, int n_w) {
    require(m.rows() == n_w + 1 && m.cols() == n_w + 1, ErrorCode::DimensionMismatch,
            "stage matrix must be (n_w+1)-square");
    require(stage >= 0 && stage < k, ErrorCode::InvalidArgument, "stage index out of range");
    const int d = k * n_w + 1;
    const int off = stage * n_w;
    LinMatrix out(d, d);
    out.set_block(off, off, m.block(0, 0, n_w, n_w));
    out.set_block(off, d - 1, m.block(0, n_w, n_w, 1));
    out.set_block(d - 1, off, m.block(n_w, 0, 1, n_w));
    out(d - 1, d - 1) = m(n_w, n_w);
    return out;
}

std::vector<VarId> add_s_procedure(ConicProgram& program, const std::string& name, const LinMatrix& base,
                                   const std::vector<LinMatrix>& factors, int k, int n_w, double radius) {
    const int d = k * n_w + 1;
    require(base.rows() == d && base.cols() == d, ErrorCode::DimensionMismatch,
            name + ": base matrix does not match W^k homogeneous coordinates");
    require(radius > 0.0, ErrorCode::InvalidArgument, name + ": S-procedure radius must be positive");
    int extra = 0;
    for (const auto& f : factors) {
        require(f.cols() == d, ErrorCode::DimensionMismatch, name + ": Schur factor has wrong column count");
        extra += static_cast<int>(f.rows());
    }
    LinMatrix top = base;
    std::vector<VarId> s;
    s.reserve(static_cast<size_t>(k));
    const double r2 = radius * radius;
    for (int i = 0; i < k; ++i) {
        const VarId si = program.add_nonneg_variable(name + ".s[" + std::to_string(i) + "]");
        s.push_back(si);
        for (int j = 0; j < n_w; ++j) {
            top(i * n_w + j, i * n_w + j).add_scaled(LinExpr::variable(si), 1.0);
        }
        top(d - 1, d - 1).add_scaled(LinExpr::variable(si), -r2);
    }
    if (extra == 0) {
        program.add_lmi(name, top);
        return s;
    }
    LinMatrix full(d + extra, d + extra);
    full.set_block(0, 0, top);
    int off = d;
    for (const auto& f : factors) {
        const auto q = f.rows();
        full.set_block(off, 0, f);
        full.set_block(0, off, f.transpose());
        full.set_block(off, off, Matrix(Matrix::Identity(q, q)));
        off += static_cast<int>(q);
    }
    program.add_lmi(name, full);
    return s;
}

ProductRiskBlocks product_risk_dual_blocks(ConicProgram& program, const std::vector<AmbiguityKind>& per_stage,
                                           const std::string& name) {
    const int n_w = common_n_w(per_stage);
    const int k = static_cast<int>(per_stage.size());
    const int d = k * n_w + 1;
    ProductRiskBlocks blocks;
    blocks.tau = program.add_variable(name + ".tau");
    blocks.objective = LinExpr::variable(blocks.tau);
    blocks.certificate = LinMatrix(d, d);
    blocks.certificate(d - 1, d - 1) = LinExpr::variable(blocks.tau);
    for (int i = 0; i < k; ++i) {
        const auto* m = std::get_if<MomentAmbiguity>(&per_stage[static_cast<size_t>(i)]);
        if (m == nullptr) {
            blocks.stages.emplace_back();
            continue;
        }
        MomentMultipliers mm = add_moment_multipliers(program, *m, name + "[" + std::to_string(i) + "]");
        blocks.certificate += embed_stage(mm.delta, i, k, n_w);
        blocks.objective += mm.objective;
        blocks.stages.emplace_back(std::move(mm));
    }
    return blocks;
}

RavarBlocks ravar_dual_blocks(ConicProgram& program, int t, const AmbiguityKind& core, double alpha,
                              const std::string& name, bool emit_constraint) {
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidAlpha, name + ": alpha must lie in (0,1)");
    require(t >= 1, ErrorCode::InvalidArgument, name + ": stage index t must be >= 1");
    const int n_w = support_of(core).n_w;
    const int d = t * n_w + 1;
    RavarBlocks blocks;
    blocks.tau = program.add_variable(name + ".tau");
    blocks.tau_core = program.add_variable(name + ".tau_core");
    blocks.nonneg = LinMatrix(d, d);
    blocks.nonneg(d - 1, d - 1) = LinExpr::variable(blocks.tau_core);
    LinExpr inner = LinExpr::variable(blocks.tau_core);
    if (const auto* m = std::get_if<MomentAmbiguity>(&core)) {
        require(m->beta >= 0.0, ErrorCode::Unbounded, name + ": ambiguity radius beta is negative");
        MomentMultipliers mm = add_moment_multipliers(program, *m, name + ".core");
        blocks.nonneg += embed_stage(mm.delta, t - 1, t, n_w);
        inner += mm.objective;
        blocks.core = std::move(mm);
    }
    blocks.upper = blocks.nonneg;
    blocks.upper(d - 1, d - 1) += LinExpr::variable(blocks.tau);
    blocks.risk = LinExpr::variable(blocks.tau) + inner * (1.0 / alpha);
    if (emit_constraint) {
        program.add_nonneg(name + ".avar", -blocks.risk);
    }
    return blocks;
}

RiskValue moment_risk(const HomQuadratic& z, const MomentAmbiguity& amb, const SolverOptions& options) {
    require(z.d() == amb.n_w(), ErrorCode::DimensionMismatch, "moment_risk: quadratic and ambiguity differ in n_w");
    return product_risk(z, {AmbiguityKind(amb)}, amb.support.r, options);
}

RiskValue robust_sup(const HomQuadratic& z, const SupportBall& support, const SolverOptions& options) {
    support.validate();
    require(z.d() == support.n_w, ErrorCode::DimensionMismatch, "robust_sup: quadratic and support differ in n_w");
    return product_risk(z, {AmbiguityKind(support)}, support.r, options);
}

RiskValue product_risk(const HomQuadratic& z, const std::vector<AmbiguityKind>& per_stage, double radius,
                       const SolverOptions& options) {
    const int n_w = common_n_w(per_stage);
    const int k = static_cast<int>(per_stage.size());
    require(z.d() == k * n_w, ErrorCode::DimensionMismatch, "product_risk: quadratic is not defined on W^N");
    ConicProgram program;
    ProductRiskBlocks blocks = product_risk_dual_blocks(program, per_stage, "risk");
    const std::vector<VarId> s =
        add_s_procedure(program, "risk.pointwise", blocks.certificate - LinMatrix(z.p), {}, k, n_w, radius);
    program.set_objective(blocks.objective);
    const Solution sol = solve_or_throw(program, options, "risk");
    RiskValue out;
    out.value = sol.objective;
    out.stats = sol.stats;
    if (k == 1) {
        const auto* m = std::get_if<MomentAmbiguity>(&per_stage.front());
        out.certificate = certificate_from(sol, blocks, s, m != nullptr ? m->r_w() : Matrix::Identity(n_w + 1, n_w + 1));
    }
    return out;
}

RiskValue ravar_risk(const HomQuadratic& z, int t, const AmbiguityKind& core, double alpha, double radius,
                     const SolverOptions& options) {
    const int n_w = support_of(core).n_w;
    require(z.d() == t * n_w, ErrorCode::DimensionMismatch, "ravar_risk: quadratic is not defined on W^t");
    ConicProgram program;
    RavarBlocks blocks = ravar_dual_blocks(program, t, core, alpha, "ravar", false);
    add_s_procedure(program, "ravar.nonneg", blocks.nonneg, {}, t, n_w, radius);
    add_s_procedure(program, "ravar.upper", blocks.upper - LinMatrix(z.p), {}, t, n_w, radius);
    program.set_objective(blocks.risk);
    const Solution sol = solve_or_throw(program, options, "ravar");
    RiskValue out;
    out.value = sol.objective;
    out.stats = sol.stats;
    return out;
}

double avar_empirical(std::vector<double> z_samples, double alpha) {
    require(!z_samples.empty(), ErrorCode::EmptySampleSet, "avar_empirical: no samples");
    require(alpha > 0.0 && alpha <= 1.0, ErrorCode::InvalidAlpha, "avar_empirical: alpha must lie in (0,1]");
    std::sort(z_samples.begin(), z_samples.end(), std::greater<>());
    const double mass = alpha * static_cast<double>(z_samples.size());
    double acc = 0.0;
    double taken = 0.0;
    for (double z : z_samples) {
        const double w = std::min(1.0, mass - taken);
        if (w <= 0.0) {
            break;
        }
        acc += w * z;
        taken += w;
    }
    return acc / mass;
}

}  // namespace drmpc
