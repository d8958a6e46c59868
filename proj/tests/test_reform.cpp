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

#include "doctest.h"

#include <cmath>

#include "drmpc/error.hpp"
#include "drmpc/experiment.hpp"
#include "drmpc/reform.hpp"
#include "drmpc/risk.hpp"
#include "drmpc/simulate.hpp"
#include "drmpc/validate.hpp"

using namespace drmpc;

namespace {

Experiment offline2d(long m = 10) { return load_experiment("offline2d", {"run.M=" + std::to_string(m)}); }

MomentAmbiguity offline_ambiguity(const RunConfig& run, std::uint64_t seed) {
    Rng rng = make_rng(seed, 2);
    const auto data = sample_truncated_gaussian(run.disturbance, run.samples, rng);
    return build_ambiguity(estimate_second_moment(data, run.controller.support), run.controller.c,
                           run.controller.delta);
}

std::vector<Vector> disturbance_sequences(const SupportBall& support, int n, int count, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Vector> out;
    for (int k = 0; k < count; ++k) {
        Vector w(n * support.n_w);
        for (int i = 0; i < n; ++i) {
            Vector wi = sample_sphere(support, rng);
            if (k % 2 == 1) {
                wi *= std::pow(unif(rng), 1.0 / support.n_w);
            }
            w.segment(i * support.n_w, support.n_w) = wi;
        }
        out.push_back(w);
    }
    return out;
}

}  // namespace

TEST_CASE("inflated radius") {
    CHECK(inflated_radius(0.15, 1) == 0.15);
    CHECK(inflated_radius(0.15, 7) == doctest::Approx(0.15 * 9.19 * std::sqrt(std::log(7.0))).epsilon(1e-15));
    double prev = 0.0;
    for (int k = 1; k < 20; ++k) {
        CHECK(inflated_radius(0.15, k) >= prev);
        prev = inflated_radius(0.15, k);
    }
    ControllerConfig c;
    c.horizon = 8;
    c.support = SupportBall{2, 0.15};
    CHECK(slemma_radius(c, 5) == 0.15);
    c.radius_rule = SLemmaRadius::BallCount;
    CHECK(slemma_radius(c, 5) == inflated_radius(0.15, 5));
    CHECK(slemma_radius(c, 1) == 0.15);
    c.radius_rule = SLemmaRadius::FixedHorizon;
    CHECK(slemma_radius(c, 3) == inflated_radius(0.15, 7));
    CHECK(parse_slemma_radius("ball-count") == SLemmaRadius::BallCount);
    CHECK_THROWS_AS(parse_slemma_radius("nope"), Error);
}

TEST_CASE("program size formulas") {
    // Variables: N n_u offsets, n_u n_w N(N-1)/2 gains, cost tau + N multiplier
    // pairs + N ball multipliers, per stage t two taus + one pair + 2t ball
    // multipliers, terminal N ball multipliers. Each multiplier pair holds
    // d(d+1) scalars with d = n_w + 1.
    Experiment exp = offline2d();
    const MomentAmbiguity amb = offline_ambiguity(exp.run, 1);
    for (int n : {1, 2, 8}) {
        exp.run.controller.horizon = n;
        const ControllerProgram cp = assemble(exp.run.controller, exp.run.system, exp.run.x0, amb);
        const int nu = 1;
        const int nw = 2;
        const int d = nw + 1;
        int vars = n * nu + nu * nw * n * (n - 1) / 2 + 1 + n * d * (d + 1) + n + n;
        for (int t = 1; t <= n - 1; ++t) {
            vars += 2 + d * (d + 1) + 2 * t;
        }
        const int lmis = 2 * n + 1 + 4 * (n - 1) + 1;
        CHECK(cp.program.num_variables() == vars);
        CHECK(static_cast<int>(cp.program.lmis().size()) == lmis);
        CHECK(static_cast<int>(cp.stage_blocks.size()) == n - 1);
    }
}

TEST_CASE("zero loss gives zero objective") {
    Experiment exp = offline2d();
    exp.run.controller.q = Matrix::Zero(2, 2);
    exp.run.controller.q_f = Matrix::Zero(2, 2);
    exp.run.controller.r = Matrix::Zero(1, 1);
    exp.run.controller.horizon = 3;
    const ControllerProgram cp =
        assemble(exp.run.controller, exp.run.system, exp.run.x0, offline_ambiguity(exp.run, 1));
    const ControllerSolution sol = solve_controller(cp);
    REQUIRE(sol.raw.optimal());
    CHECK(std::abs(sol.raw.objective) <= 1e-6);
}

TEST_CASE("single-stage cost equals the moment risk of the induced quadratic") {
    Experiment exp = offline2d();
    ControllerConfig cc = exp.run.controller;
    cc.horizon = 1;
    cc.terminal.gamma = -1e3;  // x0 with the fixed input would leave the terminal set
    const MomentAmbiguity amb = offline_ambiguity(exp.run, 2);
    ControllerProgram cp = assemble(cc, exp.run.system, exp.run.x0, amb);
    const double f0 = -0.7;
    cp.program.add_equality("fix_f", cp.vars.offset(0, 0) - f0);
    const Solution sol = solve(cp.program);
    REQUIRE(sol.optimal());

    const LtiSystem& s = exp.run.system;
    const Vector x0 = exp.run.x0;
    const Vector c = s.a * x0 + s.b * Vector::Constant(1, f0);
    Matrix p(3, 3);
    p.topLeftCorner(2, 2) = s.e.transpose() * cc.q_f * s.e;
    p.topRightCorner(2, 1) = s.e.transpose() * cc.q_f * c;
    p.bottomLeftCorner(1, 2) = p.topRightCorner(2, 1).transpose();
    p(2, 2) = c.dot(cc.q_f * c) + x0.dot(cc.q * x0) + f0 * cc.r(0, 0) * f0;
    const double oracle = moment_risk(HomQuadratic(p), amb).value;
    CHECK(std::abs(sol.objective - oracle) <= 1e-5 * (1.0 + std::abs(oracle)));
}

TEST_CASE("support-only and large-radius objectives agree") {
    Experiment exp = offline2d();
    ControllerConfig cc = exp.run.controller;
    cc.horizon = 3;
    MomentAmbiguity amb = offline_ambiguity(exp.run, 3);
    const double robust = solve_controller(assemble(cc, exp.run.system, exp.run.x0, cc.support)).raw.objective;
    const double data = solve_controller(assemble(cc, exp.run.system, exp.run.x0, amb)).raw.objective;
    CHECK(robust >= data - 1e-6);
    amb.beta = 10.0;
    const double wide = solve_controller(assemble(cc, exp.run.system, exp.run.x0, amb)).raw.objective;
    CHECK(std::abs(wide - robust) <= 1e-4 * (1.0 + std::abs(robust)));
}

TEST_CASE("objective is monotone in the radius") {
    Experiment exp = offline2d();
    ControllerConfig cc = exp.run.controller;
    cc.horizon = 3;
    MomentAmbiguity amb = offline_ambiguity(exp.run, 4);
    double prev = -1e300;
    for (double beta : {0.0005, 0.002, 0.01, 0.03}) {
        amb.beta = beta;
        const ControllerSolution s = solve_controller(assemble(cc, exp.run.system, exp.run.x0, amb));
        REQUIRE(s.raw.optimal());
        CHECK(s.raw.objective >= prev - 1e-6);
        prev = s.raw.objective;
    }
}

TEST_CASE("inactive stage and terminal constraints") {
    Experiment exp = offline2d();
    ControllerConfig cc = exp.run.controller;
    cc.horizon = 3;
    cc.stage = QuadraticConstraint{Matrix::Zero(2, 2), Vector::Zero(2), -1.0};
    cc.terminal = QuadraticConstraint{Matrix::Zero(2, 2), Vector::Zero(2), -1.0};
    const ControllerSolution s =
        solve_controller(assemble(cc, exp.run.system, exp.run.x0, offline_ambiguity(exp.run, 5)));
    CHECK(s.raw.optimal());

    // Deterministic system starting deep inside the terminal set.
    LtiSystem quiet = exp.run.system;
    quiet.e = Matrix::Zero(2, 2);
    ControllerConfig tc = exp.run.controller;
    tc.horizon = 2;
    const ControllerSolution q = solve_controller(assemble(tc, quiet, Vector::Constant(2, 0.1), tc.support));
    CHECK(q.raw.optimal());
}

TEST_CASE("bundled 2d problem solves and its certificates hold under sampling") {
    Experiment exp = offline2d();
    const MomentAmbiguity amb = offline_ambiguity(exp.run, 6);
    const ControllerProgram cp = assemble(exp.run.controller, exp.run.system, exp.run.x0, amb);
    const ControllerSolution s = solve_controller(cp);
    REQUIRE(s.raw.optimal());
    CHECK(std::isfinite(s.raw.objective));
    Rng rng = make_rng(6, 9);
    const auto seqs = disturbance_sequences(exp.run.controller.support, 8, 2000, rng);
    const SoundnessReport rep = check_block_soundness(cp, exp.run.controller, s.raw, seqs);
    CHECK(rep.worst() <= 1e-6);
}

TEST_CASE("objective bounds the realized cost under the data distribution") {
    Experiment exp = offline2d(100000);
    const MomentAmbiguity amb = offline_ambiguity(exp.run, 7);
    const ControllerProgram cp = assemble(exp.run.controller, exp.run.system, exp.run.x0, amb);
    const ControllerSolution s = solve_controller(cp);
    REQUIRE(s.raw.optimal());
    const Matrix h = s.raw.value(cp.vars.response);
    const Matrix u = s.raw.value(cp.vars.input);
    Rng rng = make_rng(7, 1);
    const int n = 8;
    const int count = 4000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int k = 0; k < count; ++k) {
        const auto w = sample_truncated_gaussian(exp.run.disturbance, n, rng);
        Vector wh(2 * n + 1);
        for (int i = 0; i < n; ++i) {
            wh.segment(2 * i, 2) = w[i];
        }
        wh(2 * n) = 1.0;
        const Vector x = h * wh;
        const Vector uu = u * wh;
        const double cost = x.dot(cp.stacked.q * x) + uu.dot(cp.stacked.r * uu);
        sum += cost;
        sum2 += cost * cost;
    }
    const double mean = sum / count;
    const double se = std::sqrt(std::max(0.0, sum2 / count - mean * mean) / count);
    CHECK(s.raw.objective >= mean - 3.0 * se - 1e-4);
}

TEST_CASE("configuration validation") {
    Experiment exp = offline2d();
    ControllerConfig cc = exp.run.controller;
    cc.alpha = 1.5;
    CHECK_THROWS_AS(cc.validate(exp.run.system), Error);
    cc = exp.run.controller;
    cc.k_f = Matrix::Zero(2, 2);
    CHECK_THROWS_AS(assemble(cc, exp.run.system, exp.run.x0, cc.support), Error);
    CHECK_THROWS_AS(assemble(exp.run.controller, exp.run.system, Vector::Zero(3), exp.run.controller.support), Error);
}
