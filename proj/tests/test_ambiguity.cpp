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
#include <sstream>

#include "drmpc/ambiguity.hpp"
#include "drmpc/error.hpp"
#include "drmpc/simulate.hpp"

using namespace drmpc;

namespace {

MomentAmbiguity ball_at(const Matrix& c_hat, double beta, int n_w, double r, double c = 0.25) {
    MomentAmbiguity a;
    a.c_hat = c_hat;
    a.beta = beta;
    a.c = c;
    a.m = 10;
    a.support = SupportBall{n_w, r};
    return a;
}

Matrix random_sym(Rng& rng, int d, double scale) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            m(i, j) = normal(rng);
        }
    }
    return scale * symmetrize(m);
}

}  // namespace

TEST_CASE("second moment of trivial sample sets") {
    const auto zero = estimate_second_moment({Vector::Zero(2)}, SupportBall{2, 1.0});
    CHECK(zero.m == 1);
    CHECK((zero.c_hat - Vector(Eigen::Vector3d(0, 0, 1)).asDiagonal().toDenseMatrix()).norm() == 0.0);

    const auto sym = estimate_second_moment({Vector(Eigen::Vector2d(1, 0)), Vector(Eigen::Vector2d(-1, 0))},
                                            SupportBall{2, 1.0});
    CHECK(sym.m == 2);
    CHECK((sym.c_hat - Vector(Eigen::Vector3d(1, 0, 1)).asDiagonal().toDenseMatrix()).norm() < 1e-15);
}

TEST_CASE("second moment errors") {
    CHECK_THROWS_AS(estimate_second_moment({}, SupportBall{1, 1.0}), Error);
    try {
        estimate_second_moment({Vector::Zero(1), Vector::Constant(1, 2.0)}, SupportBall{1, 1.0});
        FAIL("expected SampleOutsideSupport");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SampleOutsideSupport);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("monte carlo second moment of the 2d disturbance") {
    DisturbanceModel model{Vector::Zero(2), 1e-4 * Matrix::Identity(2, 2), SupportBall{2, 0.15}};
    Rng rng = make_rng(3, 0);
    const auto data = sample_truncated_gaussian(model, 100000, rng);
    const auto stat = estimate_second_moment(data, model.support);
    // Per-entry standard error of a second moment is about 1.4e-4 / sqrt(1e5).
    CHECK(std::abs(stat.c_hat(0, 0) - 1e-4) < 5e-6);
    CHECK(std::abs(stat.c_hat(1, 1) - 1e-4) < 5e-6);
    CHECK(std::abs(stat.c_hat(0, 1)) < 5e-6);
    CHECK(stat.c_hat(2, 2) == 1.0);
    CHECK(min_eigenvalue(stat.c_hat) >= -1e-10);
}

TEST_CASE("radius formula") {
    // Independently evaluated at 30 digits with mpmath.
    CHECK(hoeffding_radius(10, 2, 0.15, 0.25, 0.05) ==
          doctest::Approx(0.02657646565445328506789068).epsilon(1e-12));
    for (long m : {10L, 1000L, 1000000L}) {
        for (int n_w : {1, 3}) {
            const double closed = 0.5 * (1.0 + std::sqrt(2.0)) * 0.04 *
                                  std::sqrt(2.0 * std::log(2.0 * (n_w + 1) / 0.1) / static_cast<double>(m));
            CHECK(hoeffding_radius(m, n_w, 0.2, 0.25, 0.1) == doctest::Approx(closed).epsilon(1e-12));
        }
    }
    double prev = hoeffding_radius(1, 2, 0.15, 0.25, 0.05);
    for (long m = 2; m < 100000; m *= 3) {
        const double b = hoeffding_radius(m, 2, 0.15, 0.25, 0.05);
        CHECK(b < prev);
        prev = b;
    }
    CHECK(hoeffding_radius(10, 2, 0.2, 0.25, 0.05) > hoeffding_radius(10, 2, 0.15, 0.25, 0.05));
    CHECK(hoeffding_radius(10, 2, 0.15, 0.25, 0.01) > hoeffding_radius(10, 2, 0.15, 0.25, 0.05));
}

TEST_CASE("radius argument validation") {
    auto code = [](auto f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoError;
    };
    CHECK(code([] { hoeffding_radius(10, 2, 0.15, 0.25, 1.5); }) == ErrorCode::InvalidConfidence);
    CHECK(code([] { hoeffding_radius(10, 2, 0.15, 0.25, 0.0); }) == ErrorCode::InvalidConfidence);
    CHECK(code([] { hoeffding_radius(0, 2, 0.15, 0.25, 0.05); }) == ErrorCode::InvalidSampleCount);
}

TEST_CASE("ambiguity scaling and membership") {
    std::vector<Vector> data(10, Vector::Zero(2));
    const MomentAmbiguity amb = build_ambiguity(estimate_second_moment(data, SupportBall{2, 0.15}), 0.25, 0.05);
    CHECK((amb.r_w() - Vector(Eigen::Vector3d(1, 1, 0.0375)).asDiagonal().toDenseMatrix()).norm() < 1e-15);
    CHECK(contains_measure(amb, amb.c_hat));

    Matrix outside = amb.c_hat;
    const double s = 0.25 * 0.15;
    outside(2, 2) += 2.0 * amb.beta / (s * s);
    CHECK_FALSE(contains_measure(amb, outside));
    CHECK_THROWS_AS(contains_measure(amb, Matrix::Identity(2, 2)), Error);

    auto big = estimate_second_moment(data, SupportBall{2, 0.15});
    big.m = 1000000;
    CHECK(build_ambiguity(big, 0.25, 0.05).beta < amb.beta);
}

TEST_CASE("membership agrees with a direct eigenvalue computation") {
    Rng rng = make_rng(5, 0);
    const MomentAmbiguity amb = ball_at(Matrix::Identity(3, 3), 0.05, 2, 0.15);
    const Matrix r = amb.r_w();
    const Matrix rinv = r.inverse();
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    for (int k = 0; k < 200; ++k) {
        Matrix noise = random_sym(rng, 3, 1.0);
        const double target = amb.beta * unif(rng);
        noise *= target / spectral_norm_sym(noise);
        // Scaled deviation has spectral norm `target` by construction.
        const Matrix moment = amb.c_hat - rinv * noise * rinv;
        if (std::abs(target - amb.beta) > 1e-6) {
            CHECK(contains_measure(amb, moment) == (target <= amb.beta));
        }
    }
}

TEST_CASE("subset tests") {
    Rng rng = make_rng(9, 0);
    const Matrix center = Matrix::Identity(3, 3);
    const MomentAmbiguity outer = ball_at(center, 0.1, 2, 0.15);
    CHECK(is_subset(outer, outer));
    CHECK(subset_lmi(outer, outer).nested);
    CHECK(subset_lmi(ball_at(center, 0.05, 2, 0.15), outer).nested);

    // Far apart: |R (C1 - C2) R| > beta1 + beta2.
    Matrix shifted = center;
    shifted(0, 0) += 0.5;
    const MomentAmbiguity far = ball_at(shifted, 0.1, 2, 0.15);
    CHECK_FALSE(is_subset(far, outer));
    CHECK_FALSE(subset_lmi(far, outer).nested);

    // The LMI agrees with the norm test both ways on random pairs.
    int agreements = 0;
    for (int k = 0; k < 60; ++k) {
        const Matrix rinv = outer.r_w().inverse();
        const Matrix off = rinv * random_sym(rng, 3, 0.02) * rinv;
        std::uniform_real_distribution<double> unif(0.0, 0.1);
        const MomentAmbiguity cand = ball_at(center + off, unif(rng), 2, 0.15);
        const Matrix r = outer.r_w();
        const double gap = outer.beta - spectral_norm_sym(r * off * r) - cand.beta;
        if (std::abs(gap) < 1e-4) {
            continue;
        }
        CHECK(subset_lmi(cand, outer).nested == (gap > 0.0));
        ++agreements;
    }
    CHECK(agreements > 40);
}

TEST_CASE("online update keeps nesting") {
    DisturbanceModel model{Vector::Constant(1, 0.05), Matrix::Constant(1, 1, 0.0025), SupportBall{1, 1.0}};
    Rng rng = make_rng(2, 0);
    std::vector<Vector> data = sample_truncated_gaussian(model, 10, rng);
    MomentAmbiguity amb = build_ambiguity(estimate_second_moment(data, model.support), 0.25, 0.05);

    bool accepted = true;
    const MomentAmbiguity same = update_ambiguity(amb, data, 0.25, 0.05, &accepted);
    CHECK(same.beta == amb.beta);
    CHECK((same.c_hat - amb.c_hat).norm() == 0.0);

    const double beta0 = amb.beta;
    int accepted_count = 0;
    for (int t = 0; t < 200; ++t) {
        auto more = sample_truncated_gaussian(model, 50, rng);
        data.insert(data.end(), more.begin(), more.end());
        const MomentAmbiguity next = update_ambiguity(amb, data, 0.25, 0.05, &accepted);
        CHECK(is_subset(next, amb));
        CHECK(next.beta <= amb.beta);
        accepted_count += accepted ? 1 : 0;
        amb = next;
    }
    CHECK(accepted_count > 0);
    CHECK(amb.beta < beta0);

    // Samples drifting far from the data seen so far cannot be nested.
    std::vector<Vector> drift = data;
    drift.insert(drift.end(), 10 * data.size(), Vector::Constant(1, -1.0));
    const MomentAmbiguity kept = update_ambiguity(amb, drift, 0.25, 0.05, &accepted);
    CHECK_FALSE(accepted);
    CHECK(kept.beta == amb.beta);
    CHECK((kept.c_hat - amb.c_hat).norm() == 0.0);
}

TEST_CASE("csv ingestion and snapshots") {
    std::istringstream with_header("w0,w1\n0.1,0.0\n-0.05,0.02\n");
    const auto a = read_samples_csv(with_header);
    REQUIRE(a.size() == 2);
    CHECK(a[1](1) == doctest::Approx(0.02));
    std::istringstream bare("0.1\n0.2\n");
    CHECK(read_samples_csv(bare).size() == 2);
    std::istringstream ragged("0.1,0.2\n0.3\n");
    CHECK_THROWS_AS(read_samples_csv(ragged), Error);

    const MomentAmbiguity amb = build_ambiguity(estimate_second_moment(a, SupportBall{2, 0.15}), 0.25, 0.05);
    std::stringstream snap;
    write_ambiguity_snapshot(snap, amb);
    const MomentAmbiguity back = read_ambiguity_snapshot(snap);
    CHECK((back.c_hat - amb.c_hat).norm() == 0.0);
    CHECK(back.beta == amb.beta);
    CHECK(back.m == amb.m);
    CHECK(back.support.r == amb.support.r);
    CHECK(back.delta == amb.delta);
}
