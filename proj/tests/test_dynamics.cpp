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

#include "drmpc/dynamics.hpp"
#include "drmpc/error.hpp"
#include "drmpc/simulate.hpp"
#include "drmpc/validate.hpp"

using namespace drmpc;

namespace {

Matrix random_matrix(Rng& rng, int r, int c) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(r, c);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) {
            m(i, j) = normal(rng);
        }
    }
    return m;
}

LtiSystem experiment_2d() {
    LtiSystem s;
    s.a.resize(2, 2);
    s.a << 0.9, 0.2, 0.0, 0.8;
    s.b.resize(2, 1);
    s.b << 0.1, 0.05;
    s.e.resize(2, 2);
    s.e << 0.5, 0.0, 0.0, 0.1;
    return s;
}

StackedSystem stack_plain(const LtiSystem& s, int n) {
    return stack_system(s, Matrix::Identity(s.n_x(), s.n_x()), Matrix::Identity(s.n_u(), s.n_u()),
                        Matrix::Identity(s.n_x(), s.n_x()), n);
}

}  // namespace

TEST_CASE("stacked prediction matrices") {
    LtiSystem s{Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)};
    const StackedSystem one = stack_plain(s, 1);
    CHECK(one.a.rows() == 2);
    CHECK(one.a(0, 0) == 1.0);
    CHECK(one.a(1, 0) == 0.7);

    Rng rng = make_rng(1, 0);
    LtiSystem r{random_matrix(rng, 2, 2), random_matrix(rng, 2, 1), random_matrix(rng, 2, 2)};
    const StackedSystem st = stack_plain(r, 3);
    // Block row 3 (x_3), block column 1 (u_1): A^{3-1-1} B = A B.
    CHECK((st.b.block(6, 1, 2, 1) - r.a * r.b).norm() < 1e-14);
    CHECK(st.b.topRows(2).norm() == 0.0);
    CHECK(st.e.topRows(2).norm() == 0.0);

    // Leading blocks of the N = 4 stacking equal the N = 3 stacking.
    const StackedSystem st4 = stack_plain(r, 4);
    CHECK((st4.a.topRows(8) - st.a).norm() == 0.0);
    CHECK((st4.b.topLeftCorner(8, 3) - st.b).norm() == 0.0);
    CHECK((st4.e.topLeftCorner(8, 6) - st.e).norm() == 0.0);

    Matrix bad_q = -Matrix::Identity(2, 2);
    CHECK_THROWS_AS(stack_system(r, bad_q, Matrix::Identity(1, 1), Matrix::Identity(2, 2), 2), Error);
    CHECK_THROWS_AS(stack_system(r, Matrix::Identity(3, 3), Matrix::Identity(1, 1), Matrix::Identity(2, 2), 2),
                    Error);
}

TEST_CASE("impulse response matches simulation") {
    const LtiSystem s = experiment_2d();
    const int n = 5;
    const StackedSystem st = stack_plain(s, n);
    Vector w = Vector::Zero(n * 2);
    w(0) = 1.0;
    const Vector stacked = st.e * w;
    Vector x = Vector::Zero(2);
    for (int t = 0; t < n; ++t) {
        x = simulate_step(s, x, Vector::Zero(1), w.segment(2 * t, 2));
        CHECK((stacked.segment(2 * (t + 1), 2) - x).norm() == 0.0);
    }
}

TEST_CASE("state response") {
    const LtiSystem s = experiment_2d();
    const int n = 4;
    const StackedSystem st = stack_plain(s, n);
    AffinePolicy zero{Matrix::Zero(n, 2 * n), Vector::Zero(n)};
    const Vector x0 = Vector(Eigen::Vector2d(1.75, 2.0));
    const StateResponse auto_resp = state_response(st, zero, x0);
    Vector x = x0;
    for (int t = 0; t <= n; ++t) {
        CHECK((auto_resp.offset.segment(2 * t, 2) - x).norm() < 1e-15);
        x = s.a * x;
    }
    CHECK(state_response(st, zero, Vector::Zero(2)).offset.norm() == 0.0);

    Rng rng = make_rng(2, 0);
    AffinePolicy pol{Matrix::Zero(n, 2 * n), random_matrix(rng, n, 1)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            pol.gain.block(i, 2 * j, 1, 2) = random_matrix(rng, 1, 2);
        }
    }
    const StateResponse resp = state_response(st, pol, x0);
    // x_t depends only on w_0 .. w_{t-1}.
    for (int t = 0; t <= n; ++t) {
        for (int j = t; j < n; ++j) {
            CHECK(resp.h.block(2 * t, 2 * j, 2, 2).norm() == 0.0);
        }
    }
    CHECK(rollout_discrepancy(s, pol, x0, random_matrix(rng, 2 * n, 1), n) <= 1e-10);

    AffinePolicy acausal = pol;
    acausal.gain(0, 0) = 1.0;
    CHECK_THROWS_AS(state_response(st, acausal, x0), Error);
}

TEST_CASE("rollout equivalence suite") {
    const SuiteReport rep = validate_dynamics(3, 100);
    REQUIRE(rep.checks.size() == 1);
    CHECK(rep.checks[0].margin <= 1e-10);
}

TEST_CASE("single steps") {
    const LtiSystem s = experiment_2d();
    CHECK(simulate_step(s, Vector::Zero(2), Vector::Zero(1), Vector::Zero(2)).norm() == 0.0);
    const Vector x = simulate_step(s, Vector(Eigen::Vector2d(1.75, 2.0)), Vector::Zero(1), Vector::Zero(2));
    CHECK(x(0) == doctest::Approx(1.975).epsilon(1e-15));
    CHECK(x(1) == doctest::Approx(1.6).epsilon(1e-15));

    LtiSystem scalar{Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
    CHECK(simulate_step(scalar, Vector::Constant(1, 1.0), Vector::Constant(1, -0.5), Vector::Constant(1, 0.05))(0) ==
          doctest::Approx(0.55).epsilon(1e-15));
    CHECK_THROWS_AS(simulate_step(s, Vector::Zero(3), Vector::Zero(1), Vector::Zero(2)), Error);
}

TEST_CASE("shifted candidate policy reproduces the realized trajectory") {
    const LtiSystem s = experiment_2d();
    const int n = 4;
    const StackedSystem st = stack_plain(s, n);
    Rng rng = make_rng(4, 0);
    AffinePolicy pol{Matrix::Zero(n, 2 * n), random_matrix(rng, n, 1)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            pol.gain.block(i, 2 * j, 1, 2) = random_matrix(rng, 1, 2);
        }
    }
    const Vector x0 = random_matrix(rng, 2, 1);
    const Vector w = random_matrix(rng, 2 * (n + 1), 1);
    const Matrix k_f = random_matrix(rng, 1, 2);
    const Vector k_off = random_matrix(rng, 1, 1);

    const AffinePolicy next = shifted_policy(st, pol, x0, w.head(2), k_f, k_off);
    next.check_causal(1, 2);
    const Vector x1 = simulate_step(s, x0, pol.offset.head(1), w.head(2));
    const StateResponse shifted = state_response(st, next, x1);
    const StateResponse orig = state_response(st, pol, x0);
    const Vector x_orig = orig.h * w.head(2 * n) + orig.offset;
    const Vector x_shift = shifted.h * w.tail(2 * n) + shifted.offset;
    // The shifted plan follows the old plan for N - 1 steps, then K_f x + k_f.
    for (int t = 0; t < n; ++t) {
        CHECK((x_shift.segment(2 * t, 2) - x_orig.segment(2 * (t + 1), 2)).norm() < 1e-12);
    }
    const Vector xn = x_orig.tail(2);
    const Vector expected = simulate_step(s, xn, k_f * xn + k_off, w.tail(2));
    CHECK((x_shift.tail(2) - expected).norm() < 1e-12);
}
