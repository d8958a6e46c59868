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

#include <sstream>

#include "drmpc/conic.hpp"
#include "drmpc/error.hpp"

using namespace drmpc;

TEST_CASE("scalar lp: min x s.t. x >= 1") {
    ConicProgram p;
    const VarId x = p.add_variable("x");
    p.add_nonneg("x_ge_1", LinExpr::variable(x) - 1.0);
    p.set_objective(LinExpr::variable(x));
    const Solution s = solve(p);
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(s.linear_duals(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("min trace X s.t. X >= I") {
    ConicProgram p;
    const SymMatVar x = p.add_psd_variable("X", 2);
    p.add_lmi("X_minus_I", x.expr() - LinMatrix(Matrix::Identity(2, 2)));
    p.set_objective(LinExpr::variable(x.at(0, 0)) + LinExpr::variable(x.at(1, 1)));
    const Solution s = solve(p);
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-7));
    const Matrix xv = s.value(x);
    CHECK((xv - Matrix::Identity(2, 2)).norm() < 1e-6);
}

TEST_CASE("equality rows and free variables") {
    // min y s.t. x = 2, [x 1; 1 y] PSD  ->  y = 1/2
    ConicProgram p;
    const VarId x = p.add_variable("x");
    const VarId y = p.add_variable("y");
    p.add_equality("x_eq_2", LinExpr::variable(x) - 2.0);
    LinMatrix m(2, 2);
    m(0, 0) = LinExpr::variable(x);
    m(1, 1) = LinExpr::variable(y);
    m(0, 1) = m(1, 0) = 1.0;
    p.add_lmi("schur", m);
    p.set_objective(LinExpr::variable(y));
    const Solution s = solve(p);
    REQUIRE(s.optimal());
    CHECK(s.value(x) == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(s.objective == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("largest eigenvalue as an sdp") {
    Matrix a(3, 3);
    a << 2, -1, 0.5, -1, 3, 0.2, 0.5, 0.2, 1;
    ConicProgram p;
    const VarId t = p.add_variable("t");
    LinMatrix m(Matrix(-a));
    for (int i = 0; i < 3; ++i) {
        m(i, i) += LinExpr::variable(t);
    }
    p.add_lmi("tI_minus_A", m);
    p.set_objective(LinExpr::variable(t));
    const Solution s = solve(p);
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(max_eigenvalue(a)).epsilon(1e-7));
}

TEST_CASE("infeasible and unbounded programs are reported") {
    {
        ConicProgram p;
        const VarId x = p.add_variable("x");
        p.add_nonneg("x_ge_1", LinExpr::variable(x) - 1.0);
        p.add_nonneg("x_le_0", -LinExpr::variable(x));
        p.set_objective(LinExpr::variable(x));
        const Solution s = solve(p);
        CHECK(s.status == SolveStatus::PrimalInfeasible);
    }
    {
        ConicProgram p;
        const VarId x = p.add_variable("x");
        p.add_nonneg("x_le_1", 1.0 - LinExpr::variable(x));
        p.set_objective(LinExpr::variable(x));
        const Solution s = solve(p);
        CHECK(s.status == SolveStatus::DualInfeasible);
    }
}

TEST_CASE("verify_solution on exact and perturbed points") {
    ConicProgram p;
    const SymMatVar x = p.add_psd_variable("X", 2);
    const VarId z = p.add_variable("z");
    p.add_nonneg("z_nonneg", LinExpr::variable(z));
    p.add_equality("trace_one", LinExpr::variable(x.at(0, 0)) + LinExpr::variable(x.at(1, 1)) - 1.0);
    Vector v = Vector::Zero(p.num_variables());
    v(x.at(0, 0)) = 0.5;
    v(x.at(1, 1)) = 0.5;
    v(x.at(1, 0)) = 0.5;
    v(z) = 0.0;
    VerificationReport r = verify_solution(p, v);
    CHECK(r.max_residual <= 1e-12);

    v(x.at(1, 0)) += 1e-3;
    r = verify_solution(p, v);
    CHECK(r.max_residual > 1e-4);
    CHECK(r.worst_block == "X>>0");
    const auto flagged = r.flagged(1e-6);
    REQUIRE(flagged.size() == 1);
    CHECK(flagged[0] == "X>>0");

    CHECK_THROWS_AS(verify_solution(p, Vector::Zero(1)), Error);
}

TEST_CASE("sdpa export lists every block") {
    ConicProgram p;
    const SymMatVar x = p.add_psd_variable("X", 2);
    p.add_nonneg("a", LinExpr::variable(x.at(0, 0)) - 1.0);
    p.add_equality("b", LinExpr::variable(x.at(1, 1)) - 2.0);
    p.set_objective(LinExpr::variable(x.at(0, 0)));
    std::ostringstream os;
    p.write_sdpa(os);
    std::istringstream in(os.str());
    std::string comment;
    std::getline(in, comment);
    int m = 0;
    int nblocks = 0;
    int d1 = 0;
    int d2 = 0;
    in >> m >> nblocks >> d1 >> d2;
    CHECK(m == 3);
    CHECK(nblocks == 2);
    CHECK(d1 == 2);
    CHECK(d2 == -3);
}
