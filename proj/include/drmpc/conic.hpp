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

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "drmpc/linalg.hpp"

namespace drmpc {

using VarId = int;

// Affine scalar expression sum_i coef_i * y_i + constant over program
// variables. Terms are kept sorted by variable with no duplicates.
class LinExpr {
public:
    LinExpr() = default;
    LinExpr(double constant) : constant_(constant) {}  // NOLINT: implicit by design of the algebra

    static LinExpr variable(VarId id, double coef = 1.0);

    const std::vector<std::pair<VarId, double>>& terms() const { return terms_; }
    double constant() const { return constant_; }
    bool is_constant() const { return terms_.empty(); }

    double evaluate(const Vector& values) const;
    double coefficient(VarId id) const;

    LinExpr& operator+=(const LinExpr& other);
    LinExpr& operator-=(const LinExpr& other);
    LinExpr& operator*=(double s);

    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
    friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
    friend LinExpr operator-(LinExpr a) { return a *= -1.0; }

    // Adds s * other without allocating a temporary.
    void add_scaled(const LinExpr& other, double s);

private:
    std::vector<std::pair<VarId, double>> terms_;
    double constant_ = 0.0;
};

// Dense matrix of affine expressions.
class LinMatrix {
public:
    LinMatrix() = default;
    LinMatrix(Eigen::Index rows, Eigen::Index cols);
    explicit LinMatrix(const Matrix& constant);

    static LinMatrix identity(Eigen::Index n);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }

    LinExpr& operator()(Eigen::Index r, Eigen::Index c) { return data_[c * rows_ + r]; }
    const LinExpr& operator()(Eigen::Index r, Eigen::Index c) const { return data_[c * rows_ + r]; }

    LinMatrix transpose() const;
    LinMatrix block(Eigen::Index r, Eigen::Index c, Eigen::Index nr, Eigen::Index nc) const;
    void set_block(Eigen::Index r, Eigen::Index c, const LinMatrix& value);
    void set_block(Eigen::Index r, Eigen::Index c, const Matrix& value);

    Matrix evaluate(const Vector& values) const;

    LinMatrix& operator+=(const LinMatrix& other);
    LinMatrix& operator-=(const LinMatrix& other);
    friend LinMatrix operator+(LinMatrix a, const LinMatrix& b) { return a += b; }
    friend LinMatrix operator-(LinMatrix a, const LinMatrix& b) { return a -= b; }

    friend LinMatrix operator*(const Matrix& m, const LinMatrix& l);
    friend LinMatrix operator*(const LinMatrix& l, const Matrix& m);

private:
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    std::vector<LinExpr> data_;
};

// Symmetric matrix variable stored as its lower triangle.
struct SymMatVar {
    int dim = 0;
    std::vector<VarId> lower;  // column-major lower triangle

    VarId at(int r, int c) const;
    LinMatrix expr() const;
};

enum class LinearKind { Nonnegative, Equality };

struct LinearConstraint {
    std::string name;
    LinearKind kind = LinearKind::Nonnegative;
    LinExpr expr;  // expr >= 0 or expr == 0
};

struct LmiConstraint {
    std::string name;
    int dim = 0;
    std::vector<LinExpr> lower;  // column-major lower triangle, expr(...) >= 0 in PSD order

    const LinExpr& at(int r, int c) const;
    Matrix evaluate(const Vector& values) const;
};

// Solver-agnostic conic program in "LMI form":
//   minimize    c'y + c0
//   subject to  sum_i y_i A_i + A_0  PSD        (one per LmiConstraint)
//               a'y + a0 >= 0                   (Nonnegative rows)
//               g'y + g0 == 0                   (Equality rows)
// over free scalar variables y. PSD matrix variables and nonnegative scalars
// are declared through helpers that add the corresponding cone constraint.
class ConicProgram {
public:
    VarId add_variable(const std::string& name);
    VarId add_nonneg_variable(const std::string& name);
    SymMatVar add_psd_variable(const std::string& name, int dim);

    /// Adds `m` PSD. Only the lower triangle is used; the upper triangle must
    /// mirror it (checked up to 1e-12 on coefficients).
    void add_lmi(const std::string& name, const LinMatrix& m);
    void add_nonneg(const std::string& name, const LinExpr& e);
    void add_equality(const std::string& name, const LinExpr& e);
    void set_objective(const LinExpr& objective) { objective_ = objective; }

    int num_variables() const { return static_cast<int>(names_.size()); }
    const std::string& variable_name(VarId id) const { return names_.at(id); }
    const std::vector<LmiConstraint>& lmis() const { return lmis_; }
    const std::vector<LinearConstraint>& linear() const { return linear_; }
    const LinExpr& objective() const { return objective_; }

    int num_nonneg() const;
    int num_equalities() const;

    /// Human-readable dump: variables, constraint blocks and objective.
    void dump(std::ostream& os) const;

    /// SDPA sparse format (min c'y s.t. sum F_i y_i - F_0 PSD). Nonnegative
    /// rows form one diagonal block; equalities are written as two rows.
    void write_sdpa(std::ostream& os) const;

private:
    std::vector<std::string> names_;
    std::vector<LmiConstraint> lmis_;
    std::vector<LinearConstraint> linear_;
    LinExpr objective_;
};

// ---------------------------------------------------------------------------
// Solving

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, NumericalTrouble, IterationLimit };

const char* status_name(SolveStatus s) noexcept;

struct SolverOptions {
    double tolerance = 1e-8;            // relative gap and infeasibility
    double acceptable_tolerance = 1e-6; // accepted when the method stalls
    double verify_tolerance = 1e-7;     // post-solve residual audit
    int max_iterations = 200;
    bool verbose = false;
};

struct SolverStats {
    int iterations = 0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double relative_gap = 0.0;
    double primal_infeasibility = 0.0;  // LMI/row residual of y
    double dual_infeasibility = 0.0;    // stationarity residual
    bool reduced_accuracy = false;
    double max_residual = 0.0;          // from verify_solution
};

struct Solution {
    SolveStatus status = SolveStatus::NumericalTrouble;
    double objective = 0.0;
    Vector values;                    // one per program variable
    std::vector<Matrix> lmi_duals;    // multiplier matrix per LMI constraint
    Vector linear_duals;              // one per linear constraint (in order)
    SolverStats stats;
    std::string message;

    bool optimal() const { return status == SolveStatus::Optimal; }
    double value(VarId id) const { return values(id); }
    double value(const LinExpr& e) const { return e.evaluate(values); }
    Matrix value(const SymMatVar& v) const;
    Matrix value(const LinMatrix& m) const { return m.evaluate(values); }
};

Solution solve(const ConicProgram& program, const SolverOptions& options = {});

struct BlockResidual {
    std::string name;
    std::string kind;   // "lmi", "nonneg", "equality"
    double residual = 0.0;  // max(0, -lambda_min), max(0, -value) or |value|
};

struct VerificationReport {
    std::vector<BlockResidual> blocks;
    double max_residual = 0.0;
    std::string worst_block;

    std::vector<std::string> flagged(double tol) const;
};

/// Recomputes cone-membership and constraint residuals from raw program data.
/// Throws MissingVariable if `values` does not cover every variable.
VerificationReport verify_solution(const ConicProgram& program, const Vector& values);

}  // namespace drmpc
