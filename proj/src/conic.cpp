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

#include "drmpc/conic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace drmpc {

namespace {

// Sorts and merges (var, coef) pairs, dropping exact zeros.
std::vector<std::pair<VarId, double>> normalize(std::vector<std::pair<VarId, double>> t) {
    std::sort(t.begin(), t.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<VarId, double>> out;
    out.reserve(t.size());
    for (const auto& [id, c] : t) {
        if (!out.empty() && out.back().first == id) {
            out.back().second += c;
        } else {
            out.emplace_back(id, c);
        }
    }
    std::erase_if(out, [](const auto& p) { return p.second == 0.0; });
    return out;
}

LinExpr build(std::vector<std::pair<VarId, double>> t, double constant) {
    LinExpr e(constant);
    for (const auto& [id, c] : normalize(std::move(t))) {
        e.add_scaled(LinExpr::variable(id), c);
    }
    return e;
}

}  // namespace

LinExpr LinExpr::variable(VarId id, double coef) {
    LinExpr e;
    if (coef != 0.0) {
        e.terms_.emplace_back(id, coef);
    }
    return e;
}

double LinExpr::evaluate(const Vector& values) const {
    double v = constant_;
    for (const auto& [id, c] : terms_) {
        v += c * values(id);
    }
    return v;
}

double LinExpr::coefficient(VarId id) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), id,
                               [](const auto& p, VarId v) { return p.first < v; });
    return (it != terms_.end() && it->first == id) ? it->second : 0.0;
}

void LinExpr::add_scaled(const LinExpr& other, double s) {
    constant_ += s * other.constant_;
    if (other.terms_.empty() || s == 0.0) {
        return;
    }
    if (terms_.empty() || terms_.back().first < other.terms_.front().first) {
        for (const auto& [id, c] : other.terms_) {
            terms_.emplace_back(id, s * c);
        }
        return;
    }
    std::vector<std::pair<VarId, double>> merged;
    merged.reserve(terms_.size() + other.terms_.size());
    auto a = terms_.begin();
    auto b = other.terms_.begin();
    while (a != terms_.end() || b != other.terms_.end()) {
        if (b == other.terms_.end() || (a != terms_.end() && a->first < b->first)) {
            merged.push_back(*a++);
        } else if (a == terms_.end() || b->first < a->first) {
            merged.emplace_back(b->first, s * b->second);
            ++b;
        } else {
            const double c = a->second + s * b->second;
            if (c != 0.0) {
                merged.emplace_back(a->first, c);
            }
            ++a;
            ++b;
        }
    }
    terms_ = std::move(merged);
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
    add_scaled(other, 1.0);
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
    add_scaled(other, -1.0);
    return *this;
}

LinExpr& LinExpr::operator*=(double s) {
    constant_ *= s;
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& t : terms_) {
        t.second *= s;
    }
    return *this;
}

// ---------------------------------------------------------------------------

LinMatrix::LinMatrix(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols)) {}

LinMatrix::LinMatrix(const Matrix& constant) : LinMatrix(constant.rows(), constant.cols()) {
    for (Eigen::Index c = 0; c < cols_; ++c) {
        for (Eigen::Index r = 0; r < rows_; ++r) {
            (*this)(r, c) = LinExpr(constant(r, c));
        }
    }
}

LinMatrix LinMatrix::identity(Eigen::Index n) { return LinMatrix(Matrix::Identity(n, n)); }

LinMatrix LinMatrix::transpose() const {
    LinMatrix t(cols_, rows_);
    for (Eigen::Index c = 0; c < cols_; ++c) {
        for (Eigen::Index r = 0; r < rows_; ++r) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

LinMatrix LinMatrix::block(Eigen::Index r, Eigen::Index c, Eigen::Index nr, Eigen::Index nc) const {
    require(r >= 0 && c >= 0 && r + nr <= rows_ && c + nc <= cols_, ErrorCode::DimensionMismatch,
            "LinMatrix::block out of range");
    LinMatrix b(nr, nc);
    for (Eigen::Index j = 0; j < nc; ++j) {
        for (Eigen::Index i = 0; i < nr; ++i) {
            b(i, j) = (*this)(r + i, c + j);
        }
    }
    return b;
}

void LinMatrix::set_block(Eigen::Index r, Eigen::Index c, const LinMatrix& value) {
    require(r >= 0 && c >= 0 && r + value.rows() <= rows_ && c + value.cols() <= cols_,
            ErrorCode::DimensionMismatch, "LinMatrix::set_block out of range");
    for (Eigen::Index j = 0; j < value.cols(); ++j) {
        for (Eigen::Index i = 0; i < value.rows(); ++i) {
            (*this)(r + i, c + j) = value(i, j);
        }
    }
}

void LinMatrix::set_block(Eigen::Index r, Eigen::Index c, const Matrix& value) {
    set_block(r, c, LinMatrix(value));
}

Matrix LinMatrix::evaluate(const Vector& values) const {
    Matrix m(rows_, cols_);
    for (Eigen::Index c = 0; c < cols_; ++c) {
        for (Eigen::Index r = 0; r < rows_; ++r) {
            m(r, c) = (*this)(r, c).evaluate(values);
        }
    }
    return m;
}

LinMatrix& LinMatrix::operator+=(const LinMatrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, ErrorCode::DimensionMismatch,
            "LinMatrix addition: shape mismatch");
    for (size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

LinMatrix& LinMatrix::operator-=(const LinMatrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, ErrorCode::DimensionMismatch,
            "LinMatrix subtraction: shape mismatch");
    for (size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= other.data_[i];
    }
    return *this;
}

LinMatrix operator*(const Matrix& m, const LinMatrix& l) {
    require(m.cols() == l.rows(), ErrorCode::DimensionMismatch, "Matrix * LinMatrix: shape mismatch");
    LinMatrix out(m.rows(), l.cols());
    std::vector<std::pair<VarId, double>> scratch;
    for (Eigen::Index j = 0; j < l.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            scratch.clear();
            double constant = 0.0;
            for (Eigen::Index k = 0; k < m.cols(); ++k) {
                const double a = m(i, k);
                if (a == 0.0) {
                    continue;
                }
                const LinExpr& e = l(k, j);
                constant += a * e.constant();
                for (const auto& [id, c] : e.terms()) {
                    scratch.emplace_back(id, a * c);
                }
            }
            out(i, j) = build(scratch, constant);
        }
    }
    return out;
}

LinMatrix operator*(const LinMatrix& l, const Matrix& m) {
    return (m.transpose() * l.transpose()).transpose();
}

// ---------------------------------------------------------------------------

VarId SymMatVar::at(int r, int c) const {
    if (r < c) {
        std::swap(r, c);
    }
    // column-major lower triangle: column c starts after sum_{k<c} (dim - k)
    const int offset = c * dim - c * (c - 1) / 2;
    return lower.at(static_cast<size_t>(offset + (r - c)));
}

LinMatrix SymMatVar::expr() const {
    LinMatrix m(dim, dim);
    for (int c = 0; c < dim; ++c) {
        for (int r = 0; r < dim; ++r) {
            m(r, c) = LinExpr::variable(at(r, c));
        }
    }
    return m;
}

const LinExpr& LmiConstraint::at(int r, int c) const {
    if (r < c) {
        std::swap(r, c);
    }
    const int offset = c * dim - c * (c - 1) / 2;
    return lower.at(static_cast<size_t>(offset + (r - c)));
}

Matrix LmiConstraint::evaluate(const Vector& values) const {
    Matrix m(dim, dim);
    for (int c = 0; c < dim; ++c) {
        for (int r = c; r < dim; ++r) {
            m(r, c) = m(c, r) = at(r, c).evaluate(values);
        }
    }
    return m;
}

VarId ConicProgram::add_variable(const std::string& name) {
    names_.push_back(name);
    return static_cast<VarId>(names_.size() - 1);
}

VarId ConicProgram::add_nonneg_variable(const std::string& name) {
    const VarId id = add_variable(name);
    add_nonneg(name + ">=0", LinExpr::variable(id));
    return id;
}

SymMatVar ConicProgram::add_psd_variable(const std::string& name, int dim) {
    require(dim >= 1, ErrorCode::InvalidArgument, "add_psd_variable: dim must be positive");
    SymMatVar v;
    v.dim = dim;
    for (int c = 0; c < dim; ++c) {
        for (int r = c; r < dim; ++r) {
            v.lower.push_back(add_variable(name + "[" + std::to_string(r) + "," + std::to_string(c) + "]"));
        }
    }
    add_lmi(name + ">>0", v.expr());
    return v;
}

void ConicProgram::add_lmi(const std::string& name, const LinMatrix& m) {
    require(m.rows() == m.cols() && m.rows() >= 1, ErrorCode::DimensionMismatch,
            "add_lmi(" + name + "): matrix must be square and nonempty");
    const auto dim = static_cast<int>(m.rows());
    LmiConstraint lmi;
    lmi.name = name;
    lmi.dim = dim;
    lmi.lower.reserve(static_cast<size_t>(dim * (dim + 1) / 2));
    for (int c = 0; c < dim; ++c) {
        for (int r = c; r < dim; ++r) {
            const LinExpr& lo = m(r, c);
            const LinExpr& up = m(c, r);
            const LinExpr diff = lo - up;
            double worst = std::abs(diff.constant());
            for (const auto& t : diff.terms()) {
                worst = std::max(worst, std::abs(t.second));
            }
            require(worst <= 1e-12 * std::max(1.0, std::abs(lo.constant()) + 1.0), ErrorCode::InvalidArgument,
                    "add_lmi(" + name + "): matrix is not symmetric at (" + std::to_string(r) + "," +
                        std::to_string(c) + ")");
            for (const auto& t : lo.terms()) {
                require(t.first >= 0 && t.first < num_variables(), ErrorCode::MissingVariable,
                        "add_lmi(" + name + "): undeclared variable");
            }
            lmi.lower.push_back(lo);
        }
    }
    lmis_.push_back(std::move(lmi));
}

void ConicProgram::add_nonneg(const std::string& name, const LinExpr& e) {
    for (const auto& t : e.terms()) {
        require(t.first >= 0 && t.first < num_variables(), ErrorCode::MissingVariable,
                "add_nonneg(" + name + "): undeclared variable");
    }
    linear_.push_back({name, LinearKind::Nonnegative, e});
}

void ConicProgram::add_equality(const std::string& name, const LinExpr& e) {
    for (const auto& t : e.terms()) {
        require(t.first >= 0 && t.first < num_variables(), ErrorCode::MissingVariable,
                "add_equality(" + name + "): undeclared variable");
    }
    linear_.push_back({name, LinearKind::Equality, e});
}

int ConicProgram::num_nonneg() const {
    return static_cast<int>(std::count_if(linear_.begin(), linear_.end(),
                                          [](const auto& l) { return l.kind == LinearKind::Nonnegative; }));
}

int ConicProgram::num_equalities() const {
    return static_cast<int>(linear_.size()) - num_nonneg();
}

namespace {

void write_expr(std::ostream& os, const ConicProgram& p, const LinExpr& e) {
    bool first = true;
    for (const auto& [id, c] : e.terms()) {
        os << (first ? "" : " ") << (c >= 0 ? "+" : "") << c << "*" << p.variable_name(id);
        first = false;
    }
    if (e.constant() != 0.0 || first) {
        os << (first ? "" : " ") << (e.constant() >= 0 ? "+" : "") << e.constant();
    }
}

}  // namespace

void ConicProgram::dump(std::ostream& os) const {
    os << std::setprecision(17);
    os << "variables " << num_variables() << "\n";
    for (int i = 0; i < num_variables(); ++i) {
        os << "  " << i << " " << names_[static_cast<size_t>(i)] << "\n";
    }
    os << "objective minimize ";
    write_expr(os, *this, objective_);
    os << "\n";
    os << "lmi_blocks " << lmis_.size() << "\n";
    for (const auto& l : lmis_) {
        os << "  lmi " << l.name << " dim " << l.dim << "\n";
        for (int c = 0; c < l.dim; ++c) {
            for (int r = c; r < l.dim; ++r) {
                const LinExpr& e = l.at(r, c);
                if (e.is_constant() && e.constant() == 0.0) {
                    continue;
                }
                os << "    (" << r << "," << c << ") ";
                write_expr(os, *this, e);
                os << "\n";
            }
        }
    }
    os << "linear " << linear_.size() << "\n";
    for (const auto& l : linear_) {
        os << "  " << (l.kind == LinearKind::Equality ? "eq " : "ge ") << l.name << ": ";
        write_expr(os, *this, l.expr);
        os << (l.kind == LinearKind::Equality ? " == 0" : " >= 0") << "\n";
    }
}

void ConicProgram::write_sdpa(std::ostream& os) const {
    // Rows of the diagonal block: nonnegatives, then each equality twice.
    std::vector<std::pair<const LinExpr*, double>> rows;
    for (const auto& l : linear_) {
        rows.emplace_back(&l.expr, 1.0);
        if (l.kind == LinearKind::Equality) {
            rows.emplace_back(&l.expr, -1.0);
        }
    }
    const int nblocks = static_cast<int>(lmis_.size()) + (rows.empty() ? 0 : 1);
    os << std::setprecision(17);
    os << "* exported conic program: min c'y s.t. sum_i F_i y_i - F_0 PSD\n";
    os << num_variables() << "\n" << nblocks << "\n";
    for (const auto& l : lmis_) {
        os << l.dim << " ";
    }
    if (!rows.empty()) {
        os << -static_cast<int>(rows.size());
    }
    os << "\n";
    for (int i = 0; i < num_variables(); ++i) {
        os << objective_.coefficient(i) << (i + 1 < num_variables() ? " " : "\n");
    }
    if (num_variables() == 0) {
        os << "\n";
    }
    // Entries: matno blockno i j value (1-based, upper triangle). F_0 = -constant.
    for (size_t b = 0; b < lmis_.size(); ++b) {
        const auto& l = lmis_[b];
        for (int c = 0; c < l.dim; ++c) {
            for (int r = c; r < l.dim; ++r) {
                const LinExpr& e = l.at(r, c);
                if (e.constant() != 0.0) {
                    os << 0 << " " << b + 1 << " " << c + 1 << " " << r + 1 << " " << -e.constant() << "\n";
                }
                for (const auto& [id, v] : e.terms()) {
                    os << id + 1 << " " << b + 1 << " " << c + 1 << " " << r + 1 << " " << v << "\n";
                }
            }
        }
    }
    for (size_t k = 0; k < rows.size(); ++k) {
        const auto& [e, s] = rows[k];
        if (e->constant() != 0.0) {
            os << 0 << " " << nblocks << " " << k + 1 << " " << k + 1 << " " << -s * e->constant() << "\n";
        }
        for (const auto& [id, v] : e->terms()) {
            os << id + 1 << " " << nblocks << " " << k + 1 << " " << k + 1 << " " << s * v << "\n";
        }
    }
}

// ---------------------------------------------------------------------------

const char* status_name(SolveStatus s) noexcept {
    switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
    case SolveStatus::DualInfeasible: return "DualInfeasible";
    case SolveStatus::NumericalTrouble: return "NumericalTrouble";
    case SolveStatus::IterationLimit: return "IterationLimit";
    }
    return "Unknown";
}

Matrix Solution::value(const SymMatVar& v) const {
    Matrix m(v.dim, v.dim);
    for (int c = 0; c < v.dim; ++c) {
        for (int r = c; r < v.dim; ++r) {
            m(r, c) = m(c, r) = values(v.at(r, c));
        }
    }
    return m;
}

std::vector<std::string> VerificationReport::flagged(double tol) const {
    std::vector<std::string> out;
    for (const auto& b : blocks) {
        if (b.residual > tol) {
            out.push_back(b.name);
        }
    }
    return out;
}

VerificationReport verify_solution(const ConicProgram& program, const Vector& values) {
    require(values.size() == program.num_variables(), ErrorCode::MissingVariable,
            "verify_solution: solution has " + std::to_string(values.size()) + " values for " +
                std::to_string(program.num_variables()) + " variables");
    VerificationReport report;
    auto record = [&report](std::string name, std::string kind, double residual) {
        if (report.blocks.empty() || residual > report.max_residual) {
            report.max_residual = residual;
            report.worst_block = name;
        }
        report.blocks.push_back({std::move(name), std::move(kind), residual});
    };
    for (const auto& l : program.lmis()) {
        const Matrix m = l.evaluate(values);
        record(l.name, "lmi", std::max(0.0, -min_eigenvalue(m)));
    }
    for (const auto& l : program.linear()) {
        const double v = l.expr.evaluate(values);
        if (l.kind == LinearKind::Equality) {
            record(l.name, "equality", std::abs(v));
        } else {
            record(l.name, "nonneg", std::max(0.0, -v));
        }
    }
    return report;
}

}  // namespace drmpc
