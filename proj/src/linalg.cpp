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

#include "drmpc/linalg.hpp"

#include <cmath>
#include <vector>

namespace drmpc {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::EmptySampleSet: return "EmptySampleSet";
    case ErrorCode::SampleOutsideSupport: return "SampleOutsideSupport";
    case ErrorCode::InvalidConfidence: return "InvalidConfidence";
    case ErrorCode::InvalidSampleCount: return "InvalidSampleCount";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::CausalityViolation: return "CausalityViolation";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::MissingVariable: return "MissingVariable";
    case ErrorCode::RejectionStall: return "RejectionStall";
    case ErrorCode::InfeasibleStep: return "InfeasibleStep";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_eigenvalue(const Matrix& sym) {
    if (sym.size() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double max_eigenvalue(const Matrix& sym) {
    if (sym.size() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double spectral_norm_sym(const Matrix& sym) {
    if (sym.size() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix psd_sqrt(const Matrix& sym, const std::string& what, double clamp_tol) {
    require(sym.rows() == sym.cols(), ErrorCode::DimensionMismatch, what + " must be square");
    if (sym.size() == 0) {
        return sym;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym));
    Vector ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -clamp_tol * scale) {
            fail(ErrorCode::NotPsd, what + " is not positive semidefinite (eigenvalue " +
                                        std::to_string(ev(i)) + ")");
        }
        ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Matrix psd_factor(const Matrix& sym, const std::string& what, double clamp_tol) {
    require(sym.rows() == sym.cols(), ErrorCode::DimensionMismatch, what + " must be square");
    if (sym.size() == 0) {
        return Matrix::Zero(0, 0);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym));
    const Vector& ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -clamp_tol * scale) {
            fail(ErrorCode::NotPsd, what + " is not positive semidefinite (eigenvalue " +
                                        std::to_string(ev(i)) + ")");
        }
        if (ev(i) > 1e-14 * scale) {
            keep.push_back(i);
        }
    }
    Matrix out(static_cast<Eigen::Index>(keep.size()), sym.cols());
    for (size_t k = 0; k < keep.size(); ++k) {
        const auto i = keep[k];
        out.row(static_cast<Eigen::Index>(k)) = std::sqrt(ev(i)) * es.eigenvectors().col(i).transpose();
    }
    return out;
}

void require_psd(const Matrix& m, const std::string& what, double tol) {
    require(m.rows() == m.cols(), ErrorCode::DimensionMismatch, what + " must be square");
    require(is_symmetric(m), ErrorCode::NotPsd, what + " is not symmetric");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double lmin = min_eigenvalue(m);
    require(lmin >= -tol * scale, ErrorCode::NotPsd,
            what + " is not positive semidefinite (min eigenvalue " + std::to_string(lmin) + ")");
}

LqrSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                       int max_iterations, double tol) {
    require(a.rows() == a.cols() && b.rows() == a.rows() && q.rows() == a.rows() &&
                q.cols() == a.cols() && r.rows() == b.cols() && r.cols() == b.cols(),
            ErrorCode::DimensionMismatch, "solve_dare: inconsistent dimensions");
    Matrix p = q;
    for (int it = 0; it < max_iterations; ++it) {
        const Matrix btp = b.transpose() * p;
        const Matrix gain = (r + btp * b).ldlt().solve(btp * a);
        Matrix next = symmetrize(q + a.transpose() * p * a - a.transpose() * p * b * gain);
        const double diff = (next - p).cwiseAbs().maxCoeff();
        p = std::move(next);
        if (diff <= tol * std::max(1.0, p.cwiseAbs().maxCoeff())) {
            break;
        }
    }
    const Matrix btp = b.transpose() * p;
    LqrSolution sol;
    sol.cost = p;
    sol.gain = -(r + btp * b).ldlt().solve(btp * a);
    return sol;
}

}  // namespace drmpc
