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

#include <Eigen/Dense>

#include <string>

#include "drmpc/error.hpp"

namespace drmpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double tol = 1e-10);

double min_eigenvalue(const Matrix& sym);
double max_eigenvalue(const Matrix& sym);

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
double spectral_norm_sym(const Matrix& sym);

/// Symmetric square root by eigen-decomposition. Eigenvalues in
/// [-clamp_tol, 0) are clamped to zero; anything more negative throws NotPsd
/// naming `what`.
Matrix psd_sqrt(const Matrix& sym, const std::string& what, double clamp_tol = 1e-10);

/// Rank-revealing factor L with L'L = sym; rows for zero eigenvalues are
/// dropped. Same clamping rule as psd_sqrt.
Matrix psd_factor(const Matrix& sym, const std::string& what, double clamp_tol = 1e-10);

/// Throws NotPsd (naming `what`) unless `m` is symmetric with minimum
/// eigenvalue >= -tol.
void require_psd(const Matrix& m, const std::string& what, double tol = 1e-10);

struct LqrSolution {
    Matrix cost;  // stabilizing DARE solution
    Matrix gain;  // u = gain * x
};

/// Discrete algebraic Riccati equation by fixed-point iteration of the Riccati
/// difference equation; converges for stabilizable/detectable data.
LqrSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                       int max_iterations = 100000, double tol = 1e-13);

}  // namespace drmpc
