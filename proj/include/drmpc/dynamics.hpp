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

#include <vector>

#include "drmpc/linalg.hpp"

namespace drmpc {

/// x+ = A x + B u + E w.
struct LtiSystem {
    Matrix a;
    Matrix b;
    Matrix e;

    int n_x() const { return static_cast<int>(a.rows()); }
    int n_u() const { return static_cast<int>(b.cols()); }
    int n_w() const { return static_cast<int>(e.cols()); }
    void validate() const;
};

/// Prediction matrices over horizon N: x = A x0 + B u + E w with
/// x = (x_0, ..., x_N), u = (u_0, ..., u_{N-1}), w = (w_0, ..., w_{N-1}).
struct StackedSystem {
    int horizon = 0;
    int n_x = 0;
    int n_u = 0;
    int n_w = 0;
    Matrix a;  // (N+1) n_x x n_x, block t = A^t
    Matrix b;  // (N+1) n_x x N n_u, block (t, j) = A^{t-1-j} B for j < t
    Matrix e;  // (N+1) n_x x N n_w
    Matrix q;  // diag(Q, ..., Q, Q_f)
    Matrix r;  // diag(R, ..., R)
};

StackedSystem stack_system(const LtiSystem& sys, const Matrix& q, const Matrix& r, const Matrix& q_f, int horizon);

/// u = F w + f with F strictly block-lower-triangular.
struct AffinePolicy {
    Matrix gain;    // N n_u x N n_w
    Vector offset;  // N n_u

    /// Throws CausalityViolation if any block F_{i,j} with j >= i is nonzero.
    void check_causal(int n_u, int n_w, double tol = 0.0) const;
};

/// x_hat = [H, h] (w, 1) with H = B F + E and h = A x0 + B f.
struct StateResponse {
    Matrix h;       // (N+1) n_x x N n_w
    Vector offset;  // (N+1) n_x
};

StateResponse state_response(const StackedSystem& stacked, const AffinePolicy& policy, const Vector& x0);

Vector simulate_step(const LtiSystem& sys, const Vector& x, const Vector& u, const Vector& w);

/// Candidate policy at the next step built from `policy` after w_0 is
/// realized: the tail of the old policy followed by u = K_f x + k_f.
AffinePolicy shifted_policy(const StackedSystem& stacked, const AffinePolicy& policy, const Vector& x0,
                            const Vector& w0, const Matrix& k_f, const Vector& k_f_offset);

}  // namespace drmpc
