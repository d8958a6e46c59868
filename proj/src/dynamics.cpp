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

#include "drmpc/dynamics.hpp"

#include <string>

#include "drmpc/error.hpp"

namespace drmpc {

void LtiSystem::validate() const {
    require(a.rows() == a.cols() && a.rows() >= 1, ErrorCode::DimensionMismatch, "system matrix A must be square");
    require(b.rows() == a.rows() && b.cols() >= 1, ErrorCode::DimensionMismatch, "input matrix B must have n_x rows");
    require(e.rows() == a.rows() && e.cols() >= 1, ErrorCode::DimensionMismatch,
            "disturbance matrix E must have n_x rows");
}

StackedSystem stack_system(const LtiSystem& sys, const Matrix& q, const Matrix& r, const Matrix& q_f, int horizon) {
    sys.validate();
    require(horizon >= 1, ErrorCode::InvalidArgument, "horizon N must be >= 1");
    const int nx = sys.n_x();
    const int nu = sys.n_u();
    const int nw = sys.n_w();
    require(q.rows() == nx && q.cols() == nx, ErrorCode::DimensionMismatch, "Q must be n_x x n_x");
    require(q_f.rows() == nx && q_f.cols() == nx, ErrorCode::DimensionMismatch, "Q_f must be n_x x n_x");
    require(r.rows() == nu && r.cols() == nu, ErrorCode::DimensionMismatch, "R must be n_u x n_u");
    require_psd(q, "Q");
    require_psd(q_f, "Q_f");
    require_psd(r, "R");

    const int n = horizon;
    StackedSystem s;
    s.horizon = n;
    s.n_x = nx;
    s.n_u = nu;
    s.n_w = nw;
    s.a = Matrix::Zero((n + 1) * nx, nx);
    s.b = Matrix::Zero((n + 1) * nx, n * nu);
    s.e = Matrix::Zero((n + 1) * nx, n * nw);
    std::vector<Matrix> powers{Matrix::Identity(nx, nx)};
    for (int t = 1; t <= n; ++t) {
        powers.push_back(sys.a * powers.back());
    }
    for (int t = 0; t <= n; ++t) {
        s.a.block(t * nx, 0, nx, nx) = powers[static_cast<size_t>(t)];
        for (int j = 0; j < t; ++j) {
            const Matrix& p = powers[static_cast<size_t>(t - 1 - j)];
            s.b.block(t * nx, j * nu, nx, nu) = p * sys.b;
            s.e.block(t * nx, j * nw, nx, nw) = p * sys.e;
        }
    }
    s.q = Matrix::Zero((n + 1) * nx, (n + 1) * nx);
    for (int t = 0; t < n; ++t) {
        s.q.block(t * nx, t * nx, nx, nx) = q;
    }
    s.q.block(n * nx, n * nx, nx, nx) = q_f;
    s.r = Matrix::Zero(n * nu, n * nu);
    for (int t = 0; t < n; ++t) {
        s.r.block(t * nu, t * nu, nu, nu) = r;
    }
    return s;
}

void AffinePolicy::check_causal(int n_u, int n_w, double tol) const {
    require(n_u >= 1 && n_w >= 1 && gain.rows() % n_u == 0 && gain.cols() % n_w == 0 &&
                gain.rows() / n_u == gain.cols() / n_w,
            ErrorCode::DimensionMismatch, "policy gain does not match horizon blocks");
    require(offset.size() == gain.rows(), ErrorCode::DimensionMismatch, "policy offset has wrong length");
    const auto n = gain.rows() / n_u;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double m = gain.block(i * n_u, j * n_w, n_u, n_w).cwiseAbs().maxCoeff();
            if (m > tol) {
                fail(ErrorCode::CausalityViolation, "policy block F(" + std::to_string(i) + "," + std::to_string(j) +
                                                        ") is nonzero: u_i may not depend on w_j for j >= i");
            }
        }
    }
}

StateResponse state_response(const StackedSystem& stacked, const AffinePolicy& policy, const Vector& x0) {
    const int n = stacked.horizon;
    require(policy.gain.rows() == n * stacked.n_u && policy.gain.cols() == n * stacked.n_w,
            ErrorCode::DimensionMismatch, "policy gain has wrong size for the stacked system");
    require(x0.size() == stacked.n_x, ErrorCode::DimensionMismatch, "initial state has wrong dimension");
    policy.check_causal(stacked.n_u, stacked.n_w);
    StateResponse out;
    out.h = stacked.b * policy.gain + stacked.e;
    out.offset = stacked.a * x0 + stacked.b * policy.offset;
    return out;
}

Vector simulate_step(const LtiSystem& sys, const Vector& x, const Vector& u, const Vector& w) {
    require(x.size() == sys.n_x() && u.size() == sys.n_u() && w.size() == sys.n_w(), ErrorCode::DimensionMismatch,
            "simulate_step: state, input or disturbance has wrong dimension");
    return sys.a * x + sys.b * u + sys.e * w;
}

AffinePolicy shifted_policy(const StackedSystem& stacked, const AffinePolicy& policy, const Vector& x0,
                            const Vector& w0, const Matrix& k_f, const Vector& k_f_offset) {
    const int n = stacked.horizon;
    const int nu = stacked.n_u;
    const int nw = stacked.n_w;
    const int nx = stacked.n_x;
    require(w0.size() == nw, ErrorCode::DimensionMismatch, "realized disturbance has wrong dimension");
    require(k_f.rows() == nu && k_f.cols() == nx && k_f_offset.size() == nu, ErrorCode::DimensionMismatch,
            "terminal controller has wrong size");
    const StateResponse resp = state_response(stacked, policy, x0);
    AffinePolicy out;
    out.gain = Matrix::Zero(n * nu, n * nw);
    out.offset = Vector::Zero(n * nu);
    for (int i = 0; i + 1 < n; ++i) {
        // u'_i = u_{i+1} with w_0 fixed and w_j = w'_{j-1}.
        out.offset.segment(i * nu, nu) =
            policy.offset.segment((i + 1) * nu, nu) + policy.gain.block((i + 1) * nu, 0, nu, nw) * w0;
        for (int j = 1; j <= i; ++j) {
            out.gain.block(i * nu, (j - 1) * nw, nu, nw) = policy.gain.block((i + 1) * nu, j * nw, nu, nw);
        }
    }
    // Last input: K_f x_N + k_f, with x_N expressed in the shifted disturbances.
    const Matrix h_n = resp.h.block(n * nx, 0, nx, n * nw);
    const int last = n - 1;
    out.offset.segment(last * nu, nu) = k_f * (h_n.leftCols(nw) * w0 + resp.offset.segment(n * nx, nx)) + k_f_offset;
    for (int j = 1; j < n; ++j) {
        out.gain.block(last * nu, (j - 1) * nw, nu, nw) = k_f * h_n.block(0, j * nw, nx, nw);
    }
    return out;
}

}  // namespace drmpc
