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

#include "drmpc/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "drmpc/error.hpp"
#include "drmpc/experiment.hpp"
#include "drmpc/simulate.hpp"

namespace drmpc {

namespace {

constexpr double kPivotTol = 1e-11;

// Row-major dense tableau; the last row holds reduced costs, the last column
// the right-hand side.
class Tableau {
public:
    Tableau(int rows, int cols) : m_(rows), n_(cols), t_(static_cast<size_t>(rows + 1) * (cols + 1), 0.0) {}

    double& at(int i, int j) { return t_[static_cast<size_t>(i) * (n_ + 1) + j]; }
    double rhs(int i) { return at(i, n_); }

    void pivot(int r, int c) {
        const double inv = 1.0 / at(r, c);
        double* pr = &at(r, 0);
        for (int j = 0; j <= n_; ++j) {
            pr[j] *= inv;
        }
        for (int i = 0; i <= m_; ++i) {
            if (i == r) {
                continue;
            }
            double* pi = &at(i, 0);
            const double f = pi[c];
            if (f == 0.0) {
                continue;
            }
            for (int j = 0; j <= n_; ++j) {
                pi[j] -= f * pr[j];
            }
        }
        basis_[r] = c;
    }

    void set_objective(const std::vector<double>& cost) {
        double* obj = &at(m_, 0);
        for (int j = 0; j < n_; ++j) {
            obj[j] = -cost[j];
        }
        obj[n_] = 0.0;
        for (int i = 0; i < m_; ++i) {
            const double f = obj[basis_[i]];
            if (f != 0.0) {
                const double* pi = &at(i, 0);
                for (int j = 0; j <= n_; ++j) {
                    obj[j] -= f * pi[j];
                }
            }
        }
    }

    // Maximizes the current objective over columns with allowed[j] set.
    void optimize(const std::vector<char>& allowed) {
        const int max_iter = 50 * (m_ + n_);
        for (int it = 0; it < max_iter; ++it) {
            const bool bland = it > 10 * (m_ + n_);
            int enter = -1;
            double best = -1e-10;
            for (int j = 0; j < n_; ++j) {
                if (!allowed[j]) {
                    continue;
                }
                const double rc = at(m_, j);
                if (rc < best) {
                    enter = j;
                    best = rc;
                    if (bland) {
                        break;
                    }
                }
            }
            if (enter < 0) {
                return;
            }
            int leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m_; ++i) {
                const double a = at(i, enter);
                if (a > kPivotTol) {
                    const double q = rhs(i) / a;
                    if (q < ratio - 1e-14 || (q <= ratio + 1e-14 && leave >= 0 && basis_[i] < basis_[leave])) {
                        ratio = q;
                        leave = i;
                    }
                }
            }
            if (leave < 0) {
                fail(ErrorCode::SolverFailure, "solve_lp: problem is unbounded");
            }
            pivot(leave, enter);
        }
        fail(ErrorCode::SolverFailure, "solve_lp: iteration limit reached");
    }

    std::vector<int> basis_;
    int m_;
    int n_;

private:
    std::vector<double> t_;
};

}  // namespace

bool SuiteReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

LpResult solve_lp(const Vector& c, const Matrix& a_ub, const Vector& b_ub, const Matrix& a_eq, const Vector& b_eq) {
    const int n = static_cast<int>(c.size());
    const int mi = static_cast<int>(a_ub.rows());
    const int me = static_cast<int>(a_eq.rows());
    require((mi == 0 || a_ub.cols() == n) && (me == 0 || a_eq.cols() == n) && b_ub.size() == mi &&
                b_eq.size() == me,
            ErrorCode::DimensionMismatch, "solve_lp: inconsistent dimensions");
    const int m = mi + me;
    std::vector<int> art_row;
    for (int i = 0; i < mi; ++i) {
        if (b_ub(i) < 0.0) {
            art_row.push_back(i);
        }
    }
    for (int i = 0; i < me; ++i) {
        art_row.push_back(mi + i);
    }
    const int na = static_cast<int>(art_row.size());
    const int cols = n + mi + na;
    Tableau t(m, cols);
    t.basis_.assign(static_cast<size_t>(m), -1);
    for (int i = 0; i < mi; ++i) {
        const double sign = b_ub(i) < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) {
            t.at(i, j) = sign * a_ub(i, j);
        }
        t.at(i, n + i) = sign;
        t.at(i, cols) = sign * b_ub(i);
        if (sign > 0.0) {
            t.basis_[i] = n + i;
        }
    }
    for (int i = 0; i < me; ++i) {
        const double sign = b_eq(i) < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) {
            t.at(mi + i, j) = sign * a_eq(i, j);
        }
        t.at(mi + i, cols) = sign * b_eq(i);
    }
    for (int k = 0; k < na; ++k) {
        t.at(art_row[k], n + mi + k) = 1.0;
        t.basis_[art_row[k]] = n + mi + k;
    }

    std::vector<char> allowed(static_cast<size_t>(cols), 1);
    if (na > 0) {
        std::vector<double> phase1(static_cast<size_t>(cols), 0.0);
        for (int k = 0; k < na; ++k) {
            phase1[n + mi + k] = -1.0;
        }
        t.set_objective(phase1);
        t.optimize(allowed);
        double scale = 1.0;
        for (int i = 0; i < m; ++i) {
            scale = std::max(scale, std::abs(i < mi ? b_ub(i) : b_eq(i - mi)));
        }
        if (t.rhs(m) < -1e-9 * scale) {
            fail(ErrorCode::SolverFailure, "solve_lp: problem is infeasible");
        }
        // Drive zero-level artificials out of the basis where possible.
        for (int i = 0; i < m; ++i) {
            if (t.basis_[i] < n + mi) {
                continue;
            }
            for (int j = 0; j < n + mi; ++j) {
                if (std::abs(t.at(i, j)) > 1e-9) {
                    t.pivot(i, j);
                    break;
                }
            }
        }
        for (int k = 0; k < na; ++k) {
            allowed[n + mi + k] = 0;
        }
    }
    std::vector<double> cost(static_cast<size_t>(cols), 0.0);
    for (int j = 0; j < n; ++j) {
        cost[j] = c(j);
    }
    t.set_objective(cost);
    t.optimize(allowed);
    LpResult out;
    out.x = Vector::Zero(n);
    for (int i = 0; i < m; ++i) {
        if (t.basis_[i] < n) {
            out.x(t.basis_[i]) = t.rhs(i);
        }
    }
    out.objective = c.dot(out.x);
    return out;
}

double grid_moment_risk_lp(const HomQuadratic& z, const MomentAmbiguity& amb, int points, int directions) {
    require(amb.n_w() == 1 && z.d() == 1, ErrorCode::DimensionMismatch, "grid oracle needs n_w = 1");
    require(points >= 2 && directions >= 4, ErrorCode::InvalidArgument, "grid oracle needs >= 2 points, >= 4 sides");
    const double r = amb.support.r;
    const Matrix rw = amb.r_w();
    const Matrix center = amb.scaled_center();
    const double kappa = std::cos(std::numbers::pi / directions);
    // Functional l(D) = s (D00 + D11)/2 + [((D00 - D11)/2) cos th + D01 sin th] / kappa,
    // which bounds the largest |eigenvalue| from above over all (s, th).
    auto ell = [&](const Matrix& d, double s, double th) {
        return s * 0.5 * (d(0, 0) + d(1, 1)) + (0.5 * (d(0, 0) - d(1, 1)) * std::cos(th) + d(0, 1) * std::sin(th)) / kappa;
    };
    const int rows = 2 * directions;
    Matrix a_ub(rows, points);
    Vector b_ub(rows);
    Vector c(points);
    std::vector<Matrix> atoms(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double w = -r + 2.0 * r * i / (points - 1);
        Vector wh(2);
        wh << w, 1.0;
        atoms[i] = rw * wh * wh.transpose() * rw;
        c(i) = z.evaluate(Vector::Constant(1, w));
    }
    int row = 0;
    for (int k = 0; k < directions; ++k) {
        const double th = 2.0 * std::numbers::pi * k / directions;
        for (double s : {-1.0, 1.0}) {
            for (int i = 0; i < points; ++i) {
                a_ub(row, i) = -ell(atoms[i], s, th);
            }
            b_ub(row) = amb.beta - ell(center, s, th);
            ++row;
        }
    }
    const Matrix a_eq = Matrix::Ones(1, points);
    const Vector b_eq = Vector::Ones(1);
    return solve_lp(c, a_ub, b_ub, a_eq, b_eq).objective;
}

double grid_sup(const HomQuadratic& z, double r, int points) {
    require(z.d() == 1 && points >= 2, ErrorCode::InvalidArgument, "grid_sup needs n_w = 1 and >= 2 points");
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        best = std::max(best, z.evaluate(Vector::Constant(1, -r + 2.0 * r * i / (points - 1))));
    }
    return best;
}

double rollout_discrepancy(const LtiSystem& sys, const AffinePolicy& policy, const Vector& x0, const Vector& w,
                           int horizon) {
    const int nx = sys.n_x();
    const int nu = sys.n_u();
    const int nw = sys.n_w();
    const StackedSystem stacked = stack_system(sys, Matrix::Identity(nx, nx), Matrix::Identity(nu, nu),
                                               Matrix::Identity(nx, nx), horizon);
    const StateResponse resp = state_response(stacked, policy, x0);
    const Vector stacked_x = resp.h * w + resp.offset;
    const Vector u = policy.gain * w + policy.offset;
    Vector x = x0;
    double worst = (stacked_x.head(nx) - x).cwiseAbs().maxCoeff();
    for (int t = 0; t < horizon; ++t) {
        x = sys.a * x + sys.b * u.segment(t * nu, nu) + sys.e * w.segment(t * nw, nw);
        worst = std::max(worst, (stacked_x.segment((t + 1) * nx, nx) - x).cwiseAbs().maxCoeff());
    }
    return worst;
}

double SoundnessReport::worst() const {
    return std::max({worst_stage, worst_nonneg, worst_terminal, worst_avar});
}

SoundnessReport check_block_soundness(const ControllerProgram& cp, const ControllerConfig& config,
                                      const Solution& sol, const std::vector<Vector>& sequences) {
    require(sol.optimal(), ErrorCode::InvalidArgument, "soundness check needs a solved program");
    const StackedSystem& st = cp.stacked;
    const int n = st.horizon;
    const int nx = st.n_x;
    const int nw = st.n_w;
    const Matrix response = sol.value(cp.vars.response);
    SoundnessReport rep;
    std::vector<Matrix> upper;
    std::vector<Matrix> nonneg;
    for (const auto& rb : cp.stage_blocks) {
        upper.push_back(sol.value(rb.upper));
        nonneg.push_back(sol.value(rb.nonneg));
        rep.worst_avar = std::max(rep.worst_avar, sol.value(rb.risk));
    }
    Vector wh(n * nw + 1);
    for (const auto& w : sequences) {
        require(w.size() == n * nw, ErrorCode::DimensionMismatch, "disturbance sequence must have N n_w entries");
        wh << w, 1.0;
        const Vector x = response * wh;
        for (int t = 1; t <= static_cast<int>(upper.size()); ++t) {
            Vector head(t * nw + 1);
            head << w.head(t * nw), 1.0;
            const double phi = config.stage.evaluate(x.segment(t * nx, nx));
            rep.worst_stage = std::max(rep.worst_stage, phi - head.dot(upper[t - 1] * head));
            rep.worst_nonneg = std::max(rep.worst_nonneg, -head.dot(nonneg[t - 1] * head));
        }
        rep.worst_terminal = std::max(rep.worst_terminal, config.terminal.evaluate(x.segment(n * nx, nx)));
    }
    return rep;
}

SuiteReport validate_risk_duality(std::uint64_t seed, int instances) {
    SuiteReport rep;
    rep.suite = "risk-duality";
    Rng rng = make_rng(seed, 11);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const long sizes[] = {50, 500, 5000, 50000};
    for (int k = 0; k < instances; ++k) {
        Matrix p(2, 2);
        p << normal(rng), normal(rng), 0.0, normal(rng);
        p(1, 0) = p(0, 1);
        const HomQuadratic z(p);
        DisturbanceModel model;
        model.support = SupportBall{1, 1.0};
        model.mean = Vector::Constant(1, 0.6 * unif(rng) - 0.3);
        const double sigma = 0.05 + 0.45 * unif(rng);
        model.covariance = Matrix::Constant(1, 1, sigma * sigma);
        const long m = sizes[k % 4];
        const auto data = sample_truncated_gaussian(model, m, rng);
        const MomentAmbiguity amb = build_ambiguity(estimate_second_moment(data, model.support), 0.25, 0.05);

        const double sdp = moment_risk(z, amb).value;
        const double lp = grid_moment_risk_lp(z, amb);
        const double scale = 1.0 + std::abs(sdp);
        CheckResult moment;
        moment.name = "moment_risk vs grid LP #" + std::to_string(k);
        moment.margin = sdp - lp;
        moment.tolerance = 1e-3 * scale;
        moment.passed = moment.margin >= -1e-7 * scale && moment.margin <= moment.tolerance;
        std::ostringstream md;
        md.precision(10);
        md << "M=" << m << " beta=" << amb.beta << " sdp=" << sdp << " lp=" << lp;
        moment.detail = md.str();
        rep.checks.push_back(moment);

        const double sup = robust_sup(z, model.support).value;
        const double dense = grid_sup(z, model.support.r, 100001);
        CheckResult robust;
        robust.name = "robust_sup vs dense grid #" + std::to_string(k);
        robust.margin = sup - dense;
        robust.tolerance = 1e-4;
        robust.passed = robust.margin >= -1e-7 * (1.0 + std::abs(sup)) && robust.margin <= robust.tolerance;
        std::ostringstream rd;
        rd.precision(10);
        rd << "sdp=" << sup << " grid=" << dense;
        robust.detail = rd.str();
        rep.checks.push_back(robust);
    }
    return rep;
}

SuiteReport validate_dynamics(std::uint64_t seed, int triples) {
    SuiteReport rep;
    rep.suite = "dynamics";
    Rng rng = make_rng(seed, 12);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 3);
    std::uniform_int_distribution<int> horizon(1, 6);
    auto random = [&](int r, int c) {
        Matrix m(r, c);
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < c; ++j) {
                m(i, j) = normal(rng);
            }
        }
        return m;
    };
    double worst = 0.0;
    std::string worst_detail;
    for (int k = 0; k < triples; ++k) {
        LtiSystem sys;
        const int nx = dim(rng) + 1;
        const int nu = dim(rng);
        const int nw = dim(rng);
        const int n = horizon(rng);
        sys.a = random(nx, nx);
        sys.a *= 0.95 / std::max(1e-9, sys.a.operatorNorm());
        sys.b = random(nx, nu);
        sys.e = random(nx, nw);
        AffinePolicy policy;
        policy.gain = Matrix::Zero(n * nu, n * nw);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < i; ++j) {
                policy.gain.block(i * nu, j * nw, nu, nw) = random(nu, nw);
            }
        }
        policy.offset = random(n * nu, 1);
        const Vector x0 = random(nx, 1);
        const Vector w = random(n * nw, 1);
        const double d = rollout_discrepancy(sys, policy, x0, w, n);
        if (d > worst || worst_detail.empty()) {
            worst = std::max(worst, d);
            worst_detail = "n_x=" + std::to_string(nx) + " n_u=" + std::to_string(nu) + " n_w=" +
                           std::to_string(nw) + " N=" + std::to_string(n);
        }
    }
    CheckResult c;
    c.name = "stacked rollout vs recursion (" + std::to_string(triples) + " triples)";
    c.margin = worst;
    c.tolerance = 1e-10;
    c.passed = worst <= c.tolerance;
    c.detail = "worst case " + worst_detail;
    rep.checks.push_back(c);
    return rep;
}

SuiteReport validate_feasibility_audit(const std::vector<std::string>& configs, std::uint64_t seed, int points) {
    SuiteReport rep;
    rep.suite = "feasibility-audit";
    for (const auto& name : configs) {
        const Experiment exp = load_experiment(name);
        const AuditReport audit = audit_feasibility_assumptions(exp.run, points, seed);
        CheckResult c;
        c.name = "terminal invariance " + (exp.name.empty() ? name : exp.name);
        c.margin = std::max(audit.worst_stage, audit.worst_terminal);
        c.tolerance = 1e-6;
        c.passed = audit.passed;
        c.detail = audit.message;
        rep.checks.push_back(c);
    }
    return rep;
}

SuiteReport run_validation_suite(const std::string& suite, std::uint64_t seed) {
    if (suite == "risk-duality") {
        return validate_risk_duality(seed);
    }
    if (suite == "dynamics") {
        return validate_dynamics(seed);
    }
    if (suite == "feasibility-audit") {
        return validate_feasibility_audit({"offline2d", "online1d"}, seed);
    }
    fail(ErrorCode::InvalidArgument,
         "unknown suite '" + suite + "' (expected risk-duality, dynamics or feasibility-audit)");
}

}  // namespace drmpc
