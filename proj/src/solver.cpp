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

// Infeasible-start primal-dual path-following method for the LMI-form
// programs built by ConicProgram. The search direction is HKM with a
// Mehrotra predictor-corrector; equality rows are handled by a Schur
// reduction of the KKT system. All linear algebra is dense.

#include "drmpc/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace drmpc {

namespace {

struct Entry {
    int r;
    int c;
    double v;
};

struct PsdData {
    int n = 0;
    Matrix a0;
    std::vector<int> vars;                 // sorted global ids
    std::vector<std::vector<Entry>> coef;  // full symmetric entries per local var
    int lmi_index = 0;
};

struct LpRow {
    std::vector<std::pair<int, double>> terms;
    double a0 = 0.0;
    int linear_index = 0;
};

struct StandardForm {
    int m = 0;
    Vector c;
    double c0 = 0.0;
    std::vector<PsdData> psd;
    std::vector<LpRow> lp;
    Matrix g;  // equality rows: g y = h
    Vector h;
    std::vector<int> eq_index;
};

StandardForm to_standard_form(const ConicProgram& program) {
    StandardForm sf;
    sf.m = program.num_variables();
    sf.c = Vector::Zero(sf.m);
    for (const auto& [id, v] : program.objective().terms()) {
        sf.c(id) = v;
    }
    sf.c0 = program.objective().constant();

    std::vector<int> local(static_cast<size_t>(sf.m), -1);
    int lmi_index = 0;
    for (const auto& l : program.lmis()) {
        PsdData blk;
        blk.n = l.dim;
        blk.lmi_index = lmi_index++;
        blk.a0 = Matrix::Zero(l.dim, l.dim);
        std::vector<int> seen;
        for (int c = 0; c < l.dim; ++c) {
            for (int r = c; r < l.dim; ++r) {
                for (const auto& t : l.at(r, c).terms()) {
                    if (local[static_cast<size_t>(t.first)] < 0) {
                        local[static_cast<size_t>(t.first)] = 0;
                        seen.push_back(t.first);
                    }
                }
            }
        }
        std::sort(seen.begin(), seen.end());
        for (size_t k = 0; k < seen.size(); ++k) {
            local[static_cast<size_t>(seen[k])] = static_cast<int>(k);
        }
        blk.vars = seen;
        blk.coef.resize(seen.size());
        for (int c = 0; c < l.dim; ++c) {
            for (int r = c; r < l.dim; ++r) {
                const LinExpr& e = l.at(r, c);
                blk.a0(r, c) = blk.a0(c, r) = e.constant();
                for (const auto& [id, v] : e.terms()) {
                    auto& list = blk.coef[static_cast<size_t>(local[static_cast<size_t>(id)])];
                    list.push_back({r, c, v});
                    if (r != c) {
                        list.push_back({c, r, v});
                    }
                }
            }
        }
        for (int id : seen) {
            local[static_cast<size_t>(id)] = -1;
        }
        sf.psd.push_back(std::move(blk));
    }

    int eq_count = program.num_equalities();
    sf.g = Matrix::Zero(eq_count, sf.m);
    sf.h = Vector::Zero(eq_count);
    int eq = 0;
    int idx = 0;
    for (const auto& l : program.linear()) {
        if (l.kind == LinearKind::Nonnegative) {
            LpRow row;
            row.terms = l.expr.terms();
            row.a0 = l.expr.constant();
            row.linear_index = idx;
            sf.lp.push_back(std::move(row));
        } else {
            for (const auto& [id, v] : l.expr.terms()) {
                sf.g(eq, id) = v;
            }
            sf.h(eq) = -l.expr.constant();
            sf.eq_index.push_back(idx);
            ++eq;
        }
        ++idx;
    }
    return sf;
}

// sum_i y_i A_i + A0 for one block
Matrix adjoint_block(const PsdData& blk, const Vector& y, bool with_constant) {
    Matrix s = with_constant ? blk.a0 : Matrix::Zero(blk.n, blk.n);
    for (size_t k = 0; k < blk.vars.size(); ++k) {
        const double yk = y(blk.vars[k]);
        if (yk == 0.0) {
            continue;
        }
        for (const auto& e : blk.coef[k]) {
            s(e.r, e.c) += yk * e.v;
        }
    }
    return s;
}

// out_i += <A_i, z> for one block
void apply_block(const PsdData& blk, const Matrix& z, Vector& out) {
    for (size_t k = 0; k < blk.vars.size(); ++k) {
        double acc = 0.0;
        for (const auto& e : blk.coef[k]) {
            acc += e.v * z(e.r, e.c);
        }
        out(blk.vars[k]) += acc;
    }
}

double lp_value(const LpRow& row, const Vector& y, bool with_constant) {
    double v = with_constant ? row.a0 : 0.0;
    for (const auto& [id, a] : row.terms) {
        v += a * y(id);
    }
    return v;
}

// Largest alpha with m + alpha * dm PSD (infinity when unbounded).
double max_step_psd(const Matrix& m, const Matrix& dm) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        return 0.0;
    }
    const Matrix l = llt.matrixL();
    Matrix w = l.triangularView<Eigen::Lower>().solve(dm);
    w = l.triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
    const double lmin = min_eigenvalue(symmetrize(w));
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double max_step_lp(const Vector& v, const Vector& dv) {
    double a = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) {
            a = std::min(a, -v(i) / dv(i));
        }
    }
    return a;
}

struct Iterate {
    std::vector<Matrix> x;  // primal multipliers per PSD block
    std::vector<Matrix> s;  // slack per PSD block
    Vector xl;              // LP multipliers
    Vector sl;              // LP slacks
    Vector y;
    Vector nu;
};

struct Residuals {
    std::vector<Matrix> rd;  // A0 + A*y - S
    Vector rdl;
    Vector rp;               // c - A(X) - G'nu
    Vector re;               // h - G y
    double pobj = 0.0;
    double dobj = 0.0;
    double mu = 0.0;
    double pinf = 0.0;       // relative, LMI/row side (variables y)
    double dinf = 0.0;       // relative, stationarity side
    double gap = 0.0;
    double xs = 0.0;
};

class InteriorPoint {
public:
    InteriorPoint(const StandardForm& sf, const SolverOptions& opt) : sf_(sf), opt_(opt) {
        nblocks_ = sf_.psd.size();
        ntot_ = 0;
        for (const auto& b : sf_.psd) {
            ntot_ += b.n;
        }
        ntot_ += static_cast<int>(sf_.lp.size());
        norm_c_ = sf_.c.norm();
        double a0 = 0.0;
        for (const auto& b : sf_.psd) {
            a0 += b.a0.squaredNorm();
        }
        for (const auto& r : sf_.lp) {
            a0 += r.a0 * r.a0;
        }
        norm_a0_ = std::sqrt(a0);
        norm_h_ = sf_.h.norm();
    }

    Solution run();

private:
    void initialize();
    Residuals residuals(const Iterate& it) const;
    bool factorize(const std::vector<Matrix>& sinv);
    void solve_kkt(const Vector& r1, const Vector& re, Vector& dy, Vector& dnu) const;

    const StandardForm& sf_;
    const SolverOptions& opt_;
    size_t nblocks_ = 0;
    int ntot_ = 0;
    double norm_c_ = 0.0;
    double norm_a0_ = 0.0;
    double norm_h_ = 0.0;
    Iterate it_;
    void solve_kkt_once(const Vector& r1, const Vector& re, Vector& dy, Vector& dnu_p) const;

    Matrix m_;
    Vector scale_;
    Eigen::LLT<Matrix> m_llt_;
    Eigen::LLT<Matrix> g_llt_;
    Matrix minv_gt_;
};

void InteriorPoint::initialize() {
    it_.x.clear();
    it_.s.clear();
    for (const auto& b : sf_.psd) {
        const double n = b.n;
        double max_ratio = 0.0;
        double max_norm = b.a0.norm();
        for (size_t k = 0; k < b.vars.size(); ++k) {
            double nrm = 0.0;
            for (const auto& e : b.coef[k]) {
                nrm += e.v * e.v;
            }
            nrm = std::sqrt(nrm);
            max_norm = std::max(max_norm, nrm);
            max_ratio = std::max(max_ratio, (1.0 + std::abs(sf_.c(b.vars[k]))) / (1.0 + nrm));
        }
        const double xi = std::max({10.0, std::sqrt(n), n * max_ratio});
        const double eta = std::max({10.0, std::sqrt(n), max_norm});
        it_.x.push_back(xi * Matrix::Identity(b.n, b.n));
        it_.s.push_back(eta * Matrix::Identity(b.n, b.n));
    }
    const auto nl = static_cast<Eigen::Index>(sf_.lp.size());
    it_.xl = Vector::Zero(nl);
    it_.sl = Vector::Zero(nl);
    if (nl > 0) {
        double max_ratio = 0.0;
        double max_norm = 0.0;
        Vector col_norm = Vector::Zero(sf_.m);
        for (const auto& r : sf_.lp) {
            max_norm = std::max(max_norm, std::abs(r.a0));
            for (const auto& [id, a] : r.terms) {
                col_norm(id) += a * a;
            }
        }
        for (int i = 0; i < sf_.m; ++i) {
            if (col_norm(i) > 0.0) {
                const double nrm = std::sqrt(col_norm(i));
                max_norm = std::max(max_norm, nrm);
                max_ratio = std::max(max_ratio, (1.0 + std::abs(sf_.c(i))) / (1.0 + nrm));
            }
        }
        const double n = static_cast<double>(nl);
        const double xi = std::max({10.0, std::sqrt(n), std::min(n, 100.0) * max_ratio});
        const double eta = std::max({10.0, std::sqrt(n), max_norm});
        it_.xl.setConstant(xi);
        it_.sl.setConstant(eta);
    }
    it_.y = Vector::Zero(sf_.m);
    it_.nu = Vector::Zero(sf_.g.rows());
}

Residuals InteriorPoint::residuals(const Iterate& it) const {
    Residuals r;
    r.rp = sf_.c;
    double rd_norm2 = 0.0;
    double dual_const = 0.0;
    double xs = 0.0;
    Vector ax = Vector::Zero(sf_.m);
    for (size_t j = 0; j < nblocks_; ++j) {
        const auto& b = sf_.psd[j];
        Matrix rd = adjoint_block(b, it.y, true) - it.s[j];
        rd_norm2 += rd.squaredNorm();
        r.rd.push_back(std::move(rd));
        apply_block(b, it.x[j], ax);
        dual_const += (b.a0.array() * it.x[j].array()).sum();
        xs += (it.x[j].array() * it.s[j].array()).sum();
    }
    r.rdl = Vector::Zero(static_cast<Eigen::Index>(sf_.lp.size()));
    for (size_t k = 0; k < sf_.lp.size(); ++k) {
        const auto& row = sf_.lp[k];
        const auto kk = static_cast<Eigen::Index>(k);
        r.rdl(kk) = lp_value(row, it.y, true) - it.sl(kk);
        rd_norm2 += r.rdl(kk) * r.rdl(kk);
        for (const auto& [id, a] : row.terms) {
            ax(id) += a * it.xl(kk);
        }
        dual_const += row.a0 * it.xl(kk);
        xs += it.xl(kk) * it.sl(kk);
    }
    r.rp -= ax;
    if (sf_.g.rows() > 0) {
        r.rp -= sf_.g.transpose() * it.nu;
        r.re = sf_.h - sf_.g * it.y;
    } else {
        r.re = Vector::Zero(0);
    }
    r.pobj = sf_.c.dot(it.y);
    r.dobj = -dual_const + (sf_.g.rows() > 0 ? sf_.h.dot(it.nu) : 0.0);
    r.xs = xs;
    r.mu = ntot_ > 0 ? xs / ntot_ : 0.0;
    r.pinf = std::sqrt(rd_norm2) / (1.0 + norm_a0_);
    if (r.re.size() > 0) {
        r.pinf = std::max(r.pinf, r.re.norm() / (1.0 + norm_h_));
    }
    r.dinf = r.rp.norm() / (1.0 + norm_c_);
    r.gap = std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
    r.gap = std::max(r.gap, xs / (1.0 + std::abs(r.pobj) + std::abs(r.dobj)));
    return r;
}

bool InteriorPoint::factorize(const std::vector<Matrix>& sinv) {
    Matrix m = Matrix::Zero(sf_.m, sf_.m);
    for (size_t j = 0; j < nblocks_; ++j) {
        const auto& b = sf_.psd[j];
        const Matrix& x = it_.x[j];
        const Matrix& si = sinv[j];
        const size_t k = b.vars.size();
        for (size_t a = 0; a < k; ++a) {
            const auto& ea = b.coef[a];
            const int ia = b.vars[a];
            for (size_t bb = a; bb < k; ++bb) {
                const auto& eb = b.coef[bb];
                double sum = 0.0;
                for (const auto& p : ea) {
                    for (const auto& q : eb) {
                        sum += p.v * q.v * x(p.c, q.r) * si(q.c, p.r);
                    }
                }
                m(ia, b.vars[bb]) += sum;
            }
        }
    }
    for (size_t k = 0; k < sf_.lp.size(); ++k) {
        const auto& row = sf_.lp[k];
        const auto kk = static_cast<Eigen::Index>(k);
        const double d = it_.xl(kk) / it_.sl(kk);
        for (size_t a = 0; a < row.terms.size(); ++a) {
            for (size_t bb = a; bb < row.terms.size(); ++bb) {
                const int ia = row.terms[a].first;
                const int ib = row.terms[bb].first;
                m(std::min(ia, ib), std::max(ia, ib)) += d * row.terms[a].second * row.terms[bb].second;
            }
        }
    }
    m.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();

    // Variables that appear in no cone constraint get a unit diagonal so the
    // system stays nonsingular.
    for (int i = 0; i < sf_.m; ++i) {
        if (!(m(i, i) > 0.0)) {
            m(i, i) = 1.0;
        }
    }
    m_ = m;
    // Symmetric Jacobi scaling: the diagonal routinely spans 14 orders of
    // magnitude near the optimum.
    scale_ = m.diagonal().cwiseSqrt().cwiseInverse();
    Matrix ms = scale_.asDiagonal() * m * scale_.asDiagonal();
    double reg = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        if (reg > 0.0) {
            ms.diagonal().array() += reg;
        }
        m_llt_.compute(ms);
        if (m_llt_.info() == Eigen::Success) {
            break;
        }
        reg = reg == 0.0 ? 1e-14 : reg * 100.0;
    }
    if (m_llt_.info() != Eigen::Success) {
        return false;
    }
    if (sf_.g.rows() > 0) {
        minv_gt_ = scale_.asDiagonal() * m_llt_.solve(scale_.asDiagonal() * sf_.g.transpose());
        Matrix gmg = sf_.g * minv_gt_;
        g_llt_.compute(symmetrize(gmg));
        if (g_llt_.info() != Eigen::Success) {
            return false;
        }
    }
    return true;
}

void InteriorPoint::solve_kkt_once(const Vector& r1, const Vector& re, Vector& dy, Vector& dnu_p) const {
    const Vector minv_r1 = scale_.asDiagonal() * m_llt_.solve(scale_.asDiagonal() * r1);
    if (sf_.g.rows() == 0) {
        dy = minv_r1;
        dnu_p = Vector::Zero(0);
        return;
    }
    dnu_p = g_llt_.solve(sf_.g * minv_r1 - re);
    dy = minv_r1 - minv_gt_ * dnu_p;
}

void InteriorPoint::solve_kkt(const Vector& r1, const Vector& re, Vector& dy, Vector& dnu) const {
    // M dy + G' dnu' = r1, G dy = re, with dnu = -dnu'. Two rounds of
    // iterative refinement against the unregularized M recover the accuracy
    // lost to ill-conditioning near the boundary.
    Vector dnu_p;
    solve_kkt_once(r1, re, dy, dnu_p);
    const bool has_eq = sf_.g.rows() > 0;
    for (int round = 0; round < 2; ++round) {
        Vector res1 = r1 - m_ * dy;
        Vector res2 = re;
        if (has_eq) {
            res1 -= sf_.g.transpose() * dnu_p;
            res2 -= sf_.g * dy;
        }
        Vector cy;
        Vector cnu;
        solve_kkt_once(res1, res2, cy, cnu);
        dy += cy;
        if (has_eq) {
            dnu_p += cnu;
        }
    }
    dnu = -dnu_p;
}

Solution InteriorPoint::run() {
    Solution sol;
    initialize();
    const double tol = opt_.tolerance;

    Iterate best = it_;
    double best_err = std::numeric_limits<double>::infinity();
    Residuals res = residuals(it_);
    SolveStatus status = SolveStatus::IterationLimit;
    int iter = 0;
    int stall = 0;

    auto finish_stats = [&](const Residuals& r) {
        sol.stats.primal_objective = r.pobj + sf_.c0;
        sol.stats.dual_objective = r.dobj + sf_.c0;
        sol.stats.relative_gap = r.gap;
        sol.stats.primal_infeasibility = r.pinf;
        sol.stats.dual_infeasibility = r.dinf;
    };

    for (; iter < opt_.max_iterations; ++iter) {
        const double err = std::max({res.gap, res.pinf, res.dinf});
        if (err < best_err) {
            best_err = err;
            best = it_;
        }
        if (opt_.verbose) {
            std::fprintf(stderr, "ipm %3d pobj % .10e dobj % .10e gap %.2e pinf %.2e dinf %.2e mu %.2e\n", iter,
                         res.pobj + sf_.c0, res.dobj + sf_.c0, res.gap, res.pinf, res.dinf, res.mu);
        }
        if (res.gap <= tol && res.pinf <= tol && res.dinf <= tol) {
            status = SolveStatus::Optimal;
            break;
        }
        // Infeasibility certificates.
        {
            Vector ax = sf_.c - res.rp;  // A(X) + G' nu
            if (res.dobj > 0.0 && ax.norm() <= 1e-8 * res.dobj && res.dobj > 1e6 * (1.0 + norm_c_)) {
                status = SolveStatus::PrimalInfeasible;
                break;
            }
            if (-res.pobj > 1e10 * (1.0 + norm_a0_) && res.pinf * (1.0 + norm_a0_) <= 1e-6 * -res.pobj) {
                status = SolveStatus::DualInfeasible;
                break;
            }
        }
        const double big = std::max(it_.y.cwiseAbs().maxCoeff(), res.mu);
        if (!std::isfinite(big) || big > 1e20) {
            status = SolveStatus::NumericalTrouble;
            break;
        }

        std::vector<Matrix> sinv(nblocks_);
        bool ok = true;
        for (size_t j = 0; j < nblocks_; ++j) {
            Eigen::LLT<Matrix> llt(it_.s[j]);
            if (llt.info() != Eigen::Success) {
                ok = false;
                break;
            }
            sinv[j] = llt.solve(Matrix::Identity(it_.s[j].rows(), it_.s[j].cols()));
            sinv[j] = symmetrize(sinv[j]);
        }
        if (!ok || !factorize(sinv)) {
            status = SolveStatus::NumericalTrouble;
            break;
        }

        // Direction for a given complementarity target rc (PSD) / rcl (LP).
        struct Dir {
            std::vector<Matrix> dx, ds;
            Vector dxl, dsl, dy, dnu;
        };
        auto direction = [&](const std::vector<Matrix>& rc, const Vector& rcl) {
            Dir d;
            Vector r1 = -res.rp;
            for (size_t j = 0; j < nblocks_; ++j) {
                const Matrix z = (rc[j] - it_.x[j] * res.rd[j]) * sinv[j];
                apply_block(sf_.psd[j], z, r1);
            }
            for (size_t k = 0; k < sf_.lp.size(); ++k) {
                const auto kk = static_cast<Eigen::Index>(k);
                const double z = (rcl(kk) - it_.xl(kk) * res.rdl(kk)) / it_.sl(kk);
                for (const auto& [id, a] : sf_.lp[k].terms) {
                    r1(id) += a * z;
                }
            }
            solve_kkt(r1, res.re, d.dy, d.dnu);
            for (size_t j = 0; j < nblocks_; ++j) {
                Matrix ds = adjoint_block(sf_.psd[j], d.dy, false) + res.rd[j];
                Matrix dx = symmetrize((rc[j] - it_.x[j] * ds) * sinv[j]);
                d.ds.push_back(std::move(ds));
                d.dx.push_back(std::move(dx));
            }
            const auto nl = static_cast<Eigen::Index>(sf_.lp.size());
            d.dsl = Vector(nl);
            d.dxl = Vector(nl);
            for (Eigen::Index k = 0; k < nl; ++k) {
                d.dsl(k) = lp_value(sf_.lp[static_cast<size_t>(k)], d.dy, false) + res.rdl(k);
                d.dxl(k) = (rcl(k) - it_.xl(k) * d.dsl(k)) / it_.sl(k);
            }
            return d;
        };
        auto step_lengths = [&](const Dir& d, double& ap, double& ad) {
            ap = std::numeric_limits<double>::infinity();
            ad = std::numeric_limits<double>::infinity();
            for (size_t j = 0; j < nblocks_; ++j) {
                ap = std::min(ap, max_step_psd(it_.x[j], d.dx[j]));
                ad = std::min(ad, max_step_psd(it_.s[j], d.ds[j]));
            }
            ap = std::min(ap, max_step_lp(it_.xl, d.dxl));
            ad = std::min(ad, max_step_lp(it_.sl, d.dsl));
        };

        // Predictor.
        std::vector<Matrix> rc(nblocks_);
        for (size_t j = 0; j < nblocks_; ++j) {
            rc[j] = -it_.x[j] * it_.s[j];
        }
        Vector rcl = -(it_.xl.array() * it_.sl.array()).matrix();
        Dir pred = direction(rc, rcl);
        double ap = 0.0;
        double ad = 0.0;
        step_lengths(pred, ap, ad);
        ap = std::min(1.0, ap);
        ad = std::min(1.0, ad);
        double xs_aff = 0.0;
        for (size_t j = 0; j < nblocks_; ++j) {
            xs_aff += ((it_.x[j] + ap * pred.dx[j]).array() * (it_.s[j] + ad * pred.ds[j]).array()).sum();
        }
        xs_aff += ((it_.xl + ap * pred.dxl).array() * (it_.sl + ad * pred.dsl).array()).sum();
        const double ratio = res.xs > 0.0 ? std::max(0.0, xs_aff / res.xs) : 0.0;
        const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
        const double sigma = std::min(1.0, std::pow(ratio, expon));
        const double target = sigma * res.mu;

        // Corrector.
        for (size_t j = 0; j < nblocks_; ++j) {
            const auto n = it_.x[j].rows();
            rc[j] = target * Matrix::Identity(n, n) - it_.x[j] * it_.s[j] - pred.dx[j] * pred.ds[j];
        }
        rcl = (target - it_.xl.array() * it_.sl.array() - pred.dxl.array() * pred.dsl.array()).matrix();
        Dir corr = direction(rc, rcl);
        step_lengths(corr, ap, ad);
        const double gamma = 0.9 + 0.09 * std::min(1.0, std::min(ap, ad));
        ap = std::min(1.0, gamma * ap);
        ad = std::min(1.0, gamma * ad);
        if (opt_.verbose) {
            std::fprintf(stderr, "    step ap %.3e ad %.3e sigma %.3e\n", ap, ad, sigma);
        }
        if (ap < 1e-12 && ad < 1e-12) {
            if (++stall > 3) {
                status = SolveStatus::NumericalTrouble;
                break;
            }
        } else {
            stall = 0;
        }

        for (size_t j = 0; j < nblocks_; ++j) {
            it_.x[j] = symmetrize(it_.x[j] + ap * corr.dx[j]);
            it_.s[j] = symmetrize(it_.s[j] + ad * corr.ds[j]);
        }
        it_.xl += ap * corr.dxl;
        it_.sl += ad * corr.dsl;
        it_.y += ad * corr.dy;
        if (it_.nu.size() > 0) {
            it_.nu += ap * corr.dnu;
        }
        res = residuals(it_);
    }
    sol.stats.iterations = iter;

    if (status == SolveStatus::PrimalInfeasible || status == SolveStatus::DualInfeasible) {
        finish_stats(res);
        sol.status = status;
        sol.values = it_.y;
        sol.objective = status == SolveStatus::PrimalInfeasible ? std::numeric_limits<double>::infinity()
                                                                : -std::numeric_limits<double>::infinity();
        sol.message = status_name(status);
        return sol;
    }

    if (status != SolveStatus::Optimal) {
        const double err = std::max({res.gap, res.pinf, res.dinf});
        if (err < best_err) {
            best_err = err;
            best = it_;
        }
        it_ = best;
        res = residuals(it_);
        if (best_err <= opt_.acceptable_tolerance) {
            sol.stats.reduced_accuracy = true;
            status = SolveStatus::Optimal;
        }
    }
    finish_stats(res);
    sol.status = status;
    sol.values = it_.y;
    sol.objective = sf_.c.dot(it_.y) + sf_.c0;
    sol.lmi_duals = it_.x;
    sol.linear_duals = Vector::Zero(static_cast<Eigen::Index>(sf_.lp.size() + sf_.eq_index.size()));
    for (size_t k = 0; k < sf_.lp.size(); ++k) {
        sol.linear_duals(sf_.lp[k].linear_index) = it_.xl(static_cast<Eigen::Index>(k));
    }
    for (size_t k = 0; k < sf_.eq_index.size(); ++k) {
        sol.linear_duals(sf_.eq_index[k]) = it_.nu(static_cast<Eigen::Index>(k));
    }
    sol.message = status_name(status);
    return sol;
}

}  // namespace

Solution solve(const ConicProgram& program, const SolverOptions& options) {
    const StandardForm sf = to_standard_form(program);
    InteriorPoint ipm(sf, options);
    Solution sol = ipm.run();
    if (sol.status == SolveStatus::Optimal) {
        const VerificationReport report = verify_solution(program, sol.values);
        sol.stats.max_residual = report.max_residual;
        if (report.max_residual > options.verify_tolerance) {
            sol.status = SolveStatus::NumericalTrouble;
            sol.message = "post-solve verification failed at block '" + report.worst_block +
                          "' (residual " + std::to_string(report.max_residual) + ")";
        }
    }
    return sol;
}

}  // namespace drmpc
