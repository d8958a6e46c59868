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

#include "drmpc/ambiguity.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "drmpc/error.hpp"
#include "json.hpp"

namespace drmpc {

namespace {

constexpr double kSupportTol = 1e-9;
constexpr double kMembershipTol = 1e-9;
constexpr double kSubsetTol = 1e-6;

void require_same_geometry(const MomentAmbiguity& a, const MomentAmbiguity& b) {
    require(a.n_w() == b.n_w(), ErrorCode::DimensionMismatch, "ambiguity sets have different n_w");
    require(std::abs(a.support.r - b.support.r) <= 1e-12 * (1.0 + a.support.r) && std::abs(a.c - b.c) <= 1e-12,
            ErrorCode::InvalidArgument, "ambiguity sets use different support radius or scaling");
}

// [[-I, C], [C, rho^2 I - C^2]]: v'Nv >= 0 on v = (X xi, xi) iff |C - X|_2 <= rho.
Matrix quadratic_form(const Matrix& c, double rho) {
    const auto n = c.rows();
    Matrix q(2 * n, 2 * n);
    q.topLeftCorner(n, n) = -Matrix::Identity(n, n);
    q.topRightCorner(n, n) = c;
    q.bottomLeftCorner(n, n) = c;
    q.bottomRightCorner(n, n) = rho * rho * Matrix::Identity(n, n) - c * c;
    return symmetrize(q);
}

}  // namespace

void SupportBall::validate() const {
    require(n_w >= 1, ErrorCode::InvalidArgument, "support dimension n_w must be >= 1");
    require(r > 0.0 && std::isfinite(r), ErrorCode::InvalidArgument, "support radius r must be positive");
}

Matrix MomentAmbiguity::r_w() const {
    Matrix r = Matrix::Identity(n_w() + 1, n_w() + 1);
    r(n_w(), n_w()) = c * support.r;
    return r;
}

Matrix MomentAmbiguity::scaled_center() const {
    const Matrix r = r_w();
    return r * c_hat * r;
}

const SupportBall& support_of(const AmbiguityKind& amb) {
    if (const auto* m = std::get_if<MomentAmbiguity>(&amb)) {
        return m->support;
    }
    return std::get<SupportBall>(amb);
}

EmpiricalSecondMoment estimate_second_moment(const std::vector<Vector>& samples, const SupportBall& support) {
    support.validate();
    require(!samples.empty(), ErrorCode::EmptySampleSet, "no disturbance samples");
    const int n = support.n_w;
    Matrix acc = Matrix::Zero(n + 1, n + 1);
    Vector wh(n + 1);
    for (size_t i = 0; i < samples.size(); ++i) {
        const Vector& w = samples[i];
        require(w.size() == n, ErrorCode::DimensionMismatch,
                "sample " + std::to_string(i) + " has dimension " + std::to_string(w.size()) + ", expected " +
                    std::to_string(n));
        const double norm = w.norm();
        if (!(norm <= support.r + kSupportTol)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "sample " << i << " has norm " << norm << " outside support radius " << support.r;
            fail(ErrorCode::SampleOutsideSupport, msg.str());
        }
        wh.head(n) = w;
        wh(n) = 1.0;
        acc.selfadjointView<Eigen::Lower>().rankUpdate(wh);
    }
    acc.triangularView<Eigen::StrictlyUpper>() = acc.transpose().triangularView<Eigen::StrictlyUpper>();
    EmpiricalSecondMoment out;
    out.m = static_cast<long>(samples.size());
    out.c_hat = acc / static_cast<double>(out.m);
    out.c_hat(n, n) = 1.0;
    out.support = support;
    return out;
}

double hoeffding_radius(long m, int n_w, double r, double c, double delta) {
    require(m >= 1, ErrorCode::InvalidSampleCount, "sample count M must be >= 1");
    require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidConfidence, "confidence delta must lie in (0,1)");
    require(n_w >= 1, ErrorCode::InvalidArgument, "n_w must be >= 1");
    require(r > 0.0, ErrorCode::InvalidArgument, "support radius r must be positive");
    require(c > 0.0, ErrorCode::InvalidArgument, "scaling c must be positive");
    const double log_term = std::log(2.0 * (n_w + 1) / delta);
    return 0.5 * r * r * (1.0 + std::sqrt(1.0 + 16.0 * c * c)) * std::sqrt(2.0 * log_term / static_cast<double>(m));
}

MomentAmbiguity build_ambiguity(const EmpiricalSecondMoment& stat, double c, double delta) {
    MomentAmbiguity amb;
    amb.beta = hoeffding_radius(stat.m, stat.support.n_w, stat.support.r, c, delta);
    amb.c_hat = stat.c_hat;
    amb.c = c;
    amb.delta = delta;
    amb.m = stat.m;
    amb.support = stat.support;
    return amb;
}

bool contains_measure(const MomentAmbiguity& amb, const Matrix& moment) {
    const int d = amb.n_w() + 1;
    require(moment.rows() == d && moment.cols() == d, ErrorCode::DimensionMismatch,
            "moment matrix must be " + std::to_string(d) + "x" + std::to_string(d));
    const Matrix r = amb.r_w();
    return spectral_norm_sym(symmetrize(r * (amb.c_hat - moment) * r)) <= amb.beta + kMembershipTol;
}

bool nested_by_norm(const MomentAmbiguity& candidate, const MomentAmbiguity& current) {
    require_same_geometry(candidate, current);
    const Matrix r = current.r_w();
    const double dist = spectral_norm_sym(symmetrize(r * (candidate.c_hat - current.c_hat) * r));
    return dist + candidate.beta <= current.beta;
}

SubsetCertificate subset_lmi(const MomentAmbiguity& candidate, const MomentAmbiguity& current,
                             const SolverOptions& options) {
    require_same_geometry(candidate, current);
    SubsetCertificate cert;
    const double beta = current.beta;
    if (beta <= 0.0) {
        const double dist = (candidate.c_hat - current.c_hat).cwiseAbs().maxCoeff();
        cert.nested = candidate.beta <= 0.0 && dist <= 1e-12;
        cert.margin = cert.nested ? 0.0 : -1.0;
        return cert;
    }
    // Work with X = R C R / beta so the outer set is the unit ball around
    // the scaled center; the congruence keeps the S-procedure unchanged.
    const Matrix c_out = current.scaled_center() / beta;
    const Matrix c_in = candidate.scaled_center() / beta;
    const Matrix n_out = quadratic_form(c_out, 1.0);
    const Matrix n_in = quadratic_form(c_in, candidate.beta / beta);
    const auto d = n_out.rows();
    const auto h = d / 2;
    Matrix sym = Matrix::Zero(d, d);
    sym.topRightCorner(h, h) = Matrix::Identity(h, h);
    sym.bottomLeftCorner(h, h) = Matrix::Identity(h, h);

    ConicProgram p;
    const VarId a = p.add_nonneg_variable("a");
    const VarId b = p.add_nonneg_variable("b");
    const VarId t = p.add_variable("t");
    LinMatrix m(n_out);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            LinExpr& e = m(i, j);
            if (n_in(i, j) != 0.0) {
                e.add_scaled(LinExpr::variable(a), -n_in(i, j));
            }
            if (sym(i, j) != 0.0) {
                e.add_scaled(LinExpr::variable(b), -sym(i, j));
            }
            if (i == j) {
                e.add_scaled(LinExpr::variable(t), -1.0);
            }
        }
    }
    p.add_lmi("s_procedure", m);
    p.add_nonneg("t_cap", 1.0 - LinExpr::variable(t));
    p.add_nonneg("multiplier_cap", 1e4 - LinExpr::variable(a) - LinExpr::variable(b));
    p.set_objective(-LinExpr::variable(t));
    const Solution sol = solve(p, options);
    if (!sol.optimal()) {
        fail(ErrorCode::SolverFailure, std::string("subset LMI: ") + sol.message);
    }
    cert.a = sol.value(a);
    cert.b = sol.value(b);
    cert.margin = sol.value(t);
    cert.nested = cert.margin >= -kSubsetTol;
    return cert;
}

bool is_subset(const MomentAmbiguity& candidate, const MomentAmbiguity& current, const SolverOptions& options) {
    if (nested_by_norm(candidate, current)) {
        return true;
    }
    return subset_lmi(candidate, current, options).nested;
}

MomentAmbiguity update_ambiguity(const MomentAmbiguity& current, const std::vector<Vector>& all_samples, double c,
                                 double delta, bool* accepted) {
    const MomentAmbiguity candidate =
        build_ambiguity(estimate_second_moment(all_samples, current.support), c, delta);
    const bool ok = is_subset(candidate, current);
    if (accepted != nullptr) {
        *accepted = ok;
    }
    return ok ? candidate : current;
}

std::vector<Vector> read_samples_csv(std::istream& in) {
    std::vector<Vector> out;
    std::string line;
    int width = -1;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
                if (cell.find_first_not_of(" \t\r", pos) != std::string::npos) {
                    numeric = false;
                }
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            require(out.empty() && width < 0, ErrorCode::IoError,
                    "non-numeric sample row at line " + std::to_string(lineno));
            width = 0;  // header consumed
            continue;
        }
        if (width <= 0) {
            width = static_cast<int>(row.size());
        }
        require(static_cast<int>(row.size()) == width, ErrorCode::DimensionMismatch,
                "sample row at line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                    " entries, expected " + std::to_string(width));
        out.push_back(Eigen::Map<Vector>(row.data(), static_cast<Eigen::Index>(row.size())));
    }
    return out;
}

void write_ambiguity_snapshot(std::ostream& os, const MomentAmbiguity& amb) {
    nlohmann::json j;
    std::vector<double> c;
    for (Eigen::Index i = 0; i < amb.c_hat.rows(); ++i) {
        for (Eigen::Index k = 0; k < amb.c_hat.cols(); ++k) {
            c.push_back(amb.c_hat(i, k));
        }
    }
    j["n_w"] = amb.n_w();
    j["C_hat"] = c;
    j["beta"] = amb.beta;
    j["r"] = amb.support.r;
    j["c"] = amb.c;
    j["M"] = amb.m;
    j["delta"] = amb.delta;
    os << j.dump(2) << "\n";
}

MomentAmbiguity read_ambiguity_snapshot(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
        MomentAmbiguity amb;
        amb.support.n_w = j.at("n_w").get<int>();
        amb.support.r = j.at("r").get<double>();
        amb.support.validate();
        const auto c = j.at("C_hat").get<std::vector<double>>();
        const int d = amb.support.n_w + 1;
        require(static_cast<int>(c.size()) == d * d, ErrorCode::DimensionMismatch, "snapshot C_hat has wrong size");
        amb.c_hat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(c.data(), d, d);
        amb.beta = j.at("beta").get<double>();
        amb.c = j.at("c").get<double>();
        amb.m = j.at("M").get<long>();
        amb.delta = j.at("delta").get<double>();
        return amb;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::IoError, std::string("ambiguity snapshot: ") + e.what());
    }
}

}  // namespace drmpc
