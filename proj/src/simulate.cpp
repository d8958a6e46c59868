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

#include "drmpc/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "drmpc/error.hpp"

namespace drmpc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double stage_cost(const ControllerConfig& c, const Vector& x, const Vector& u) {
    return x.dot(c.q * x) + u.dot(c.r * u);
}

void write_vector(std::ostream& os, const Vector& v, int n) {
    for (int i = 0; i < n; ++i) {
        os << ',' << (i < v.size() ? v(i) : kNaN);
    }
}

}  // namespace

void DisturbanceModel::validate() const {
    support.validate();
    const int n = support.n_w;
    require(mean.size() == n, ErrorCode::DimensionMismatch, "disturbance mean must have n_w entries");
    require(covariance.rows() == n && covariance.cols() == n, ErrorCode::DimensionMismatch,
            "disturbance covariance must be n_w x n_w");
    require_psd(covariance, "disturbance covariance");
    require(mean.norm() <= support.r, ErrorCode::InvalidArgument, "disturbance mean lies outside the support");
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffu), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

std::vector<Vector> sample_truncated_gaussian(const DisturbanceModel& model, long count, Rng& rng) {
    model.validate();
    require(count >= 0, ErrorCode::InvalidArgument, "sample count must be nonnegative");
    const int n = model.support.n_w;
    const Matrix root = psd_sqrt(model.covariance, "disturbance covariance");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vector> out;
    out.reserve(static_cast<size_t>(count));
    long trials = 0;
    Vector z(n);
    while (static_cast<long>(out.size()) < count) {
        for (int i = 0; i < n; ++i) {
            z(i) = normal(rng);
        }
        Vector w = model.mean + root * z;
        ++trials;
        if (w.norm() <= model.support.r) {
            out.push_back(std::move(w));
        } else if (trials >= 10000 && static_cast<double>(out.size()) < 1e-4 * static_cast<double>(trials)) {
            fail(ErrorCode::RejectionStall, "truncated Gaussian acceptance below 1e-4 after " +
                                                std::to_string(trials) + " draws");
        }
    }
    return out;
}

Vector sample_sphere(const SupportBall& support, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(support.n_w);
    double norm = 0.0;
    while (norm < 1e-12) {
        for (int i = 0; i < support.n_w; ++i) {
            v(i) = normal(rng);
        }
        norm = v.norm();
    }
    return v * (support.r / norm);
}

const char* run_mode_name(RunMode mode) noexcept {
    switch (mode) {
        case RunMode::Offline:
            return "offline";
        case RunMode::Online:
            return "online";
        case RunMode::Robust:
            return "robust";
    }
    return "unknown";
}

RunMode parse_run_mode(const std::string& name) {
    if (name == "offline") {
        return RunMode::Offline;
    }
    if (name == "online") {
        return RunMode::Online;
    }
    if (name == "robust") {
        return RunMode::Robust;
    }
    fail(ErrorCode::ConfigError, "unknown run mode '" + name + "' (expected offline, online or robust)");
}

void RunConfig::validate() const {
    controller.validate(system);
    disturbance.validate();
    require(disturbance.support.n_w == system.n_w(), ErrorCode::DimensionMismatch,
            "disturbance dimension differs from E columns");
    require(std::abs(disturbance.support.r - controller.support.r) <= 1e-12 * (1.0 + controller.support.r),
            ErrorCode::ConfigError, "disturbance and controller support radii differ");
    require(steps >= 1, ErrorCode::InvalidArgument, "run length T must be >= 1");
    require(repetitions >= 1, ErrorCode::InvalidArgument, "repetitions must be >= 1");
    require(mode == RunMode::Robust || samples >= 1, ErrorCode::InvalidSampleCount, "sample count M must be >= 1");
    require(boundary_probability >= 0.0 && boundary_probability <= 1.0, ErrorCode::InvalidArgument,
            "boundary probability must lie in [0,1]");
    require(x0.size() == system.n_x(), ErrorCode::DimensionMismatch, "x0 must have n_x entries");
}

RunResult run_closed_loop(const RunConfig& cfg, int repetition) {
    cfg.validate();
    RunResult out;
    out.seed = cfg.seed + static_cast<std::uint64_t>(repetition);
    Rng rng_w = make_rng(out.seed, 1);
    Rng rng_data = make_rng(out.seed, 2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const ControllerConfig& cc = cfg.controller;

    std::vector<Vector> data;
    AmbiguityKind amb = cc.support;
    if (cfg.mode != RunMode::Robust) {
        data = sample_truncated_gaussian(cfg.disturbance, cfg.samples, rng_data);
        MomentAmbiguity m = build_ambiguity(estimate_second_moment(data, cc.support), cc.c, cc.delta);
        out.ambiguities.push_back(m);
        amb = m;
    }

    Vector x = cfg.x0;
    for (int t = 0; t < cfg.steps; ++t) {
        StepRecord rec;
        rec.t = t;
        rec.x = x;
        const auto* m = std::get_if<MomentAmbiguity>(&amb);
        rec.beta = m != nullptr ? m->beta : kNaN;
        const ControllerProgram cp = assemble(cc, cfg.system, x, amb);
        const ControllerSolution sol = solve_controller(cp, cfg.solver);
        rec.status = sol.raw.status;
        if (!sol.raw.optimal()) {
            rec.feasible = false;
            rec.objective = kNaN;
            rec.u = Vector::Constant(cfg.system.b.cols(), kNaN);
            rec.w = Vector::Constant(cfg.system.e.cols(), kNaN);
            out.steps.push_back(rec);
            out.infeasible = true;
            out.infeasible_step = t;
            out.failure = "step " + std::to_string(t) + ": " + sol.raw.message;
            std::ostringstream dump;
            cp.program.dump(dump);
            out.snapshot = dump.str();
            break;
        }
        rec.objective = sol.raw.objective;
        rec.u = sol.u0;
        Vector w = sample_truncated_gaussian(cfg.disturbance, 1, rng_w).front();
        if (cfg.boundary_probability > 0.0 && unif(rng_w) < cfg.boundary_probability) {
            w = sample_sphere(cfg.disturbance.support, rng_w);
        }
        rec.w = w;
        rec.stage_cost = stage_cost(cc, x, rec.u);
        out.cumulative_cost += rec.stage_cost;
        x = simulate_step(cfg.system, x, rec.u, w);
        if (cfg.mode == RunMode::Online) {
            data.push_back(w);
            bool accepted = false;
            MomentAmbiguity next = update_ambiguity(std::get<MomentAmbiguity>(amb), data, cc.c, cc.delta, &accepted);
            rec.ambiguity_accepted = accepted;
            out.ambiguities.push_back(next);
            amb = std::move(next);
        }
        out.steps.push_back(std::move(rec));
    }
    out.x_final = x;
    return out;
}

double median(std::vector<double> v) {
    require(!v.empty(), ErrorCode::EmptySampleSet, "median of an empty list");
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MonteCarloResult monte_carlo(const RunConfig& cfg, int threads) {
    cfg.validate();
    const int reps = cfg.repetitions;
    MonteCarloResult mc;
    mc.runs.resize(static_cast<size_t>(reps));
    int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, reps);
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (int i = next++; i < reps; i = next++) {
            try {
                mc.runs[static_cast<size_t>(i)] = run_closed_loop(cfg, i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < workers; ++k) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    std::vector<double> costs;
    for (const auto& r : mc.runs) {
        if (r.infeasible) {
            ++mc.infeasible_runs;
        } else {
            ++mc.feasible_runs;
        }
        costs.push_back(r.cumulative_cost);
    }
    mc.min_cost = *std::min_element(costs.begin(), costs.end());
    mc.max_cost = *std::max_element(costs.begin(), costs.end());
    mc.median_cost = median(costs);
    return mc;
}

AuditReport audit_feasibility_assumptions(const RunConfig& cfg, int points, std::uint64_t seed) {
    cfg.validate();
    AuditReport rep;
    const ControllerConfig& cc = cfg.controller;
    const QuadraticConstraint& psi = cc.terminal;
    const int nx = cfg.system.n_x();
    Eigen::LLT<Matrix> llt(psi.g_mat);
    if (llt.info() != Eigen::Success || min_eigenvalue(psi.g_mat) <= 1e-12) {
        rep.message = "terminal set is not a bounded ellipsoid (G_f is singular); audit not applicable";
        return rep;
    }
    const Vector center = -llt.solve(psi.g_vec);
    const double rho2 = psi.g_vec.dot(llt.solve(psi.g_vec)) - psi.gamma;
    if (rho2 <= 0.0) {
        rep.message = "terminal set is empty";
        return rep;
    }
    const double rho = std::sqrt(rho2);
    const Matrix l = llt.matrixL();
    Rng rng = make_rng(seed, 7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const SupportBall unit{nx, 1.0};
    rep.worst_stage = -std::numeric_limits<double>::infinity();
    rep.worst_terminal = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < points; ++k) {
        // Half the points on the boundary of each set, half inside.
        Vector dir = sample_sphere(unit, rng);
        if (k % 2 == 1) {
            dir *= std::pow(unif(rng), 1.0 / nx);
        }
        const Vector x = center + rho * l.transpose().triangularView<Eigen::Upper>().solve(dir);
        Vector w = sample_sphere(cfg.disturbance.support, rng);
        if ((k / 2) % 2 == 1) {
            w *= std::pow(unif(rng), 1.0 / cfg.system.n_w());
        }
        const Vector u = cc.k_f * x + cc.k_f_offset;
        const Vector xn = simulate_step(cfg.system, x, u, w);
        rep.worst_stage = std::max(rep.worst_stage, cc.stage.evaluate(xn));
        rep.worst_terminal = std::max(rep.worst_terminal, psi.evaluate(xn));
        ++rep.points;
    }
    rep.passed = rep.worst_stage <= 1e-6 && rep.worst_terminal <= 1e-6;
    std::ostringstream msg;
    msg << "sampled " << rep.points << " points: max phi(x+) = " << rep.worst_stage
        << ", max psi(x+) = " << rep.worst_terminal;
    rep.message = msg.str();
    return rep;
}

void write_trajectory_csv(std::ostream& os, const RunResult& run) {
    const int nx = run.x_final.size() > 0 ? static_cast<int>(run.x_final.size())
                                          : (run.steps.empty() ? 0 : static_cast<int>(run.steps.front().x.size()));
    int nu = 0;
    int nw = 0;
    for (const auto& s : run.steps) {
        nu = std::max(nu, static_cast<int>(s.u.size()));
        nw = std::max(nw, static_cast<int>(s.w.size()));
    }
    os << "t";
    for (int i = 0; i < nx; ++i) {
        os << ",x" << i;
    }
    for (int i = 0; i < nu; ++i) {
        os << ",u" << i;
    }
    for (int i = 0; i < nw; ++i) {
        os << ",w" << i;
    }
    os << ",objective,beta,feasible\n";
    os.precision(12);
    for (const auto& s : run.steps) {
        os << s.t;
        write_vector(os, s.x, nx);
        write_vector(os, s.u, nu);
        write_vector(os, s.w, nw);
        os << ',' << s.objective << ',' << s.beta << ',' << (s.feasible ? 1 : 0) << '\n';
    }
}

void write_summary_header(std::ostream& os) { os << "M,rep,seed,cumulative_cost,feasible\n"; }

void write_summary_rows(std::ostream& os, long samples, const MonteCarloResult& mc) {
    os.precision(12);
    for (size_t i = 0; i < mc.runs.size(); ++i) {
        const auto& r = mc.runs[i];
        os << samples << ',' << i << ',' << r.seed << ',' << r.cumulative_cost << ',' << (r.infeasible ? 0 : 1)
           << '\n';
    }
}

}  // namespace drmpc
