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

#include "drmpc/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <cstdlib>
#include <initializer_list>
#include <optional>
#include <set>

#include "drmpc/error.hpp"

namespace drmpc {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
    fail(ErrorCode::ConfigError, "config " + path + ": " + what);
}

const json& section(const json& doc, const std::string& key, const std::string& path) {
    if (!doc.is_object()) {
        config_error(path.empty() ? "/" : path, "expected an object");
    }
    auto it = doc.find(key);
    if (it == doc.end()) {
        config_error(path + "/" + key, "missing field");
    }
    return *it;
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) {
        config_error(path.empty() ? "/" : path, "expected an object");
    }
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (allowed.count(it.key()) == 0) {
            config_error(path + "/" + it.key(), "unknown field");
        }
    }
}

double read_number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        config_error(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        config_error(path, "expected a finite number");
    }
    return v;
}

long read_integer(const json& j, const std::string& path) {
    const double v = read_number(j, path);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) {
        config_error(path, "expected an integer");
    }
    return static_cast<long>(v);
}

Matrix read_matrix(const json& j, const std::string& path) {
    if (j.is_number()) {
        return Matrix::Constant(1, 1, read_number(j, path));
    }
    if (!j.is_array() || j.empty()) {
        config_error(path, "expected a non-empty array of rows");
    }
    const size_t rows = j.size();
    size_t cols = 0;
    for (size_t i = 0; i < rows; ++i) {
        const std::string rp = path + "/" + std::to_string(i);
        if (!j[i].is_array() || j[i].empty()) {
            config_error(rp, "expected a non-empty row");
        }
        if (i == 0) {
            cols = j[i].size();
        } else if (j[i].size() != cols) {
            config_error(rp, "row has " + std::to_string(j[i].size()) + " entries, expected " + std::to_string(cols));
        }
    }
    Matrix m(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        for (size_t k = 0; k < cols; ++k) {
            m(i, k) = read_number(j[i][k], path + "/" + std::to_string(i) + "/" + std::to_string(k));
        }
    }
    return m;
}

Vector read_vector(const json& j, const std::string& path) {
    if (j.is_number()) {
        return Vector::Constant(1, read_number(j, path));
    }
    if (!j.is_array() || j.empty()) {
        config_error(path, "expected a non-empty array");
    }
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        v(i) = read_number(j[i], path + "/" + std::to_string(i));
    }
    return v;
}

void check_shape(const Matrix& m, long rows, long cols, const std::string& path) {
    if (m.rows() != rows || m.cols() != cols) {
        config_error(path, "expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                               std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

void check_size(const Vector& v, long n, const std::string& path) {
    if (v.size() != n) {
        config_error(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
    }
}

void check_psd(const Matrix& m, const std::string& path) {
    try {
        require_psd(m, path);
    } catch (const Error&) {
        config_error(path, "matrix must be symmetric positive semidefinite");
    }
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < m.cols(); ++k) {
            row.push_back(m(i, k));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

bool is_keyword(const json& j, const char* word) { return j.is_string() && j.get<std::string>() == word; }

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        fail(ErrorCode::ConfigError, "override '" + assignment + "' is not of the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    json* node = &doc;
    size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            fail(ErrorCode::ConfigError, "override key '" + key + "' has an empty component");
        }
        if (!node->is_object()) {
            fail(ErrorCode::ConfigError, "override key '" + key + "' descends into a non-object");
        }
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) {
            *node = json::object();
        }
        start = dot + 1;
    }
}

Experiment parse_experiment(const json& doc) {
    only_keys(doc, "", {"name", "system", "costs", "constraints", "risk", "horizon", "support", "disturbance", "run",
                        "solver"});
    Experiment exp;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) {
            config_error("/name", "expected a string");
        }
        exp.name = doc["name"].get<std::string>();
    }
    RunConfig& run = exp.run;
    ControllerConfig& cc = run.controller;

    const json& sys = section(doc, "system", "");
    only_keys(sys, "/system", {"A", "B", "E"});
    run.system.a = read_matrix(section(sys, "A", "/system"), "/system/A");
    const long nx = run.system.a.rows();
    check_shape(run.system.a, nx, nx, "/system/A");
    run.system.b = read_matrix(section(sys, "B", "/system"), "/system/B");
    if (run.system.b.rows() != nx) {
        config_error("/system/B", "expected " + std::to_string(nx) + " rows");
    }
    run.system.e = read_matrix(section(sys, "E", "/system"), "/system/E");
    if (run.system.e.rows() != nx) {
        config_error("/system/E", "expected " + std::to_string(nx) + " rows");
    }
    const long nu = run.system.b.cols();
    const long nw = run.system.e.cols();

    const json& costs = section(doc, "costs", "");
    only_keys(costs, "/costs", {"Q", "R", "Q_f", "K_f", "k_f"});
    cc.q = read_matrix(section(costs, "Q", "/costs"), "/costs/Q");
    check_shape(cc.q, nx, nx, "/costs/Q");
    check_psd(cc.q, "/costs/Q");
    cc.r = read_matrix(section(costs, "R", "/costs"), "/costs/R");
    check_shape(cc.r, nu, nu, "/costs/R");
    check_psd(cc.r, "/costs/R");
    const json& qf = section(costs, "Q_f", "/costs");
    const json& kf = section(costs, "K_f", "/costs");
    std::optional<LqrSolution> lqr;
    if (is_keyword(qf, "dare") || is_keyword(kf, "lqr")) {
        lqr = solve_dare(run.system.a, run.system.b, cc.q, cc.r);
    }
    if (is_keyword(qf, "dare")) {
        cc.q_f = lqr->cost;
    } else {
        cc.q_f = read_matrix(qf, "/costs/Q_f");
        check_shape(cc.q_f, nx, nx, "/costs/Q_f");
    }
    check_psd(cc.q_f, "/costs/Q_f");
    if (is_keyword(kf, "lqr")) {
        cc.k_f = lqr->gain;
    } else {
        cc.k_f = read_matrix(kf, "/costs/K_f");
        check_shape(cc.k_f, nu, nx, "/costs/K_f");
    }
    cc.k_f_offset = Vector::Zero(nu);
    if (costs.contains("k_f")) {
        cc.k_f_offset = read_vector(costs["k_f"], "/costs/k_f");
        check_size(cc.k_f_offset, nu, "/costs/k_f");
    }

    const json& cons = section(doc, "constraints", "");
    only_keys(cons, "/constraints", {"G", "g", "gamma", "G_f", "g_f", "gamma_f"});
    cc.stage.g_mat = read_matrix(section(cons, "G", "/constraints"), "/constraints/G");
    check_shape(cc.stage.g_mat, nx, nx, "/constraints/G");
    check_psd(cc.stage.g_mat, "/constraints/G");
    cc.stage.g_vec = read_vector(section(cons, "g", "/constraints"), "/constraints/g");
    check_size(cc.stage.g_vec, nx, "/constraints/g");
    cc.stage.gamma = read_number(section(cons, "gamma", "/constraints"), "/constraints/gamma");
    const json& gf = section(cons, "G_f", "/constraints");
    if (is_keyword(gf, "Q_f")) {
        cc.terminal.g_mat = cc.q_f;
    } else {
        cc.terminal.g_mat = read_matrix(gf, "/constraints/G_f");
        check_shape(cc.terminal.g_mat, nx, nx, "/constraints/G_f");
    }
    check_psd(cc.terminal.g_mat, "/constraints/G_f");
    cc.terminal.g_vec = read_vector(section(cons, "g_f", "/constraints"), "/constraints/g_f");
    check_size(cc.terminal.g_vec, nx, "/constraints/g_f");
    cc.terminal.gamma = read_number(section(cons, "gamma_f", "/constraints"), "/constraints/gamma_f");

    const json& risk = section(doc, "risk", "");
    only_keys(risk, "/risk", {"alpha", "delta", "c", "slemma"});
    cc.alpha = read_number(section(risk, "alpha", "/risk"), "/risk/alpha");
    if (!(cc.alpha > 0.0 && cc.alpha < 1.0)) {
        config_error("/risk/alpha", "must lie in (0,1)");
    }
    cc.delta = read_number(section(risk, "delta", "/risk"), "/risk/delta");
    if (!(cc.delta > 0.0 && cc.delta < 1.0)) {
        config_error("/risk/delta", "must lie in (0,1)");
    }
    cc.c = read_number(section(risk, "c", "/risk"), "/risk/c");
    if (!(cc.c > 0.0)) {
        config_error("/risk/c", "must be positive");
    }
    if (risk.contains("slemma")) {
        if (!risk["slemma"].is_string()) {
            config_error("/risk/slemma", "expected a string");
        }
        try {
            cc.radius_rule = parse_slemma_radius(risk["slemma"].get<std::string>());
        } catch (const Error& e) {
            config_error("/risk/slemma", e.what());
        }
    }

    cc.horizon = static_cast<int>(read_integer(section(doc, "horizon", ""), "/horizon"));
    if (cc.horizon < 1) {
        config_error("/horizon", "must be >= 1");
    }

    const json& sup = section(doc, "support", "");
    only_keys(sup, "/support", {"r"});
    cc.support.n_w = static_cast<int>(nw);
    cc.support.r = read_number(section(sup, "r", "/support"), "/support/r");
    if (!(cc.support.r > 0.0)) {
        config_error("/support/r", "must be positive");
    }

    const json& dist = section(doc, "disturbance", "");
    only_keys(dist, "/disturbance", {"mean", "covariance", "seed"});
    run.disturbance.support = cc.support;
    run.disturbance.mean = read_vector(section(dist, "mean", "/disturbance"), "/disturbance/mean");
    check_size(run.disturbance.mean, nw, "/disturbance/mean");
    if (run.disturbance.mean.norm() > cc.support.r) {
        config_error("/disturbance/mean", "lies outside the support ball");
    }
    run.disturbance.covariance = read_matrix(section(dist, "covariance", "/disturbance"), "/disturbance/covariance");
    check_shape(run.disturbance.covariance, nw, nw, "/disturbance/covariance");
    check_psd(run.disturbance.covariance, "/disturbance/covariance");
    const long seed = read_integer(section(dist, "seed", "/disturbance"), "/disturbance/seed");
    if (seed < 0) {
        config_error("/disturbance/seed", "must be nonnegative");
    }
    run.seed = static_cast<std::uint64_t>(seed);

    const json& rs = section(doc, "run", "");
    only_keys(rs, "/run", {"mode", "M", "T", "repetitions", "x0", "boundary_probability"});
    const json& mode = section(rs, "mode", "/run");
    if (!mode.is_string()) {
        config_error("/run/mode", "expected a string");
    }
    try {
        run.mode = parse_run_mode(mode.get<std::string>());
    } catch (const Error& e) {
        config_error("/run/mode", e.what());
    }
    if (run.mode != RunMode::Robust || rs.contains("M")) {
        run.samples = read_integer(section(rs, "M", "/run"), "/run/M");
        if (run.samples < 1) {
            config_error("/run/M", "must be >= 1");
        }
    }
    run.steps = static_cast<int>(read_integer(section(rs, "T", "/run"), "/run/T"));
    if (run.steps < 1) {
        config_error("/run/T", "must be >= 1");
    }
    run.repetitions = static_cast<int>(read_integer(section(rs, "repetitions", "/run"), "/run/repetitions"));
    if (run.repetitions < 1) {
        config_error("/run/repetitions", "must be >= 1");
    }
    run.x0 = read_vector(section(rs, "x0", "/run"), "/run/x0");
    check_size(run.x0, nx, "/run/x0");
    if (rs.contains("boundary_probability")) {
        run.boundary_probability = read_number(rs["boundary_probability"], "/run/boundary_probability");
        if (!(run.boundary_probability >= 0.0 && run.boundary_probability <= 1.0)) {
            config_error("/run/boundary_probability", "must lie in [0,1]");
        }
    }

    if (doc.contains("solver")) {
        const json& sol = doc["solver"];
        only_keys(sol, "/solver", {"tolerance", "max_iterations"});
        if (sol.contains("tolerance")) {
            run.solver.tolerance = read_number(sol["tolerance"], "/solver/tolerance");
            if (!(run.solver.tolerance > 0.0)) {
                config_error("/solver/tolerance", "must be positive");
            }
        }
        if (sol.contains("max_iterations")) {
            run.solver.max_iterations = static_cast<int>(read_integer(sol["max_iterations"], "/solver/max_iterations"));
            if (run.solver.max_iterations < 1) {
                config_error("/solver/max_iterations", "must be >= 1");
            }
        }
    }

    try {
        run.validate();
    } catch (const Error& e) {
        fail(ErrorCode::ConfigError, std::string("config: ") + e.what());
    }
    return exp;
}

json serialize_experiment(const Experiment& exp) {
    const RunConfig& run = exp.run;
    const ControllerConfig& cc = run.controller;
    json doc;
    doc["name"] = exp.name;
    doc["system"] = {{"A", matrix_json(run.system.a)}, {"B", matrix_json(run.system.b)}, {"E", matrix_json(run.system.e)}};
    doc["costs"] = {{"Q", matrix_json(cc.q)},
                    {"R", matrix_json(cc.r)},
                    {"Q_f", matrix_json(cc.q_f)},
                    {"K_f", matrix_json(cc.k_f)},
                    {"k_f", vector_json(cc.k_f_offset)}};
    doc["constraints"] = {{"G", matrix_json(cc.stage.g_mat)},       {"g", vector_json(cc.stage.g_vec)},
                          {"gamma", cc.stage.gamma},                 {"G_f", matrix_json(cc.terminal.g_mat)},
                          {"g_f", vector_json(cc.terminal.g_vec)},   {"gamma_f", cc.terminal.gamma}};
    doc["risk"] = {{"alpha", cc.alpha}, {"delta", cc.delta}, {"c", cc.c}, {"slemma", slemma_radius_name(cc.radius_rule)}};
    doc["horizon"] = cc.horizon;
    doc["support"] = {{"r", cc.support.r}};
    doc["disturbance"] = {{"mean", vector_json(run.disturbance.mean)},
                          {"covariance", matrix_json(run.disturbance.covariance)},
                          {"seed", run.seed}};
    doc["run"] = {{"mode", run_mode_name(run.mode)},
                  {"M", run.samples},
                  {"T", run.steps},
                  {"repetitions", run.repetitions},
                  {"x0", vector_json(run.x0)},
                  {"boundary_probability", run.boundary_probability}};
    doc["solver"] = {{"tolerance", run.solver.tolerance}, {"max_iterations", run.solver.max_iterations}};
    return doc;
}

std::string resolve_config_path(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    if (name_or_path.find('/') == std::string::npos && !fs::exists(name_or_path) &&
        (name_or_path.size() < 5 || name_or_path.substr(name_or_path.size() - 5) != ".json")) {
        const char* env = std::getenv("DRMPC_CONFIG_DIR");
        const std::string dir = env != nullptr && *env != '\0' ? env : DRMPC_CONFIG_DIR;
        return dir + "/" + name_or_path + ".json";
    }
    return name_or_path;
}

json read_experiment_json(const std::string& name_or_path) {
    const std::string path = resolve_config_path(name_or_path);
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::IoError, "cannot open config '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ConfigError, "config " + path + ": " + e.what());
    }
}

Experiment load_experiment(const std::string& name_or_path, const std::vector<std::string>& overrides) {
    json doc = read_experiment_json(name_or_path);
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    return parse_experiment(doc);
}

}  // namespace drmpc
