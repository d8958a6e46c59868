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

// Exercises the shared library through its C interface only.

#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "drmpc/drmpc.h"

TEST_CASE("status names and errors") {
    CHECK(std::string(drmpc_status_name(DRMPC_OK)) == "Ok");
    CHECK(std::string(drmpc_status_name(DRMPC_CONFIG_ERROR)) == "ConfigError");
    double beta = 0.0;
    CHECK(drmpc_hoeffding_radius(10, 2, 0.15, 0.25, 0.05, &beta) == DRMPC_OK);
    CHECK(beta == doctest::Approx(0.02657646565445328).epsilon(1e-12));
    CHECK(drmpc_hoeffding_radius(10, 2, 0.15, 0.25, 1.5, &beta) == DRMPC_INVALID_CONFIDENCE);
    CHECK(std::string(drmpc_last_error()).find("delta") != std::string::npos);
    CHECK(drmpc_hoeffding_radius(10, 2, 0.15, 0.25, 0.05, nullptr) == DRMPC_INVALID_ARGUMENT);
}

TEST_CASE("experiment lifecycle") {
    const char* sets[] = {"run.M=10", "run.T=3", "run.repetitions=2"};
    drmpc_experiment* exp = nullptr;
    REQUIRE(drmpc_experiment_load("offline2d", sets, 3, &exp) == DRMPC_OK);
    drmpc_experiment_info info{};
    REQUIRE(drmpc_experiment_info_get(exp, &info) == DRMPC_OK);
    CHECK(info.mode == DRMPC_MODE_OFFLINE);
    CHECK(info.samples == 10);
    CHECK(info.n_x == 2);
    CHECK(info.horizon == 8);

    char* text = nullptr;
    REQUIRE(drmpc_experiment_to_json(exp, &text) == DRMPC_OK);
    CHECK(std::string(text).find("\"offline2d\"") != std::string::npos);
    drmpc_string_free(text);

    drmpc_result* res = nullptr;
    REQUIRE(drmpc_experiment_run(exp, 1, &res) == DRMPC_OK);
    CHECK(drmpc_result_runs(res) == 2);
    drmpc_summary sum{};
    CHECK(drmpc_result_summary(res, &sum) == DRMPC_OK);
    CHECK(sum.feasible_runs == 2);
    drmpc_run_info ri{};
    CHECK(drmpc_result_run_info(res, 1, &ri) == DRMPC_OK);
    CHECK(ri.steps == 3);
    CHECK(ri.infeasible == 0);
    drmpc_step st{};
    CHECK(drmpc_result_step(res, 0, 2, &st) == DRMPC_OK);
    CHECK(st.feasible == 1);
    CHECK(drmpc_result_step(res, 0, 3, &st) == DRMPC_INVALID_ARGUMENT);
    CHECK(drmpc_result_run_info(res, 5, &ri) == DRMPC_INVALID_ARGUMENT);
    CHECK(std::string(drmpc_result_failure(res, 0)).empty());

    const std::string path = "capi_traj.csv";
    CHECK(drmpc_result_write_trajectory(res, 0, path.c_str()) == DRMPC_OK);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("t,x0,x1", 0) == 0);
    std::remove(path.c_str());
    CHECK(drmpc_result_write_summary(res, "/nonexistent/dir/s.csv", 0) == DRMPC_IO_ERROR);

    drmpc_result_free(res);
    drmpc_experiment_free(exp);
}

TEST_CASE("malformed configs") {
    const char* bad[] = {"costs.Q=[[1,0],[0,-1]]"};
    drmpc_experiment* exp = nullptr;
    CHECK(drmpc_experiment_load("offline2d", bad, 1, &exp) == DRMPC_CONFIG_ERROR);
    CHECK(exp == nullptr);
    CHECK(std::string(drmpc_last_error()).find("/costs/Q") != std::string::npos);
    CHECK(drmpc_experiment_load(nullptr, nullptr, 0, &exp) == DRMPC_INVALID_ARGUMENT);
}

TEST_CASE("validation reports") {
    drmpc_report* rep = nullptr;
    REQUIRE(drmpc_validate("dynamics", 1, &rep) == DRMPC_OK);
    CHECK(drmpc_report_checks(rep) == 1);
    drmpc_check c{};
    CHECK(drmpc_report_check(rep, 0, &c) == DRMPC_OK);
    CHECK(c.passed == 1);
    CHECK(c.margin <= 1e-10);
    CHECK(drmpc_report_passed(rep) == 1);
    drmpc_report_free(rep);
    CHECK(drmpc_validate("nope", 1, &rep) == DRMPC_INVALID_ARGUMENT);
}
