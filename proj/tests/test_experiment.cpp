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

#include "doctest.h"

#include <string>

#include "drmpc/error.hpp"
#include "drmpc/experiment.hpp"

using namespace drmpc;
using nlohmann::json;

namespace {

std::string config_error_of(const json& doc) {
    try {
        parse_experiment(doc);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("bundled configs encode the experiments") {
    const Experiment a = load_experiment("offline2d");
    CHECK(a.name == "offline2d");
    CHECK(a.run.controller.horizon == 8);
    CHECK(a.run.steps == 15);
    CHECK(a.run.x0(0) == 1.75);
    // Q_f and K_f come from the Riccati equation.
    CHECK(a.run.controller.q_f(0, 0) == doctest::Approx(5.082894647726).epsilon(1e-9));
    CHECK(a.run.controller.q_f(1, 1) == doctest::Approx(30.275772770711).epsilon(1e-9));
    CHECK(a.run.controller.k_f(0, 1) == doctest::Approx(-0.155311136225).epsilon(1e-9));
    CHECK((a.run.controller.terminal.g_mat - a.run.controller.q_f).norm() == 0.0);

    const Experiment b = load_experiment("online1d");
    CHECK(b.run.mode == RunMode::Online);
    CHECK(b.run.samples == 10);
    CHECK(b.run.controller.k_f(0, 0) == -0.9);
    CHECK(b.run.controller.k_f_offset(0) == 2.375);
    // psi(x) = (x - 2.375)^2 - 1.375^2.
    for (double x : {0.5, 1.0, 2.375, 3.75, 4.0}) {
        CHECK(b.run.controller.terminal.evaluate(Vector::Constant(1, x)) ==
              doctest::Approx((x - 2.375) * (x - 2.375) - 1.375 * 1.375));
    }
    CHECK(b.run.controller.stage.evaluate(Vector::Constant(1, 0.25)) == doctest::Approx(0.75));
}

TEST_CASE("canonical round trip") {
    for (const char* name : {"offline2d", "online1d"}) {
        const json first = serialize_experiment(load_experiment(name));
        const json second = serialize_experiment(parse_experiment(first));
        CHECK(first == second);
        CHECK(first.dump() == second.dump());
    }
}

TEST_CASE("overrides") {
    json doc = read_experiment_json("offline2d");
    apply_override(doc, "run.M=10");
    apply_override(doc, "run.repetitions=1");
    apply_override(doc, "disturbance.seed=7");
    apply_override(doc, "risk.slemma=ball-count");
    const Experiment e = parse_experiment(doc);
    CHECK(e.run.samples == 10);
    CHECK(e.run.repetitions == 1);
    CHECK(e.run.seed == 7);
    CHECK(e.run.controller.radius_rule == SLemmaRadius::BallCount);
    CHECK_THROWS_AS(apply_override(doc, "noequals"), Error);
    CHECK_THROWS_AS(apply_override(doc, "=3"), Error);
    CHECK_THROWS_AS(apply_override(doc, "run.M.x=3"), Error);

    // Overrides cannot bypass validation.
    CHECK_THROWS_AS(load_experiment("offline2d", {"risk.alpha=2"}), Error);
}

TEST_CASE("schema errors name the field") {
    const json base = read_experiment_json("offline2d");
    json doc = base;
    doc["costs"]["Q"] = json::parse("[[1,0],[0,-1]]");
    CHECK(config_error_of(doc).find("/costs/Q") != std::string::npos);

    doc = base;
    doc["system"]["B"] = json::parse("[[1],[2],[3]]");
    CHECK(config_error_of(doc).find("/system/B") != std::string::npos);

    doc = base;
    doc["run"]["x0"] = json::parse("[1,2,3]");
    CHECK(config_error_of(doc).find("/run/x0") != std::string::npos);

    doc = base;
    doc["costs"]["R"] = json::parse("[[1, \"a\"]]");
    CHECK(config_error_of(doc).find("/costs/R/0/1") != std::string::npos);

    doc = base;
    doc["risk"].erase("alpha");
    CHECK(config_error_of(doc).find("/risk/alpha") != std::string::npos);

    doc = base;
    doc["risk"]["bogus"] = 1;
    CHECK(config_error_of(doc).find("/risk/bogus") != std::string::npos);

    doc = base;
    doc["run"]["mode"] = "batch";
    CHECK(config_error_of(doc).find("/run/mode") != std::string::npos);

    doc = base;
    doc["disturbance"]["mean"] = json::parse("[1, 0]");
    CHECK(config_error_of(doc).find("/disturbance/mean") != std::string::npos);
}

TEST_CASE("files") {
    CHECK(resolve_config_path("offline2d").find("offline2d.json") != std::string::npos);
    CHECK(resolve_config_path("./x.json") == "./x.json");
    try {
        load_experiment("/nonexistent/cfg.json");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
    }
}
