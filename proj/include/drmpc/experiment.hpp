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

#include <string>
#include <vector>

#include "drmpc/simulate.hpp"
#include "json.hpp"

namespace drmpc {

/// Experiment file: JSON document with sections system, costs, constraints,
/// risk, horizon, support, disturbance and run. Matrices are arrays of rows.
/// "Q_f": "dare", "K_f": "lqr" and "G_f": "Q_f" are resolved at parse time.
struct Experiment {
    std::string name;
    RunConfig run;
};

/// Applies one "dotted.key=value" override. The value is read as JSON when it
/// parses, otherwise as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Parses and validates. Errors are ConfigError naming the JSON pointer of the
/// offending field.
Experiment parse_experiment(const nlohmann::json& doc);

/// Canonical form: keywords resolved, every field explicit.
nlohmann::json serialize_experiment(const Experiment& exp);

/// A bare name (no '/' and no ".json") resolves to the bundled config of
/// that name.
std::string resolve_config_path(const std::string& name_or_path);

nlohmann::json read_experiment_json(const std::string& name_or_path);

Experiment load_experiment(const std::string& name_or_path, const std::vector<std::string>& overrides = {});

}  // namespace drmpc
