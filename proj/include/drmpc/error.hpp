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

#include <stdexcept>
#include <string>

namespace drmpc {

// Error categories shared by every module. The C API maps these one-to-one
// onto drmpc_status codes.
enum class ErrorCode {
    InvalidArgument = 1,
    DimensionMismatch,
    NotPsd,
    EmptySampleSet,
    SampleOutsideSupport,
    InvalidConfidence,
    InvalidSampleCount,
    InvalidAlpha,
    CausalityViolation,
    SolverFailure,
    Unbounded,
    MissingVariable,
    RejectionStall,
    InfeasibleStep,
    ConfigError,
    IoError,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        throw Error(code, message);
    }
}

}  // namespace drmpc
