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

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "drmpc/conic.hpp"
#include "drmpc/linalg.hpp"

namespace drmpc {

/// Euclidean ball {w : |w|_2 <= r} in R^n_w.
struct SupportBall {
    int n_w = 1;
    double r = 1.0;

    void validate() const;
};

/// Average of (w,1)(w,1)' over M samples.
struct EmpiricalSecondMoment {
    Matrix c_hat;
    long m = 0;
    SupportBall support;
};

/// Moment ambiguity set {mu : |R_w (C_hat - E[ww']) R_w|_2 <= beta} with
/// R_w = diag(I, c r).
struct MomentAmbiguity {
    Matrix c_hat;
    double beta = 0.0;
    double c = 0.25;
    double delta = 0.05;
    long m = 0;
    SupportBall support;

    int n_w() const { return support.n_w; }
    Matrix r_w() const;
    /// R_w C_hat R_w, the center in scaled coordinates.
    Matrix scaled_center() const;
};

/// Either a moment ambiguity or the set of all measures on the support.
using AmbiguityKind = std::variant<MomentAmbiguity, SupportBall>;

const SupportBall& support_of(const AmbiguityKind& amb);

EmpiricalSecondMoment estimate_second_moment(const std::vector<Vector>& samples, const SupportBall& support);

/// Concentration radius for the moment set at confidence 1 - delta.
double hoeffding_radius(long m, int n_w, double r, double c, double delta);

MomentAmbiguity build_ambiguity(const EmpiricalSecondMoment& stat, double c, double delta);

/// Spectral-norm membership test of a second-moment matrix (tolerance 1e-9).
bool contains_measure(const MomentAmbiguity& amb, const Matrix& moment);

/// Cheap sufficient condition |R(C2 - C1)R|_2 + beta2 <= beta1.
bool nested_by_norm(const MomentAmbiguity& candidate, const MomentAmbiguity& current);

struct SubsetCertificate {
    bool nested = false;
    bool fast_path = false;
    double margin = 0.0;   // optimal t of the LMI test (>= -tol means nested)
    double a = 0.0;        // multiplier on the candidate's quadratic inequality
    double b = 0.0;        // multiplier on the symmetry inequality
};

/// S-procedure LMI test of candidate within current. Skips the norm fast path.
SubsetCertificate subset_lmi(const MomentAmbiguity& candidate, const MomentAmbiguity& current,
                             const SolverOptions& options = {});

bool is_subset(const MomentAmbiguity& candidate, const MomentAmbiguity& current,
               const SolverOptions& options = {});

/// Candidate from all samples so far if nested in `current`, otherwise
/// `current` unchanged.
MomentAmbiguity update_ambiguity(const MomentAmbiguity& current, const std::vector<Vector>& all_samples, double c,
                                 double delta, bool* accepted = nullptr);

/// One disturbance vector per row; a non-numeric first row is taken as header.
std::vector<Vector> read_samples_csv(std::istream& in);

/// Snapshot: C_hat row-major, beta, r, c, M, delta.
void write_ambiguity_snapshot(std::ostream& os, const MomentAmbiguity& amb);
MomentAmbiguity read_ambiguity_snapshot(std::istream& in);

}  // namespace drmpc
