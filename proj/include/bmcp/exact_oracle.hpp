/*
   Copyright 2026 The bmcp Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

// Exact transient analysis of the process on the closed segment [0, n-1].
// State s is a bitmask, bit x set iff site x is infected; 0 is absorbing.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/SparseCore>

#include "bmcp/lattice.hpp"

namespace bmcp {

inline constexpr int kOracleMaxSites = 14;

struct SegmentModel {
    int n = 0;
    Params params;
    /// Row-major generator: Q(s, s') is the rate s -> s', rows sum to 0.
    Eigen::SparseMatrix<double, Eigen::RowMajor> generator;
    std::vector<double> exit_rate;

    std::uint32_t states() const { return 1U << n; }
};

/// Throws TooLarge for n > kOracleMaxSites, std::invalid_argument for n < 1.
SegmentModel build_generator(int n, const Params& params);

/// Exit rate of `state`, summed as (recoveries) + (open edges) lambda_i + (boosts) epsilon.
double exit_rate(int n, const Params& params, std::uint32_t state);

/// P(tau <= t) for every initial state (index = bitmask). Uniformization with
/// Poisson truncation mass <= tol.
std::vector<double> extinction_probability_by(const SegmentModel& model, double t, double tol = 1e-10);

/// Law at time t started from `initial` (forward uniformization).
std::vector<double> distribution_at(const SegmentModel& model, const std::vector<double>& initial, double t,
                                    double tol = 1e-10);

/// E[tau] for every state (0 for the empty state). Throws SolveFailure when the
/// factorization fails or the residual is not small.
std::vector<double> expected_extinction_time(const SegmentModel& model);

/// Bits as a string, character x for site x ("100" = {0} on 3 sites).
std::string state_bits(int n, std::uint32_t state);

/// CSV columns: initial_state_bits,t,extinction_prob.
void write_oracle_csv(std::ostream& os, const SegmentModel& model, const std::vector<double>& times);

}  // namespace bmcp
