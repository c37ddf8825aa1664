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

// Parallel execution of independent trials. Trial i always uses
// derive_trial_seed(master, i), so results do not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "bmcp/estimators.hpp"

namespace bmcp {

/// Worker count: hardware concurrency, capped by SIM_THREADS when set.
std::size_t default_thread_count();

/// Calls body(i) for i in [0, n) on `threads` workers pulling from a shared
/// counter. The first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

struct TrialSpec {
    Params params;
    InitialCondition init = SingleOrigin{};
    double horizon = 100.0;  // t_max, or the post-burn-in span for StationaryApprox
    SimulatorOptions options;
    /// > 0: run on the closed segment [0, segment_length - 1] instead of an
    /// open window; `init` must then be a FiniteSet inside the segment.
    Site segment_length = 0;
};

Trajectory run_one(const TrialSpec& spec, std::uint64_t seed);

/// Trials [first, first + count) of the batch with master seed `master`.
std::vector<TrialSummary> run_trials(const TrialSpec& spec, std::uint64_t count, std::uint64_t master,
                                     bool keep_samples = true, std::size_t threads = 0, std::uint64_t first = 0);

}  // namespace bmcp
