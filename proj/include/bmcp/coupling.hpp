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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bmcp/simulator.hpp"

namespace bmcp {

/// A copy of `parent` positioned at local time t: every ring at or before t
/// applied. Re-reads the clock field when the parent is already past t.
/// Throws HistoryUnavailable for t < 0.
Simulator position_at(const Simulator& parent, double t);

/// Right-edge-modified replica started from {0} at the parent's right edge.
///
/// The child reads the parent's clocks through translated_view(R, t), so a
/// child object at site x and local time s is the parent's object at x + R
/// and time t + s. When the parent is empty at t the offset is 0.
struct AuxiliaryProcess {
    std::string parent_ref;
    double spawn_time = 0.0;
    Site space_offset = 0;
    bool parent_empty = false;
    Simulator child;
    std::optional<double> alive_horizon;  // child extinction time once known
};

/// `child_horizon` sizes the child's window.
AuxiliaryProcess spawn_auxiliary(const Simulator& parent, double t, double child_horizon = 1000.0);

struct CouplingFailure {
    double time = 0.0;  // child-local
    std::string reason;
};

struct CouplingReport {
    std::uint64_t seed = 0;
    double spawn_time = 0.0;
    Site space_offset = 0;
    bool parent_empty = false;
    double horizon = 0.0;
    std::uint64_t checks = 0;
    std::vector<CouplingFailure> failures;
    std::optional<double> child_extinction_time;
    bool invalid = false;
    std::string invalid_reason;

    bool all_pass() const { return failures.empty(); }
};

/// Runs parent and child in lockstep over child-local [0, horizon] and checks
/// at every event time while the child lives: R(parent) = offset + R(child),
/// and the two agree on [offset + L(child), offset + R(child)].
CouplingReport verify_edge_identity(const Simulator& parent, const AuxiliaryProcess& aux, double horizon);

struct RenewalRecord {
    double T = 0.0;
    std::uint64_t I = 0;
    std::vector<double> attempt_durations;  // extinction times of the failed attempts
    double monitor_horizon = 0.0;
    bool exhausted = false;
};

/// Restart loop: spawn a child at T_i; if it survives `monitor_horizon` stop
/// with T = T_i, otherwise T_{i+1} = T_i + its extinction time. Throws
/// MonitorExhausted (the partial record in the message) once T_i exceeds `cap`.
RenewalRecord detect_renewal(const Simulator& parent, double monitor_horizon, double cap = 1e5);

struct DominationPoint {
    double t = 0.0;
    double p_spread = 0.0;
    double p_contiguous = 0.0;
    double se = 0.0;  // standard error of the difference
    bool pass = true;
};

struct DominationReport {
    std::vector<Site> spread_set;
    std::vector<Site> contiguous_set;
    std::uint64_t trials = 0;
    std::vector<DominationPoint> points;
    bool all_pass() const;
};

/// Survival of a spread-out n-set against the contiguous n-set {0..n-1};
/// passes where P(spread alive) >= P(contiguous alive) - 3 SE. The spread set
/// defaults to {0, 5, 10, ...}.
DominationReport domination_check_liggett(const Params& params, int n, const std::vector<double>& t_grid,
                                          std::uint64_t trials, std::uint64_t seed,
                                          std::vector<Site> spread_set = {});

nlohmann::json to_json(const CouplingReport& r);
nlohmann::json to_json(const RenewalRecord& r);
nlohmann::json to_json(const DominationReport& r);

}  // namespace bmcp
