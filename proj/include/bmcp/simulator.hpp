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
#include <iosfwd>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bmcp/clock_field.hpp"
#include "bmcp/lattice.hpp"

namespace bmcp {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// Window sizing. Half-width W(T) = ceil(4 (lambda_i + lambda_e + 1) T) + margin.
struct TruncationPolicy {
    Site margin = 64;
    Site guard_width = 8;
    /// Live depth behind the origin for half-line starts; 0 means W(T).
    Site half_line_depth = 0;

    Site halfwidth(const Params& p, double horizon) const;
    Site depth_for(const Params& p, double horizon) const {
        return half_line_depth > 0 ? half_line_depth : halfwidth(p, horizon);
    }
};

/// Open windows detect spills into the guard band; Closed windows suppress
/// every infection that would leave [lo, hi] (finite segment restriction).
enum class WindowMode { Open, Closed };

/// ClockField: shared clock realization (couplings and paths need it).
/// JumpChain: uniformized jump chain, same single-process law, cheaper.
enum class Kernel { ClockField, JumpChain };

struct SimulatorOptions {
    WindowMode mode = WindowMode::Open;
    TruncationPolicy truncation{};
    double cadence = 1.0;
    bool record_events = false;
    /// Check cached edges against a rescan every this many events (0: off).
    std::uint64_t audit_every = 0;
    /// Used by simulate_trial and run_stationary_trial.
    Kernel kernel = Kernel::ClockField;
};

struct TraceSample {
    double time = 0.0;
    std::optional<Site> right;
    std::optional<Site> left;  // kMinusInfinity for the half-line
    Count cardinality = 0;     // kInfiniteCount for the half-line
    Site right_max = 0;        // running extremes of R since the start
    Site right_min = 0;

    friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

struct Trajectory {
    std::vector<TraceSample> samples;
    std::optional<double> extinction_time;
    double censor_time = 0.0;  // horizon reached without extinction
    std::uint64_t event_count = 0;
    bool invalid = false;
    std::string invalid_reason;

    bool extinct() const { return extinction_time.has_value(); }
    /// Latest sample with time <= t (samples stop at extinction).
    const TraceSample* sample_at(double t) const;

    std::string serialize() const;
    std::string digest() const;
    /// Columns: time,right_edge,left_edge,cardinality (empty / -inf / inf sentinels).
    void write_csv(std::ostream& os) const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

enum class EventEffect { Recovery, Infection, Suppressed };

struct EventDescriptor {
    double time = 0.0;  // local time
    ClockObjectId object;
    EventEffect effect = EventEffect::Suppressed;
    Site site = 0;  // recovered or newly infected site
};

/// Event-driven evolution under the sitewise construction rules.
///
/// The pending queue holds at most one entry per clock object: the next
/// arrival after the moment it became relevant. Entries whose object has
/// lost relevance are dropped when popped; an object that regains relevance
/// while its entry is still queued keeps it, since that entry is still the
/// next arrival. Times inside the queue are absolute clock-field times, so a
/// replica on a translated view pops exactly the same doubles as its parent.
class Simulator {
public:
    Simulator(Params params, Configuration initial, ClockFieldView clock, SimulatorOptions options = {});

    const Params& params() const { return params_; }
    const SimulatorOptions& options() const { return options_; }
    const Configuration& configuration() const { return cfg_; }
    const Configuration& initial_configuration() const { return initial_; }
    const ClockFieldView& clock() const { return clock_; }
    double now() const { return now_abs_ - clock_.time_offset(); }
    double now_absolute() const { return now_abs_; }
    bool invalid() const { return trace_.invalid; }
    const Trajectory& trajectory() const { return trace_; }
    const std::vector<EventDescriptor>& event_log() const { return log_; }

    /// Applies the earliest pending clock ring. Throws EmptyProcess when
    /// nothing can happen any more, WindowOverflow when the guard is touched
    /// (the trajectory is flagged invalid first).
    EventDescriptor step();

    /// Sum of the rates of all currently effective transitions.
    double total_jump_rate() const;

    /// Steps until local time t or extinction; samples at the cadence.
    Trajectory run_until(double t);
    /// As run_until; a surviving run is censored at t_max.
    Trajectory run_until_extinction(double t_max);

    /// Absolute time of the next effective ring (kNever if none).
    double next_event_time_absolute();
    /// Applies every ring with absolute time <= t_abs.
    void advance_through_absolute(double t_abs);

    /// Restarts the running extremes of R at the current right edge.
    void reset_running_extremes();

private:
    struct Pending {
        double time;
        ClockObjectId object;
        bool operator>(const Pending& o) const {
            if (time != o.time) return time > o.time;
            return o.object < object;
        }
    };

    // Scheduled ring (kNever: none queued) and stream resume point.
    struct Slot {
        double scheduled = kNever;
        ArrivalCursor cursor;
    };

    std::size_t index(Site x) const { return static_cast<std::size_t>(x - cfg_.lo()); }
    Slot& slot(const ClockObjectId& obj);
    bool relevant(const ClockObjectId& obj) const;
    bool target_allowed(Site y) const;
    void ensure(const ClockObjectId& obj);
    void ensure_site(Site x);
    void drop_stale();
    std::optional<EventDescriptor> pop_and_apply();
    void infect_from(Site y, bool tainted);
    void after_event();
    void emit_samples_before(double t_local, bool inclusive);
    void record_sample(double t_local);
    void mark_invalid(const std::string& reason);

    Params params_;
    SimulatorOptions options_;
    ClockFieldView clock_;
    Configuration initial_;
    Configuration cfg_;
    double now_abs_ = 0.0;

    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
    std::vector<Slot> sched_recovery_;
    std::vector<Slot> sched_right_;
    std::vector<Slot> sched_left_;
    Slot sched_boost_left_;
    Slot sched_boost_right_;

    // Half-line only: sites whose infection may trace back to the frozen
    // guard. They over-approximate where the truncated process can differ
    // from the untruncated one; R is exact while it lies above all of them.
    std::vector<std::uint8_t> tainted_;
    Site taint_front_ = 0;

    Trajectory trace_;
    std::uint64_t next_sample_ = 0;
    Site right_max_ = 0;
    Site right_min_ = 0;
    std::vector<EventDescriptor> log_;
};

/// Window and initial occupancy for a run of length `horizon`: finite starts
/// get W(horizon) sites of room on each side, half-lines are truncated at
/// their depth behind a frozen guard.
Configuration initial_window(const Params& params, const InitialCondition& init, double horizon,
                             const TruncationPolicy& policy);

/// Builds the window from the truncation policy for a run of length `horizon`
/// and drives the simulator with the seed's clock field. StationaryApprox
/// returns the half-line simulator before burn-in.
Simulator make_simulator(const Params& params, const InitialCondition& init, std::uint64_t seed,
                         double horizon, const SimulatorOptions& options = {});

/// Closed segment [0, n-1] started from the bitmask `state` (bit x = site x).
Simulator make_segment_simulator(const Params& params, int n, std::uint32_t state, std::uint64_t seed,
                                 const SimulatorOptions& options = {});

/// Re-bases a trajectory at local time t0 (a sample time): times become
/// s - t0 and edges are measured from r0 = R(t0). Earlier samples are dropped.
Trajectory rebase(const Trajectory& trace, double t0, Site r0);

/// Runs the stationary approximation: a truncated half-line is burnt in and
/// then followed for `horizon`; the returned trace is rebased at the burn-in.
Trajectory run_stationary_trial(const Params& params, double burn_in, double horizon, std::uint64_t seed,
                                const SimulatorOptions& options);

struct StationarySample {
    Configuration shifted;  // Psi(cfg) restricted to [-report_depth, 0]
    bool valid = true;
    std::string invalid_reason;
};

/// Half-line (-inf, 0] truncated at depth L, run to burn_in, then shifted.
/// Throws NeverDies if the truncated half-line ever dies.
StationarySample sample_stationary_shifted(const Params& params, double burn_in, Site depth, std::uint64_t seed,
                                           Site report_depth, const SimulatorOptions& options = {});

nlohmann::json to_json(const TruncationPolicy& policy);

}  // namespace bmcp
