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

#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bmcp/clock_field.hpp"
#include "bmcp/stats.hpp"

namespace bmcp {

/// Sites [lo, hi] over times [t0, t1]. The crossing box [0, n1] x [0, n2]
/// is SpaceTimeBox::of(n1, n2).
struct SpaceTimeBox {
    Site lo = 0;
    Site hi = 0;
    double t0 = 0.0;
    double t1 = 1.0;

    static SpaceTimeBox of(Site n1, double n2);
    static SpaceTimeBox covering(const SpaceTimeRecord& record);
    SiteInterval sites() const { return {lo, hi}; }
    bool contains(Site x, double t) const { return x >= lo && x <= hi && t >= t0 && t <= t1; }
};

struct SpaceTimePoint {
    Site site = 0;
    double time = 0.0;
};

/// Interior clocks only, or interior clocks plus the boosts of the running
/// process started from the query's initial set.
enum class PathMode { LambdaI, LambdaE };

/// A path starts at (start_site, start_time) and takes one nearest-neighbour
/// step per listed event. Event index k < record.events.size() refers to
/// record.events[k]; larger indices refer to record.boosts[k - events.size()].
struct PathWitness {
    Site start_site = 0;
    double start_time = 0.0;
    std::vector<std::size_t> events;
};

struct PathQuery {
    PathMode mode = PathMode::LambdaI;
    /// LambdaE only: the infected set at the start time (the start site is
    /// always included).
    std::vector<Site> initial_set;
    std::optional<SpaceTimeBox> confine;
    /// LambdaE only: which boosts the running process uses.
    Variant variant = Variant::BoundaryModified;
};

struct PathResult {
    bool exists = false;
    std::optional<PathWitness> witness;
};

/// Throws RecordIncomplete if the record does not cover the confining box
/// (default: the record's own box), std::invalid_argument if to precedes from.
PathResult open_path_exists(const SpaceTimeRecord& record, SpaceTimePoint from, SpaceTimePoint to,
                            const PathQuery& query = {});

/// Reference decision for small records: depth-first enumeration of every
/// time-ordered step sequence, with boost targets taken from a direct replay
/// of the running process. Exponential in the event count; meant for windows
/// with a dozen events.
bool exhaustive_path_exists(const SpaceTimeRecord& record, SpaceTimePoint from, SpaceTimePoint to,
                            const PathQuery& query = {});

struct CrossingReport {
    bool vertical = false;
    bool horizontal = false;
    std::optional<PathWitness> vertical_witness;
    std::optional<PathWitness> horizontal_witness;
    /// Where each witness ends.
    std::optional<SpaceTimePoint> vertical_end;
    std::optional<SpaceTimePoint> horizontal_end;
};

/// Some interior-clock open path inside the box joins a site of
/// `initial_set` (default: every site of the bottom edge) at t0 to time t1.
CrossingReport box_crossed_vertically(const SpaceTimeRecord& record, const SpaceTimeBox& box,
                                      std::optional<std::vector<Site>> initial_set = std::nullopt);

/// Some interior-clock open path inside the box runs from site lo to site hi
/// between two times of [t0, t1].
CrossingReport box_crossed_horizontally(const SpaceTimeRecord& record, const SpaceTimeBox& box);

/// Static check of a witness against the record: time-ordered steps inside
/// the box, each step leaving the current site, no recovery ring on an
/// occupied site between steps, and the path sitting at `to` at to.time.
/// Boost steps are accepted when their direction matches; their placement
/// depends on the running process and is checked by replay instead.
bool witness_is_open(const SpaceTimeRecord& record, const PathWitness& witness, SpaceTimePoint to,
                     const SpaceTimeBox& box);

struct EnvelopeFit {
    std::size_t trials = 0;
    double t = 0.0;                 // time at which the tail is measured
    double scaling_exponent = 0.0;  // fitted 1 - delta from mean sup|R| against t
    double delta = 0.0;
    std::vector<double> y;
    std::vector<double> tail;        // P(sup |R| > y t^scaling_exponent)
    std::vector<std::size_t> count;  // trials above each y
    stats::LinearFit log_tail_fit;   // log tail against y over the fit range
    std::size_t fit_points = 0;
};

/// `sup_abs_right[i][k]` is sup over s <= t_grid[k] of |R| in trial i for
/// critical half-line runs. The log-tail fit uses the y values with at least
/// `min_tail_count` trials in the tail. Throws InsufficientTrials below
/// `min_trials`.
EnvelopeFit fit_edge_envelope(const std::vector<std::vector<double>>& sup_abs_right, const std::vector<double>& t_grid,
                              std::size_t min_trials = 1000, std::size_t min_tail_count = 20);

struct CrossingWidthPoint {
    double n = 0.0;             // box height (time)
    Site width = 0;             // chosen n1
    double probability = 0.0;   // crossing probability at that width
    double se = 0.0;
    double fitted_width = 0.0;  // interpolated n1 at probability `target`
};

struct CrossingWidthFit {
    double target = 0.5;
    std::vector<CrossingWidthPoint> points;
    stats::LinearFit log_fit;  // log fitted_width against log n
    double exponent = 0.0;     // 1 - delta
    stats::Interval exponent_ci;
};

/// Monte Carlo vertical crossing probability of [0, n1] x [0, n2] boxes
/// under the standard process at `lambda` (fresh clock field per trial).
double vertical_crossing_probability(double lambda, Site n1, double n2, std::size_t trials, std::uint64_t seed);

/// For each height n, scans widths upward until the crossing probability
/// passes `target`, records the width closest to it and a linear
/// interpolation; then fits log width against log n with a t-based CI.
CrossingWidthFit fit_crossing_width(double lambda, const std::vector<double>& heights, std::size_t trials,
                                    std::uint64_t seed, double target = 0.5, double level = 0.95);

nlohmann::json to_json(const PathWitness& w);
nlohmann::json to_json(const CrossingReport& r);
nlohmann::json to_json(const EnvelopeFit& f);
nlohmann::json to_json(const CrossingWidthFit& f);

}  // namespace bmcp
