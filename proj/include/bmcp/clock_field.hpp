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

// Deterministic Poisson clocks of the sitewise construction.
//
// Every clock object (site recovery, directed edge, the two global boosts)
// owns an arrival stream that is a pure function of (master seed, object).
// Time is cut into unit blocks; inside block b the arrivals are b plus
// cumulative Exp(rate) increments keyed by (object, b, index), stopping at
// the first increment that leaves the block. By memorylessness the
// concatenation is an exact rate-`rate` Poisson process, and any time can be
// reached without replaying the stream from 0.

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "bmcp/lattice.hpp"
#include "bmcp/philox.hpp"

namespace bmcp {

/// Boosts sort before site objects; site objects order by (site, kind).
/// The order is translation invariant, which keeps coupled replicas in step.
enum class ClockKind : std::uint8_t {
    BoostLeft = 0,   // N_e1
    BoostRight = 1,  // N_e2
    SiteRecovery = 2,
    EdgeRight = 3,  // N_{x,x+1}
    EdgeLeft = 4,   // N_{x,x-1}
};

struct ClockObjectId {
    ClockKind kind = ClockKind::SiteRecovery;
    Site site = 0;  // 0 for the boosts

    static constexpr ClockObjectId recovery(Site x) { return {ClockKind::SiteRecovery, x}; }
    /// direction +1 is N_{x,x+1}, -1 is N_{x,x-1}.
    static constexpr ClockObjectId edge(Site x, int direction) {
        return {direction > 0 ? ClockKind::EdgeRight : ClockKind::EdgeLeft, x};
    }
    static constexpr ClockObjectId boost_left() { return {ClockKind::BoostLeft, 0}; }
    static constexpr ClockObjectId boost_right() { return {ClockKind::BoostRight, 0}; }

    bool is_boost() const { return kind == ClockKind::BoostLeft || kind == ClockKind::BoostRight; }
    bool is_edge() const { return kind == ClockKind::EdgeRight || kind == ClockKind::EdgeLeft; }
    /// Target site of an edge clock.
    Site target() const { return kind == ClockKind::EdgeRight ? site + 1 : site - 1; }
    ClockObjectId shifted(Site dx) const { return is_boost() ? *this : ClockObjectId{kind, site + dx}; }

    friend bool operator==(const ClockObjectId&, const ClockObjectId&) = default;
    friend std::strong_ordering operator<=>(const ClockObjectId& a, const ClockObjectId& b) {
        const bool ab = a.is_boost();
        const bool bb = b.is_boost();
        if (ab != bb) return ab ? std::strong_ordering::less : std::strong_ordering::greater;
        if (ab) return a.kind <=> b.kind;
        if (a.site != b.site) return a.site <=> b.site;
        return a.kind <=> b.kind;
    }
};

std::string to_string(const ClockObjectId& id);

struct ClockRates {
    double recovery = 1.0;
    double edge = 0.0;   // lambda_i
    double boost = 0.0;  // epsilon = lambda_e - lambda_i

    static ClockRates from(const Params& p) { return {p.recovery_rate, p.lambda_i, p.boost_rate()}; }
};

struct ClockEvent {
    double time = 0.0;
    ClockObjectId object;

    friend bool operator==(const ClockEvent&, const ClockEvent&) = default;
};

/// Realized arrivals inside a space-time box.
struct SpaceTimeRecord {
    SiteInterval sites;
    double t0 = 0.0;
    double t1 = 0.0;
    std::vector<ClockEvent> events;  // recovery and edge arrivals, by (time, object)
    std::vector<ClockEvent> boosts;  // global boost arrivals in [t0, t1]

    bool covers(SiteInterval s, double a, double b) const {
        return (s.empty() || (s.lo >= sites.lo && s.hi <= sites.hi)) && a >= t0 && b <= t1;
    }
    /// Canonical little-endian byte image (for digests and equality).
    std::string serialize() const;
};

class ClockFieldView;

/// Resume point inside one object's stream: the last arrival handed out
/// (time t, consumed increments `index` of unit block `block`) plus the
/// unused half of the last generator call. Only an optimization; values never
/// depend on it. Queries through one cursor must use nondecreasing `after`.
struct ArrivalCursor {
    static constexpr std::int64_t kUnset = std::numeric_limits<std::int64_t>::min();
    std::int64_t block = kUnset;
    std::uint32_t index = 0;
    double t = 0.0;
    double spare = 0.0;
};

class ClockField {
public:
    ClockField() = default;
    ClockField(std::uint64_t master_seed, ClockRates rates);

    std::uint64_t master_seed() const { return seed_; }
    const ClockRates& rates() const { return rates_; }
    double rate(const ClockObjectId& obj) const {
        switch (obj.kind) {
            case ClockKind::SiteRecovery: return rates_.recovery;
            case ClockKind::EdgeRight:
            case ClockKind::EdgeLeft: return rates_.edge;
            default: return rates_.boost;
        }
    }

    /// Smallest arrival of `obj` strictly greater than `after` (after >= 0).
    /// Throws ZeroRateObject when the object's rate is 0.
    double next_arrival(const ClockObjectId& obj, double after) const;
    /// As above, resuming from and updating `cursor`.
    double next_arrival(const ClockObjectId& obj, double after, ArrivalCursor& cursor) const;

    /// The index-th arrival (0-based) of `obj`; equal to the index-th value
    /// produced by a ClockCursor.
    double arrival(const ClockObjectId& obj, std::uint64_t index) const;

    /// Read view whose (x, s) resolves to this field's (x + space_offset, s + time_offset).
    ClockFieldView translated_view(Site space_offset, double time_offset) const;

    /// Every recovery/edge arrival with source site in `sites` and time in
    /// [t0, t1], sorted by (time, object); boosts listed separately.
    /// Throws BoxTooLarge when the expected count exceeds `max_expected_events`.
    SpaceTimeRecord arrivals_in_box(SiteInterval sites, double t0, double t1,
                                    double max_expected_events = 1e8) const;

    /// Exponential increment number `index` of `obj` in unit block `block`.
    double increment(const ClockObjectId& obj, std::int64_t block, std::uint32_t index) const;
    /// Increments 2k and 2k+1 of `obj` in `block` (one generator call).
    std::pair<double, double> increment_pair(const ClockObjectId& obj, std::int64_t block, std::uint32_t k) const;

private:
    std::uint64_t seed_ = 0;
    PhiloxKey key_{};
    ClockRates rates_{};
};

/// Sequential iteration over one object's arrivals.
class ClockCursor {
public:
    ClockCursor(const ClockField& field, ClockObjectId obj);

    double next();
    std::uint64_t consumed() const { return consumed_; }

private:
    const ClockField* field_;
    ClockObjectId obj_;
    double rate_;
    std::int64_t block_ = 0;
    std::uint32_t index_ = 0;
    double t_ = 0.0;
    std::uint64_t consumed_ = 0;
};

/// Translated read view. Holds the (small) field by value.
class ClockFieldView {
public:
    ClockFieldView() = default;
    explicit ClockFieldView(ClockField field, Site space_offset = 0, double time_offset = 0.0);

    const ClockField& field() const { return field_; }
    Site space_offset() const { return dx_; }
    double time_offset() const { return dt_; }
    double rate(const ClockObjectId& obj) const { return field_.rate(obj); }

    /// Local time in, local time out: parent arrivals shifted by -time_offset.
    double next_arrival(const ClockObjectId& obj, double after) const {
        return field_.next_arrival(obj.shifted(dx_), after + dt_) - dt_;
    }
    /// Absolute (parent) time in and out; used by the simulator so that
    /// replicas reading the same clocks see bit-identical times.
    double next_arrival_absolute(const ClockObjectId& obj, double after_abs) const {
        return field_.next_arrival(obj.shifted(dx_), after_abs);
    }
    double next_arrival_absolute(const ClockObjectId& obj, double after_abs, ArrivalCursor& cursor) const {
        return field_.next_arrival(obj.shifted(dx_), after_abs, cursor);
    }

private:
    ClockField field_;
    Site dx_ = 0;
    double dt_ = 0.0;
};

}  // namespace bmcp
