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

#include "bmcp/clock_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "bmcp/errors.hpp"

namespace bmcp {

std::string to_string(const ClockObjectId& id) {
    std::ostringstream os;
    switch (id.kind) {
        case ClockKind::BoostLeft: return "BoostLeft";
        case ClockKind::BoostRight: return "BoostRight";
        case ClockKind::SiteRecovery: os << "SiteRecovery(" << id.site << ")"; break;
        case ClockKind::EdgeRight: os << "DirectedEdge(" << id.site << ",+1)"; break;
        case ClockKind::EdgeLeft: os << "DirectedEdge(" << id.site << ",-1)"; break;
    }
    return os.str();
}

ClockField::ClockField(std::uint64_t master_seed, ClockRates rates)
    : seed_(master_seed),
      key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
      rates_(rates) {}

namespace {

double exp_increment(std::uint64_t bits, double rate) { return -std::log(to_unit_open0(bits)) / rate; }

}  // namespace

std::pair<double, double> ClockField::increment_pair(const ClockObjectId& obj, std::int64_t block,
                                                     std::uint32_t k) const {
    // Counter layout: block (64 bits), site (low 32 bits), kind | pair index.
    const auto b = static_cast<std::uint64_t>(block);
    const PhiloxCounter ctr{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                            static_cast<std::uint32_t>(obj.site), (static_cast<std::uint32_t>(obj.kind) << 28) | k};
    const auto out = philox4x32_10(ctr, key_);
    const double r = rate(obj);
    return {exp_increment((static_cast<std::uint64_t>(out[1]) << 32) | out[0], r),
            exp_increment((static_cast<std::uint64_t>(out[3]) << 32) | out[2], r)};
}

double ClockField::increment(const ClockObjectId& obj, std::int64_t block, std::uint32_t index) const {
    const auto [a, b] = increment_pair(obj, block, index >> 1);
    return (index & 1U) ? b : a;
}

double ClockField::next_arrival(const ClockObjectId& obj, double after) const {
    ArrivalCursor c;
    return next_arrival(obj, after, c);
}

double ClockField::next_arrival(const ClockObjectId& obj, double after, ArrivalCursor& c) const {
    if (!(rate(obj) > 0.0))
        throw ZeroRateObject("clock object " + to_string(obj) + " has rate 0 and must not be polled");
    if (after < 0.0) after = 0.0;
    const auto b_after = static_cast<std::int64_t>(std::floor(after));
    if (c.block != ArrivalCursor::kUnset && c.index > 0 && c.t > after && c.block <= b_after) return c.t;
    if (c.block == ArrivalCursor::kUnset || c.block != b_after || c.index == 0 || c.t > after) {
        c.block = b_after;
        c.index = 0;
        c.t = static_cast<double>(b_after);
    }
    while (true) {
        double inc;
        if (c.index & 1U) {
            inc = c.spare;
        } else {
            const auto [a, b] = increment_pair(obj, c.block, c.index >> 1);
            inc = a;
            c.spare = b;
        }
        c.t += inc;
        ++c.index;
        if (c.t >= static_cast<double>(c.block + 1)) {
            ++c.block;
            c.index = 0;
            c.t = static_cast<double>(c.block);
        } else if (c.t > after) {
            return c.t;
        }
    }
}

double ClockField::arrival(const ClockObjectId& obj, std::uint64_t index) const {
    ClockCursor cursor(*this, obj);
    double t = 0.0;
    for (std::uint64_t i = 0; i <= index; ++i) t = cursor.next();
    return t;
}

ClockFieldView ClockField::translated_view(Site space_offset, double time_offset) const {
    if (time_offset < 0.0) throw std::invalid_argument("time_offset must be >= 0");
    return ClockFieldView(*this, space_offset, time_offset);
}

SpaceTimeRecord ClockField::arrivals_in_box(SiteInterval sites, double t0, double t1,
                                            double max_expected_events) const {
    if (!(t0 < t1)) throw std::invalid_argument("arrivals_in_box requires t0 < t1");
    if (t0 < 0.0) throw std::invalid_argument("arrivals_in_box requires t0 >= 0");
    const double span = t1 - t0;
    const double expected = static_cast<double>(sites.size()) * (rates_.recovery + 2.0 * rates_.edge) * span +
                            2.0 * rates_.boost * span;
    if (expected > max_expected_events)
        throw BoxTooLarge("expected " + std::to_string(expected) + " events exceeds cap " +
                          std::to_string(max_expected_events));

    SpaceTimeRecord rec;
    rec.sites = sites;
    rec.t0 = t0;
    rec.t1 = t1;
    auto collect = [&](ClockObjectId obj, std::vector<ClockEvent>& out) {
        if (!(rate(obj) > 0.0)) return;
        // Arrivals at exactly t0 have probability zero; start just below it.
        for (double t = next_arrival(obj, std::nextafter(t0, -1.0)); t <= t1; t = next_arrival(obj, t))
            out.push_back({t, obj});
    };
    if (!sites.empty()) {
        for (Site x = sites.lo; x <= sites.hi; ++x) {
            collect(ClockObjectId::recovery(x), rec.events);
            collect(ClockObjectId::edge(x, +1), rec.events);
            collect(ClockObjectId::edge(x, -1), rec.events);
        }
    }
    collect(ClockObjectId::boost_left(), rec.boosts);
    collect(ClockObjectId::boost_right(), rec.boosts);
    auto by_time = [](const ClockEvent& a, const ClockEvent& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.object < b.object;
    };
    std::sort(rec.events.begin(), rec.events.end(), by_time);
    std::sort(rec.boosts.begin(), rec.boosts.end(), by_time);
    return rec;
}

namespace {

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

void put_events(std::string& out, const std::vector<ClockEvent>& events) {
    put<std::uint64_t>(out, events.size());
    for (const auto& e : events) {
        put<double>(out, e.time);
        put<std::uint8_t>(out, static_cast<std::uint8_t>(e.object.kind));
        put<std::int64_t>(out, e.object.site);
    }
}

}  // namespace

std::string SpaceTimeRecord::serialize() const {
    std::string out;
    put<std::int64_t>(out, sites.lo);
    put<std::int64_t>(out, sites.hi);
    put<double>(out, t0);
    put<double>(out, t1);
    put_events(out, events);
    put_events(out, boosts);
    return out;
}

ClockCursor::ClockCursor(const ClockField& field, ClockObjectId obj)
    : field_(&field), obj_(obj), rate_(field.rate(obj)) {
    if (!(rate_ > 0.0))
        throw ZeroRateObject("clock object " + to_string(obj) + " has rate 0 and must not be polled");
}

double ClockCursor::next() {
    while (true) {
        const double end = static_cast<double>(block_ + 1);
        t_ += field_->increment(obj_, block_, index_++);
        if (t_ < end) {
            ++consumed_;
            return t_;
        }
        ++block_;
        index_ = 0;
        t_ = static_cast<double>(block_);
    }
}

ClockFieldView::ClockFieldView(ClockField field, Site space_offset, double time_offset)
    : field_(field), dx_(space_offset), dt_(time_offset) {}

}  // namespace bmcp
