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

#include <algorithm>
#include <set>
#include <stdexcept>

#include "bmcp/errors.hpp"
#include "bmcp/percolation.hpp"

namespace bmcp {

namespace {

struct Step {
    double time;
    Site from;
    Site to;
};

struct Search {
    std::vector<Step> steps;                    // time-ordered
    std::vector<std::pair<double, Site>> kills;  // recovery rings, any order
    double end = 0.0;
    Site target = 0;

    bool killed(Site x, double a, double b) const {
        return std::any_of(kills.begin(), kills.end(),
                           [&](const auto& k) { return k.second == x && k.first > a && k.first <= b; });
    }

    bool from(Site x, double t, std::size_t next) const {
        if (x == target && !killed(x, t, end)) return true;
        for (std::size_t j = next; j < steps.size(); ++j) {
            const Step& s = steps[j];
            if (s.from != x || s.time <= t) continue;
            if (killed(x, t, s.time)) break;  // later steps from x are cut off too
            if (from(s.to, s.time, j + 1)) return true;
        }
        return false;
    }
};

}  // namespace

bool exhaustive_path_exists(const SpaceTimeRecord& record, SpaceTimePoint from, SpaceTimePoint to,
                            const PathQuery& query) {
    if (to.time < from.time) throw std::invalid_argument("exhaustive_path_exists requires from.time <= to.time");
    const SpaceTimeBox box = query.confine.value_or(SpaceTimeBox::covering(record));
    if (!record.covers(box.sites(), box.t0, box.t1)) throw RecordIncomplete("record does not contain the box");
    if (!box.contains(from.site, from.time) || !box.contains(to.site, to.time)) return false;

    std::vector<ClockEvent> all(record.events);
    all.insert(all.end(), record.boosts.begin(), record.boosts.end());
    std::stable_sort(all.begin(), all.end(), [](const ClockEvent& a, const ClockEvent& b) {
        return a.time != b.time ? a.time < b.time : a.object < b.object;
    });

    const bool boosted = query.mode == PathMode::LambdaE;
    std::set<Site> occupied;
    if (boosted) {
        occupied.insert(from.site);
        for (Site x : query.initial_set)
            if (box.contains(x, from.time)) occupied.insert(x);
    }

    Search search;
    search.end = to.time;
    search.target = to.site;
    for (const ClockEvent& e : all) {
        if (e.time <= from.time || e.time > to.time) continue;
        const auto& obj = e.object;
        if (obj.kind == ClockKind::SiteRecovery) {
            if (box.contains(obj.site, e.time)) search.kills.emplace_back(e.time, obj.site);
            occupied.erase(obj.site);
        } else if (obj.is_edge()) {
            const Site z = obj.target();
            if (!box.contains(obj.site, e.time) || !box.contains(z, e.time)) continue;
            search.steps.push_back({e.time, obj.site, z});
            if (occupied.count(obj.site)) occupied.insert(z);
        } else if (boosted && query.variant != Variant::Standard && !occupied.empty()) {
            const bool right = obj.kind == ClockKind::BoostRight;
            if (!right && query.variant != Variant::BoundaryModified) continue;
            const Site edge = right ? *occupied.rbegin() : *occupied.begin();
            const Site z = edge + (right ? 1 : -1);
            if (!box.contains(z, e.time)) continue;
            occupied.insert(z);
            search.steps.push_back({e.time, edge, z});
        }
    }
    return search.from(from.site, from.time, 0);
}

}  // namespace bmcp
