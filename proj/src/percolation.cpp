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

#include "bmcp/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bmcp/errors.hpp"
#include "bmcp/philox.hpp"

namespace bmcp {

SpaceTimeBox SpaceTimeBox::of(Site n1, double n2) {
    if (n1 < 0) throw std::invalid_argument("box width n1 must be >= 0");
    if (!(n2 > 0.0)) throw std::invalid_argument("box height n2 must be > 0");
    return {0, n1, 0.0, n2};
}

SpaceTimeBox SpaceTimeBox::covering(const SpaceTimeRecord& record) {
    return {record.sites.lo, record.sites.hi, record.t0, record.t1};
}

namespace {

constexpr std::size_t kRoot = std::numeric_limits<std::size_t>::max();

const ClockEvent& event_at(const SpaceTimeRecord& rec, std::size_t k) {
    return k < rec.events.size() ? rec.events[k] : rec.boosts[k - rec.events.size()];
}

// Indices of events and boosts merged into the global (time, object) order.
std::vector<std::size_t> merged_order(const SpaceTimeRecord& rec) {
    std::vector<std::size_t> order;
    order.reserve(rec.events.size() + rec.boosts.size());
    std::size_t i = 0, j = 0;
    const std::size_t ne = rec.events.size();
    auto before = [](const ClockEvent& a, const ClockEvent& b) {
        return a.time != b.time ? a.time < b.time : a.object < b.object;
    };
    while (i < ne || j < rec.boosts.size()) {
        if (j == rec.boosts.size() || (i < ne && before(rec.events[i], rec.boosts[j])))
            order.push_back(i++);
        else
            order.push_back(ne + j++);
    }
    return order;
}

void require_cover(const SpaceTimeRecord& rec, const SpaceTimeBox& box) {
    if (box.hi < box.lo || !(box.t0 <= box.t1)) throw std::invalid_argument("malformed space-time box");
    if (!rec.covers(box.sites(), box.t0, box.t1))
        throw RecordIncomplete("record [" + std::to_string(rec.sites.lo) + "," + std::to_string(rec.sites.hi) +
                               "]x[" + std::to_string(rec.t0) + "," + std::to_string(rec.t1) +
                               "] does not contain the requested box");
}

// Set of sites reachable by open paths, with one witness chain per site.
class Tracker {
public:
    explicit Tracker(const SpaceTimeBox& box)
        : box_(box), node_of_(static_cast<std::size_t>(box.hi - box.lo + 1), -1) {}

    bool inside(Site x) const { return x >= box_.lo && x <= box_.hi; }
    bool reached(Site x) const { return inside(x) && node_of_[idx(x)] >= 0; }

    void root(Site x, double t) {
        node_of_[idx(x)] = static_cast<int>(nodes_.size());
        nodes_.push_back({-1, kRoot, x, t});
    }
    // Returns true if x was newly reached.
    bool step(Site from, Site to, std::size_t event) {
        if (!reached(from) || !inside(to) || reached(to)) return false;
        node_of_[idx(to)] = static_cast<int>(nodes_.size());
        nodes_.push_back({node_of_[idx(from)], event, to, 0.0});
        return true;
    }
    void drop(Site x) {
        if (inside(x)) node_of_[idx(x)] = -1;
    }
    std::optional<Site> any_reached() const {
        for (std::size_t i = 0; i < node_of_.size(); ++i)
            if (node_of_[i] >= 0) return box_.lo + static_cast<Site>(i);
        return std::nullopt;
    }
    PathWitness witness(Site x) const {
        PathWitness w;
        int n = node_of_[idx(x)];
        while (nodes_[n].parent >= 0) {
            w.events.push_back(nodes_[n].event);
            n = nodes_[n].parent;
        }
        w.start_site = nodes_[n].site;
        w.start_time = nodes_[n].time;
        std::reverse(w.events.begin(), w.events.end());
        return w;
    }

private:
    struct Node {
        int parent;
        std::size_t event;
        Site site;
        double time;  // roots only
    };
    std::size_t idx(Site x) const { return static_cast<std::size_t>(x - box_.lo); }

    SpaceTimeBox box_;
    std::vector<int> node_of_;
    std::vector<Node> nodes_;
};

// Occupancy of the running process for boost placement.
class Occupancy {
public:
    explicit Occupancy(const SpaceTimeBox& box) : lo_(box.lo), occ_(static_cast<std::size_t>(box.hi - box.lo + 1), 0) {}
    void set(Site x, bool v) { occ_[static_cast<std::size_t>(x - lo_)] = v; }
    bool get(Site x) const { return occ_[static_cast<std::size_t>(x - lo_)] != 0; }
    std::optional<Site> right() const {
        for (std::size_t i = occ_.size(); i-- > 0;)
            if (occ_[i]) return lo_ + static_cast<Site>(i);
        return std::nullopt;
    }
    std::optional<Site> left() const {
        for (std::size_t i = 0; i < occ_.size(); ++i)
            if (occ_[i]) return lo_ + static_cast<Site>(i);
        return std::nullopt;
    }

private:
    Site lo_;
    std::vector<std::uint8_t> occ_;
};

}  // namespace

PathResult open_path_exists(const SpaceTimeRecord& record, SpaceTimePoint from, SpaceTimePoint to,
                            const PathQuery& query) {
    if (to.time < from.time) throw std::invalid_argument("open_path_exists requires from.time <= to.time");
    const SpaceTimeBox box = query.confine.value_or(SpaceTimeBox::covering(record));
    require_cover(record, box);
    if (!box.contains(from.site, from.time) || !box.contains(to.site, to.time)) return {};

    Tracker reach(box);
    reach.root(from.site, from.time);
    const bool boosted = query.mode == PathMode::LambdaE;
    Occupancy occ(box);
    if (boosted) {
        occ.set(from.site, true);
        for (Site x : query.initial_set)
            if (reach.inside(x)) occ.set(x, true);
    }

    for (std::size_t k : merged_order(record)) {
        const ClockEvent& e = event_at(record, k);
        if (e.time <= from.time) continue;
        if (e.time > to.time) break;
        const auto& obj = e.object;
        switch (obj.kind) {
            case ClockKind::SiteRecovery:
                if (!reach.inside(obj.site)) break;
                reach.drop(obj.site);
                if (boosted) occ.set(obj.site, false);
                break;
            case ClockKind::EdgeRight:
            case ClockKind::EdgeLeft: {
                const Site y = obj.site, z = obj.target();
                if (!reach.inside(y) || !reach.inside(z)) break;
                if (boosted && occ.get(y)) occ.set(z, true);
                reach.step(y, z, k);
                break;
            }
            case ClockKind::BoostRight:
            case ClockKind::BoostLeft: {
                if (!boosted || query.variant == Variant::Standard) break;
                const bool right = obj.kind == ClockKind::BoostRight;
                if (!right && query.variant != Variant::BoundaryModified) break;
                const auto edge = right ? occ.right() : occ.left();
                if (!edge) break;
                const Site z = *edge + (right ? 1 : -1);
                if (!reach.inside(z)) break;
                occ.set(z, true);
                reach.step(*edge, z, k);
                break;
            }
        }
    }
    PathResult out;
    out.exists = reach.reached(to.site);
    if (out.exists) out.witness = reach.witness(to.site);
    return out;
}

CrossingReport box_crossed_vertically(const SpaceTimeRecord& record, const SpaceTimeBox& box,
                                      std::optional<std::vector<Site>> initial_set) {
    require_cover(record, box);
    CrossingReport rep;
    Tracker reach(box);
    if (initial_set) {
        for (Site x : *initial_set)
            if (reach.inside(x)) reach.root(x, box.t0);
    } else {
        for (Site x = box.lo; x <= box.hi; ++x) reach.root(x, box.t0);
    }
    for (const auto& e : record.events) {
        if (e.time <= box.t0) continue;
        if (e.time > box.t1) break;
        const auto& obj = e.object;
        if (!reach.inside(obj.site)) continue;
        if (obj.kind == ClockKind::SiteRecovery)
            reach.drop(obj.site);
        else
            reach.step(obj.site, obj.target(), static_cast<std::size_t>(&e - record.events.data()));
    }
    if (const auto y = reach.any_reached()) {
        rep.vertical = true;
        rep.vertical_witness = reach.witness(*y);
        rep.vertical_end = SpaceTimePoint{*y, box.t1};
    }
    return rep;
}

CrossingReport box_crossed_horizontally(const SpaceTimeRecord& record, const SpaceTimeBox& box) {
    require_cover(record, box);
    CrossingReport rep;
    Tracker reach(box);
    reach.root(box.lo, box.t0);
    auto done = [&](double t) {
        rep.horizontal = true;
        rep.horizontal_witness = reach.witness(box.hi);
        rep.horizontal_end = SpaceTimePoint{box.hi, t};
        return rep;
    };
    if (box.lo == box.hi) return done(box.t0);
    for (const auto& e : record.events) {
        if (e.time <= box.t0) continue;
        if (e.time > box.t1) break;
        const auto& obj = e.object;
        if (!reach.inside(obj.site)) continue;
        if (obj.kind == ClockKind::SiteRecovery) {
            reach.drop(obj.site);
            // A path may start at the left side at any time.
            if (obj.site == box.lo) reach.root(box.lo, e.time);
        } else if (reach.step(obj.site, obj.target(), static_cast<std::size_t>(&e - record.events.data())) &&
                   obj.target() == box.hi) {
            return done(e.time);
        }
    }
    return rep;
}

bool witness_is_open(const SpaceTimeRecord& record, const PathWitness& witness, SpaceTimePoint to,
                     const SpaceTimeBox& box) {
    if (!box.contains(witness.start_site, witness.start_time) || !box.contains(to.site, to.time)) return false;
    std::map<Site, std::vector<double>> recoveries;
    for (const auto& e : record.events)
        if (e.object.kind == ClockKind::SiteRecovery) recoveries[e.object.site].push_back(e.time);
    auto recovers_in = [&](Site x, double a, double b) {  // ring in (a, b]
        const auto it = recoveries.find(x);
        if (it == recoveries.end()) return false;
        const auto jt = std::upper_bound(it->second.begin(), it->second.end(), a);
        return jt != it->second.end() && *jt <= b;
    };

    Site cur = witness.start_site;
    double t_cur = witness.start_time;
    const std::size_t total = record.events.size() + record.boosts.size();
    for (std::size_t k : witness.events) {
        if (k >= total) return false;
        const ClockEvent& e = event_at(record, k);
        if (!(e.time > t_cur) || e.time > to.time) return false;
        Site next;
        if (e.object.is_edge()) {
            if (e.object.site != cur) return false;
            next = e.object.target();
        } else if (e.object.is_boost()) {
            next = cur + (e.object.kind == ClockKind::BoostRight ? 1 : -1);
        } else {
            return false;
        }
        if (!box.contains(next, e.time) || recovers_in(cur, t_cur, e.time)) return false;
        cur = next;
        t_cur = e.time;
    }
    return cur == to.site && !recovers_in(cur, t_cur, to.time);
}

EnvelopeFit fit_edge_envelope(const std::vector<std::vector<double>>& sup_abs_right, const std::vector<double>& t_grid,
                              std::size_t min_trials, std::size_t min_tail_count) {
    if (sup_abs_right.size() < min_trials)
        throw InsufficientTrials("edge envelope needs " + std::to_string(min_trials) + " trials, got " +
                                 std::to_string(sup_abs_right.size()));
    if (t_grid.empty()) throw std::invalid_argument("edge envelope needs a time grid");
    for (const auto& row : sup_abs_right)
        if (row.size() != t_grid.size()) throw std::invalid_argument("edge envelope row length mismatch");

    EnvelopeFit fit;
    fit.trials = sup_abs_right.size();
    fit.t = t_grid.back();

    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        double m = 0.0;
        for (const auto& row : sup_abs_right) m += row[k];
        m /= static_cast<double>(fit.trials);
        if (t_grid[k] > 0.0 && m > 0.0) {
            lx.push_back(std::log(t_grid[k]));
            ly.push_back(std::log(m));
        }
    }
    fit.scaling_exponent = lx.size() >= 2 ? stats::linear_fit(lx, ly).slope : 1.0;
    fit.delta = 1.0 - fit.scaling_exponent;

    const double scale = std::pow(fit.t, fit.scaling_exponent);
    std::vector<double> u;
    for (const auto& row : sup_abs_right) u.push_back(row.back() / scale);
    const double umax = *std::max_element(u.begin(), u.end());
    const double umed = stats::quantile(u, 0.5);
    constexpr int kGrid = 24;
    std::vector<double> fx, fy;
    for (int g = 1; g <= kGrid; ++g) {
        const double y = umax > 0.0 ? umax * g / (kGrid + 1) : static_cast<double>(g);
        const auto c = static_cast<std::size_t>(std::count_if(u.begin(), u.end(), [&](double v) { return v > y; }));
        fit.y.push_back(y);
        fit.count.push_back(c);
        fit.tail.push_back(static_cast<double>(c) / static_cast<double>(fit.trials));
        if (y >= umed && c >= min_tail_count) {
            fx.push_back(y);
            fy.push_back(std::log(fit.tail.back()));
        }
    }
    fit.fit_points = fx.size();
    if (fx.size() >= 3) fit.log_tail_fit = stats::linear_fit(fx, fy);
    return fit;
}

double vertical_crossing_probability(double lambda, Site n1, double n2, std::size_t trials, std::uint64_t seed) {
    if (trials == 0) return 0.0;
    const ClockRates rates{1.0, lambda, 0.0};
    const auto box = SpaceTimeBox::of(n1, n2);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        const ClockField field(derive_trial_seed(seed, i), rates);
        hits += box_crossed_vertically(field.arrivals_in_box(box.sites(), 0.0, n2), box).vertical;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

CrossingWidthFit fit_crossing_width(double lambda, const std::vector<double>& heights, std::size_t trials,
                                    std::uint64_t seed, double target, double level) {
    if (heights.size() < 3) throw std::invalid_argument("crossing width fit needs at least 3 heights");
    CrossingWidthFit fit;
    fit.target = target;
    std::vector<double> lx, ly;
    for (std::size_t h = 0; h < heights.size(); ++h) {
        const double n = heights[h];
        const std::uint64_t hseed = splitmix64(seed ^ splitmix64(h + 1));
        double p_prev = 0.0;
        Site w = 0;
        double p = 0.0;
        constexpr Site kMaxWidth = 100000;
        for (;; ++w) {
            p = vertical_crossing_probability(lambda, w, n, trials, splitmix64(hseed + static_cast<std::uint64_t>(w)));
            if (p >= target || w >= kMaxWidth) break;
            p_prev = p;
        }
        CrossingWidthPoint pt;
        pt.n = n;
        const bool take_prev = w > 0 && std::abs(p_prev - target) < std::abs(p - target);
        pt.width = take_prev ? w - 1 : w;
        pt.probability = take_prev ? p_prev : p;
        const double N = static_cast<double>(trials);
        pt.se = std::sqrt(pt.probability * (1 - pt.probability) / N);
        pt.fitted_width = w == 0 || p == p_prev ? static_cast<double>(w)
                                                : static_cast<double>(w - 1) + (target - p_prev) / (p - p_prev);
        fit.points.push_back(pt);
        lx.push_back(std::log(n));
        ly.push_back(std::log(pt.fitted_width + 1.0));  // number of sites in the box
    }
    fit.log_fit = stats::linear_fit(lx, ly);
    fit.exponent = fit.log_fit.slope;
    const double q = stats::student_t_quantile(0.5 + level / 2.0, static_cast<double>(lx.size() - 2));
    fit.exponent_ci = {fit.exponent - q * fit.log_fit.se_slope, fit.exponent + q * fit.log_fit.se_slope};
    return fit;
}

nlohmann::json to_json(const PathWitness& w) {
    return {{"start_site", w.start_site}, {"start_time", w.start_time}, {"events", w.events}};
}

nlohmann::json to_json(const CrossingReport& r) {
    nlohmann::json j{{"vertical", r.vertical}, {"horizontal", r.horizontal}};
    if (r.vertical_witness) j["vertical_witness"] = to_json(*r.vertical_witness);
    if (r.horizontal_witness) j["horizontal_witness"] = to_json(*r.horizontal_witness);
    return j;
}

nlohmann::json to_json(const EnvelopeFit& f) {
    return {{"trials", f.trials},
            {"t", f.t},
            {"scaling_exponent", f.scaling_exponent},
            {"delta", f.delta},
            {"y", f.y},
            {"tail", f.tail},
            {"count", f.count},
            {"fit_points", f.fit_points},
            {"log_tail_slope", f.log_tail_fit.slope},
            {"log_tail_r2", f.log_tail_fit.r2}};
}

nlohmann::json to_json(const CrossingWidthFit& f) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : f.points)
        pts.push_back({{"n", p.n},
                       {"width", p.width},
                       {"probability", p.probability},
                       {"se", p.se},
                       {"fitted_width", p.fitted_width}});
    return {{"target", f.target},
            {"points", pts},
            {"exponent", f.exponent},
            {"exponent_ci", {f.exponent_ci.lo, f.exponent_ci.hi}},
            {"r2", f.log_fit.r2}};
}

}  // namespace bmcp
