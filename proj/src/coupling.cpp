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

#include "bmcp/coupling.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "bmcp/errors.hpp"
#include "bmcp/philox.hpp"

namespace bmcp {

Simulator position_at(const Simulator& parent, double t) {
    if (!(t >= 0.0)) throw HistoryUnavailable("cannot position before the parent's start (t < 0)");
    Simulator copy = parent.now() <= t
                         ? parent
                         : Simulator(parent.params(), parent.initial_configuration(), parent.clock(), parent.options());
    copy.advance_through_absolute(copy.clock().time_offset() + t);
    return copy;
}

namespace {

// `p` already holds every ring up to the spawn time.
AuxiliaryProcess spawn_from_positioned(const Simulator& p, double t, double child_horizon) {
    const auto& pp = p.params();
    const Params child_params = Params::right_edge(pp.lambda_i, pp.boost_rate());
    const auto r = p.configuration().cached_right();
    const Site offset = r.value_or(0);  // empty parent: edge taken as 0
    const ClockFieldView view(p.clock().field(), p.clock().space_offset() + offset, p.clock().time_offset() + t);

    SimulatorOptions opts = p.options();
    opts.mode = WindowMode::Open;
    opts.record_events = false;
    const Site w = std::max(opts.truncation.halfwidth(child_params, child_horizon), opts.truncation.guard_width + 2);
    const Site origin[] = {0};
    auto cfg = Configuration::from_sites(-w, w, origin);

    return AuxiliaryProcess{"seed:" + std::to_string(p.clock().field().master_seed()),
                            t,
                            offset,
                            !r.has_value(),
                            Simulator(child_params, std::move(cfg), view, opts),
                            std::nullopt};
}

}  // namespace

AuxiliaryProcess spawn_auxiliary(const Simulator& parent, double t, double child_horizon) {
    const Simulator p = position_at(parent, t);
    if (p.invalid()) throw HistoryUnavailable("parent replay to the spawn time is invalid: " +
                                              p.trajectory().invalid_reason);
    return spawn_from_positioned(p, t, child_horizon);
}

CouplingReport verify_edge_identity(const Simulator& parent, const AuxiliaryProcess& aux, double horizon) {
    CouplingReport rep;
    rep.seed = parent.clock().field().master_seed();
    rep.spawn_time = aux.spawn_time;
    rep.space_offset = aux.space_offset;
    rep.parent_empty = aux.parent_empty;
    rep.horizon = horizon;

    Simulator c = aux.child.now() == 0.0 ? aux.child
                                         : Simulator(aux.child.params(), aux.child.initial_configuration(),
                                                     aux.child.clock(), aux.child.options());
    if (aux.parent_empty) {
        const auto tr = c.run_until(horizon);
        rep.child_extinction_time = tr.extinction_time;
        rep.invalid = tr.invalid;
        rep.invalid_reason = tr.invalid_reason;
        return rep;
    }

    Simulator p = position_at(parent, aux.spawn_time);
    const Site r = aux.space_offset;
    const double start = c.clock().time_offset();
    const double end = start + horizon;

    auto fail = [&](double s, std::string why) { rep.failures.push_back({s, std::move(why)}); };
    auto check = [&](double s) {
        const auto& cc = c.configuration();
        const auto& pc = p.configuration();
        ++rep.checks;
        const auto pr = pc.cached_right();
        if (!pr) return fail(s, "parent empty while the auxiliary lives");
        const Site rc = *cc.cached_right();
        if (*pr != r + rc)
            return fail(s, "right edge " + std::to_string(*pr) + " != " + std::to_string(r) + " + " +
                               std::to_string(rc));
        for (Site x = *cc.cached_left(); x <= rc; ++x) {
            if (pc.infected(r + x) != cc.infected(x))
                return fail(s, "coupled region disagrees at child site " + std::to_string(x));
        }
    };

    try {
        if (!c.configuration().empty()) check(0.0);
        while (!c.configuration().empty() && rep.failures.size() < 32) {
            const double tn = std::min(p.next_event_time_absolute(), c.next_event_time_absolute());
            if (tn > end) break;
            p.advance_through_absolute(tn);
            c.advance_through_absolute(tn);
            if (p.invalid() || c.invalid()) break;
            if (!c.configuration().empty()) check(tn - start);
        }
    } catch (const WindowOverflow&) {
        // reported through the invalid flags below
    }
    if (p.invalid() || c.invalid()) {
        rep.invalid = true;
        rep.invalid_reason = p.invalid() ? "parent: " + p.trajectory().invalid_reason
                                         : "auxiliary: " + c.trajectory().invalid_reason;
    }
    rep.child_extinction_time = c.trajectory().extinction_time;
    return rep;
}

RenewalRecord detect_renewal(const Simulator& parent, double monitor_horizon, double cap) {
    if (!(monitor_horizon > 0.0)) throw std::invalid_argument("monitor_horizon must be > 0");
    RenewalRecord rec;
    rec.monitor_horizon = monitor_horizon;
    Simulator p = position_at(parent, 0.0);
    double Ti = 0.0;
    while (true) {
        p.advance_through_absolute(p.clock().time_offset() + Ti);
        auto aux = spawn_from_positioned(p, Ti, monitor_horizon);
        const auto tr = aux.child.run_until_extinction(monitor_horizon);
        if (tr.invalid) throw WindowOverflow("renewal attempt invalid: " + tr.invalid_reason);
        if (!tr.extinct()) {
            rec.T = Ti;
            rec.I = rec.attempt_durations.size() + 1;
            return rec;
        }
        rec.attempt_durations.push_back(*tr.extinction_time);
        Ti += *tr.extinction_time;
        if (Ti > cap) {
            rec.T = Ti;
            rec.I = rec.attempt_durations.size();
            rec.exhausted = true;
            throw MonitorExhausted("renewal monitor exceeded cap: " + to_json(rec).dump());
        }
    }
}

bool DominationReport::all_pass() const {
    return std::all_of(points.begin(), points.end(), [](const DominationPoint& p) { return p.pass; });
}

DominationReport domination_check_liggett(const Params& params, int n, const std::vector<double>& t_grid,
                                          std::uint64_t trials, std::uint64_t seed, std::vector<Site> spread_set) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    DominationReport rep;
    if (spread_set.empty())
        for (int k = 0; k < n; ++k) spread_set.push_back(5 * k);
    if (static_cast<int>(spread_set.size()) != n) throw std::invalid_argument("spread set must have n sites");
    rep.spread_set = spread_set;
    for (int k = 0; k < n; ++k) rep.contiguous_set.push_back(k);

    const double t_max = t_grid.empty() ? 0.0 : *std::max_element(t_grid.begin(), t_grid.end());
    std::vector<std::uint64_t> alive_a(t_grid.size(), 0), alive_b(t_grid.size(), 0);
    std::uint64_t used = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        auto death = [&](const std::vector<Site>& set, std::uint64_t s) -> std::optional<double> {
            if (t_max <= 0.0) return std::nullopt;
            auto sim = make_simulator(params, FiniteSet{set}, s, t_max);
            const auto tr = sim.run_until_extinction(t_max);
            if (tr.invalid) throw WindowOverflow("domination trial invalid: " + tr.invalid_reason);
            return tr.extinction_time;
        };
        const auto da = death(rep.spread_set, derive_trial_seed(seed, 2 * i));
        const auto db = death(rep.contiguous_set, derive_trial_seed(seed, 2 * i + 1));
        ++used;
        for (std::size_t k = 0; k < t_grid.size(); ++k) {
            alive_a[k] += !da || *da > t_grid[k];
            alive_b[k] += !db || *db > t_grid[k];
        }
    }
    rep.trials = used;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        DominationPoint pt;
        pt.t = t_grid[k];
        const double N = static_cast<double>(std::max<std::uint64_t>(used, 1));
        pt.p_spread = alive_a[k] / N;
        pt.p_contiguous = alive_b[k] / N;
        pt.se = std::sqrt(pt.p_spread * (1 - pt.p_spread) / N + pt.p_contiguous * (1 - pt.p_contiguous) / N);
        pt.pass = pt.p_spread >= pt.p_contiguous - 3.0 * pt.se;
        rep.points.push_back(pt);
    }
    return rep;
}

nlohmann::json to_json(const CouplingReport& r) {
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& f : r.failures) fails.push_back({{"time", f.time}, {"reason", f.reason}});
    return {{"seed", r.seed},
            {"spawn_time", r.spawn_time},
            {"space_offset", r.space_offset},
            {"parent_empty", r.parent_empty},
            {"horizon", r.horizon},
            {"checks", r.checks},
            {"all_pass", r.all_pass()},
            {"failures", fails},
            {"child_extinction_time",
             r.child_extinction_time ? nlohmann::json(*r.child_extinction_time) : nlohmann::json(nullptr)},
            {"invalid", r.invalid},
            {"invalid_reason", r.invalid_reason}};
}

nlohmann::json to_json(const RenewalRecord& r) {
    return {{"T", r.T},
            {"I", r.I},
            {"attempt_durations", r.attempt_durations},
            {"monitor_horizon", r.monitor_horizon},
            {"exhausted", r.exhausted}};
}

nlohmann::json to_json(const DominationReport& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : r.points)
        pts.push_back({{"t", p.t},
                       {"p_spread", p.p_spread},
                       {"p_contiguous", p.p_contiguous},
                       {"se", p.se},
                       {"pass", p.pass}});
    return {{"spread_set", r.spread_set},
            {"contiguous_set", r.contiguous_set},
            {"trials", r.trials},
            {"points", pts},
            {"all_pass", r.all_pass()}};
}

}  // namespace bmcp
