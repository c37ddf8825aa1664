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

#include "bmcp/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bmcp/digest.hpp"
#include "bmcp/errors.hpp"

namespace bmcp {

Site TruncationPolicy::halfwidth(const Params& p, double horizon) const {
    return static_cast<Site>(std::ceil(4.0 * (p.lambda_i + p.lambda_e + 1.0) * std::max(horizon, 0.0))) + margin;
}

nlohmann::json to_json(const TruncationPolicy& policy) {
    return {{"window_halfwidth_rule", "ceil(4*(lambda_i+lambda_e+1)*T)+margin"},
            {"margin", policy.margin},
            {"guard_width", policy.guard_width},
            {"half_line_depth", policy.half_line_depth}};
}

// ---------------------------------------------------------------------------
// Trajectory

const TraceSample* Trajectory::sample_at(double t) const {
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const TraceSample& s) { return v < s.time; });
    if (it == samples.begin()) return nullptr;
    return &*std::prev(it);
}

std::string Trajectory::serialize() const {
    ByteWriter w;
    w.put<std::uint64_t>(samples.size());
    for (const auto& s : samples) {
        w.put(s.time).put<std::uint8_t>(s.right.has_value()).put<Site>(s.right.value_or(0));
        w.put<std::uint8_t>(s.left.has_value()).put<Site>(s.left.value_or(0));
        w.put(s.cardinality).put(s.right_max).put(s.right_min);
    }
    w.put<std::uint8_t>(extinction_time.has_value()).put(extinction_time.value_or(0.0));
    w.put(censor_time).put(event_count).put<std::uint8_t>(invalid).put_string(invalid_reason);
    return w.bytes();
}

std::string Trajectory::digest() const { return sha256_hex(serialize()); }

namespace {

void write_double(std::ostream& os, double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, r.ptr - buf);
}

}  // namespace

void Trajectory::write_csv(std::ostream& os) const {
    os << "time,right_edge,left_edge,cardinality\n";
    for (const auto& s : samples) {
        write_double(os, s.time);
        os << ',';
        if (s.right) os << *s.right;
        os << ',';
        if (s.left) {
            if (*s.left == kMinusInfinity)
                os << "-inf";
            else
                os << *s.left;
        }
        os << ',';
        if (s.cardinality == kInfiniteCount)
            os << "inf";
        else
            os << s.cardinality;
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(Params params, Configuration initial, ClockFieldView clock, SimulatorOptions options)
    : params_(params),
      options_(options),
      clock_(clock),
      initial_(initial),
      cfg_(std::move(initial)),
      now_abs_(clock.time_offset()) {
    params_.validate();
    if (!(options_.cadence > 0.0)) throw std::invalid_argument("cadence must be > 0");
    const std::size_t n = static_cast<std::size_t>(cfg_.hi() - cfg_.lo() + 1);
    sched_recovery_.assign(n, Slot{});
    sched_right_.assign(n, Slot{});
    sched_left_.assign(n, Slot{});
    if (cfg_.left_boundary() == LeftBoundary::TruncatedHalfLine) {
        tainted_.assign(n, 0);
        for (Site x = cfg_.lo(); x < cfg_.lo() + cfg_.guard_width(); ++x) tainted_[index(x)] = 1;
        taint_front_ = cfg_.lo() + cfg_.guard_width() - 1;
    }
    for (Site x : cfg_.sites()) ensure_site(x);
    ensure(ClockObjectId::boost_left());
    ensure(ClockObjectId::boost_right());
    if (const auto r = cfg_.cached_right()) right_max_ = right_min_ = *r;
    emit_samples_before(0.0, true);
    if (!tainted_.empty() && (!cfg_.cached_right() || taint_front_ >= *cfg_.cached_right()))
        mark_invalid("half-line guard reaches the right edge at start");
}

Simulator::Slot& Simulator::slot(const ClockObjectId& obj) {
    switch (obj.kind) {
        case ClockKind::SiteRecovery: return sched_recovery_[index(obj.site)];
        case ClockKind::EdgeRight: return sched_right_[index(obj.site)];
        case ClockKind::EdgeLeft: return sched_left_[index(obj.site)];
        case ClockKind::BoostLeft: return sched_boost_left_;
        case ClockKind::BoostRight: return sched_boost_right_;
    }
    throw std::logic_error("bad clock kind");
}

bool Simulator::target_allowed(Site y) const {
    if (options_.mode == WindowMode::Closed) return cfg_.in_window(y);
    return cfg_.left_boundary() == LeftBoundary::Finite || y >= cfg_.lo();
}

bool Simulator::relevant(const ClockObjectId& obj) const {
    switch (obj.kind) {
        case ClockKind::SiteRecovery: return cfg_.infected(obj.site) && !cfg_.is_frozen(obj.site);
        case ClockKind::EdgeRight:
        case ClockKind::EdgeLeft: {
            const Site y = obj.target();
            return cfg_.infected(obj.site) && target_allowed(y) && !cfg_.infected(y);
        }
        case ClockKind::BoostRight: return params_.boosts_right() && !cfg_.empty();
        case ClockKind::BoostLeft:
            return params_.boosts_left() && !cfg_.empty() && cfg_.left_boundary() == LeftBoundary::Finite;
    }
    return false;
}

void Simulator::ensure(const ClockObjectId& obj) {
    if (!(clock_.rate(obj) > 0.0) || !relevant(obj)) return;
    Slot& s = slot(obj);
    if (s.scheduled != kNever) return;
    s.scheduled = clock_.next_arrival_absolute(obj, now_abs_, s.cursor);
    queue_.push({s.scheduled, obj});
}

void Simulator::ensure_site(Site x) {
    ensure(ClockObjectId::recovery(x));
    ensure(ClockObjectId::edge(x, +1));
    ensure(ClockObjectId::edge(x, -1));
}

void Simulator::drop_stale() {
    while (!queue_.empty()) {
        const Pending top = queue_.top();
        Slot& s = slot(top.object);
        if (s.scheduled != top.time) {
            queue_.pop();
            continue;
        }
        if (!relevant(top.object)) {
            s.scheduled = kNever;
            queue_.pop();
            continue;
        }
        return;
    }
}

double Simulator::next_event_time_absolute() {
    drop_stale();
    return queue_.empty() ? kNever : queue_.top().time;
}

void Simulator::mark_invalid(const std::string& reason) {
    if (!trace_.invalid) {
        trace_.invalid = true;
        trace_.invalid_reason = reason;
    }
}

void Simulator::infect_from(Site y, bool tainted) {
    if (options_.mode == WindowMode::Open) {
        const Site g = options_.truncation.guard_width;
        const bool finite_left = cfg_.left_boundary() == LeftBoundary::Finite;
        if (!cfg_.in_window(y) || y > cfg_.hi() - g || (finite_left && y < cfg_.lo() + g)) {
            mark_invalid("window overflow: infection reached guard site " + std::to_string(y));
            throw WindowOverflow(trace_.invalid_reason);
        }
    }
    cfg_.infect(y);
    if (!tainted_.empty()) {
        tainted_[index(y)] = tainted ? 1 : 0;
        if (tainted && y > taint_front_) taint_front_ = y;
    }
    ensure_site(y);
}

std::optional<EventDescriptor> Simulator::pop_and_apply() {
    drop_stale();
    if (queue_.empty()) return std::nullopt;
    const Pending top = queue_.top();
    queue_.pop();
    slot(top.object).scheduled = kNever;
    now_abs_ = top.time;

    EventDescriptor ev{now(), top.object, EventEffect::Suppressed, 0};
    const ClockObjectId& obj = top.object;
    auto taint_of = [&](Site x) { return !tainted_.empty() && tainted_[index(x)] != 0; };
    switch (obj.kind) {
        case ClockKind::SiteRecovery: {
            const Site x = obj.site;
            cfg_.recover(x);
            ev.effect = EventEffect::Recovery;
            ev.site = x;
            if (cfg_.infected(x - 1)) ensure(ClockObjectId::edge(x - 1, +1));
            if (cfg_.infected(x + 1)) ensure(ClockObjectId::edge(x + 1, -1));
            if (!tainted_.empty() && tainted_[index(x)]) {
                tainted_[index(x)] = 0;
                if (x == taint_front_) {
                    Site f = x - 1;
                    while (!tainted_[index(f)]) --f;  // the guard is always tainted
                    taint_front_ = f;
                }
            }
            break;
        }
        case ClockKind::EdgeRight:
        case ClockKind::EdgeLeft: {
            const Site y = obj.target();
            ev.effect = EventEffect::Infection;
            ev.site = y;
            infect_from(y, taint_of(obj.site));
            break;
        }
        case ClockKind::BoostRight:
        case ClockKind::BoostLeft: {
            const bool right = obj.kind == ClockKind::BoostRight;
            const Site y = right ? *cfg_.cached_right() + 1 : *cfg_.cached_left() - 1;
            if (target_allowed(y)) {
                ev.effect = EventEffect::Infection;
                ev.site = y;
                infect_from(y, false);
            }
            ensure(obj);
            break;
        }
    }
    return ev;
}

void Simulator::after_event() {
    ++trace_.event_count;
    if (cfg_.empty()) {
        if (cfg_.left_boundary() == LeftBoundary::TruncatedHalfLine)
            throw NeverDies("truncated half-line process died: truncation bug");
        trace_.extinction_time = now();
        return;
    }
    const Site r = *cfg_.cached_right();
    right_max_ = std::max(right_max_, r);
    right_min_ = std::min(right_min_, r);
    if (options_.audit_every && trace_.event_count % options_.audit_every == 0 && !cfg_.audit())
        throw std::logic_error("configuration cache audit failed");
    if (!tainted_.empty() && taint_front_ >= r) {
        mark_invalid("half-line truncation influence reached the right edge");
        throw WindowOverflow(trace_.invalid_reason);
    }
}

EventDescriptor Simulator::step() {
    if (cfg_.empty()) throw EmptyProcess("process is extinct");
    if (trace_.invalid) throw WindowOverflow("trial already invalid: " + trace_.invalid_reason);
    const double t = next_event_time_absolute();
    if (t == kNever) throw EmptyProcess("no pending clock can change the configuration");
    emit_samples_before(t - clock_.time_offset(), false);
    auto ev = pop_and_apply();
    if (options_.record_events) log_.push_back(*ev);
    after_event();
    return *ev;
}

void Simulator::record_sample(double t_local) {
    TraceSample s;
    s.time = t_local;
    s.right = cfg_.cached_right();
    s.left = left_edge(cfg_);
    s.cardinality = cardinality(cfg_);
    s.right_max = right_max_;
    s.right_min = right_min_;
    trace_.samples.push_back(s);
}

void Simulator::emit_samples_before(double t_local, bool inclusive) {
    while (true) {
        const double s = static_cast<double>(next_sample_) * options_.cadence;
        if (inclusive ? s <= t_local : s < t_local) {
            record_sample(s);
            ++next_sample_;
        } else {
            return;
        }
    }
}

void Simulator::advance_through_absolute(double t_abs) {
    while (!cfg_.empty() && !trace_.invalid) {
        if (next_event_time_absolute() > t_abs) return;
        step();
    }
}

Trajectory Simulator::run_until(double t) {
    if (t < now()) throw std::invalid_argument("run_until target lies in the past");
    const double limit = clock_.time_offset() + t;
    try {
        while (!cfg_.empty() && !trace_.invalid) {
            if (next_event_time_absolute() > limit) break;
            step();
        }
    } catch (const WindowOverflow&) {
        // flagged on the trajectory
    }
    if (!cfg_.empty() && !trace_.invalid) {
        now_abs_ = std::max(now_abs_, limit);
        emit_samples_before(t, true);
    }
    return trace_;
}

Trajectory Simulator::run_until_extinction(double t_max) {
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be > 0");
    run_until(t_max);
    if (!trace_.extinct() && !trace_.invalid) trace_.censor_time = t_max;
    return trace_;
}

void Simulator::reset_running_extremes() {
    if (const auto r = cfg_.cached_right()) right_max_ = right_min_ = *r;
}

double Simulator::total_jump_rate() const {
    if (cfg_.empty()) return 0.0;
    // Counted first and multiplied once so the sum matches the exact oracle's
    // exit rates bit for bit.
    std::uint64_t recover = 0, edges = 0, boosts = 0;
    for (Site x : cfg_.sites()) {
        if (!cfg_.is_frozen(x)) ++recover;
        for (int d : {+1, -1}) {
            const Site y = x + d;
            if (target_allowed(y) && !cfg_.infected(y)) ++edges;
        }
    }
    if (params_.boosts_right() && target_allowed(*cfg_.cached_right() + 1)) ++boosts;
    if (params_.boosts_left() && cfg_.left_boundary() == LeftBoundary::Finite &&
        target_allowed(*cfg_.cached_left() - 1))
        ++boosts;
    return static_cast<double>(recover) * params_.recovery_rate + static_cast<double>(edges) * params_.lambda_i +
           static_cast<double>(boosts) * params_.boost_rate();
}

// ---------------------------------------------------------------------------
// Factories

Configuration initial_window(const Params& params, const InitialCondition& init, double horizon,
                             const TruncationPolicy& policy) {
    validate(init);
    const Site g = policy.guard_width;
    auto finite = [&](const std::vector<Site>& sites) {
        const auto [mn, mx] = std::minmax_element(sites.begin(), sites.end());
        const Site w = std::max(policy.halfwidth(params, horizon), g + 2);
        return Configuration::from_sites(*mn - w, *mx + w, sites);
    };
    auto half = [&](Site depth, double span) {
        const Site hi = std::max(policy.halfwidth(params, span), g + 2);
        return Configuration::half_line(-depth - g, hi, 0, g);
    };
    return std::visit(
        [&](const auto& v) -> Configuration {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SingleOrigin>) {
                return finite({0});
            } else if constexpr (std::is_same_v<T, FiniteSet>) {
                return finite(v.sites);
            } else if constexpr (std::is_same_v<T, HalfLine>) {
                return half(v.depth, horizon);
            } else {
                const double span = v.burn_in + horizon;
                return half(v.depth > 0 ? v.depth : policy.depth_for(params, span), span);
            }
        },
        init);
}

Simulator make_simulator(const Params& params, const InitialCondition& init, std::uint64_t seed, double horizon,
                         const SimulatorOptions& options) {
    return Simulator(params, initial_window(params, init, horizon, options.truncation),
                     ClockFieldView(ClockField(seed, ClockRates::from(params))), options);
}

Simulator make_segment_simulator(const Params& params, int n, std::uint32_t state, std::uint64_t seed,
                                 const SimulatorOptions& options) {
    if (n < 1) throw std::invalid_argument("segment length must be >= 1");
    Configuration cfg(0, n - 1);
    for (int x = 0; x < n; ++x)
        if (state >> x & 1U) cfg.infect(x);
    auto opts = options;
    opts.mode = WindowMode::Closed;
    return Simulator(params, std::move(cfg), ClockFieldView(ClockField(seed, ClockRates::from(params))), opts);
}

Trajectory rebase(const Trajectory& trace, double t0, Site r0) {
    Trajectory out;
    out.event_count = trace.event_count;
    out.invalid = trace.invalid;
    out.invalid_reason = trace.invalid_reason;
    if (trace.extinction_time) out.extinction_time = *trace.extinction_time - t0;
    out.censor_time = trace.censor_time > 0.0 ? trace.censor_time - t0 : 0.0;
    for (const auto& s : trace.samples) {
        if (s.time < t0) continue;
        TraceSample r = s;
        r.time = s.time - t0;
        if (r.right) *r.right -= r0;
        if (r.left && *r.left != kMinusInfinity) *r.left -= r0;
        if (s.time == t0) {
            r.right_max = r.right_min = 0;
        } else {
            r.right_max -= r0;
            r.right_min -= r0;
        }
        out.samples.push_back(r);
    }
    return out;
}

StationarySample sample_stationary_shifted(const Params& params, double burn_in, Site depth, std::uint64_t seed,
                                           Site report_depth, const SimulatorOptions& options) {
    if (burn_in < 0.0) throw std::invalid_argument("burn_in must be >= 0");
    if (report_depth < 0) throw std::invalid_argument("report_depth must be >= 0");
    auto sim = make_simulator(params, HalfLine{depth}, seed, burn_in, options);
    if (burn_in > 0.0) sim.run_until(burn_in);
    const auto shifted = shift_to_right_edge(sim.configuration());
    if (!shifted) throw NeverDies("truncated half-line process died: truncation bug");
    StationarySample out;
    out.shifted = shifted->restricted(-report_depth, 0);
    out.valid = !sim.invalid();
    out.invalid_reason = sim.trajectory().invalid_reason;
    return out;
}

}  // namespace bmcp
