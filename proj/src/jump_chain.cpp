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

#include "bmcp/jump_chain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bmcp/errors.hpp"

namespace bmcp {

namespace {

// Keeps jump-chain counters disjoint from clock-field counters, whose last
// word carries the clock kind in bits 28..30.
constexpr std::uint32_t kJumpStreamTag = 0xF0000000U;

std::uint64_t join(std::uint32_t hi, std::uint32_t lo) { return static_cast<std::uint64_t>(hi) << 32 | lo; }

}  // namespace

JumpChainSimulator::JumpChainSimulator(Params params, Configuration initial, std::uint64_t seed,
                                       SimulatorOptions options)
    : params_(params),
      options_(options),
      cfg_(std::move(initial)),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {
    params_.validate();
    boost_rate_ = params_.boost_rate();
    boosts_right_ = params_.boosts_right();
    boosts_left_ = params_.boosts_left();
    if (!(options_.cadence > 0.0)) throw std::invalid_argument("cadence must be > 0");
    const std::size_t n = static_cast<std::size_t>(cfg_.hi() - cfg_.lo() + 1);
    rpos_.assign(n, -1);
    epos_.assign(2 * n, -1);
    for (Site x : cfg_.sites()) {
        if (!cfg_.is_frozen(x)) {
            rpos_[index(x)] = static_cast<std::int32_t>(recoverable_.size());
            recoverable_.push_back(x);
        }
        refresh_edge(x, +1);
        refresh_edge(x, -1);
    }
    if (cfg_.left_boundary() == LeftBoundary::TruncatedHalfLine) {
        tainted_.assign(n, 0);
        for (Site x = cfg_.lo(); x < cfg_.lo() + cfg_.guard_width(); ++x) tainted_[index(x)] = 1;
        taint_front_ = cfg_.lo() + cfg_.guard_width() - 1;
    }
    if (const auto r = cfg_.cached_right()) right_max_ = right_min_ = *r;
    emit_samples_before(0.0, true);
    if (!tainted_.empty() && (!cfg_.cached_right() || taint_front_ >= *cfg_.cached_right()))
        mark_invalid("half-line guard reaches the right edge at start");
}

bool JumpChainSimulator::target_allowed(Site y) const {
    if (options_.mode == WindowMode::Closed) return cfg_.in_window(y);
    return cfg_.left_boundary() == LeftBoundary::Finite || y >= cfg_.lo();
}

bool JumpChainSimulator::boost_open(bool right) const {
    if (cfg_.empty()) return false;
    if (right) return boosts_right_ && target_allowed(*cfg_.cached_right() + 1);
    return boosts_left_ && cfg_.left_boundary() == LeftBoundary::Finite &&
           target_allowed(*cfg_.cached_left() - 1);
}

// Counted first and multiplied once, as in Simulator::total_jump_rate.
double JumpChainSimulator::rate(bool right_open, bool left_open) const {
    const std::uint64_t boosts = std::uint64_t{right_open} + std::uint64_t{left_open};
    return static_cast<double>(recoverable_.size()) * params_.recovery_rate +
           static_cast<double>(edges_.size()) * params_.lambda_i + static_cast<double>(boosts) * boost_rate_;
}

void JumpChainSimulator::refill(std::uint64_t base) {
    block_base_ = base;
    for (std::size_t k = 0; k < kBlock; ++k) {
        const std::uint64_t c = base + k;
        const PhiloxCounter ctr{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32), 0U, kJumpStreamTag};
        const auto w = philox4x32_10(ctr, key_);
        holding_[k] = -std::log(to_unit_open0(join(w[1], w[0])));
        unit_[k] = static_cast<double>(join(w[3], w[2]) >> 11) * 0x1.0p-53;
    }
}

JumpChainSimulator::Jump JumpChainSimulator::draw() {
    const bool right_open = boost_open(true);
    const bool left_open = boost_open(false);
    const double total = rate(right_open, left_open);
    if (!(total > 0.0)) return {kNever, 0.0, false, false};
    if (counter_ - block_base_ >= kBlock) refill(counter_);
    const std::size_t k = static_cast<std::size_t>(counter_ - block_base_);
    ++counter_;
    return {now_ + holding_[k] / total, unit_[k] * total, right_open, left_open};
}

void JumpChainSimulator::mark_invalid(const std::string& reason) {
    if (!trace_.invalid) {
        trace_.invalid = true;
        trace_.invalid_reason = reason;
    }
}

void JumpChainSimulator::add_edge(Site x, int dir) {
    const std::size_t e = 2 * index(x) + (dir < 0 ? 1 : 0);
    if (epos_[e] >= 0) return;
    epos_[e] = static_cast<std::int32_t>(edges_.size());
    edges_.push_back(static_cast<std::uint32_t>(e));
}

void JumpChainSimulator::drop_edge(Site x, int dir) {
    const std::size_t e = 2 * index(x) + (dir < 0 ? 1 : 0);
    const std::int32_t i = epos_[e];
    if (i < 0) return;
    const std::uint32_t last = edges_.back();
    edges_[static_cast<std::size_t>(i)] = last;
    epos_[last] = i;
    edges_.pop_back();
    epos_[e] = -1;
}

void JumpChainSimulator::refresh_edge(Site x, int dir) {
    if (!cfg_.in_window(x)) return;
    const Site y = x + dir;
    if (cfg_.infected(x) && target_allowed(y) && !cfg_.infected(y))
        add_edge(x, dir);
    else
        drop_edge(x, dir);
}

void JumpChainSimulator::infect(Site y, bool tainted) {
    if (options_.mode == WindowMode::Open) {
        const Site g = options_.truncation.guard_width;
        const bool finite_left = cfg_.left_boundary() == LeftBoundary::Finite;
        if (!cfg_.in_window(y) || y > cfg_.hi() - g || (finite_left && y < cfg_.lo() + g)) {
            mark_invalid("window overflow: infection reached guard site " + std::to_string(y));
            throw WindowOverflow(trace_.invalid_reason);
        }
    }
    cfg_.infect(y);
    rpos_[index(y)] = static_cast<std::int32_t>(recoverable_.size());
    recoverable_.push_back(y);
    if (cfg_.infected(y - 1))
        drop_edge(y - 1, +1);
    else if (target_allowed(y - 1))
        add_edge(y, -1);
    if (cfg_.infected(y + 1))
        drop_edge(y + 1, -1);
    else if (target_allowed(y + 1))
        add_edge(y, +1);
    if (!tainted_.empty()) {
        tainted_[index(y)] = tainted ? 1 : 0;
        if (tainted && y > taint_front_) taint_front_ = y;
    }
}

void JumpChainSimulator::recover(Site x) {
    cfg_.recover(x);
    const auto i = static_cast<std::size_t>(rpos_[index(x)]);
    const Site last = recoverable_.back();
    recoverable_[i] = last;
    rpos_[index(last)] = static_cast<std::int32_t>(i);
    recoverable_.pop_back();
    rpos_[index(x)] = -1;
    drop_edge(x, +1);
    drop_edge(x, -1);
    if (cfg_.infected(x - 1)) add_edge(x - 1, +1);
    if (cfg_.infected(x + 1)) add_edge(x + 1, -1);
    if (!tainted_.empty() && tainted_[index(x)]) {
        tainted_[index(x)] = 0;
        if (x == taint_front_) {
            Site f = x - 1;
            while (!tainted_[index(f)]) --f;  // the guard is always tainted
            taint_front_ = f;
        }
    }
}

void JumpChainSimulator::apply(const Jump& jump) {
    const double choice = jump.choice;
    const double rec_total = static_cast<double>(recoverable_.size()) * params_.recovery_rate;
    if (choice < rec_total) {
        const double scaled = params_.recovery_rate == 1.0 ? choice : choice / params_.recovery_rate;
        const auto i = std::min(static_cast<std::size_t>(scaled), recoverable_.size() - 1);
        recover(recoverable_[i]);
        after_change();
        return;
    }
    double r = choice - rec_total;
    const double edge_total = static_cast<double>(edges_.size()) * params_.lambda_i;
    if (r < edge_total) {
        const auto k = std::min(static_cast<std::size_t>(r / params_.lambda_i), edges_.size() - 1);
        const std::uint32_t e = edges_[k];
        const Site x = cfg_.lo() + static_cast<Site>(e >> 1);
        const Site y = (e & 1U) ? x - 1 : x + 1;
        infect(y, !tainted_.empty() && tainted_[index(x)] != 0);
        after_change();
        return;
    }
    r -= edge_total;
    const bool right = jump.right_open && (r < boost_rate_ || !jump.left_open);
    if (!right && !jump.left_open) {
        // Rounding put the choice past the last band; fall back to the last edge.
        if (edges_.empty()) return;
        const std::uint32_t e = edges_.back();
        const Site x = cfg_.lo() + static_cast<Site>(e >> 1);
        infect((e & 1U) ? x - 1 : x + 1, !tainted_.empty() && tainted_[index(x)] != 0);
        after_change();
        return;
    }
    infect(right ? *cfg_.cached_right() + 1 : *cfg_.cached_left() - 1, false);
    after_change();
}

void JumpChainSimulator::after_change() {
    ++trace_.event_count;
    if (cfg_.empty()) {
        if (cfg_.left_boundary() == LeftBoundary::TruncatedHalfLine)
            throw NeverDies("truncated half-line process died: truncation bug");
        trace_.extinction_time = now_;
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

void JumpChainSimulator::emit_samples_before(double t, bool inclusive) {
    while (true) {
        const double s = static_cast<double>(next_sample_) * options_.cadence;
        if (!(inclusive ? s <= t : s < t)) return;
        TraceSample smp;
        smp.time = s;
        smp.right = cfg_.cached_right();
        smp.left = left_edge(cfg_);
        smp.cardinality = cardinality(cfg_);
        smp.right_max = right_max_;
        smp.right_min = right_min_;
        trace_.samples.push_back(smp);
        ++next_sample_;
    }
}

Trajectory JumpChainSimulator::run_until(double t) {
    if (t < now_) throw std::invalid_argument("run_until target lies in the past");
    try {
        while (!cfg_.empty() && !trace_.invalid) {
            if (!pending_) pending_ = draw();
            if (pending_->time > t) break;
            const Jump j = *pending_;
            pending_.reset();
            emit_samples_before(j.time, false);
            now_ = j.time;
            apply(j);
        }
    } catch (const WindowOverflow&) {
        // flagged on the trajectory
    }
    if (!cfg_.empty() && !trace_.invalid) {
        now_ = std::max(now_, t);
        emit_samples_before(t, true);
    }
    return trace_;
}

Trajectory JumpChainSimulator::run_until_extinction(double t_max) {
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be > 0");
    run_until(t_max);
    if (!trace_.extinct() && !trace_.invalid) trace_.censor_time = t_max;
    return trace_;
}

void JumpChainSimulator::reset_running_extremes() {
    if (const auto r = cfg_.cached_right()) right_max_ = right_min_ = *r;
}

JumpChainSimulator make_jump_chain(const Params& params, const InitialCondition& init, std::uint64_t seed,
                                   double horizon, const SimulatorOptions& options) {
    return JumpChainSimulator(params, initial_window(params, init, horizon, options.truncation), seed, options);
}

namespace {

template <class Sim>
Trajectory stationary_run(Sim sim, double burn_in, double horizon) {
    sim.run_until(burn_in);
    const Site r0 = sim.configuration().cached_right().value_or(0);
    if (!sim.invalid()) {
        sim.reset_running_extremes();
        sim.run_until(burn_in + horizon);
    }
    return rebase(sim.trajectory(), burn_in, r0);
}

template <class Sim>
Trajectory plain_run(Sim sim, const InitialCondition& init, double horizon) {
    if (std::holds_alternative<HalfLine>(init)) return sim.run_until(horizon);
    return sim.run_until_extinction(horizon);
}

}  // namespace

Trajectory run_stationary_trial(const Params& params, double burn_in, double horizon, std::uint64_t seed,
                                const SimulatorOptions& options) {
    const InitialCondition init = StationaryApprox{burn_in, options.truncation.half_line_depth};
    if (options.kernel == Kernel::JumpChain)
        return stationary_run(make_jump_chain(params, init, seed, horizon, options), burn_in, horizon);
    return stationary_run(make_simulator(params, init, seed, horizon, options), burn_in, horizon);
}

Trajectory simulate_trial(const Params& params, const InitialCondition& init, std::uint64_t seed, double horizon,
                          const SimulatorOptions& options) {
    if (const auto* st = std::get_if<StationaryApprox>(&init)) {
        auto opts = options;
        if (st->depth > 0) opts.truncation.half_line_depth = st->depth;
        return run_stationary_trial(params, st->burn_in, horizon, seed, opts);
    }
    if (options.kernel == Kernel::JumpChain)
        return plain_run(make_jump_chain(params, init, seed, horizon, options), init, horizon);
    return plain_run(make_simulator(params, init, seed, horizon, options), init, horizon);
}

}  // namespace bmcp
