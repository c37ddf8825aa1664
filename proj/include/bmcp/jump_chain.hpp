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

// Direct-method jump-chain kernel.
//
// Same law as the clock-field Simulator for a single process, but no shared
// clock realization: each transition costs one generator call, which gives
// both the exponential holding time and the uniform choice among the
// currently effective transitions. Recoverable sites and open directed
// edges (infected source, allowed susceptible target) are kept in indexed
// lists so the choice is O(1).

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "bmcp/philox.hpp"
#include "bmcp/simulator.hpp"

namespace bmcp {

class JumpChainSimulator {
public:
    JumpChainSimulator(Params params, Configuration initial, std::uint64_t seed, SimulatorOptions options = {});

    const Params& params() const { return params_; }
    const Configuration& configuration() const { return cfg_; }
    double now() const { return now_; }
    bool invalid() const { return trace_.invalid; }
    const Trajectory& trajectory() const { return trace_; }
    std::uint64_t attempts() const { return counter_; }

    Trajectory run_until(double t);
    Trajectory run_until_extinction(double t_max);
    void reset_running_extremes();

private:
    struct Jump {
        double time;
        double choice;  // uniform in [0, total rate)
        bool right_open;
        bool left_open;
    };
    double rate(bool right_open, bool left_open) const;
    Jump draw();
    void refill(std::uint64_t base);
    void apply(const Jump& jump);
    void infect(Site y, bool tainted);
    void recover(Site x);
    void add_edge(Site x, int dir);
    void drop_edge(Site x, int dir);
    void refresh_edge(Site x, int dir);
    bool boost_open(bool right) const;
    bool target_allowed(Site y) const;
    void after_change();
    void emit_samples_before(double t, bool inclusive);
    void mark_invalid(const std::string& reason);
    std::size_t index(Site x) const { return static_cast<std::size_t>(x - cfg_.lo()); }

    Params params_;
    double boost_rate_ = 0.0;
    bool boosts_right_ = false;
    bool boosts_left_ = false;
    SimulatorOptions options_;
    Configuration cfg_;
    PhiloxKey key_;
    std::uint64_t counter_ = 0;
    // Generator outputs for counters [block_base_, block_base_ + kBlock), computed
    // together so the independent Philox chains and logs overlap.
    static constexpr std::size_t kBlock = 16;
    std::uint64_t block_base_ = kBlock;  // forces a refill at counter 0
    std::array<double, kBlock> holding_{};  // Exp(1) draws
    std::array<double, kBlock> unit_{};     // uniforms in [0, 1)
    double now_ = 0.0;
    std::optional<Jump> pending_;

    std::vector<Site> recoverable_;    // infected, not frozen; any order
    std::vector<std::int32_t> rpos_;   // index into recoverable_, -1 if absent
    std::vector<std::uint32_t> edges_; // open edges, 2 * index(source) + (dir < 0)
    std::vector<std::int32_t> epos_;   // index into edges_, -1 if closed

    std::vector<std::uint8_t> tainted_;
    Site taint_front_ = 0;

    Trajectory trace_;
    std::uint64_t next_sample_ = 0;
    Site right_max_ = 0;
    Site right_min_ = 0;
};

JumpChainSimulator make_jump_chain(const Params& params, const InitialCondition& init, std::uint64_t seed,
                                   double horizon, const SimulatorOptions& options = {});

/// One trial of the law-level experiments with the kernel chosen in
/// `options`: finite starts run to extinction or `horizon`, HalfLine runs to
/// `horizon`, StationaryApprox runs burn-in then `horizon` and is rebased.
Trajectory simulate_trial(const Params& params, const InitialCondition& init, std::uint64_t seed, double horizon,
                          const SimulatorOptions& options);

}  // namespace bmcp
