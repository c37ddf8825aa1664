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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "bmcp/errors.hpp"
#include "bmcp/jump_chain.hpp"
#include "bmcp/philox.hpp"
#include "bmcp/simulator.hpp"
#include "bmcp/stats.hpp"

using namespace bmcp;

namespace {

std::vector<double> extinction_times(const Params& p, const InitialCondition& init, double horizon, Kernel k,
                                     int trials, std::uint64_t master) {
    SimulatorOptions o;
    o.kernel = k;
    std::vector<double> out;
    for (int i = 0; i < trials; ++i) {
        const auto tr = simulate_trial(p, init, derive_trial_seed(master, i), horizon, o);
        REQUIRE_FALSE(tr.invalid);
        out.push_back(tr.extinction_time.value_or(horizon));
    }
    return out;
}

}  // namespace

TEST_CASE("a lone site dies at its first recovery ring") {
    const Params p = Params::standard(0.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto sim = make_simulator(p, SingleOrigin{}, seed, 100.0);
        const double first = sim.clock().next_arrival(ClockObjectId::recovery(0), 0.0);
        const auto tr = sim.run_until_extinction(100.0);
        REQUIRE(tr.extinct());
        CHECK(*tr.extinction_time == first);
    }
}

TEST_CASE("single-site extinction time is Exp(1) under both kernels") {
    const Params p = Params::standard(0.0);
    for (auto k : {Kernel::ClockField, Kernel::JumpChain}) {
        const auto tau = extinction_times(p, SingleOrigin{}, 100.0, k, 4000, 11);
        CHECK(stats::ks_one_sample(tau, [](double x) { return 1.0 - std::exp(-x); }).p_value > 1e-3);
    }
}

TEST_CASE("kernels agree in law on a boosted process") {
    const Params p = Params::boundary(1.6489, 0.5);
    const auto a = extinction_times(p, FiniteSet{{0, 1}}, 30.0, Kernel::ClockField, 3000, 5);
    const auto b = extinction_times(p, FiniteSet{{0, 1}}, 30.0, Kernel::JumpChain, 3000, 6);
    CHECK(stats::ks_two_sample(a, b).p_value > 1e-3);
}

TEST_CASE("runs are deterministic in the seed") {
    const Params p = Params::boundary(1.6489, 0.5);
    for (auto k : {Kernel::ClockField, Kernel::JumpChain}) {
        SimulatorOptions o;
        o.kernel = k;
        const auto a = simulate_trial(p, SingleOrigin{}, 77, 40.0, o);
        const auto b = simulate_trial(p, SingleOrigin{}, 77, 40.0, o);
        CHECK(a == b);
        CHECK(a.digest() == b.digest());
        CHECK(a.digest() != simulate_trial(p, SingleOrigin{}, 78, 40.0, o).digest());
    }
}

TEST_CASE("total jump rate counts recoveries, open edges and open boosts") {
    const Params p = Params::boundary(1.0, 0.5);
    const Site s[] = {0, 1, 3};
    auto cfg = Configuration::from_sites(-20, 20, s);
    Simulator sim(p, cfg, ClockFieldView(ClockField(1, ClockRates::from(p))));
    // 3 recoveries; edges 0->-1, 1->2, 3->2, 3->4; boosts at both ends.
    CHECK(sim.total_jump_rate() == doctest::Approx(3.0 + 4.0 * 1.0 + 2.0 * 0.5));
}

TEST_CASE("cached edges survive audits along a trajectory") {
    const Params p = Params::boundary(1.6489, 0.5);
    SimulatorOptions o;
    o.audit_every = 1;
    o.record_events = true;
    auto sim = make_simulator(p, FiniteSet{{0, 2, 4}}, 3, 30.0, o);
    const auto tr = sim.run_until_extinction(30.0);
    CHECK_FALSE(tr.invalid);
    CHECK(sim.configuration().audit());
}

TEST_CASE("replaying the event log reproduces the final configuration") {
    const Params p = Params::boundary(1.6489, 0.5);
    SimulatorOptions o;
    o.record_events = true;
    auto sim = make_simulator(p, FiniteSet{{0, 1}}, 21, 20.0, o);
    sim.run_until(20.0);
    Configuration c = sim.initial_configuration();
    for (const auto& e : sim.event_log()) {
        if (e.effect == EventEffect::Infection) c.infect(e.site);
        if (e.effect == EventEffect::Recovery) c.recover(e.site);
    }
    CHECK(c == sim.configuration());
}

TEST_CASE("a view at offset zero reproduces the parent bit for bit") {
    const Params p = Params::boundary(1.6489, 0.5);
    const ClockField f(8, ClockRates::from(p));
    const Site s[] = {0};
    const auto cfg = Configuration::from_sites(-200, 200, s);
    Simulator a(p, cfg, ClockFieldView(f));
    Simulator b(p, cfg, f.translated_view(0, 0.0));
    CHECK(a.run_until(25.0) == b.run_until(25.0));
}

TEST_CASE("closed segments never leave the window") {
    const Params p = Params::boundary(3.0, 1.0);
    auto sim = make_segment_simulator(p, 3, 0b111, 4);
    const auto tr = sim.run_until_extinction(50.0);
    CHECK_FALSE(tr.invalid);
    for (const auto& s : tr.samples) {
        if (!s.right) continue;
        CHECK(*s.right <= 2);
        CHECK(*s.left >= 0);
    }
}

TEST_CASE("edge speed is positive for a boosted half-line") {
    const Params p = Params::boundary(1.6489, 0.5);
    SimulatorOptions o;
    o.kernel = Kernel::JumpChain;
    double sum = 0.0;
    const int n = 60;
    for (int i = 0; i < n; ++i) {
        const auto tr = simulate_trial(p, StationaryApprox{50.0, 150}, derive_trial_seed(9, i), 100.0, o);
        REQUIRE_FALSE(tr.invalid);
        sum += static_cast<double>(*tr.sample_at(100.0)->right) / 100.0;
    }
    CHECK(sum / n > 0.3);
}

TEST_CASE("half-line runs flag invalid once the truncation can matter") {
    // Subcritical: the edge retreats into the frozen guard.
    const Params p = Params::standard(1.0);
    SimulatorOptions o;
    o.truncation.half_line_depth = 10;
    const auto tr = simulate_trial(p, HalfLine{10}, 3, 400.0, o);
    CHECK(tr.invalid);
    CHECK_FALSE(tr.invalid_reason.empty());
}
