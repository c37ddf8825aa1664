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

#include "bmcp/clock_field.hpp"
#include "bmcp/errors.hpp"
#include "bmcp/percolation.hpp"
#include "bmcp/philox.hpp"

using namespace bmcp;

namespace {

SpaceTimeRecord hand_record() {
    // Sites [0, 3], times [0, 2]: 0 -> 1 at 0.3, 1 -> 2 at 0.6, recovery of 1 at 0.5 (kills the second step).
    SpaceTimeRecord r;
    r.sites = {0, 3};
    r.t0 = 0.0;
    r.t1 = 2.0;
    r.events = {{0.3, ClockObjectId::edge(0, +1)},
                {0.5, ClockObjectId::recovery(1)},
                {0.6, ClockObjectId::edge(1, +1)},
                {0.9, ClockObjectId::edge(0, +1)},
                {1.2, ClockObjectId::edge(1, +1)}};
    return r;
}

}  // namespace

TEST_CASE("trivial reachability") {
    const auto r = hand_record();
    const auto same = open_path_exists(r, {3, 0.0}, {3, 2.0});
    CHECK(same.exists);
    REQUIRE(same.witness);
    CHECK(same.witness->events.empty());
    SpaceTimeRecord empty;
    empty.sites = {0, 3};
    empty.t1 = 1.0;
    CHECK_FALSE(open_path_exists(empty, {0, 0.0}, {2, 1.0}).exists);
    CHECK_THROWS_AS(open_path_exists(empty, {0, 0.0}, {2, 2.0}, {PathMode::LambdaI, {}, SpaceTimeBox{0, 3, 0, 2}}),
                    RecordIncomplete);
}

TEST_CASE("recovery rings cut paths; later steps reopen them") {
    const auto r = hand_record();
    const auto res = open_path_exists(r, {0, 0.0}, {2, 2.0});
    REQUIRE(res.exists);
    // Only the second pair of steps (0.9, 1.2) survives.
    CHECK(res.witness->events == std::vector<std::size_t>{3, 4});
    CHECK(witness_is_open(r, *res.witness, {2, 2.0}, SpaceTimeBox::covering(r)));
    CHECK_FALSE(open_path_exists(r, {0, 0.0}, {2, 1.0}).exists);
    CHECK(exhaustive_path_exists(r, {0, 0.0}, {2, 2.0}));
    CHECK_FALSE(exhaustive_path_exists(r, {0, 0.0}, {2, 1.0}));
}

TEST_CASE("boost steps attach to the running process's edge") {
    SpaceTimeRecord r;
    r.sites = {0, 3};
    r.t1 = 1.0;
    r.boosts = {{0.4, ClockObjectId::boost_right()}};
    PathQuery q{PathMode::LambdaE, {0, 2}, std::nullopt, Variant::BoundaryModified};
    // The rightmost infected site is 2, so the boost infects 3, not 1.
    CHECK(open_path_exists(r, {2, 0.0}, {3, 1.0}, q).exists);
    CHECK_FALSE(open_path_exists(r, {0, 0.0}, {1, 1.0}, q).exists);
    CHECK_FALSE(open_path_exists(r, {2, 0.0}, {3, 1.0}).exists);
    q.variant = Variant::Standard;
    CHECK_FALSE(open_path_exists(r, {2, 0.0}, {3, 1.0}, q).exists);
}

TEST_CASE("open-path search agrees with exhaustive enumeration on random small windows") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto seed = derive_trial_seed(31, i);
        const Params p = Params::boundary(0.5 + (i % 7) * 0.3, 0.2 * (i % 5));
        const auto rec = ClockField(seed, ClockRates::from(p)).arrivals_in_box({0, 3}, 0.0, 1.0 + 0.1 * (i % 9));
        if (rec.events.size() + rec.boosts.size() > 14) continue;
        for (std::uint32_t mask = 1; mask < 16; ++mask) {
            std::vector<Site> set;
            for (Site x = 0; x < 4; ++x)
                if (mask >> x & 1U) set.push_back(x);
            for (auto mode : {PathMode::LambdaI, PathMode::LambdaE}) {
                const PathQuery q{mode, set, std::nullopt, p.variant};
                for (Site from : set)
                    for (Site to = 0; to < 4; ++to) {
                        const SpaceTimePoint a{from, 0.0}, b{to, rec.t1};
                        const auto fast = open_path_exists(rec, a, b, q);
                        CHECK(fast.exists == exhaustive_path_exists(rec, a, b, q));
                        if (fast.exists) CHECK(witness_is_open(rec, *fast.witness, b, SpaceTimeBox::covering(rec)));
                        // Boosts only add infections.
                        if (mode == PathMode::LambdaI)
                            CHECK((!fast.exists || open_path_exists(rec, a, b, {PathMode::LambdaE, set, std::nullopt,
                                                                                p.variant})
                                                       .exists));
                    }
            }
        }
    }
}

TEST_CASE("box crossings") {
    const ClockField f(4, ClockRates::from(Params::standard(1.6489)));
    const auto rec = f.arrivals_in_box({0, 20}, 0.0, 10.0);
    const auto small = SpaceTimeBox::of(10, 5.0);
    const auto big = SpaceTimeBox::of(20, 5.0);
    const auto a = box_crossed_vertically(rec, small);
    if (a.vertical) {
        CHECK(box_crossed_vertically(rec, big).vertical);
        REQUIRE(a.vertical_witness);
        CHECK(witness_is_open(rec, *a.vertical_witness, *a.vertical_end, small));
    }
    CHECK_FALSE(box_crossed_vertically(rec, small, std::vector<Site>{}).vertical);

    SpaceTimeRecord tiny;
    tiny.sites = {0, 0};
    tiny.t1 = 0.1;
    CHECK(box_crossed_vertically(tiny, SpaceTimeBox::of(0, 0.1)).vertical);
    CHECK(box_crossed_horizontally(tiny, SpaceTimeBox::of(0, 0.1)).horizontal);
}

TEST_CASE("crossing probability grows with width") {
    const double narrow = vertical_crossing_probability(1.6489, 1, 16.0, 400, 3);
    const double wide = vertical_crossing_probability(1.6489, 24, 16.0, 400, 3);
    CHECK(wide > narrow);
}

TEST_CASE("edge envelope at zero infection rate") {
    std::vector<std::vector<double>> sup(1000, std::vector<double>{0.0, 0.0});
    const auto fit = fit_edge_envelope(sup, {16.0, 32.0});
    for (double p : fit.tail) CHECK(p == 0.0);
    CHECK_THROWS(fit_edge_envelope(std::vector<std::vector<double>>(10, {0.0}), {16.0}));
}
