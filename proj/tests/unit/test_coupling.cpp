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

#include "bmcp/coupling.hpp"
#include "bmcp/errors.hpp"
#include "bmcp/philox.hpp"

using namespace bmcp;

TEST_CASE("auxiliary processes track the parent's right edge exactly") {
    const Params p = Params::boundary(1.6489, 0.5);
    std::uint64_t checks = 0;
    for (std::uint64_t i = 0; i < 40; ++i) {
        const std::uint64_t seed = derive_trial_seed(17, i);
        const double t = 0.5 * static_cast<double>(i % 20);
        const InitialCondition init = i % 2 ? InitialCondition{HalfLine{120}} : SingleOrigin{};
        const auto parent = make_simulator(p, init, seed, t + 30.0);
        const auto aux = spawn_auxiliary(parent, t, 30.0);
        const auto rep = verify_edge_identity(parent, aux, 30.0);
        CHECK_FALSE(rep.invalid);
        CHECK(rep.all_pass());
        checks += rep.checks;
    }
    CHECK(checks > 1000);
}

TEST_CASE("auxiliary of an empty parent starts at offset zero") {
    const Params p = Params::boundary(0.2, 0.1);
    auto parent = make_simulator(p, SingleOrigin{}, 3, 100.0);
    const auto tr = parent.run_until_extinction(100.0);
    REQUIRE(tr.extinct());
    const auto aux = spawn_auxiliary(parent, *tr.extinction_time + 1.0, 10.0);
    CHECK(aux.parent_empty);
    CHECK(aux.space_offset == 0);
}

TEST_CASE("positioning before the start is refused") {
    const auto parent = make_simulator(Params::standard(1.0), SingleOrigin{}, 1, 10.0);
    CHECK_THROWS_AS(position_at(parent, -1.0), HistoryUnavailable);
}

TEST_CASE("positioned copies match a straight run") {
    const Params p = Params::boundary(1.6489, 0.5);
    auto a = make_simulator(p, SingleOrigin{}, 12, 40.0);
    a.advance_through_absolute(15.0);
    auto ahead = make_simulator(p, SingleOrigin{}, 12, 40.0);
    ahead.advance_through_absolute(30.0);
    CHECK(position_at(ahead, 15.0).configuration() == a.configuration());
}

TEST_CASE("renewal records end with a surviving attempt") {
    const Params p = Params::boundary(1.6489, 0.5);
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto parent = make_simulator(p, SingleOrigin{}, derive_trial_seed(5, i), 300.0);
        const auto rec = detect_renewal(parent, 50.0, 200.0);
        CHECK(rec.I == rec.attempt_durations.size() + 1);
        double sum = 0.0;
        for (double d : rec.attempt_durations) {
            CHECK(d < 50.0);
            sum += d;
        }
        CHECK(rec.T == doctest::Approx(sum));
    }
}

TEST_CASE("spread-out pairs survive at least as well as adjacent pairs") {
    const auto rep = domination_check_liggett(Params::standard(1.6489), 2, {0.0, 5.0, 10.0}, 1500, 9);
    CHECK(rep.spread_set == std::vector<Site>{0, 5});
    CHECK(rep.all_pass());
}
