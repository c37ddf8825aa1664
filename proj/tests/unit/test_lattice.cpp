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

#include <nlohmann/json.hpp>

#include "bmcp/lattice.hpp"

using namespace bmcp;

TEST_CASE("configuration edges and counts") {
    const Site s[] = {-3, 0, 5};
    auto c = Configuration::from_sites(-10, 10, s);
    CHECK(right_edge(c) == 5);
    CHECK(left_edge(c) == -3);
    CHECK(cardinality(c) == 3);
    c.recover(5);
    CHECK(right_edge(c) == 0);
    c.infect(9);
    CHECK(right_edge(c) == 9);
    CHECK(c.audit());
    c.recover(-3);
    c.recover(0);
    c.recover(9);
    CHECK(c.empty());
    CHECK_FALSE(right_edge(c).has_value());
    CHECK_FALSE(shift_to_right_edge(c).has_value());
}

TEST_CASE("shift puts the rightmost infected site at the origin") {
    const Site s[] = {2, 4, 7};
    const auto c = Configuration::from_sites(0, 10, s);
    const auto shifted = shift_to_right_edge(c);
    REQUIRE(shifted);
    CHECK(right_edge(*shifted) == 0);
    CHECK(shifted->sites() == std::vector<Site>{-5, -3, 0});
}

TEST_CASE("truncated half-lines report infinite left edge and size") {
    const auto c = Configuration::half_line(-50, 20, 0, 4);
    CHECK(right_edge(c) == 0);
    CHECK(left_edge(c) == kMinusInfinity);
    CHECK(cardinality(c) == kInfiniteCount);
    CHECK(c.is_frozen(-50));
    CHECK_FALSE(c.is_frozen(-46));
}

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(Params::boundary(1.6489, 0.5).validate());
    CHECK(Params::boundary(1.0, 0.5).boost_rate() == doctest::Approx(0.5));
    CHECK(Params::standard(2.0).boost_rate() == 0.0);
    CHECK_FALSE(Params::right_edge(1.0, 0.5).boosts_left());
    CHECK(Params::boundary(1.0, 0.5).boosts_left());
    Params bad{1.0, 0.5, 1.0, Variant::BoundaryModified};
    CHECK_THROWS(bad.validate());
    Params negative{-1.0, 0.5, 1.0, Variant::Standard};
    CHECK_THROWS(negative.validate());
}

TEST_CASE("initial condition strings round-trip through json") {
    for (const char* text : {"origin", "set:0,3,7", "halfline:400", "stationary:200:400"}) {
        const auto ic = parse_initial_condition(text);
        CHECK(to_json(initial_condition_from_json(to_json(ic))) == to_json(ic));
    }
    CHECK(std::get<FiniteSet>(parse_initial_condition("set:0,3,7")).sites == std::vector<Site>{0, 3, 7});
    CHECK(std::get<StationaryApprox>(parse_initial_condition("stationary:200")).burn_in == 200.0);
    CHECK_THROWS(parse_initial_condition("everywhere"));
    CHECK_THROWS(validate(FiniteSet{}));
}

TEST_CASE("variant names") {
    for (auto v : {Variant::Standard, Variant::RightEdgeModified, Variant::BoundaryModified})
        CHECK(parse_variant(to_string(v)) == v);
    CHECK_THROWS(parse_variant("other"));
}
