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
#include <sstream>

#include "bmcp/errors.hpp"
#include "bmcp/exact_oracle.hpp"

using namespace bmcp;

TEST_CASE("one site: extinction probability is 1 - exp(-t)") {
    for (auto v : {Variant::Standard, Variant::RightEdgeModified, Variant::BoundaryModified}) {
        const auto m = build_generator(1, Params{1.6489, 2.1489, 1.0, v});
        for (double t : {0.1, 1.0, 5.0, 20.0})
            CHECK(std::abs(extinction_probability_by(m, t)[1] - (1.0 - std::exp(-t))) <= 1e-9);
        CHECK(expected_extinction_time(m)[1] == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("generator rows sum to zero and exit rates match the diagonal") {
    const Params p = Params::boundary(1.3, 0.7);
    const auto m = build_generator(4, p);
    for (int s = 0; s < static_cast<int>(m.states()); ++s) {
        double row = 0.0, diag = 0.0;
        for (decltype(m.generator)::InnerIterator it(m.generator, s); it; ++it) {
            row += it.value();
            if (it.col() == s) diag = it.value();
        }
        CHECK(std::abs(row) <= 1e-12);
        CHECK(-diag == doctest::Approx(exit_rate(4, p, static_cast<std::uint32_t>(s))));
    }
    CHECK(exit_rate(4, p, 0) == 0.0);
}

TEST_CASE("two sites, standard process: closed-form check of E[tau]") {
    // From {both}: rate 2 to a single site; single site: rate 1 + lambda, dies w.p. 1/(1+lambda).
    const double l = 0.8;
    const auto m = build_generator(2, Params::standard(l));
    const auto e = expected_extinction_time(m);
    // e1 = (1 + l e2) / (1 + l), e2 = 1/2 + e1.
    const double e1 = (1.0 + l * 0.5) / 1.0;
    CHECK(e[0b01] == doctest::Approx(e1).epsilon(1e-10));
    CHECK(e[0b11] == doctest::Approx(0.5 + e1).epsilon(1e-10));
}

TEST_CASE("extinction probability is nondecreasing in t and monotone in the initial set") {
    const auto m = build_generator(3, Params::boundary(1.6489, 0.5));
    double prev = 0.0;
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const auto q = extinction_probability_by(m, t);
        CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-9));  // Poisson truncation mass
        CHECK(q[0b111] >= prev - 1e-12);
        CHECK(q[0b111] <= q[0b011] + 1e-12);
        prev = q[0b111];
    }
}

TEST_CASE("oracle limits and output") {
    CHECK_THROWS_AS(build_generator(kOracleMaxSites + 1, Params::standard(1.0)), TooLarge);
    CHECK_THROWS(build_generator(0, Params::standard(1.0)));
    CHECK(state_bits(3, 0b001) == "100");
    std::ostringstream os;
    write_oracle_csv(os, build_generator(1, Params::standard(1.0)), {1.0});
    CHECK(os.str().rfind("initial_state_bits,t,extinction_prob\n", 0) == 0);
}
