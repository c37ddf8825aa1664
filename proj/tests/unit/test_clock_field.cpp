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

#include "bmcp/clock_field.hpp"
#include "bmcp/digest.hpp"
#include "bmcp/errors.hpp"
#include "bmcp/philox.hpp"
#include "bmcp/stats.hpp"

using namespace bmcp;

TEST_CASE("philox4x32-10 known answers") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("sha256 of short strings") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("trial seeds are distinct and stable") {
    CHECK(derive_trial_seed(1, 0) == derive_trial_seed(1, 0));
    CHECK(derive_trial_seed(1, 0) != derive_trial_seed(1, 1));
    CHECK(derive_trial_seed(1, 0) != derive_trial_seed(2, 0));
}

TEST_CASE("arrival streams are pure functions of seed and object") {
    const ClockField a(42, {1.0, 1.5, 0.5});
    const ClockField b(42, {1.0, 1.5, 0.5});
    for (auto obj : {ClockObjectId::recovery(3), ClockObjectId::edge(-7, +1), ClockObjectId::edge(-7, -1),
                     ClockObjectId::boost_right()}) {
        ClockCursor ca(a, obj), cb(b, obj);
        double prev = 0.0;
        for (int k = 0; k < 200; ++k) {
            const double x = ca.next();
            CHECK(x == cb.next());
            CHECK(x > prev);
            CHECK(x == a.arrival(obj, static_cast<std::uint64_t>(k)));
            CHECK(a.next_arrival(obj, prev) == x);
            prev = x;
        }
    }
    CHECK(ClockField(42, {1, 1.5, 0.5}).arrival(ClockObjectId::recovery(0), 0) !=
          ClockField(43, {1, 1.5, 0.5}).arrival(ClockObjectId::recovery(0), 0));
}

TEST_CASE("resuming a cursor gives the same arrivals as a fresh query") {
    const ClockField f(7, {1.0, 2.0, 0.3});
    const auto obj = ClockObjectId::edge(5, +1);
    ArrivalCursor cur;
    double t = 0.0;
    for (int k = 0; k < 500; ++k) {
        const double after = t + 0.05 * (k % 3);
        const double x = f.next_arrival(obj, after, cur);
        CHECK(x == f.next_arrival(obj, after));
        t = x;
    }
}

TEST_CASE("inter-arrival times are exponential with the object's rate") {
    const ClockField f(2024, {1.0, 2.5, 0.0});
    ClockCursor c(f, ClockObjectId::edge(0, +1));
    std::vector<double> gaps;
    double prev = 0.0;
    for (int k = 0; k < 20000; ++k) {
        const double x = c.next();
        gaps.push_back(x - prev);
        prev = x;
    }
    const auto ks = stats::ks_one_sample(gaps, [](double x) { return 1.0 - std::exp(-2.5 * x); });
    CHECK(ks.p_value > 1e-3);
    CHECK(stats::mean(gaps) == doctest::Approx(0.4).epsilon(0.03));
}

TEST_CASE("zero-rate objects have no arrivals") {
    const ClockField f(1, {1.0, 1.0, 0.0});
    CHECK_THROWS_AS(f.next_arrival(ClockObjectId::boost_right(), 0.0), ZeroRateObject);
}

TEST_CASE("translated views read the parent's clocks") {
    const ClockField f(99, {1.0, 1.6, 0.4});
    const ClockFieldView v = f.translated_view(10, 3.5);
    const auto obj = ClockObjectId::recovery(2);
    CHECK(v.next_arrival(obj, 0.0) == doctest::Approx(f.next_arrival(ClockObjectId::recovery(12), 3.5) - 3.5));
    CHECK(v.next_arrival_absolute(ClockObjectId::edge(0, -1), 4.0) ==
          f.next_arrival(ClockObjectId::edge(10, -1), 4.0));
    CHECK(v.next_arrival_absolute(ClockObjectId::boost_left(), 4.0) ==
          f.next_arrival(ClockObjectId::boost_left(), 4.0));
}

TEST_CASE("box records list every arrival in the box in (time, object) order") {
    const ClockField f(5, {1.0, 1.2, 0.6});
    const auto rec = f.arrivals_in_box({-2, 2}, 1.0, 4.0);
    for (std::size_t k = 1; k < rec.events.size(); ++k) {
        const auto& a = rec.events[k - 1];
        const auto& b = rec.events[k];
        CHECK((a.time < b.time || (a.time == b.time && a.object < b.object)));
    }
    std::size_t recoveries_at_0 = 0;
    for (const auto& e : rec.events) {
        CHECK(e.time >= 1.0);
        CHECK(e.time <= 4.0);
        CHECK(rec.sites.contains(e.object.site));
        recoveries_at_0 += e.object == ClockObjectId::recovery(0);
    }
    std::size_t expected = 0;
    for (ClockCursor c(f, ClockObjectId::recovery(0));;) {
        const double x = c.next();
        if (x > 4.0) break;
        expected += x >= 1.0;
    }
    CHECK(recoveries_at_0 == expected);
    CHECK_THROWS_AS(f.arrivals_in_box({0, 1000000}, 0.0, 1000.0, 1e6), BoxTooLarge);
}
