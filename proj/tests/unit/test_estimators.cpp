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
#include <random>

#include "bmcp/errors.hpp"
#include "bmcp/estimators.hpp"
#include "bmcp/stats.hpp"

using namespace bmcp;

namespace {

TrialSummary edge_walk(std::uint64_t i, double drift, int horizon, std::mt19937_64& rng) {
    TrialSummary s;
    s.index = i;
    s.seed = 1000 + i;
    s.censor_time = horizon;
    std::normal_distribution<double> step(drift, 1.0);
    double r = 0.0;
    for (int t = 0; t <= horizon; ++t) {
        if (t > 0) r += step(rng);
        TraceSample smp;
        smp.time = t;
        smp.right = static_cast<Site>(std::lround(r));
        s.samples.push_back(smp);
    }
    return s;
}

TrialSummary dead_at(std::uint64_t i, std::optional<double> tau, double t_max) {
    TrialSummary s;
    s.index = i;
    s.seed = i;
    s.extinction_time = tau;
    s.censor_time = tau ? 0.0 : t_max;
    return s;
}

}  // namespace

TEST_CASE("census counts invalid, extinct and censored trials") {
    std::vector<TrialSummary> t{dead_at(0, 1.0, 10), dead_at(1, std::nullopt, 10), dead_at(2, 3.0, 10)};
    t[2].valid = false;
    const auto c = census(t);
    CHECK(c.total == 3);
    CHECK(c.invalid == 1);
    CHECK(c.extinct == 1);
    CHECK(c.censored == 1);
    CHECK(c.invalid_fraction == doctest::Approx(1.0 / 3));
}

TEST_CASE("estimators ignore input order") {
    std::mt19937_64 rng(1);
    std::vector<TrialSummary> t;
    for (int i = 0; i < 60; ++i) t.push_back(edge_walk(i, 0.5, 64, rng));
    const auto a = estimate_edge_speed(t, 64);
    std::reverse(t.begin(), t.end());
    const auto b = estimate_edge_speed(t, 64);
    CHECK(a.alpha == b.alpha);
    CHECK(a.se == b.se);
    CHECK(a.alpha == doctest::Approx(0.5).epsilon(0.3));
}

TEST_CASE("edge speed needs 30 trials") {
    std::mt19937_64 rng(2);
    std::vector<TrialSummary> t;
    for (int i = 0; i < 10; ++i) t.push_back(edge_walk(i, 0.5, 8, rng));
    CHECK_THROWS_AS(estimate_edge_speed(t, 8), TooFewTrials);
}

TEST_CASE("random walk edges look gaussian with linear variance") {
    std::mt19937_64 rng(3);
    std::vector<TrialSummary> t;
    for (int i = 0; i < 600; ++i) t.push_back(edge_walk(i, 0.3, 256, rng));
    const auto rep = clt_diagnostics(t, {32, 64, 128, 256});
    CHECK(rep.variance_fit.r2 > 0.9);
    CHECK(rep.sigma2_positive);
    CHECK(rep.scales.back().normality.p_value > 1e-3);
    const auto prof = large_deviation_profile(t, {32, 64, 128, 256});
    CHECK(prof.nonincreasing);
}

TEST_CASE("survival curve from synthetic survival counts") {
    std::vector<int> sizes{1, 2, 4};
    std::vector<std::vector<TrialSummary>> by;
    for (int k = 0; k < 3; ++k) {
        std::vector<TrialSummary> v;
        const int survivors = 100 * (k + 1);
        for (int i = 0; i < 1000; ++i)
            v.push_back(dead_at(i, i < survivors ? std::nullopt : std::optional<double>(1.0), 50));
        by.push_back(v);
    }
    const auto c = survival_curve(sizes, by, 50);
    CHECK(c.points[0].theta == doctest::Approx(0.1));
    CHECK(c.monotone);
    CHECK(c.log_fit.slope > 0.0);
}

TEST_CASE("extinction tail of a Weibull sample recovers its shape") {
    std::mt19937_64 rng(4);
    std::weibull_distribution<double> w(0.5, 10.0);
    std::vector<TrialSummary> t;
    for (int i = 0; i < 5000; ++i) {
        const double x = w(rng);
        t.push_back(dead_at(i, x < 1000 ? std::optional<double>(x) : std::nullopt, 1000));
    }
    const auto fit = extinction_tail(t, 1000);
    CHECK(fit.a == doctest::Approx(0.5).epsilon(0.2));
    CHECK(fit.a_ci.lo > 0.0);
    CHECK_THROWS_AS(extinction_tail(std::vector<TrialSummary>(t.begin(), t.begin() + 100), 1000),
                    InsufficientExtinctions);
}

TEST_CASE("an iid null sits under the noise floor") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    std::vector<IncrementSeries> s(100);
    for (auto& x : s) {
        double ar = 0.0;
        for (int k = 0; k < 400; ++k) {
            ar = 0.6 * ar + z(rng);
            x.delta.push_back(ar);
        }
    }
    const auto dep = mixing_profile(s, 6);
    CHECK(dep.alpha[1] > dep.noise_floor);
    CHECK(dep.trend_slope < 0.0);
    const auto null = mixing_profile(iid_null(s, 1), 6);
    CHECK(null.alpha[1] < dep.alpha[1]);
    CHECK(null.lags_above_floor <= 1);
    CHECK_THROWS_AS(mixing_profile(std::vector<IncrementSeries>(2, IncrementSeries{{1.0, 2.0}}), 1),
                    InsufficientTrials);
}

TEST_CASE("geometric attempt counts pass the goodness-of-fit test") {
    std::mt19937_64 rng(6);
    std::geometric_distribution<int> g(0.4);
    std::exponential_distribution<double> e(1.0);
    std::vector<RenewalRecord> recs;
    for (int i = 0; i < 1000; ++i) {
        RenewalRecord r;
        r.I = static_cast<std::uint64_t>(g(rng)) + 1;
        for (std::uint64_t k = 1; k < r.I; ++k) r.attempt_durations.push_back(e(rng));
        for (double d : r.attempt_durations) r.T += d;
        recs.push_back(r);
    }
    const auto rep = renewal_analysis(recs);
    CHECK(rep.p_hat == doctest::Approx(0.4).epsilon(0.1));
    CHECK(rep.geometric_fit.p_value > 1e-3);
    CHECK(rep.tail_exponent > 0.0);
}

TEST_CASE("statistics helpers") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(stats::mean(x) == 3.0);
    CHECK(stats::variance(x) == 2.5);
    const auto f = stats::linear_fit(x, std::vector<double>{3, 5, 7, 9, 11});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
    CHECK(stats::chi2_sf(5.991464547, 2) == doctest::Approx(0.05).epsilon(1e-6));
}
