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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bmcp::stats {

double mean(std::span<const double> x);
/// Unbiased sample variance (n - 1 denominator); 0 for n < 2.
double variance(std::span<const double> x);
double standard_error(std::span<const double> x);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> x, double q);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double se_slope = 0.0;
    double se_intercept = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope x (optionally weighted).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w = {});

double normal_cdf(double z);
double normal_quantile(double p);
double student_t_quantile(double p, double dof);
double chi2_sf(double x, double dof);

/// P(K > x) for the Kolmogorov distribution.
double kolmogorov_sf(double x);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample KS test against a continuous CDF (asymptotic p-value with the
/// Stephens small-sample correction).
TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct Moments {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};
Moments moments(std::span<const double> x);

/// Jarque-Bera normality test (chi-square with 2 dof).
TestResult jarque_bera(std::span<const double> x);

/// Pearson chi-square goodness of fit; cells with expected < min_expected are
/// pooled into their neighbour. dof = cells - 1 - fitted_params.
TestResult chi2_goodness(std::vector<double> observed, std::vector<double> expected, int fitted_params,
                         double min_expected = 5.0);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap of `statistic` over resamples of `x`.
Interval bootstrap_ci(std::span<const double> x, const std::function<double(std::span<const double>)>& statistic,
                      std::size_t resamples, double level, std::uint64_t seed);

/// Lag-k sample autocorrelation.
double autocorrelation(std::span<const double> x, std::size_t lag);

}  // namespace bmcp::stats
