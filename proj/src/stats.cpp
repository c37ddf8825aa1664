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

#include "bmcp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace bmcp::stats {

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double standard_error(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

double quantile(std::vector<double> x, double q) {
    if (x.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(x.begin(), x.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(x.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= x.size()) return x.back();
    const double f = pos - static_cast<double>(i);
    return x[i] * (1.0 - f) + x[i + 1] * f;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
    if (x.size() != y.size() || (!w.empty() && w.size() != x.size()))
        throw std::invalid_argument("linear_fit: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("linear_fit needs at least 2 points");
    auto wt = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += wt(i);
        sx += wt(i) * x[i];
        sy += wt(i) * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += wt(i) * (x[i] - mx) * (x[i] - mx);
        sxy += wt(i) * (x[i] - mx) * (y[i] - my);
        syy += wt(i) * (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("linear_fit: x has no spread");
    LinearFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        sse += wt(i) * r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    if (n > 2) {
        const double s2 = sse / static_cast<double>(n - 2);
        f.se_slope = std::sqrt(s2 / sxx);
        f.se_intercept = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
    }
    return f;
}

double normal_cdf(double z) { return boost::math::cdf(boost::math::normal_distribution<>(), z); }

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }

double student_t_quantile(double p, double dof) {
    return boost::math::quantile(boost::math::students_t_distribution<>(dof), p);
}

double chi2_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(dof), x));
}

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 1.0) {
        // cdf = sqrt(2 pi)/x * sum exp(-(2k-1)^2 pi^2 / (8 x^2))
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double a = 2.0 * k - 1.0;
            s += std::exp(-a * a * pi2 / (8.0 * x * x));
        }
        return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s;
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

double ks_p(double d, double n_eff) {
    const double sq = std::sqrt(n_eff);
    return kolmogorov_sf(d * (sq + 0.12 + 0.11 / sq));
}

}  // namespace

TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
    if (x.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return {d, ks_p(d, n)};
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {d, ks_p(d, na * nb / (na + nb))};
}

Moments moments(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    if (x.size() < 3) return {};
    const double m = mean(x);
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
        const double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 <= 0.0) return {};
    return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

TestResult jarque_bera(std::span<const double> x) {
    const auto mo = moments(x);
    const double n = static_cast<double>(x.size());
    const double jb = n / 6.0 * (mo.skewness * mo.skewness + mo.excess_kurtosis * mo.excess_kurtosis / 4.0);
    return {jb, chi2_sf(jb, 2.0)};
}

TestResult chi2_goodness(std::vector<double> observed, std::vector<double> expected, int fitted_params,
                         double min_expected) {
    if (observed.size() != expected.size() || observed.empty())
        throw std::invalid_argument("chi2_goodness: length mismatch");
    // Pool sparse cells into their left neighbour, then the first cell rightwards.
    std::vector<double> o, e;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o.push_back(observed[i]);
        e.push_back(expected[i]);
    }
    for (std::size_t i = o.size(); i-- > 1;) {
        if (e[i] < min_expected) {
            e[i - 1] += e[i];
            o[i - 1] += o[i];
            e.erase(e.begin() + static_cast<std::ptrdiff_t>(i));
            o.erase(o.begin() + static_cast<std::ptrdiff_t>(i));
        }
    }
    while (e.size() > 1 && e[0] < min_expected) {
        e[1] += e[0];
        o[1] += o[0];
        e.erase(e.begin());
        o.erase(o.begin());
    }
    double x2 = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i)
        if (e[i] > 0.0) x2 += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
    const int dof = static_cast<int>(o.size()) - 1 - fitted_params;
    if (dof < 1) return {x2, 1.0};
    return {x2, chi2_sf(x2, dof)};
}

Interval bootstrap_ci(std::span<const double> x, const std::function<double(std::span<const double>)>& statistic,
                      std::size_t resamples, double level, std::uint64_t seed) {
    if (x.empty()) throw std::invalid_argument("bootstrap of an empty sample");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    std::vector<double> buf(x.size()), stats;
    stats.reserve(resamples);
    for (std::size_t r = 0; r < resamples; ++r) {
        for (auto& v : buf) v = x[pick(rng)];
        const double s = statistic(buf);
        if (std::isfinite(s)) stats.push_back(s);
    }
    if (stats.empty()) return {std::nan(""), std::nan("")};
    const double a = (1.0 - level) / 2.0;
    return {quantile(stats, a), quantile(stats, 1.0 - a)};
}

double autocorrelation(std::span<const double> x, std::size_t lag) {
    if (x.size() <= lag + 1) return 0.0;
    const double m = mean(x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - m) * (x[i] - m);
        if (i + lag < x.size()) num += (x[i] - m) * (x[i + lag] - m);
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace bmcp::stats
