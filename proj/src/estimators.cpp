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

#include "bmcp/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bmcp/errors.hpp"

namespace bmcp {

const TraceSample* TrialSummary::sample_at(double t) const {
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const TraceSample& s) { return v < s.time; });
    if (it == samples.begin()) return nullptr;
    return &*std::prev(it);
}

TrialSummary summarize(std::uint64_t index, std::uint64_t seed, const Params& params, const InitialCondition& init,
                       const Trajectory& trace, bool keep_samples) {
    TrialSummary s;
    s.index = index;
    s.seed = seed;
    s.params = params;
    s.init = init;
    s.digest = trace.digest();
    s.valid = !trace.invalid;
    s.invalid_reason = trace.invalid_reason;
    s.extinction_time = trace.extinction_time;
    s.censor_time = trace.censor_time;
    s.event_count = trace.event_count;
    if (keep_samples) s.samples = trace.samples;
    return s;
}

Census census(std::span<const TrialSummary> trials) {
    Census c;
    c.total = trials.size();
    for (const auto& t : trials) {
        if (!t.valid) {
            ++c.invalid;
            continue;
        }
        ++c.valid;
        if (t.extinct())
            ++c.extinct;
        else
            ++c.censored;
    }
    if (c.total) c.invalid_fraction = static_cast<double>(c.invalid) / static_cast<double>(c.total);
    if (c.valid) c.censored_fraction = static_cast<double>(c.censored) / static_cast<double>(c.valid);
    return c;
}

std::vector<const TrialSummary*> canonical_valid(std::span<const TrialSummary> trials) {
    std::vector<const TrialSummary*> out;
    for (const auto& t : trials)
        if (t.valid) out.push_back(&t);
    std::sort(out.begin(), out.end(), [](const TrialSummary* a, const TrialSummary* b) {
        return a->seed != b->seed ? a->seed < b->seed : a->index < b->index;
    });
    return out;
}

namespace {

double right_at(const TrialSummary& t, double time) {
    const TraceSample* s = t.sample_at(time);
    if (!s || !s->right || s->time != time) throw std::invalid_argument("trial has no live sample at the requested time");
    return static_cast<double>(*s->right);
}

bool has_right_at(const TrialSummary& t, double time) {
    const TraceSample* s = t.sample_at(time);
    return s && s->right && s->time == time;
}

stats::Interval wilson(std::size_t k, std::size_t n, double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double d = 1.0 + z * z / nn;
    const double c = (p + z * z / (2.0 * nn)) / d;
    const double h = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / d;
    return {std::max(0.0, c - h), std::min(1.0, c + h)};
}

}  // namespace

// ---------------------------------------------------------------------------

EdgeSpeedEstimate estimate_edge_speed(std::span<const TrialSummary> trials, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("t must be > 0");
    EdgeSpeedEstimate e;
    e.t = t;
    e.census = census(trials);
    std::vector<double> speed, unit;
    for (const auto* tr : canonical_valid(trials)) {
        if (!has_right_at(*tr, t)) continue;
        speed.push_back(right_at(*tr, t) / t);
        if (has_right_at(*tr, 1.0) && has_right_at(*tr, 0.0)) unit.push_back(right_at(*tr, 1.0) - right_at(*tr, 0.0));
    }
    if (speed.size() < 30)
        throw TooFewTrials("edge speed needs >= 30 valid trials alive at t, got " + std::to_string(speed.size()));
    e.trials = speed.size();
    e.alpha = stats::mean(speed);
    e.se = stats::standard_error(speed);
    if (!unit.empty()) {
        e.unit_mean = stats::mean(unit);
        e.unit_se = stats::standard_error(unit);
    }
    return e;
}

// ---------------------------------------------------------------------------

SurvivalCurve survival_curve(const std::vector<int>& sizes, const std::vector<std::vector<TrialSummary>>& by_size,
                             double t_max) {
    if (sizes.size() != by_size.size()) throw std::invalid_argument("one trial batch per size expected");
    SurvivalCurve c;
    c.t_max = t_max;
    std::size_t censored = 0, valid = 0;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        SurvivalPoint p;
        p.n = sizes[k];
        if (p.n < 0) throw std::invalid_argument("sizes must be >= 0");
        if (p.n == 0) {
            p.trials = by_size[k].size();
            p.ci = {0.0, 0.0};
            c.points.push_back(p);
            continue;
        }
        for (const auto* tr : canonical_valid(by_size[k])) {
            ++p.trials;
            if (!tr->extinct()) ++p.survivors;
        }
        censored += p.survivors;
        valid += p.trials;
        if (p.trials) {
            const double n = static_cast<double>(p.trials);
            p.theta = static_cast<double>(p.survivors) / n;
            p.se = std::sqrt(p.theta * (1.0 - p.theta) / n);
            const double corrected = (static_cast<double>(p.survivors) + 0.5) / (n + 1.0);
            lx.push_back(std::log(static_cast<double>(p.n)));
            ly.push_back(std::log(-std::log(1.0 - corrected)));
        }
        p.ci = wilson(p.survivors, p.trials);
        c.points.push_back(p);
    }
    for (std::size_t k = 0; k + 1 < c.points.size(); ++k) {
        const auto& a = c.points[k];
        const auto& b = c.points[k + 1];
        if (b.theta < a.theta - 3.0 * std::hypot(a.se, b.se)) c.monotone = false;
    }
    if (lx.size() >= 2) c.log_fit = stats::linear_fit(lx, ly);
    if (valid) c.censored_fraction = static_cast<double>(censored) / static_cast<double>(valid);
    return c;
}

// ---------------------------------------------------------------------------

namespace {

struct TailCurve {
    std::vector<double> tail;
    std::vector<std::size_t> count;
};

// `tau` sorted ascending (extinct trials only); n = all valid trials.
TailCurve tail_on_grid(const std::vector<double>& tau, std::size_t n, const std::vector<double>& grid) {
    TailCurve c;
    for (double t : grid) {
        const auto above = static_cast<std::size_t>(tau.end() - std::upper_bound(tau.begin(), tau.end(), t));
        c.count.push_back(above);
        c.tail.push_back(static_cast<double>(above) / static_cast<double>(n));
    }
    return c;
}

struct StretchedFit {
    stats::LinearFit fit;
    std::size_t lo = 0, hi = 0;  // grid index range [lo, hi)
    bool ok = false;
};

// log(-log(tail / total)) against log t over grid points with enough tail
// samples and a proper conditional tail in (0, 1).
StretchedFit fit_stretched(const std::vector<double>& grid, const TailCurve& c, double total, std::size_t min_count) {
    StretchedFit f;
    std::vector<double> x, y;
    bool started = false;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double ratio = c.tail[k] / total;
        const bool usable = c.count[k] >= min_count && ratio > 0.0 && ratio < 1.0 && grid[k] > 0.0;
        if (!usable) {
            if (started) break;
            continue;
        }
        if (!started) f.lo = k;
        started = true;
        f.hi = k + 1;
        x.push_back(std::log(grid[k]));
        y.push_back(std::log(-std::log(ratio)));
    }
    if (x.size() >= 3) {
        f.fit = stats::linear_fit(x, y);
        f.ok = true;
    }
    return f;
}

}  // namespace

TailFit extinction_tail(std::span<const TrialSummary> trials, double t_max, std::size_t min_extinct,
                        std::size_t min_tail_count, std::size_t grid_points, std::uint64_t seed) {
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be > 0");
    if (grid_points < 4) throw std::invalid_argument("grid_points must be >= 4");
    TailFit f;
    f.t_max = t_max;
    const auto valid = canonical_valid(trials);
    f.trials = valid.size();
    std::vector<double> tau;
    for (const auto* tr : valid)
        if (tr->extinct() && *tr->extinction_time < t_max) tau.push_back(*tr->extinction_time);
    f.extinct = tau.size();
    f.censored_fraction = f.trials ? 1.0 - static_cast<double>(f.extinct) / static_cast<double>(f.trials) : 0.0;
    if (f.extinct < min_extinct)
        throw InsufficientExtinctions("extinction tail needs >= " + std::to_string(min_extinct) +
                                      " extinctions before t_max, got " + std::to_string(f.extinct));
    std::sort(tau.begin(), tau.end());

    // Log-spaced grid from the smallest positive extinction time to t_max.
    const double t0 = std::max(tau.front(), 1e-3);
    for (std::size_t k = 0; k < grid_points; ++k)
        f.t.push_back(t0 * std::pow(t_max / t0, static_cast<double>(k) / static_cast<double>(grid_points - 1)));
    const auto curve = tail_on_grid(tau, f.trials, f.t);
    f.tail = curve.tail;
    f.count = curve.count;
    f.c = static_cast<double>(f.extinct) / static_cast<double>(f.trials);

    const auto sf = fit_stretched(f.t, curve, f.c, min_tail_count);
    if (!sf.ok) throw InsufficientExtinctions("fewer than 3 grid points with enough tail samples");
    f.fit_t_lo = f.t[sf.lo];
    f.fit_t_hi = f.t[sf.hi - 1];
    f.fit_points = sf.hi - sf.lo;
    f.a = sf.fit.slope;
    f.c_prime = std::exp(sf.fit.intercept);
    f.r2 = sf.fit.r2;

    // Bootstrap over extinction times, same grid and fit range.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, tau.size() - 1);
    std::vector<double> slopes;
    std::vector<double> sub_grid(f.t.begin() + static_cast<std::ptrdiff_t>(sf.lo),
                                 f.t.begin() + static_cast<std::ptrdiff_t>(sf.hi));
    std::vector<double> res(tau.size());
    for (int b = 0; b < 400; ++b) {
        for (auto& v : res) v = tau[pick(rng)];
        std::sort(res.begin(), res.end());
        const auto cb = tail_on_grid(res, f.trials, sub_grid);
        const auto fb = fit_stretched(sub_grid, cb, f.c, 1);
        if (fb.ok) slopes.push_back(fb.fit.slope);
    }
    if (slopes.size() >= 100) {
        f.a_ci = {stats::quantile(slopes, 0.025), stats::quantile(slopes, 0.975)};
    } else {
        const double q = stats::student_t_quantile(0.975, static_cast<double>(sf.fit.n) - 2.0);
        f.a_ci = {f.a - q * sf.fit.se_slope, f.a + q * sf.fit.se_slope};
    }
    return f;
}

TailComparison compare_tails(const TailFit& boosted_fit, std::span<const TrialSummary> control) {
    TailComparison c;
    const auto valid = canonical_valid(control);
    if (valid.empty()) throw TooFewTrials("control batch has no valid trials");
    for (std::size_t k = 0; k < boosted_fit.t.size(); ++k) {
        const double t = boosted_fit.t[k];
        if (t < boosted_fit.fit_t_lo || t > boosted_fit.fit_t_hi) continue;
        std::size_t alive = 0;
        for (const auto* tr : valid) {
            if (tr->extinct() ? *tr->extinction_time > t : tr->censor_time >= t) ++alive;
            if (!tr->extinct() && tr->censor_time < t)
                throw std::invalid_argument("control batch is censored before the fit range ends");
        }
        const double ctl = static_cast<double>(alive) / static_cast<double>(valid.size());
        c.t.push_back(t);
        c.boosted.push_back(boosted_fit.tail[k]);
        c.control.push_back(ctl);
        if (!(boosted_fit.tail[k] < ctl)) {
            c.below_everywhere = false;
            ++c.violations;
        }
    }
    return c;
}

// ---------------------------------------------------------------------------

CltReport clt_diagnostics(std::span<const TrialSummary> trials, const std::vector<double>& scales) {
    if (scales.empty()) throw std::invalid_argument("no scales");
    const auto valid = canonical_valid(trials);
    const double t_last = *std::max_element(scales.begin(), scales.end());
    std::vector<const TrialSummary*> usable;
    for (const auto* tr : valid) {
        bool ok = true;
        for (double t : scales) ok = ok && has_right_at(*tr, t);
        if (ok) usable.push_back(tr);
    }
    if (usable.size() < 30)
        throw TooFewTrials("CLT diagnostics need >= 30 valid trials, got " + std::to_string(usable.size()));
    CltReport r;
    {
        std::vector<double> v;
        for (const auto* tr : usable) v.push_back(right_at(*tr, t_last) / t_last);
        r.alpha = stats::mean(v);
    }
    std::vector<double> ts, vars;
    for (double t : scales) {
        CltScale s;
        s.t = t;
        s.trials = usable.size();
        std::vector<double> x, z;
        for (const auto* tr : usable) x.push_back(right_at(*tr, t));
        s.mean = stats::mean(x);
        s.variance = stats::variance(x);
        s.variance_over_t = s.variance / t;
        for (double v : x) z.push_back((v - r.alpha * t) / std::sqrt(t));
        s.skewness = stats::moments(z).skewness;
        const double n = static_cast<double>(z.size());
        s.skewness_se = std::sqrt(6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0)));
        s.normality = stats::jarque_bera(z);
        ts.push_back(t);
        vars.push_back(s.variance);
        r.scales.push_back(s);
    }
    if (ts.size() >= 2) {
        r.variance_fit = stats::linear_fit(ts, vars);
        r.sigma2 = r.variance_fit.slope;
        r.sigma2_se = r.variance_fit.se_slope;
        r.sigma2_positive = r.sigma2 > 3.0 * r.sigma2_se;
    }
    return r;
}

DeviationProfile large_deviation_profile(std::span<const TrialSummary> trials, const std::vector<double>& t_grid,
                                         double gamma, double b, std::optional<double> alpha) {
    if (t_grid.empty()) throw std::invalid_argument("empty t grid");
    DeviationProfile p;
    p.gamma = gamma;
    p.b = b;
    p.alpha = alpha ? *alpha : estimate_edge_speed(trials, *std::max_element(t_grid.begin(), t_grid.end())).alpha;
    const auto valid = canonical_valid(trials);
    for (double t : t_grid) {
        DeviationPoint d;
        d.t = t;
        std::size_t n = 0;
        const double thr = b * std::pow(t, 1.0 - gamma);
        for (const auto* tr : valid) {
            if (!has_right_at(*tr, t)) continue;
            ++n;
            if (std::fabs(right_at(*tr, t) - p.alpha * t) > thr) ++d.count;
        }
        if (n == 0) throw TooFewTrials("no valid trial alive at t = " + std::to_string(t));
        d.probability = static_cast<double>(d.count) / static_cast<double>(n);
        d.se = std::sqrt(d.probability * (1.0 - d.probability) / static_cast<double>(n));
        p.points.push_back(d);
    }
    for (std::size_t k = 0; k + 1 < p.points.size(); ++k) {
        const auto& a = p.points[k];
        const auto& c = p.points[k + 1];
        if (c.probability > a.probability + 2.0 * std::hypot(a.se, c.se)) p.nonincreasing = false;
    }
    return p;
}

// ---------------------------------------------------------------------------

IncrementSeries increments(const TrialSummary& trial, double horizon) {
    IncrementSeries s;
    const auto n = static_cast<std::size_t>(std::floor(horizon));
    double prev = right_at(trial, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const double cur = right_at(trial, static_cast<double>(k));
        s.delta.push_back(cur - prev);
        prev = cur;
    }
    return s;
}

MixingReport mixing_profile(const std::vector<IncrementSeries>& series, std::size_t max_lag) {
    std::vector<double> pooled;
    for (const auto& s : series) pooled.insert(pooled.end(), s.delta.begin(), s.delta.end());
    if (pooled.size() < 1000)
        throw InsufficientTrials("mixing profile needs >= 1000 increments, got " + std::to_string(pooled.size()));
    const double q1 = stats::quantile(pooled, 0.25), q2 = stats::quantile(pooled, 0.5),
                 q3 = stats::quantile(pooled, 0.75);
    auto events = [&](double d) {
        return std::array<bool, 4>{d > 0.0, d <= q1, d <= q2, d <= q3};
    };
    std::vector<std::vector<std::array<bool, 4>>> ev;
    for (const auto& s : series) {
        auto& e = ev.emplace_back();
        for (double d : s.delta) e.push_back(events(d));
    }

    MixingReport r;
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        double joint[4][4] = {};
        double pa[4] = {}, pb[4] = {};
        std::size_t pairs = 0;
        for (const auto& e : ev) {
            for (std::size_t i = 0; i + lag < e.size(); ++i) {
                ++pairs;
                for (int a = 0; a < 4; ++a) {
                    pa[a] += e[i][a];
                    pb[a] += e[i + lag][a];
                    if (!e[i][a]) continue;
                    for (int b = 0; b < 4; ++b) joint[a][b] += e[i + lag][b];
                }
            }
        }
        if (pairs == 0) break;
        const double n = static_cast<double>(pairs);
        double best = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) best = std::max(best, std::fabs(joint[a][b] / n - (pa[a] / n) * (pb[b] / n)));
        if (lag == 1) r.pairs_at_lag1 = pairs;
        double num = 0.0, cnt = 0.0;
        for (const auto& s : series) {
            if (s.delta.size() <= lag + 1) continue;
            const double w = static_cast<double>(s.delta.size() - lag);
            num += w * stats::autocorrelation(s.delta, lag);
            cnt += w;
        }
        r.lag.push_back(lag);
        r.alpha.push_back(best);
        r.autocorrelation.push_back(cnt > 0.0 ? num / cnt : 0.0);
    }
    if (r.lag.size() < 2) throw InsufficientTrials("series too short for lag 1");
    r.noise_floor = 3.0 * 0.25 / std::sqrt(static_cast<double>(r.pairs_at_lag1));

    std::vector<double> lx, ly, kx, ky;
    for (std::size_t k = 1; k < r.lag.size(); ++k) {
        kx.push_back(static_cast<double>(r.lag[k]));
        ky.push_back(r.alpha[k]);
        if (r.alpha[k] > r.noise_floor) ++r.lags_above_floor;
        // Below-floor lags stay in: noise only inflates alpha(k), which biases
        // the fitted exponent downward.
        const double ratio = r.alpha[k] / r.alpha[0];
        if (ratio > 0.0 && ratio < 1.0) {
            lx.push_back(std::log(static_cast<double>(r.lag[k])));
            ly.push_back(std::log(-std::log(ratio)));
        }
    }
    if (kx.size() >= 2) r.trend_slope = stats::linear_fit(kx, ky).slope;
    r.decay_points = lx.size();
    if (lx.size() >= 2) {
        r.decay_fit = stats::linear_fit(lx, ly);
        r.decay_exponent = r.decay_fit.slope;
    }
    r.decreasing = r.trend_slope < 0.0 && r.decay_exponent > 0.0;
    return r;
}

std::vector<IncrementSeries> iid_null(const std::vector<IncrementSeries>& series, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto out = series;
    for (auto& s : out) std::shuffle(s.delta.begin(), s.delta.end(), rng);
    return out;
}

EnvelopeCheck increment_envelope_check(std::span<const TrialSummary> trials, double t,
                                       const std::vector<double>& n_grid) {
    EnvelopeCheck e;
    e.t = t;
    std::vector<double> sup;
    double speed = 0.0;
    for (const auto* tr : canonical_valid(trials)) {
        const TraceSample* s = tr->sample_at(t);
        if (!s || s->time != t || !s->right) continue;
        sup.push_back(static_cast<double>(std::max(s->right_max, -s->right_min)));
        speed = 4.0 * (tr->params.lambda_i + tr->params.boost_rate());
    }
    e.trials = sup.size();
    if (sup.empty()) throw TooFewTrials("no valid trial alive at t");
    for (double n : n_grid) {
        EnvelopePoint p;
        p.n = n;
        p.threshold = speed * (t + n);
        p.count = static_cast<std::size_t>(std::count_if(sup.begin(), sup.end(), [&](double v) { return v > p.threshold; }));
        p.probability = static_cast<double>(p.count) / static_cast<double>(sup.size());
        e.points.push_back(p);
    }
    for (std::size_t k = 0; k + 1 < e.points.size(); ++k)
        if (e.points[k + 1].n >= e.points[k].n && e.points[k + 1].probability > e.points[k].probability)
            e.nonincreasing = false;
    return e;
}

// ---------------------------------------------------------------------------

RenewalReport renewal_analysis(const std::vector<RenewalRecord>& records) {
    RenewalReport r;
    std::vector<double> attempts, T;
    for (const auto& rec : records) {
        if (rec.exhausted) continue;
        attempts.push_back(static_cast<double>(rec.I));
        T.push_back(rec.T);
    }
    r.records = attempts.size();
    if (r.records < 30) throw TooFewTrials("renewal analysis needs >= 30 records");
    r.mean_attempts = stats::mean(attempts);
    r.p_hat = 1.0 / r.mean_attempts;

    std::map<std::uint64_t, double> hist;
    for (double a : attempts) hist[static_cast<std::uint64_t>(a)] += 1.0;
    const std::uint64_t kmax = hist.rbegin()->first;
    const double n = static_cast<double>(r.records);
    for (std::uint64_t k = 1; k <= kmax; ++k) {
        r.attempt_values.push_back(k);
        r.observed.push_back(hist.count(k) ? hist[k] : 0.0);
        const double pk = std::pow(1.0 - r.p_hat, static_cast<double>(k - 1)) * r.p_hat;
        r.expected.push_back(n * pk);
    }
    // Tail cell so expected counts sum to n.
    r.attempt_values.push_back(kmax + 1);
    r.observed.push_back(0.0);
    r.expected.push_back(n * std::pow(1.0 - r.p_hat, static_cast<double>(kmax)));
    r.geometric_fit = stats::chi2_goodness(r.observed, r.expected, 1);

    std::sort(T.begin(), T.end());
    const double t_hi = T.back();
    std::vector<double> lx, ly;
    const double t_lo = std::max(1e-2, stats::quantile(T, 0.05));
    if (t_hi > t_lo) {
        for (int k = 0; k < 30; ++k) {
            const double s = t_lo * std::pow(t_hi / t_lo, k / 29.0);
            const auto above = static_cast<std::size_t>(T.end() - std::upper_bound(T.begin(), T.end(), s));
            if (above < 20) break;
            const double p = static_cast<double>(above) / n;
            if (!(p > 0.0 && p < 1.0)) continue;
            lx.push_back(std::log(s));
            ly.push_back(std::log(-std::log(p)));
        }
    }
    r.tail_points = lx.size();
    if (lx.size() >= 3) {
        r.tail_fit = stats::linear_fit(lx, ly);
        r.tail_exponent = r.tail_fit.slope;
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json fit_json(const stats::LinearFit& f) {
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2},
            {"se_slope", f.se_slope}, {"se_intercept", f.se_intercept}, {"n", f.n}};
}

}  // namespace

nlohmann::json to_json(const TrialSummary& s) {
    nlohmann::json j{{"index", s.index},
                     {"seed", s.seed},
                     {"params", to_json(s.params)},
                     {"init", to_json(s.init)},
                     {"digest", s.digest},
                     {"valid", s.valid},
                     {"event_count", s.event_count}};
    if (!s.valid) j["invalid_reason"] = s.invalid_reason;
    if (s.extinction_time)
        j["extinction_time"] = *s.extinction_time;
    else
        j["censor_time"] = s.censor_time;
    return j;
}

nlohmann::json to_json(const Census& c) {
    return {{"total", c.total},       {"valid", c.valid},
            {"invalid", c.invalid},   {"extinct", c.extinct},
            {"censored", c.censored}, {"invalid_fraction", c.invalid_fraction},
            {"censored_fraction", c.censored_fraction}};
}

nlohmann::json to_json(const EdgeSpeedEstimate& e) {
    return {{"t", e.t},           {"trials", e.trials},       {"alpha", e.alpha},   {"se", e.se},
            {"unit_mean", e.unit_mean}, {"unit_se", e.unit_se}, {"census", to_json(e.census)}};
}

nlohmann::json to_json(const SurvivalCurve& s) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : s.points)
        pts.push_back({{"n", p.n}, {"trials", p.trials}, {"survivors", p.survivors}, {"theta", p.theta},
                       {"se", p.se}, {"ci", {p.ci.lo, p.ci.hi}}});
    return {{"t_max", s.t_max}, {"points", pts}, {"monotone", s.monotone},
            {"log_fit", fit_json(s.log_fit)}, {"censored_fraction", s.censored_fraction}};
}

nlohmann::json to_json(const TailFit& f) {
    return {{"t_max", f.t_max},
            {"trials", f.trials},
            {"extinct", f.extinct},
            {"censored_fraction", f.censored_fraction},
            {"t", f.t},
            {"tail", f.tail},
            {"count", f.count},
            {"fit_range", {f.fit_t_lo, f.fit_t_hi}},
            {"fit_points", f.fit_points},
            {"a", f.a},
            {"a_ci", {f.a_ci.lo, f.a_ci.hi}},
            {"c_prime", f.c_prime},
            {"c", f.c},
            {"r2", f.r2}};
}

nlohmann::json to_json(const TailComparison& c) {
    return {{"t", c.t}, {"boosted", c.boosted}, {"control", c.control},
            {"below_everywhere", c.below_everywhere}, {"violations", c.violations}};
}

nlohmann::json to_json(const CltReport& r) {
    nlohmann::json sc = nlohmann::json::array();
    for (const auto& s : r.scales)
        sc.push_back({{"t", s.t},
                      {"trials", s.trials},
                      {"mean", s.mean},
                      {"variance", s.variance},
                      {"variance_over_t", s.variance_over_t},
                      {"skewness", s.skewness},
                      {"skewness_se", s.skewness_se},
                      {"jarque_bera", s.normality.statistic},
                      {"jarque_bera_p", s.normality.p_value}});
    return {{"alpha", r.alpha}, {"scales", sc}, {"variance_fit", fit_json(r.variance_fit)},
            {"sigma2", r.sigma2}, {"sigma2_se", r.sigma2_se}, {"sigma2_positive", r.sigma2_positive}};
}

nlohmann::json to_json(const DeviationProfile& p) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& d : p.points)
        pts.push_back({{"t", d.t}, {"probability", d.probability}, {"se", d.se}, {"count", d.count}});
    return {{"gamma", p.gamma}, {"b", p.b}, {"alpha", p.alpha}, {"points", pts}, {"nonincreasing", p.nonincreasing}};
}

nlohmann::json to_json(const MixingReport& r) {
    return {{"lag", r.lag},
            {"alpha", r.alpha},
            {"autocorrelation", r.autocorrelation},
            {"pairs_at_lag1", r.pairs_at_lag1},
            {"noise_floor", r.noise_floor},
            {"decay_fit", fit_json(r.decay_fit)},
            {"decay_exponent", r.decay_exponent},
            {"decay_points", r.decay_points},
            {"trend_slope", r.trend_slope},
            {"decreasing", r.decreasing},
            {"lags_above_floor", r.lags_above_floor}};
}

nlohmann::json to_json(const EnvelopeCheck& e) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : e.points)
        pts.push_back({{"n", p.n}, {"threshold", p.threshold}, {"probability", p.probability}, {"count", p.count}});
    return {{"t", e.t}, {"trials", e.trials}, {"points", pts}, {"nonincreasing", e.nonincreasing}};
}

nlohmann::json to_json(const RenewalReport& r) {
    return {{"records", r.records},
            {"mean_attempts", r.mean_attempts},
            {"p_hat", r.p_hat},
            {"attempt_values", r.attempt_values},
            {"observed", r.observed},
            {"expected", r.expected},
            {"chi2", r.geometric_fit.statistic},
            {"chi2_p", r.geometric_fit.p_value},
            {"tail_fit", fit_json(r.tail_fit)},
            {"tail_exponent", r.tail_exponent},
            {"tail_points", r.tail_points}};
}

}  // namespace bmcp
