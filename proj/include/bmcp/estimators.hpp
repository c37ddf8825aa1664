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

// Reductions from trial batches to edge speed, survival, extinction tails,
// fluctuation and mixing diagnostics. Every estimator is a pure function of
// the multiset of summaries: inputs are put in canonical (seed, index) order
// first, and invalid trials are excluded and counted.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bmcp/coupling.hpp"
#include "bmcp/lattice.hpp"
#include "bmcp/simulator.hpp"
#include "bmcp/stats.hpp"

namespace bmcp {

struct TrialSummary {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    Params params;
    InitialCondition init;
    std::string digest;  // of the full trajectory
    bool valid = true;
    std::string invalid_reason;
    std::optional<double> extinction_time;
    double censor_time = 0.0;
    std::uint64_t event_count = 0;
    std::vector<TraceSample> samples;  // empty when not kept

    bool extinct() const { return extinction_time.has_value(); }
    /// Latest sample at or before t; nullptr when none is kept.
    const TraceSample* sample_at(double t) const;
};

TrialSummary summarize(std::uint64_t index, std::uint64_t seed, const Params& params, const InitialCondition& init,
                       const Trajectory& trace, bool keep_samples = true);

struct Census {
    std::size_t total = 0;
    std::size_t valid = 0;
    std::size_t invalid = 0;
    std::size_t extinct = 0;
    std::size_t censored = 0;
    double invalid_fraction = 0.0;
    double censored_fraction = 0.0;  // among valid trials
};

Census census(std::span<const TrialSummary> trials);

/// Valid trials in canonical (seed, index) order.
std::vector<const TrialSummary*> canonical_valid(std::span<const TrialSummary> trials);

// ---------------------------------------------------------------------------

struct EdgeSpeedEstimate {
    double t = 0.0;
    std::size_t trials = 0;
    double alpha = 0.0;  // mean of R(t) / t
    double se = 0.0;
    double unit_mean = 0.0;  // mean of R(1) - R(0)
    double unit_se = 0.0;
    Census census;
};

/// Trials must start with R(0) = 0 (HalfLine or rebased StationaryApprox).
/// Throws TooFewTrials below 30 valid trials with a sample at t.
EdgeSpeedEstimate estimate_edge_speed(std::span<const TrialSummary> trials, double t);

// ---------------------------------------------------------------------------

struct SurvivalPoint {
    int n = 0;
    std::size_t trials = 0;
    std::size_t survivors = 0;  // censored at t_max
    double theta = 0.0;
    double se = 0.0;
    stats::Interval ci;  // Wilson, 95%
};

struct SurvivalCurve {
    double t_max = 0.0;
    std::vector<SurvivalPoint> points;
    /// theta(n_{k+1}) >= theta(n_k) - 3 sqrt(se_k^2 + se_{k+1}^2) for every k.
    bool monotone = true;
    /// log(-log(1 - theta)) against log n over points with n >= 1; theta is
    /// continuity-corrected to (survivors + 0.5) / (trials + 1) before the logs.
    stats::LinearFit log_fit;
    double censored_fraction = 0.0;
};

/// `by_size[k]` holds the trials started from [0, sizes[k] - 1]; n = 0 gives theta = 0.
SurvivalCurve survival_curve(const std::vector<int>& sizes, const std::vector<std::vector<TrialSummary>>& by_size,
                             double t_max);

// ---------------------------------------------------------------------------

struct TailFit {
    double t_max = 0.0;
    std::size_t trials = 0;
    std::size_t extinct = 0;
    double censored_fraction = 0.0;
    std::vector<double> t;        // evaluation grid
    std::vector<double> tail;     // P(t < tau < t_max)
    std::vector<std::size_t> count;  // extinct trials with tau > t
    double fit_t_lo = 0.0;
    double fit_t_hi = 0.0;
    std::size_t fit_points = 0;
    /// log(-log(G(t) / G(0))) = log c' + a log t, with G(t) = P(t < tau < t_max).
    double a = 0.0;
    double c_prime = 0.0;
    double c = 0.0;  // G(0) = P(tau < t_max)
    stats::Interval a_ci;  // bootstrap percentile
    double r2 = 0.0;
};

/// Throws InsufficientExtinctions below `min_extinct` extinctions.
TailFit extinction_tail(std::span<const TrialSummary> trials, double t_max, std::size_t min_extinct = 1000,
                        std::size_t min_tail_count = 20, std::size_t grid_points = 40, std::uint64_t seed = 1);

struct TailComparison {
    std::vector<double> t;
    std::vector<double> boosted;  // P(t < tau < t_max), epsilon > 0
    std::vector<double> control;  // P(tau > t), epsilon = 0
    bool below_everywhere = true;
    std::size_t violations = 0;
};

/// Evaluates both tails on the fit range of `boosted_fit`.
TailComparison compare_tails(const TailFit& boosted_fit, std::span<const TrialSummary> control);

// ---------------------------------------------------------------------------

struct CltScale {
    double t = 0.0;
    std::size_t trials = 0;
    double mean = 0.0;
    double variance = 0.0;
    double variance_over_t = 0.0;
    double skewness = 0.0;
    double skewness_se = 0.0;
    stats::TestResult normality;  // Jarque-Bera on (R(t) - alpha t) / sqrt(t)
};

struct CltReport {
    double alpha = 0.0;  // from the largest scale
    std::vector<CltScale> scales;
    stats::LinearFit variance_fit;  // Var R(t) against t
    double sigma2 = 0.0;            // slope of the fit
    double sigma2_se = 0.0;
    bool sigma2_positive = false;   // slope > 3 se
};

/// Throws TooFewTrials below 30 valid trials.
CltReport clt_diagnostics(std::span<const TrialSummary> trials, const std::vector<double>& scales);

struct DeviationPoint {
    double t = 0.0;
    double probability = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

struct DeviationProfile {
    double gamma = 0.25;
    double b = 1.0;
    double alpha = 0.0;
    std::vector<DeviationPoint> points;
    /// p(t_{k+1}) <= p(t_k) + 2 sqrt(se_k^2 + se_{k+1}^2) for every k.
    bool nonincreasing = true;
};

/// P(|R(t) - alpha t| > b t^(1 - gamma)); alpha defaults to the edge speed at the largest t.
DeviationProfile large_deviation_profile(std::span<const TrialSummary> trials, const std::vector<double>& t_grid,
                                         double gamma = 0.25, double b = 1.0,
                                         std::optional<double> alpha = std::nullopt);

// ---------------------------------------------------------------------------

/// Delta_n = R(n) - R(n - 1) for n = 1..floor(horizon) from unit-cadence samples.
struct IncrementSeries {
    std::vector<double> delta;
};

IncrementSeries increments(const TrialSummary& trial, double horizon);

struct MixingReport {
    std::size_t pairs_at_lag1 = 0;
    std::vector<std::size_t> lag;
    std::vector<double> alpha;  // max |P(A and B) - P(A) P(B)| over the event family
    std::vector<double> autocorrelation;
    double noise_floor = 0.0;   // 3 * 0.25 / sqrt(pairs)
    /// log(-log(alpha(k) / alpha(0))) against log k over every lag k >= 1 with alpha(k) > 0.
    stats::LinearFit decay_fit;
    double decay_exponent = 0.0;
    std::size_t decay_points = 0;
    /// Least-squares slope of alpha(k) against k over k >= 1.
    double trend_slope = 0.0;
    bool decreasing = false;  // trend_slope < 0 and decay_exponent > 0
    std::size_t lags_above_floor = 0;  // among k >= 1
};

/// Event family on each increment: {Delta > 0} and {Delta <= q} for the
/// pooled quartiles q. Pairs never straddle two series. Throws
/// InsufficientTrials below 1000 increments in total.
MixingReport mixing_profile(const std::vector<IncrementSeries>& series, std::size_t max_lag);

/// Same series with each one's increments permuted (seeded): an iid null
/// with the same marginal law.
std::vector<IncrementSeries> iid_null(const std::vector<IncrementSeries>& series, std::uint64_t seed);

struct EnvelopePoint {
    double n = 0.0;
    double threshold = 0.0;  // 4 (lambda_i + epsilon) (t + n)
    double probability = 0.0;
    std::size_t count = 0;
};

struct EnvelopeCheck {
    double t = 0.0;
    std::size_t trials = 0;
    std::vector<EnvelopePoint> points;
    bool nonincreasing = true;
};

/// Empirical P(sup_{s <= t} |R(s)| > 4 (lambda_i + epsilon)(t + n)) from the
/// running extremes of R.
EnvelopeCheck increment_envelope_check(std::span<const TrialSummary> trials, double t, const std::vector<double>& n_grid);

// ---------------------------------------------------------------------------

struct RenewalReport {
    std::size_t records = 0;
    double mean_attempts = 0.0;
    double p_hat = 0.0;  // success probability of one attempt, 1 / mean(I)
    std::vector<std::uint64_t> attempt_values;
    std::vector<double> observed;
    std::vector<double> expected;
    stats::TestResult geometric_fit;  // chi-square, one fitted parameter
    /// log(-log P(T > s)) against log s over points with >= 20 records above s.
    stats::LinearFit tail_fit;
    double tail_exponent = 0.0;
    std::size_t tail_points = 0;
};

RenewalReport renewal_analysis(const std::vector<RenewalRecord>& records);

nlohmann::json to_json(const TrialSummary& s);
nlohmann::json to_json(const Census& c);
nlohmann::json to_json(const EdgeSpeedEstimate& e);
nlohmann::json to_json(const SurvivalCurve& s);
nlohmann::json to_json(const TailFit& f);
nlohmann::json to_json(const TailComparison& c);
nlohmann::json to_json(const CltReport& r);
nlohmann::json to_json(const DeviationProfile& p);
nlohmann::json to_json(const MixingReport& r);
nlohmann::json to_json(const EnvelopeCheck& e);
nlohmann::json to_json(const RenewalReport& r);

}  // namespace bmcp
