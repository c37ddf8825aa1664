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

// Named experiment suites. Each suite reads its main knobs (params, init,
// t_max, trials, seed, kernel) from the config and the rest from
// suite_options, and reports one entry per acceptance criterion it decides.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include "bmcp/coupling.hpp"
#include "bmcp/errors.hpp"
#include "bmcp/exact_oracle.hpp"
#include "bmcp/harness.hpp"
#include "bmcp/percolation.hpp"
#include "bmcp/philox.hpp"

namespace bmcp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const json& option(const SuiteContext& ctx, const char* key) {
    const auto& so = ctx.config.suite_options;
    if (so.contains(key)) return so[key];
    return find_suite(ctx.config.experiment).defaults.suite_options.at(key);
}

template <class T>
T opt(const SuiteContext& ctx, const char* key) {
    return option(ctx, key).get<T>();
}

json criterion(int id, const std::string& name, bool pass, json checks) {
    return {{"id", id}, {"name", name}, {"pass", pass}, {"checks", std::move(checks)}};
}

// Uniform on [0, 1) from a 64-bit stream; fixed across standard libraries.
struct Uniform {
    std::uint64_t state;
    double operator()() {
        state = derive_trial_seed(state, 0x5eed);
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

TrialSpec spec_of(const ExperimentConfig& c) { return c.trial_spec(); }

ExperimentConfig base(const std::string& name, std::uint64_t seed) {
    ExperimentConfig c;
    c.experiment = name;
    c.seed = seed;
    return c;
}

// ---------------------------------------------------------------------------

SuiteResult oracle_agreement(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    const auto sizes = opt<std::vector<int>>(ctx, "sizes");
    const auto pairs = opt<std::vector<std::vector<double>>>(ctx, "rate_pairs");
    const auto times = opt<std::vector<double>>(ctx, "times");
    const auto variants = opt<std::vector<std::string>>(ctx, "variants");
    const double tol = opt<double>(ctx, "analytic_tolerance");
    const double horizon = *std::max_element(times.begin(), times.end());

    SuiteResult res;
    std::ostringstream table;
    table << "n,variant,lambda_i,lambda_e,t,trials,simulated,oracle,se,z,pass\n";
    json cells = json::array();
    bool all_within = true;
    double analytic_err = 0.0;
    std::uint64_t batch_index = 0;
    for (int n : sizes) {
        std::vector<Site> full;
        for (int x = 0; x < n; ++x) full.push_back(x);
        const std::uint32_t full_state = (1U << n) - 1;
        for (const auto& vname : variants) {
            for (const auto& pr : pairs) {
                Params p{pr.at(0), pr.at(1), 1.0, parse_variant(vname)};
                TrialSpec spec;
                spec.params = p;
                spec.init = FiniteSet{full};
                spec.horizon = horizon;
                spec.options.mode = WindowMode::Closed;
                spec.options.kernel = c.kernel;
                spec.options.cadence = horizon;
                spec.segment_length = n;
                const std::string name = "n" + std::to_string(n) + "_" + vname + "_" + fmt(pr[0]) + "_" + fmt(pr[1]);
                auto batch = ctx.run_batch(name, spec, c.trials, derive_trial_seed(c.seed, batch_index++), false);
                const auto model = build_generator(n, p);
                for (double t : times) {
                    const double oracle = extinction_probability_by(model, t)[full_state];
                    std::size_t valid = 0, dead = 0;
                    for (const auto& tr : batch.trials) {
                        if (!tr.valid) continue;
                        ++valid;
                        dead += tr.extinct() && *tr.extinction_time <= t;
                    }
                    const double N = static_cast<double>(std::max<std::size_t>(valid, 1));
                    const double sim = dead / N;
                    const double se = std::sqrt(oracle * (1.0 - oracle) / N);
                    const double z = se > 0.0 ? (sim - oracle) / se : (sim == oracle ? 0.0 : INFINITY);
                    const bool pass = std::abs(z) <= 3.0 && valid == batch.trials.size();
                    all_within = all_within && pass;
                    if (n == 1) analytic_err = std::max(analytic_err, std::abs(oracle - (1.0 - std::exp(-t))));
                    table << n << ',' << vname << ',' << pr[0] << ',' << pr[1] << ',' << t << ',' << valid << ','
                          << fmt(sim) << ',' << fmt(oracle) << ',' << fmt(se) << ',' << fmt(z) << ',' << pass << '\n';
                    cells.push_back({{"n", n}, {"variant", vname}, {"lambda_i", pr[0]}, {"lambda_e", pr[1]}, {"t", t},
                                     {"trials", valid}, {"simulated", sim}, {"oracle", oracle}, {"se", se}, {"z", z},
                                     {"pass", pass}});
                }
                res.batches.push_back(std::move(batch));
            }
        }
    }
    ctx.writer.write("oracle_agreement.csv", table.str());
    const bool analytic_ok = analytic_err <= tol;
    res.report = {{"cells", cells},
                  {"analytic_max_error", analytic_err},
                  {"criteria", json::array({criterion(1, "oracle agreement", all_within && analytic_ok,
                                                      {{"cells_within_3se", all_within},
                                                       {"analytic_max_error", analytic_err},
                                                       {"analytic_tolerance", tol}})})}};
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult coupling_exactness(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    const double horizon = c.t_max;
    const double spawn_max = opt<double>(ctx, "spawn_max");
    const Site depth = opt<Site>(ctx, "half_line_depth");
    const double half_fraction = opt<double>(ctx, "half_line_fraction");

    struct Pair {
        std::uint64_t seed = 0;
        bool half_line = false;
        CouplingReport report;
    };
    std::vector<Pair> pairs(c.trials);
    const auto stride = static_cast<std::uint64_t>(std::llround(1.0 / std::max(half_fraction, 1e-9)));
    parallel_for(
        pairs.size(),
        [&](std::size_t i) {
            Pair& pr = pairs[i];
            pr.seed = derive_trial_seed(c.seed, i);
            pr.half_line = half_fraction > 0.0 && i % stride == stride - 1;
            Uniform u{pr.seed};
            const double t = u() * spawn_max;
            SimulatorOptions opts;
            opts.truncation = c.truncation;
            const InitialCondition init = pr.half_line ? InitialCondition{HalfLine{depth}} : SingleOrigin{};
            try {
                const auto parent = make_simulator(c.params, init, pr.seed, t + horizon, opts);
                const auto aux = spawn_auxiliary(parent, t, horizon);
                pr.report = verify_edge_identity(parent, aux, horizon);
            } catch (const HistoryUnavailable& e) {
                pr.report.seed = pr.seed;
                pr.report.spawn_time = t;
                pr.report.invalid = true;
                pr.report.invalid_reason = e.what();
            }
        },
        ctx.threads);

    std::ostringstream csv;
    csv << "index,seed,init,spawn_time,space_offset,parent_empty,checks,failures,invalid,child_extinction_time\n";
    std::uint64_t checks = 0, failures = 0, invalid = 0;
    std::vector<double> aux_tau;
    json failing = json::array();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& r = pairs[i].report;
        csv << i << ',' << pairs[i].seed << ',' << (pairs[i].half_line ? "halfline" : "origin") << ','
            << fmt(r.spawn_time) << ',' << r.space_offset << ',' << r.parent_empty << ',' << r.checks << ','
            << r.failures.size() << ',' << r.invalid << ',';
        if (r.child_extinction_time) csv << fmt(*r.child_extinction_time);
        csv << '\n';
        if (r.invalid) {
            ++invalid;
            continue;
        }
        checks += r.checks;
        failures += r.failures.size();
        if (!r.failures.empty() && failing.size() < 20) failing.push_back(to_json(r));
        aux_tau.push_back(r.child_extinction_time.value_or(horizon));
    }
    ctx.writer.write("coupling_pairs.csv", csv.str());

    // The auxiliary alone is a right-edge process from {0}: compare its
    // extinction law with fresh runs (censored at the horizon).
    TrialSpec fresh;
    fresh.params = Params::right_edge(c.params.lambda_i, c.params.boost_rate());
    fresh.init = SingleOrigin{};
    fresh.horizon = horizon;
    fresh.options.truncation = c.truncation;
    fresh.options.cadence = horizon;
    SuiteResult res;
    auto fb = ctx.run_batch("fresh_right_edge", fresh, c.trials, derive_trial_seed(c.seed, 1ULL << 40), false);
    std::vector<double> fresh_tau;
    for (const auto& t : fb.trials)
        if (t.valid) fresh_tau.push_back(t.extinction_time.value_or(horizon));
    const auto ks = stats::ks_two_sample(aux_tau, fresh_tau);
    res.batches.push_back(std::move(fb));

    const double invalid_fraction = pairs.empty() ? 0.0 : static_cast<double>(invalid) / pairs.size();
    const bool pass = failures == 0 && checks > 0 && invalid_fraction <= c.invalid_threshold;
    res.report = {{"pairs", pairs.size()},
                  {"invalid_pairs", invalid},
                  {"checked_event_times", checks},
                  {"failures", failures},
                  {"failing_pairs", failing},
                  {"auxiliary_vs_fresh_extinction_ks", {{"statistic", ks.statistic}, {"p_value", ks.p_value}}},
                  {"criteria", json::array({criterion(2, "coupling exactness", pass,
                                                      {{"failures", failures},
                                                       {"checked_event_times", checks},
                                                       {"invalid_fraction", invalid_fraction}})})}};
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult edge_speed(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    SuiteResult res;
    auto main = ctx.run_batch("boosted", spec_of(c), c.trials, c.seed, true);
    const auto est = estimate_edge_speed(main.trials, c.t_max);

    TrialSpec control = spec_of(c);
    control.params = Params::boundary(c.params.lambda_i, 0.0);
    auto st = std::get<StationaryApprox>(c.init);
    st.depth = opt<Site>(ctx, "control_depth");
    control.init = st;
    auto cb = ctx.run_batch("control", control, opt<std::uint64_t>(ctx, "control_trials"),
                            derive_trial_seed(c.seed, 1ULL << 40), true);
    const auto ctl = estimate_edge_speed(cb.trials, c.t_max);

    const double eps = c.params.boost_rate();
    const bool boosted_ok = est.alpha >= eps - 3.0 * est.se && est.trials >= 500;
    const bool control_ok = std::abs(ctl.alpha) <= 3.0 * ctl.se + 0.05;
    res.report = {{"epsilon", eps},
                  {"boosted", to_json(est)},
                  {"control", to_json(ctl)},
                  {"criteria", json::array({criterion(3, "edge speed", boosted_ok && control_ok,
                                                      {{"alpha", est.alpha},
                                                       {"se", est.se},
                                                       {"bound", eps - 3.0 * est.se},
                                                       {"trials", est.trials},
                                                       {"control_alpha", ctl.alpha},
                                                       {"control_se", ctl.se},
                                                       {"control_bound", 3.0 * ctl.se + 0.05}})})}};
    res.batches.push_back(std::move(main));
    res.batches.push_back(std::move(cb));
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult clt(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    const auto scales = opt<std::vector<double>>(ctx, "scales");
    const double level = opt<double>(ctx, "significance");
    SuiteResult res;
    auto batch = ctx.run_batch("stationary", spec_of(c), c.trials, c.seed, true);
    const auto rep = clt_diagnostics(batch.trials, scales);
    const auto& last = rep.scales.back();
    const bool linear = rep.variance_fit.r2 >= 0.95;
    const bool positive = last.variance_over_t >= 0.01;
    const bool normal = last.normality.p_value >= level && last.trials >= 500;

    std::ostringstream csv;
    csv << "t,trials,mean,variance,variance_over_t,skewness,skewness_se,jb_statistic,jb_p_value\n";
    for (const auto& s : rep.scales)
        csv << s.t << ',' << s.trials << ',' << fmt(s.mean) << ',' << fmt(s.variance) << ',' << fmt(s.variance_over_t)
            << ',' << fmt(s.skewness) << ',' << fmt(s.skewness_se) << ',' << fmt(s.normality.statistic) << ','
            << fmt(s.normality.p_value) << '\n';
    ctx.writer.write("clt_scales.csv", csv.str());

    res.report = {{"clt", to_json(rep)},
                  {"criteria", json::array({criterion(4, "clt shape", linear && positive && normal,
                                                      {{"variance_r2", rep.variance_fit.r2},
                                                       {"variance_over_t_at_largest", last.variance_over_t},
                                                       {"jarque_bera_p", last.normality.p_value},
                                                       {"skewness", last.skewness},
                                                       {"skewness_se", last.skewness_se},
                                                       {"significance", level},
                                                       {"trials", last.trials}})})}};
    res.batches.push_back(std::move(batch));
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult extinction_tail_suite(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    SuiteResult res;
    auto main = ctx.run_batch("boosted", spec_of(c), c.trials, c.seed, false);
    const auto fit = extinction_tail(main.trials, c.t_max, opt<std::size_t>(ctx, "min_extinct"), 20, 40, c.seed);

    TrialSpec control = spec_of(c);
    control.params = Params::boundary(c.params.lambda_i, 0.0);
    auto cb = ctx.run_batch("control", control, opt<std::uint64_t>(ctx, "control_trials"),
                            derive_trial_seed(c.seed, 1ULL << 40), false);
    const auto cmp = compare_tails(fit, cb.trials);

    std::ostringstream csv;
    csv << "t,boosted_tail,control_tail\n";
    for (std::size_t k = 0; k < cmp.t.size(); ++k)
        csv << fmt(cmp.t[k]) << ',' << fmt(cmp.boosted[k]) << ',' << fmt(cmp.control[k]) << '\n';
    ctx.writer.write("extinction_tails.csv", csv.str());

    const bool exponent_ok = fit.a > 0.0 && fit.a_ci.lo > 0.0;
    res.report = {{"fit", to_json(fit)},
                  {"comparison", to_json(cmp)},
                  {"criteria", json::array({criterion(5, "extinction-time tail", exponent_ok && cmp.below_everywhere,
                                                      {{"a", fit.a},
                                                       {"a_ci", {fit.a_ci.lo, fit.a_ci.hi}},
                                                       {"fit_range", {fit.fit_t_lo, fit.fit_t_hi}},
                                                       {"tail_violations", cmp.violations},
                                                       {"trials", fit.trials}})})}};
    res.batches.push_back(std::move(main));
    res.batches.push_back(std::move(cb));
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult survival_size(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    const auto sizes = opt<std::vector<int>>(ctx, "sizes");
    SuiteResult res;
    std::vector<std::vector<TrialSummary>> by_size;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        TrialSpec spec = spec_of(c);
        std::vector<Site> sites;
        for (int x = 0; x < sizes[k]; ++x) sites.push_back(x);
        spec.init = FiniteSet{sites};
        spec.options.cadence = c.t_max;
        auto b = ctx.run_batch("n" + std::to_string(sizes[k]), spec, c.trials, derive_trial_seed(c.seed, k), false);
        by_size.push_back(b.trials);
        res.batches.push_back(std::move(b));
    }
    const auto curve = survival_curve(sizes, by_size, c.t_max);
    std::ostringstream csv;
    csv << "n,trials,survivors,theta,se,ci_lo,ci_hi\n";
    for (const auto& p : curve.points)
        csv << p.n << ',' << p.trials << ',' << p.survivors << ',' << fmt(p.theta) << ',' << fmt(p.se) << ','
            << fmt(p.ci.lo) << ',' << fmt(p.ci.hi) << '\n';
    ctx.writer.write("survival.csv", csv.str());
    const bool pass = curve.monotone && curve.log_fit.slope > 0.0;
    res.report = {{"curve", to_json(curve)},
                  {"criteria", json::array({criterion(6, "survival vs size", pass,
                                                      {{"monotone_within_3sigma", curve.monotone},
                                                       {"log_log_slope", curve.log_fit.slope},
                                                       {"log_log_slope_se", curve.log_fit.se_slope}})})}};
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult large_deviation(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    const auto grid = opt<std::vector<double>>(ctx, "t_grid");
    SuiteResult res;
    auto batch = ctx.run_batch("stationary", spec_of(c), c.trials, c.seed, true);
    const auto prof = large_deviation_profile(batch.trials, grid, opt<double>(ctx, "gamma"), opt<double>(ctx, "b"));
    std::ostringstream csv;
    csv << "t,probability,se,count\n";
    for (const auto& p : prof.points) csv << p.t << ',' << fmt(p.probability) << ',' << fmt(p.se) << ',' << p.count << '\n';
    ctx.writer.write("deviation_profile.csv", csv.str());
    res.report = {{"profile", to_json(prof)},
                  {"criteria", json::array({criterion(7, "large-deviation shape", prof.nonincreasing,
                                                      {{"alpha", prof.alpha}, {"points", prof.points.size()}})})}};
    res.batches.push_back(std::move(batch));
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult box_crossing(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    const auto heights = opt<std::vector<double>>(ctx, "heights");
    const double lambda = c.params.lambda_i;
    SuiteResult res;

    const auto fit = fit_crossing_width(lambda, heights, c.trials, c.seed, 0.5);
    const auto recheck_trials = opt<std::size_t>(ctx, "recheck_trials");
    json recheck = json::array();
    bool in_band = true;
    std::ostringstream csv;
    csv << "n,scanned_width,scanned_probability,fitted_width,model_width,recheck_probability,recheck_se\n";
    for (std::size_t k = 0; k < fit.points.size(); ++k) {
        const auto& p = fit.points[k];
        // Width from the fitted power law w(n) = c n^(1 - delta).
        const double model = std::exp(fit.log_fit.intercept + fit.log_fit.slope * std::log(p.n));
        const Site w = std::max<Site>(1, std::llround(model));
        const double q = vertical_crossing_probability(lambda, w, p.n, recheck_trials, derive_trial_seed(c.seed, 100 + k));
        const double se = std::sqrt(q * (1 - q) / static_cast<double>(recheck_trials));
        const bool ok = q >= 0.2 && q <= 0.8;
        in_band = in_band && ok;
        recheck.push_back({{"n", p.n}, {"width", w}, {"probability", q}, {"se", se}, {"in_band", ok}});
        csv << p.n << ',' << p.width << ',' << fmt(p.probability) << ',' << fmt(p.fitted_width) << ',' << w << ','
            << fmt(q) << ',' << fmt(se) << '\n';
    }
    ctx.writer.write("crossing_widths.csv", csv.str());
    const bool sublinear = fit.exponent_ci.hi < 1.0;

    // Right-edge envelope of the critical half-line.
    TrialSpec env;
    env.params = Params::standard(lambda);
    env.init = HalfLine{opt<Site>(ctx, "envelope_depth")};
    const auto t_grid = opt<std::vector<double>>(ctx, "envelope_t");
    env.horizon = t_grid.back();
    env.options.kernel = c.kernel;
    env.options.truncation = c.truncation;
    auto eb = ctx.run_batch("envelope", env, opt<std::uint64_t>(ctx, "envelope_trials"),
                            derive_trial_seed(c.seed, 1ULL << 40), true);
    std::vector<std::vector<double>> sup;
    for (const auto* t : canonical_valid(eb.trials)) {
        std::vector<double> row;
        for (double s : t_grid) {
            const auto* smp = t->sample_at(s);
            row.push_back(smp ? static_cast<double>(std::max(smp->right_max, -smp->right_min)) : 0.0);
        }
        sup.push_back(std::move(row));
    }
    const auto efit = fit_edge_envelope(sup, t_grid);
    const bool envelope_ok = efit.log_tail_fit.r2 >= 0.9 && efit.log_tail_fit.slope < 0.0;
    const auto incr = increment_envelope_check(eb.trials, t_grid.back(), {0.0, 16.0, 64.0, 256.0});

    res.report = {{"crossing", to_json(fit)},
                  {"recheck", recheck},
                  {"envelope", to_json(efit)},
                  {"increment_envelope", to_json(incr)},
                  {"criteria", json::array({criterion(8, "box crossing", in_band && sublinear && envelope_ok,
                                                      {{"recheck_in_band", in_band},
                                                       {"exponent", fit.exponent},
                                                       {"exponent_ci", {fit.exponent_ci.lo, fit.exponent_ci.hi}},
                                                       {"envelope_r2", efit.log_tail_fit.r2},
                                                       {"envelope_slope", efit.log_tail_fit.slope}})})}};
    res.batches.push_back(std::move(eb));
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult mixing(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    const auto max_lag = opt<std::size_t>(ctx, "max_lag");
    SuiteResult res;
    auto batch = ctx.run_batch("stationary", spec_of(c), c.trials, c.seed, true);
    std::vector<IncrementSeries> series;
    for (const auto* t : canonical_valid(batch.trials)) series.push_back(increments(*t, c.t_max));
    for (auto& t : batch.trials) t.samples = {};
    const auto rep = mixing_profile(series, max_lag);
    const auto null = mixing_profile(iid_null(series, c.seed), max_lag);

    std::ostringstream csv;
    csv << "lag,alpha,autocorrelation,null_alpha,noise_floor\n";
    for (std::size_t k = 0; k < rep.lag.size(); ++k)
        csv << rep.lag[k] << ',' << fmt(rep.alpha[k]) << ',' << fmt(rep.autocorrelation[k]) << ','
            << fmt(null.alpha[k]) << ',' << fmt(rep.noise_floor) << '\n';
    ctx.writer.write("mixing.csv", csv.str());

    const bool null_ok = null.lags_above_floor == 0;
    res.report = {{"profile", to_json(rep)},
                  {"iid_null", to_json(null)},
                  {"criteria", json::array({criterion(9, "mixing", rep.decreasing && null_ok,
                                                      {{"trend_slope", rep.trend_slope},
                                                       {"decay_exponent", rep.decay_exponent},
                                                       {"decay_points", rep.decay_points},
                                                       {"null_lags_above_floor", null.lags_above_floor},
                                                       {"noise_floor", rep.noise_floor}})})}};
    res.batches.push_back(std::move(batch));
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult renewal(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    const double monitor = opt<double>(ctx, "monitor_horizon");
    const double cap = opt<double>(ctx, "cap");
    struct Slot {
        std::uint64_t seed = 0;
        std::optional<RenewalRecord> record;
        std::string invalid_reason;
    };
    std::vector<Slot> slots(c.trials);
    parallel_for(
        slots.size(),
        [&](std::size_t i) {
            auto& s = slots[i];
            s.seed = derive_trial_seed(c.seed, i);
            SimulatorOptions opts;
            opts.truncation = c.truncation;
            try {
                const auto parent = make_simulator(c.params, c.init, s.seed, c.t_max, opts);
                s.record = detect_renewal(parent, monitor, cap);
            } catch (const MonitorExhausted& e) {
                s.invalid_reason = std::string("monitor exhausted: ") + e.what();
            } catch (const WindowOverflow& e) {
                s.invalid_reason = std::string("window overflow: ") + e.what();
            }
        },
        ctx.threads);

    std::vector<RenewalRecord> records;
    std::ostringstream csv;
    csv << "index,seed,valid,T,I\n";
    std::size_t invalid = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& s = slots[i];
        csv << i << ',' << s.seed << ',' << s.record.has_value() << ',';
        if (s.record) {
            csv << fmt(s.record->T) << ',' << s.record->I;
            records.push_back(*s.record);
        } else {
            ++invalid;
            csv << ',';
        }
        csv << '\n';
    }
    ctx.writer.write("renewal_records.csv", csv.str());
    const auto rep = renewal_analysis(records);
    const double invalid_fraction = slots.empty() ? 0.0 : static_cast<double>(invalid) / slots.size();
    const bool pass = rep.geometric_fit.p_value >= opt<double>(ctx, "significance") && rep.tail_points >= 2 &&
                      rep.tail_exponent > 0.0 && invalid_fraction <= c.invalid_threshold;
    SuiteResult res;
    res.report = {{"renewal", to_json(rep)},
                  {"invalid_records", invalid},
                  {"criteria", json::array({criterion(10, "renewal structure", pass,
                                                      {{"geometric_p", rep.geometric_fit.p_value},
                                                       {"tail_exponent", rep.tail_exponent},
                                                       {"tail_points", rep.tail_points},
                                                       {"invalid_fraction", invalid_fraction}})})}};
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult liggett(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    const auto rep = domination_check_liggett(c.params, opt<int>(ctx, "n"), opt<std::vector<double>>(ctx, "t_grid"),
                                              c.trials, c.seed, opt<std::vector<Site>>(ctx, "spread_set"));
    std::ostringstream csv;
    csv << "t,p_spread,p_contiguous,se,pass\n";
    for (const auto& p : rep.points)
        csv << p.t << ',' << fmt(p.p_spread) << ',' << fmt(p.p_contiguous) << ',' << fmt(p.se) << ',' << p.pass << '\n';
    ctx.writer.write("domination.csv", csv.str());
    SuiteResult res;
    res.report = {{"domination", to_json(rep)}, {"pass", rep.all_pass()}, {"criteria", json::array()}};
    return res;
}

// ---------------------------------------------------------------------------

SuiteResult path_oracle(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    const auto max_events = opt<std::size_t>(ctx, "max_events");
    const Site width = opt<Site>(ctx, "sites");
    struct Window {
        std::uint64_t seed = 0;
        std::uint64_t queries = 0;
        std::uint64_t disagreements = 0;
        std::uint64_t bad_witnesses = 0;
        std::uint64_t reachable = 0;
        std::string first;
    };
    std::vector<Window> windows(c.trials);
    parallel_for(
        windows.size(),
        [&](std::size_t i) {
            auto& w = windows[i];
            SpaceTimeRecord rec;
            Params p;
            // Redraw until the window holds at most max_events arrivals.
            for (std::uint64_t attempt = 0;; ++attempt) {
                w.seed = derive_trial_seed(derive_trial_seed(c.seed, i), attempt);
                Uniform u{w.seed};
                const double lambda = 0.2 + 2.3 * u();
                const double eps = 1.5 * u();
                const double height = 0.2 + 1.8 * u();
                p = Params::boundary(lambda, eps);
                if (u() < 0.25) p.variant = Variant::RightEdgeModified;
                rec = ClockField(w.seed, ClockRates::from(p)).arrivals_in_box({0, width - 1}, 0.0, height);
                if (rec.events.size() + rec.boosts.size() <= max_events) break;
            }
            const SpaceTimeBox box{0, width - 1, 0.0, rec.t1};
            for (std::uint32_t mask = 0; mask < (1U << width); ++mask) {
                std::vector<Site> set;
                for (Site x = 0; x < width; ++x)
                    if (mask >> x & 1U) set.push_back(x);
                for (const auto mode : {PathMode::LambdaI, PathMode::LambdaE}) {
                    PathQuery q{mode, set, box, p.variant};
                    for (Site to = 0; to < width; ++to) {
                        // Reachability from the whole set: any start site.
                        bool fast = false, slow = false;
                        for (Site from : set) {
                            const SpaceTimePoint a{from, 0.0}, b{to, rec.t1};
                            const auto r = open_path_exists(rec, a, b, q);
                            const bool e = exhaustive_path_exists(rec, a, b, q);
                            ++w.queries;
                            if (r.exists != e) {
                                ++w.disagreements;
                                if (w.first.empty())
                                    w.first = "mask " + std::to_string(mask) + " from " + std::to_string(from) +
                                              " to " + std::to_string(to) +
                                              (mode == PathMode::LambdaE ? " lambda_e" : " lambda_i");
                            }
                            if (r.exists && !(r.witness && witness_is_open(rec, *r.witness, b, box)))
                                ++w.bad_witnesses;
                            fast = fast || r.exists;
                            slow = slow || e;
                        }
                        w.reachable += fast;
                        if (fast != slow) ++w.disagreements;
                    }
                }
            }
        },
        ctx.threads);

    std::ostringstream csv;
    csv << "index,seed,queries,reachable,disagreements,bad_witnesses\n";
    std::uint64_t queries = 0, disagreements = 0, bad = 0, reachable = 0;
    json first = json::array();
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        csv << i << ',' << w.seed << ',' << w.queries << ',' << w.reachable << ',' << w.disagreements << ','
            << w.bad_witnesses << '\n';
        queries += w.queries;
        disagreements += w.disagreements;
        bad += w.bad_witnesses;
        reachable += w.reachable;
        if (!w.first.empty() && first.size() < 20) first.push_back({{"window", i}, {"seed", w.seed}, {"query", w.first}});
    }
    ctx.writer.write("path_oracle.csv", csv.str());
    SuiteResult res;
    const bool pass = disagreements == 0 && bad == 0 && windows.size() >= 1000;
    res.report = {{"windows", windows.size()},
                  {"queries", queries},
                  {"reachable_targets", reachable},
                  {"disagreements", disagreements},
                  {"invalid_witnesses", bad},
                  {"first_disagreements", first},
                  {"criteria", json::array({criterion(12, "path-reachability oracle", pass,
                                                      {{"windows", windows.size()},
                                                       {"queries", queries},
                                                       {"disagreements", disagreements},
                                                       {"invalid_witnesses", bad}})})}};
    return res;
}

// ---------------------------------------------------------------------------

// Removes the scratch directory on every exit path.
struct ScratchDir {
    fs::path path;
    explicit ScratchDir(const std::string& tag) {
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path = fs::temp_directory_path() / ("bmcp-" + tag + "-" + std::to_string(stamp));
        fs::create_directories(path);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

SuiteResult determinism(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    ScratchDir scratch("determinism");
    const auto thread_counts = opt<std::vector<std::size_t>>(ctx, "thread_counts");

    std::vector<ExperimentConfig> configs;
    {
        ExperimentConfig a;
        a.params = c.params;
        a.init = c.init;
        a.t_max = c.t_max;
        a.trials = c.trials;
        a.seed = c.seed;
        a.kernel = Kernel::ClockField;
        configs.push_back(a);
        ExperimentConfig b = a;
        b.init = StationaryApprox{20.0, 60};
        b.kernel = Kernel::JumpChain;
        b.seed = c.seed + 1;
        configs.push_back(b);
        ExperimentConfig h = a;
        h.init = HalfLine{80};
        h.seed = c.seed + 2;
        configs.push_back(h);
    }

    json runs = json::array();
    bool identical = true, replays_ok = true, tamper_ok = true, bijection_ok = true;
    std::uint64_t replayed = 0;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        std::vector<RunManifest> manifests;
        for (std::size_t th : thread_counts) {
            auto cfg = configs[k];
            cfg.threads = th;
            cfg.out_dir = scratch.path / ("config" + std::to_string(k) + "_threads" + std::to_string(th));
            manifests.push_back(run_experiment(cfg).manifest);
            const auto bij = check_run_directory(cfg.out_dir);
            bijection_ok = bijection_ok && bij.ok;
        }
        for (std::size_t m = 1; m < manifests.size(); ++m) {
            const auto& x = manifests[0];
            const auto& y = manifests[m];
            bool same = x.artifacts.size() == y.artifacts.size();
            for (std::size_t a = 0; same && a < x.artifacts.size(); ++a)
                same = x.artifacts[a].path == y.artifacts[a].path && x.artifacts[a].sha256 == y.artifacts[a].sha256;
            for (std::size_t t = 0; same && t < x.batches.front().trials.size(); ++t)
                same = x.batches.front().trials[t].digest == y.batches.front().trials[t].digest;
            identical = identical && same;
        }
        // Replay every trial of the last run (a different thread count from the first).
        const fs::path dir = scratch.path / ("config" + std::to_string(k) + "_threads" +
                                             std::to_string(thread_counts.back()));
        for (const auto& t : manifests.back().batches.front().trials) {
            try {
                replay(dir / "manifest.json", t.index);
                ++replayed;
            } catch (const Error&) {
                replays_ok = false;
            }
        }
        // A tampered seed must be caught.
        std::ifstream in(dir / "manifest.json");
        json mj = json::parse(in);
        mj["batches"][0]["trials"][0]["seed"] = mj["batches"][0]["trials"][0]["seed"].get<std::uint64_t>() + 1;
        const fs::path tampered = scratch.path / ("tampered" + std::to_string(k) + ".json");
        std::ofstream(tampered) << mj.dump();
        bool caught = false;
        try {
            replay(tampered, 0);
        } catch (const DigestMismatch&) {
            caught = true;
        }
        tamper_ok = tamper_ok && caught;
        runs.push_back({{"config", to_json(configs[k])}, {"trials", configs[k].trials}});
    }
    const bool pass = identical && replays_ok && tamper_ok && bijection_ok && replayed > 0;
    SuiteResult res;
    res.report = {{"runs", runs},
                  {"thread_counts", thread_counts},
                  {"criteria", json::array({criterion(11, "determinism", pass,
                                                      {{"identical_across_threads", identical},
                                                       {"replayed_trials", replayed},
                                                       {"all_replays_match", replays_ok},
                                                       {"tampered_seed_detected", tamper_ok},
                                                       {"directory_bijection", bijection_ok}})})}};
    return res;
}

// ---------------------------------------------------------------------------

std::vector<SuiteDescriptor> build_registry() {
    const Params boosted = Params::boundary(kLambdaCriticalEstimate, 0.5);
    std::vector<SuiteDescriptor> r;

    {
        auto d = base("oracle-agreement", 101);
        d.trials = 10000;
        d.t_max = 5.0;
        d.mode = WindowMode::Closed;
        d.suite_options = {{"sizes", {1, 2, 3}},
                           {"rate_pairs", {{1.0, 1.5}, {kLambdaCriticalEstimate, kLambdaCriticalEstimate + 0.5}}},
                           {"times", {1.0, 5.0}},
                           {"variants", {"standard", "right_edge", "boundary"}},
                           {"analytic_tolerance", 1e-9}};
        r.push_back({"oracle-agreement", "closed-segment extinction probabilities against the exact oracle", {1}, d,
                     oracle_agreement});
    }
    {
        auto d = base("coupling-exactness", 202);
        d.params = boosted;
        d.trials = 1000;
        d.t_max = 50.0;
        d.suite_options = {{"spawn_max", 20.0}, {"half_line_fraction", 0.5}, {"half_line_depth", 200}};
        r.push_back({"coupling-exactness", "right-edge identity between parents and auxiliary processes", {2}, d,
                     coupling_exactness});
    }
    auto stationary = [&](const std::string& name, std::uint64_t seed) {
        auto d = base(name, seed);
        d.params = boosted;
        d.init = StationaryApprox{200.0, 200};
        d.t_max = 512.0;
        d.trials = 500;
        d.kernel = Kernel::JumpChain;
        return d;
    };
    {
        auto d = stationary("edge-speed", 303);
        d.suite_options = {{"control_trials", 500}, {"control_depth", 800}};
        r.push_back({"edge-speed", "edge speed from the stationary approximation, with an epsilon = 0 control", {3},
                     d, edge_speed});
    }
    {
        auto d = stationary("clt", 404);
        d.suite_options = {{"scales", {64.0, 128.0, 256.0, 512.0}}, {"significance", 1e-3}};
        r.push_back({"clt", "variance growth and normality of the right edge", {4}, d, clt});
    }
    {
        auto d = base("extinction-tail", 505);
        d.params = boosted;
        d.t_max = 1000.0;
        d.trials = 20000;
        d.kernel = Kernel::JumpChain;
        d.cadence = 1000.0;
        d.suite_options = {{"control_trials", 4000}, {"min_extinct", 1000}};
        r.push_back({"extinction-tail", "stretched-exponential fit of the conditional extinction-time tail", {5}, d,
                     extinction_tail_suite});
    }
    {
        auto d = base("survival-size", 606);
        d.params = boosted;
        d.t_max = 300.0;
        d.trials = 2000;
        d.kernel = Kernel::JumpChain;
        d.suite_options = {{"sizes", {1, 2, 4, 8, 16}}};
        r.push_back({"survival-size", "survival to t_max against the initial block size", {6}, d, survival_size});
    }
    {
        auto d = stationary("large-deviation-shape", 707);
        d.suite_options = {{"t_grid", {64.0, 128.0, 256.0, 512.0}}, {"gamma", 0.25}, {"b", 1.0}};
        r.push_back({"large-deviation-shape", "deviation probabilities of the right edge across scales", {7}, d,
                     large_deviation});
    }
    {
        auto d = base("box-crossing", 808);
        d.params = Params::standard(kLambdaCriticalEstimate);
        d.trials = 1000;
        d.kernel = Kernel::JumpChain;
        d.suite_options = {{"heights", {8.0, 16.0, 32.0, 64.0}},
                           {"recheck_trials", 1000},
                           {"envelope_trials", 1050},
                           {"envelope_depth", 500},
                           {"envelope_t", {16.0, 32.0, 64.0, 128.0, 256.0}}};
        r.push_back({"box-crossing", "crossing widths and the right-edge envelope at criticality", {8}, d,
                     box_crossing});
    }
    {
        auto d = stationary("mixing", 909);
        d.init = StationaryApprox{200.0, 100};
        d.t_max = 4096.0;
        d.trials = 300;
        d.suite_options = {{"max_lag", 10}};
        r.push_back({"mixing", "dependence between right-edge increments across lags", {9}, d, mixing});
    }
    {
        auto d = base("renewal", 1010);
        d.params = boosted;
        d.t_max = 600.0;
        d.trials = 1000;
        d.suite_options = {{"monitor_horizon", 200.0}, {"cap", 400.0}, {"significance", 1e-3}};
        r.push_back({"renewal", "restart attempts until an auxiliary survives the monitor horizon", {10}, d, renewal});
    }
    {
        auto d = base("liggett-domination", 1111);
        d.params = Params::standard(kLambdaCriticalEstimate);
        d.trials = 10000;
        d.suite_options = {{"n", 2}, {"t_grid", {0.0, 5.0, 10.0, 20.0}}, {"spread_set", {0, 5}}};
        r.push_back({"liggett-domination", "survival of spread against contiguous initial sets", {}, d, liggett});
    }
    {
        auto d = base("path-oracle", 1212);
        d.trials = 1000;
        d.suite_options = {{"max_events", 12}, {"sites", 4}};
        r.push_back({"path-oracle", "open-path search against exhaustive enumeration on small windows", {12}, d,
                     path_oracle});
    }
    {
        auto d = base("determinism", 1313);
        d.params = boosted;
        d.t_max = 40.0;
        d.trials = 24;
        d.suite_options = {{"thread_counts", {1, 3}}};
        r.push_back({"determinism", "thread-count independence, replay and tamper detection", {11}, d, determinism});
    }
    return r;
}

}  // namespace

const std::vector<SuiteDescriptor>& named_suites() {
    static const std::vector<SuiteDescriptor> registry = build_registry();
    return registry;
}

const SuiteDescriptor& find_suite(const std::string& name) {
    for (const auto& s : named_suites())
        if (s.name == name) return s;
    std::string all;
    for (const auto& s : named_suites()) all += (all.empty() ? "" : ", ") + s.name;
    throw UnknownSuite("unknown suite '" + name + "'; known suites: " + all);
}

}  // namespace bmcp
