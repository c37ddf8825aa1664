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

#include "bmcp/exact_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseLU>
#include <boost/math/special_functions/gamma.hpp>

#include "bmcp/errors.hpp"

namespace bmcp {

namespace {

struct Move {
    std::uint32_t to;
    double rate;
};

// Transitions of one state; boost rates land on the same target as the
// boundary edge they accompany.
void for_each_move(int n, const Params& p, std::uint32_t s, std::vector<Move>& out) {
    out.clear();
    if (s == 0) return;
    const double eps = p.boost_rate();
    const int right = 31 - std::countl_zero(s);
    const int left = std::countr_zero(s);
    for (int x = 0; x < n; ++x) {
        if (!(s >> x & 1U)) continue;
        out.push_back({s & ~(1U << x), p.recovery_rate});
        for (int y : {x - 1, x + 1}) {
            if (y < 0 || y >= n || (s >> y & 1U)) continue;
            double r = p.lambda_i;
            if (y == right + 1 && p.boosts_right()) r += eps;
            if (y == left - 1 && p.boosts_left()) r += eps;
            out.push_back({s | (1U << y), r});
        }
    }
}

// Smallest K with P(Poisson(m) > K) <= tol.
std::uint64_t poisson_cutoff(double m, double tol) {
    if (m <= 0.0) return 0;
    auto K = static_cast<std::uint64_t>(m);
    while (boost::math::gamma_p(static_cast<double>(K + 1), m) > tol) K += 1 + K / 64;
    return K;
}

double poisson_weight(std::uint64_t k, double m) {
    if (m <= 0.0) return k == 0 ? 1.0 : 0.0;
    const double kk = static_cast<double>(k);
    return std::exp(-m + kk * std::log(m) - std::lgamma(kk + 1.0));
}

}  // namespace

double exit_rate(int n, const Params& p, std::uint32_t s) {
    if (s == 0) return 0.0;
    std::uint64_t recover = 0, edges = 0, boosts = 0;
    for (int x = 0; x < n; ++x) {
        if (!(s >> x & 1U)) continue;
        ++recover;
        for (int y : {x - 1, x + 1})
            if (y >= 0 && y < n && !(s >> y & 1U)) ++edges;
    }
    const int right = 31 - std::countl_zero(s);
    const int left = std::countr_zero(s);
    if (p.boosts_right() && right + 1 < n) ++boosts;
    if (p.boosts_left() && left - 1 >= 0) ++boosts;
    return static_cast<double>(recover) * p.recovery_rate + static_cast<double>(edges) * p.lambda_i +
           static_cast<double>(boosts) * p.boost_rate();
}

SegmentModel build_generator(int n, const Params& params) {
    if (n < 1) throw std::invalid_argument("segment length must be >= 1");
    if (n > kOracleMaxSites)
        throw TooLarge("segment length " + std::to_string(n) + " exceeds the oracle cap of " +
                       std::to_string(kOracleMaxSites) + " sites");
    params.validate();
    SegmentModel m;
    m.n = n;
    m.params = params;
    const std::uint32_t S = m.states();
    m.exit_rate.assign(S, 0.0);
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<Move> moves;
    for (std::uint32_t s = 1; s < S; ++s) {
        for_each_move(n, params, s, moves);
        for (const auto& mv : moves) trips.emplace_back(s, mv.to, mv.rate);
        m.exit_rate[s] = exit_rate(n, params, s);
        trips.emplace_back(s, s, -m.exit_rate[s]);
    }
    m.generator.resize(S, S);
    m.generator.setFromTriplets(trips.begin(), trips.end());
    m.generator.makeCompressed();
    return m;
}

std::vector<double> extinction_probability_by(const SegmentModel& model, double t, double tol) {
    if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
    const std::uint32_t S = model.states();
    const double L = *std::max_element(model.exit_rate.begin(), model.exit_rate.end());
    const double m = L * t;
    const std::uint64_t K = poisson_cutoff(m, tol);

    Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
    v[0] = 1.0;
    Eigen::VectorXd acc = poisson_weight(0, m) * v;
    for (std::uint64_t k = 1; k <= K; ++k) {
        v += (model.generator * v) / L;
        acc += poisson_weight(k, m) * v;
    }
    std::vector<double> out(S);
    for (std::uint32_t s = 0; s < S; ++s) out[s] = std::clamp(acc[s], 0.0, 1.0);
    return out;
}

std::vector<double> distribution_at(const SegmentModel& model, const std::vector<double>& initial, double t,
                                    double tol) {
    if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
    const std::uint32_t S = model.states();
    if (initial.size() != S) throw std::invalid_argument("initial law has the wrong length");
    const double L = *std::max_element(model.exit_rate.begin(), model.exit_rate.end());
    const double m = L * t;
    const std::uint64_t K = poisson_cutoff(m, tol);

    Eigen::RowVectorXd p = Eigen::Map<const Eigen::RowVectorXd>(initial.data(), S);
    Eigen::RowVectorXd acc = poisson_weight(0, m) * p;
    for (std::uint64_t k = 1; k <= K; ++k) {
        p += (p * model.generator) / L;
        acc += poisson_weight(k, m) * p;
    }
    return {acc.data(), acc.data() + S};
}

std::vector<double> expected_extinction_time(const SegmentModel& model) {
    const std::uint32_t S = model.states();
    const auto T = static_cast<Eigen::Index>(S - 1);
    std::vector<Eigen::Triplet<double>> trips;
    for (Eigen::Index r = 0; r < model.generator.outerSize(); ++r) {
        if (r == 0) continue;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(model.generator, r); it; ++it)
            if (it.col() != 0) trips.emplace_back(r - 1, it.col() - 1, -it.value());
    }
    Eigen::SparseMatrix<double> A(T, T);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolveFailure("factorization of the transient block failed");
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(T);
    const Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw SolveFailure("solve on the transient block failed");
    const double resid = (A * x - b).lpNorm<Eigen::Infinity>();
    if (!std::isfinite(resid) || resid > 1e-8 * (1.0 + x.lpNorm<Eigen::Infinity>()))
        throw SolveFailure("transient solve residual " + std::to_string(resid) + " too large");
    std::vector<double> out(S, 0.0);
    for (Eigen::Index i = 0; i < T; ++i) {
        if (!(x[i] > 0.0)) throw SolveFailure("non-positive expected extinction time");
        out[static_cast<std::size_t>(i + 1)] = x[i];
    }
    return out;
}

std::string state_bits(int n, std::uint32_t state) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int x = 0; x < n; ++x)
        if (state >> x & 1U) s[static_cast<std::size_t>(x)] = '1';
    return s;
}

void write_oracle_csv(std::ostream& os, const SegmentModel& model, const std::vector<double>& times) {
    os << "initial_state_bits,t,extinction_prob\n";
    os.precision(17);
    for (double t : times) {
        const auto p = extinction_probability_by(model, t);
        for (std::uint32_t s = 1; s < model.states(); ++s) os << state_bits(model.n, s) << ',' << t << ',' << p[s] << '\n';
    }
}

}  // namespace bmcp
