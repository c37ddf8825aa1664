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

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace bmcp {

using Site = std::int64_t;
using Count = std::uint64_t;

/// Left edge of a truncated half-line whose frozen guard is infected.
inline constexpr Site kMinusInfinity = std::numeric_limits<Site>::min();
/// Cardinality reported for truncated half-line configurations.
inline constexpr Count kInfiniteCount = std::numeric_limits<Count>::max();

/// Standard numerical estimate for the critical rate of the 1-d contact process.
/// A config input, never ground truth.
inline constexpr double kLambdaCriticalEstimate = 1.6489;

enum class Variant { Standard, RightEdgeModified, BoundaryModified };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

struct Params {
    double lambda_i = kLambdaCriticalEstimate;
    double lambda_e = kLambdaCriticalEstimate;
    double recovery_rate = 1.0;
    Variant variant = Variant::BoundaryModified;

    /// epsilon = lambda_e - lambda_i; zero for the standard process.
    double boost_rate() const {
        return variant == Variant::Standard ? 0.0 : lambda_e - lambda_i;
    }
    bool boosts_right() const { return variant != Variant::Standard && boost_rate() > 0.0; }
    bool boosts_left() const { return variant == Variant::BoundaryModified && boost_rate() > 0.0; }

    /// Throws std::invalid_argument on negative rates, recovery != 1, or
    /// lambda_e < lambda_i for a boosted variant.
    void validate() const;

    static Params standard(double lambda);
    static Params boundary(double lambda_i, double epsilon);
    static Params right_edge(double lambda_i, double epsilon);
};

enum class LeftBoundary { Finite, TruncatedHalfLine };

struct SiteInterval {
    Site lo = 0;
    Site hi = -1;

    bool empty() const { return hi < lo; }
    bool contains(Site x) const { return x >= lo && x <= hi; }
    Count size() const { return empty() ? 0 : static_cast<Count>(hi - lo + 1); }
    friend bool operator==(const SiteInterval&, const SiteInterval&) = default;
};

/// Infected set on a finite window of Z.
///
/// Storage is a flat word bitset over [lo, hi] with cached extreme sites.
/// For a TruncatedHalfLine configuration the sites [lo, lo + guard) are the
/// frozen guard: they stay infected and stand in for the infinite half-line.
class Configuration {
public:
    Configuration() = default;
    Configuration(Site lo, Site hi, LeftBoundary boundary = LeftBoundary::Finite,
                  Site guard_width = 0);

    static Configuration from_sites(Site lo, Site hi, std::span<const Site> sites);
    /// (-inf, top] truncated at lo: [lo, lo + guard) frozen, [lo + guard, top] infected.
    static Configuration half_line(Site lo, Site hi, Site top, Site guard_width);

    Site lo() const { return lo_; }
    Site hi() const { return hi_; }
    SiteInterval window() const { return {lo_, hi_}; }
    LeftBoundary left_boundary() const { return boundary_; }
    Site guard_width() const { return guard_; }
    bool in_window(Site x) const { return x >= lo_ && x <= hi_; }
    bool is_frozen(Site x) const {
        return boundary_ == LeftBoundary::TruncatedHalfLine && x >= lo_ && x < lo_ + guard_;
    }

    bool infected(Site x) const {
        if (!in_window(x)) return false;
        const auto i = static_cast<std::uint64_t>(x - lo_);
        return (words_[i >> 6] >> (i & 63)) & 1U;
    }

    /// Marks x infected; x must lie in the window.
    void infect(Site x);
    /// Clears x; x must lie in the window and not be frozen.
    void recover(Site x);

    bool empty() const { return !right_.has_value(); }
    std::optional<Site> cached_right() const { return right_; }
    std::optional<Site> cached_left() const { return left_; }
    /// Exact number of infected window sites (guard included).
    Count popcount() const { return count_; }

    std::vector<Site> sites() const;
    /// Rescans the bitset; true iff the cached edges and count are exact.
    bool audit() const;

    /// Same infected set and boundary semantics, translated by `dx`.
    Configuration translated(Site dx) const;
    /// Occupancy restricted to [lo, hi] (clipped), as a Finite configuration.
    Configuration restricted(Site lo, Site hi) const;

    friend bool operator==(const Configuration& a, const Configuration& b);

private:
    std::optional<Site> scan_left_from(Site x) const;   // largest infected <= x
    std::optional<Site> scan_right_from(Site x) const;  // smallest infected >= x

    Site lo_ = 0;
    Site hi_ = -1;
    LeftBoundary boundary_ = LeftBoundary::Finite;
    Site guard_ = 0;
    std::vector<std::uint64_t> words_;
    std::optional<Site> left_;
    std::optional<Site> right_;
    Count count_ = 0;
};

std::optional<Site> right_edge(const Configuration& cfg);
/// kMinusInfinity for a truncated half-line with infected guard.
std::optional<Site> left_edge(const Configuration& cfg);
/// Translates so the rightmost infected site sits at 0; nullopt on the dead state.
std::optional<Configuration> shift_to_right_edge(const Configuration& cfg);
/// kInfiniteCount for a truncated half-line with infected guard.
Count cardinality(const Configuration& cfg);

nlohmann::json to_json(const Params& p);
nlohmann::json to_json(const Configuration& cfg);
Configuration configuration_from_json(const nlohmann::json& j);

struct SingleOrigin {};
struct FiniteSet {
    std::vector<Site> sites;
};
struct HalfLine {
    Site depth = 0;  // truncation depth L
};
struct StationaryApprox {
    double burn_in = 0.0;
    Site depth = 0;  // 0: use the truncation policy default
};

using InitialCondition = std::variant<SingleOrigin, FiniteSet, HalfLine, StationaryApprox>;

/// Throws std::invalid_argument when an invariant is violated.
void validate(const InitialCondition& init);
std::string describe(const InitialCondition& init);
nlohmann::json to_json(const InitialCondition& init);
InitialCondition initial_condition_from_json(const nlohmann::json& j);
/// "origin", "set:0,3,7", "halfline:400", "stationary:200[:400]".
InitialCondition parse_initial_condition(std::string_view text);

}  // namespace bmcp
