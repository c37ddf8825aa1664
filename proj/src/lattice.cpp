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

#include "bmcp/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <charconv>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace bmcp {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Standard: return "standard";
        case Variant::RightEdgeModified: return "right_edge";
        case Variant::BoundaryModified: return "boundary";
    }
    return "?";
}

Variant parse_variant(std::string_view s) {
    if (s == "standard") return Variant::Standard;
    if (s == "right_edge" || s == "right-edge") return Variant::RightEdgeModified;
    if (s == "boundary") return Variant::BoundaryModified;
    throw std::invalid_argument("unknown variant '" + std::string(s) +
                                "' (expected standard|right_edge|boundary)");
}

void Params::validate() const {
    if (!(lambda_i >= 0.0)) throw std::invalid_argument("lambda_i must be >= 0");
    if (!(lambda_e >= 0.0)) throw std::invalid_argument("lambda_e must be >= 0");
    if (recovery_rate != 1.0) throw std::invalid_argument("recovery_rate must be exactly 1");
    if (variant != Variant::Standard && lambda_e < lambda_i)
        throw std::invalid_argument("lambda_e must be >= lambda_i for a boosted variant");
}

Params Params::standard(double lambda) {
    return {lambda, lambda, 1.0, Variant::Standard};
}
Params Params::boundary(double lambda_i, double epsilon) {
    return {lambda_i, lambda_i + epsilon, 1.0, Variant::BoundaryModified};
}
Params Params::right_edge(double lambda_i, double epsilon) {
    return {lambda_i, lambda_i + epsilon, 1.0, Variant::RightEdgeModified};
}

// ---------------------------------------------------------------------------
// Configuration

Configuration::Configuration(Site lo, Site hi, LeftBoundary boundary, Site guard_width)
    : lo_(lo), hi_(hi), boundary_(boundary), guard_(guard_width) {
    if (hi < lo) throw std::invalid_argument("configuration window must be nonempty");
    if (guard_width < 0 || guard_width > hi - lo + 1)
        throw std::invalid_argument("guard width out of range");
    const auto n = static_cast<std::size_t>(hi - lo + 1);
    words_.assign((n + 63) / 64, 0);
}

Configuration Configuration::from_sites(Site lo, Site hi, std::span<const Site> sites) {
    Configuration cfg(lo, hi);
    for (Site x : sites) {
        if (!cfg.in_window(x)) throw std::out_of_range("site outside configuration window");
        cfg.infect(x);
    }
    return cfg;
}

Configuration Configuration::half_line(Site lo, Site hi, Site top, Site guard_width) {
    if (guard_width < 1) throw std::invalid_argument("half-line guard must be >= 1 site");
    if (top < lo + guard_width - 1 || top > hi)
        throw std::invalid_argument("half-line top outside window");
    Configuration cfg(lo, hi, LeftBoundary::TruncatedHalfLine, guard_width);
    for (Site x = lo; x <= top; ++x) cfg.infect(x);
    return cfg;
}

void Configuration::infect(Site x) {
    assert(in_window(x));
    const auto i = static_cast<std::uint64_t>(x - lo_);
    auto& w = words_[i >> 6];
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (w & bit) return;
    w |= bit;
    ++count_;
    if (!right_ || x > *right_) right_ = x;
    if (!left_ || x < *left_) left_ = x;
}

void Configuration::recover(Site x) {
    assert(in_window(x));
    const auto i = static_cast<std::uint64_t>(x - lo_);
    auto& w = words_[i >> 6];
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (!(w & bit)) return;
    w &= ~bit;
    --count_;
    if (count_ == 0) {
        left_.reset();
        right_.reset();
        return;
    }
    if (x == *right_) right_ = scan_left_from(x - 1);
    if (x == *left_) left_ = scan_right_from(x + 1);
}

std::optional<Site> Configuration::scan_left_from(Site x) const {
    if (x < lo_) return std::nullopt;
    if (x > hi_) x = hi_;
    auto i = static_cast<std::int64_t>(x - lo_);
    auto wi = i >> 6;
    std::uint64_t w = words_[static_cast<std::size_t>(wi)];
    const int shift = 63 - static_cast<int>(i & 63);
    w = (w << shift) >> shift;  // keep bits <= i
    while (true) {
        if (w) return lo_ + (wi << 6) + (63 - std::countl_zero(w));
        if (--wi < 0) return std::nullopt;
        w = words_[static_cast<std::size_t>(wi)];
    }
}

std::optional<Site> Configuration::scan_right_from(Site x) const {
    if (x > hi_) return std::nullopt;
    if (x < lo_) x = lo_;
    auto i = static_cast<std::int64_t>(x - lo_);
    auto wi = i >> 6;
    const auto nw = static_cast<std::int64_t>(words_.size());
    std::uint64_t w = words_[static_cast<std::size_t>(wi)] >> (i & 63) << (i & 63);
    while (true) {
        if (w) return lo_ + (wi << 6) + std::countr_zero(w);
        if (++wi >= nw) return std::nullopt;
        w = words_[static_cast<std::size_t>(wi)];
    }
}

std::vector<Site> Configuration::sites() const {
    std::vector<Site> out;
    out.reserve(count_);
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
        std::uint64_t w = words_[wi];
        while (w) {
            const int b = std::countr_zero(w);
            out.push_back(lo_ + static_cast<Site>(wi * 64 + static_cast<std::size_t>(b)));
            w &= w - 1;
        }
    }
    return out;
}

bool Configuration::audit() const {
    Count c = 0;
    for (auto w : words_) c += static_cast<Count>(std::popcount(w));
    const auto r = scan_left_from(hi_);
    const auto l = scan_right_from(lo_);
    return c == count_ && r == right_ && l == left_;
}

Configuration Configuration::translated(Site dx) const {
    Configuration out = *this;
    out.lo_ += dx;
    out.hi_ += dx;
    if (out.left_) *out.left_ += dx;
    if (out.right_) *out.right_ += dx;
    return out;
}

Configuration Configuration::restricted(Site lo, Site hi) const {
    Configuration out(lo, hi);
    const Site a = std::max(lo, lo_);
    const Site b = std::min(hi, hi_);
    if (a <= b) {
        for (auto x = scan_right_from(a); x && *x <= b; x = scan_right_from(*x + 1)) out.infect(*x);
    }
    return out;
}

bool operator==(const Configuration& a, const Configuration& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.boundary_ == b.boundary_ && a.guard_ == b.guard_ &&
           a.words_ == b.words_;
}

std::optional<Site> right_edge(const Configuration& cfg) { return cfg.cached_right(); }

std::optional<Site> left_edge(const Configuration& cfg) {
    if (cfg.left_boundary() == LeftBoundary::TruncatedHalfLine && cfg.guard_width() > 0 &&
        cfg.infected(cfg.lo()))
        return kMinusInfinity;
    return cfg.cached_left();
}

std::optional<Configuration> shift_to_right_edge(const Configuration& cfg) {
    const auto r = cfg.cached_right();
    if (!r) return std::nullopt;
    return cfg.translated(-*r);
}

Count cardinality(const Configuration& cfg) {
    if (cfg.left_boundary() == LeftBoundary::TruncatedHalfLine && cfg.guard_width() > 0 &&
        cfg.infected(cfg.lo()))
        return kInfiniteCount;
    return cfg.popcount();
}

nlohmann::json to_json(const Params& p) {
    return {{"lambda_i", p.lambda_i},
            {"lambda_e", p.lambda_e},
            {"recovery_rate", p.recovery_rate},
            {"variant", std::string(to_string(p.variant))}};
}

nlohmann::json to_json(const Configuration& cfg) {
    nlohmann::json j;
    j["lo"] = cfg.lo();
    j["hi"] = cfg.hi();
    j["infected"] = cfg.sites();
    const bool half = cfg.left_boundary() == LeftBoundary::TruncatedHalfLine;
    j["left_boundary"] = half ? "half_line" : "finite";
    if (half) j["guard_width"] = cfg.guard_width();
    return j;
}

Configuration configuration_from_json(const nlohmann::json& j) {
    const Site lo = j.at("lo").get<Site>();
    const Site hi = j.at("hi").get<Site>();
    const auto boundary = j.at("left_boundary").get<std::string>();
    const auto sites = j.at("infected").get<std::vector<Site>>();
    if (!std::is_sorted(sites.begin(), sites.end()) ||
        std::adjacent_find(sites.begin(), sites.end()) != sites.end())
        throw std::invalid_argument("infected sites must be strictly ascending");
    Configuration cfg;
    if (boundary == "finite") {
        cfg = Configuration(lo, hi);
    } else if (boundary == "half_line") {
        cfg = Configuration(lo, hi, LeftBoundary::TruncatedHalfLine, j.value("guard_width", Site{8}));
    } else {
        throw std::invalid_argument("left_boundary must be 'finite' or 'half_line'");
    }
    for (Site x : sites) {
        if (!cfg.in_window(x)) throw std::out_of_range("infected site outside [lo, hi]");
        cfg.infect(x);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// InitialCondition

void validate(const InitialCondition& init) {
    if (const auto* f = std::get_if<FiniteSet>(&init)) {
        if (f->sites.empty()) throw std::invalid_argument("FiniteSet must be nonempty");
        auto s = f->sites;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            throw std::invalid_argument("FiniteSet must be duplicate-free");
    } else if (const auto* h = std::get_if<HalfLine>(&init)) {
        if (h->depth <= 0) throw std::invalid_argument("HalfLine depth must be > 0");
    } else if (const auto* s = std::get_if<StationaryApprox>(&init)) {
        if (!(s->burn_in > 0.0)) throw std::invalid_argument("StationaryApprox burn_in must be > 0");
        if (s->depth < 0) throw std::invalid_argument("StationaryApprox depth must be >= 0");
    }
}

std::string describe(const InitialCondition& init) {
    std::ostringstream os;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SingleOrigin>) {
                os << "origin";
            } else if constexpr (std::is_same_v<T, FiniteSet>) {
                os << "set:";
                for (std::size_t i = 0; i < v.sites.size(); ++i) os << (i ? "," : "") << v.sites[i];
            } else if constexpr (std::is_same_v<T, HalfLine>) {
                os << "halfline:" << v.depth;
            } else {
                os << "stationary:" << v.burn_in;
                if (v.depth > 0) os << ":" << v.depth;
            }
        },
        init);
    return os.str();
}

nlohmann::json to_json(const InitialCondition& init) {
    nlohmann::json j;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SingleOrigin>) {
                j["kind"] = "single_origin";
            } else if constexpr (std::is_same_v<T, FiniteSet>) {
                j["kind"] = "finite_set";
                j["sites"] = v.sites;
            } else if constexpr (std::is_same_v<T, HalfLine>) {
                j["kind"] = "half_line";
                j["depth"] = v.depth;
            } else {
                j["kind"] = "stationary";
                j["burn_in"] = v.burn_in;
                j["depth"] = v.depth;
            }
        },
        init);
    return j;
}

InitialCondition initial_condition_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    InitialCondition init;
    if (kind == "single_origin") {
        init = SingleOrigin{};
    } else if (kind == "finite_set") {
        init = FiniteSet{j.at("sites").get<std::vector<Site>>()};
    } else if (kind == "half_line") {
        init = HalfLine{j.at("depth").get<Site>()};
    } else if (kind == "stationary") {
        init = StationaryApprox{j.at("burn_in").get<double>(), j.value("depth", Site{0})};
    } else {
        throw std::invalid_argument("unknown initial condition kind '" + kind + "'");
    }
    validate(init);
    return init;
}

namespace {

Site parse_site(std::string_view s) {
    Site v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::invalid_argument("bad integer '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

InitialCondition parse_initial_condition(std::string_view text) {
    const auto parts = split(text, ':');
    InitialCondition init;
    if (parts[0] == "origin" && parts.size() == 1) {
        init = SingleOrigin{};
    } else if (parts[0] == "set" && parts.size() == 2) {
        FiniteSet f;
        for (auto s : split(parts[1], ',')) f.sites.push_back(parse_site(s));
        init = f;
    } else if (parts[0] == "halfline" && parts.size() == 2) {
        init = HalfLine{parse_site(parts[1])};
    } else if (parts[0] == "stationary" && (parts.size() == 2 || parts.size() == 3)) {
        StationaryApprox s;
        s.burn_in = std::stod(std::string(parts[1]));
        if (parts.size() == 3) s.depth = parse_site(parts[2]);
        init = s;
    } else {
        throw std::invalid_argument("unrecognized initial condition '" + std::string(text) + "'");
    }
    validate(init);
    return init;
}

}  // namespace bmcp
