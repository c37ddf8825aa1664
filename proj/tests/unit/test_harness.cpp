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

#include <chrono>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "bmcp/errors.hpp"
#include "bmcp/harness.hpp"

using namespace bmcp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("bmcp-test-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

ExperimentConfig small_config(const fs::path& out) {
    ExperimentConfig c;
    c.params = Params::boundary(1.6489, 0.5);
    c.t_max = 20.0;
    c.trials = 12;
    c.seed = 5;
    c.out_dir = out;
    return c;
}

std::string field_error(const json& j) {
    try {
        config_from_json(j);
    } catch (const ConfigInvalid& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config errors name the offending field") {
    CHECK(field_error({{"t_max", "long"}}).find("t_max") != std::string::npos);
    CHECK(field_error({{"params", {{"lambda_i", -1.0}}}}).find("params") != std::string::npos);
    CHECK(field_error({{"params", {{"colour", 1}}}}).find("params.colour") != std::string::npos);
    CHECK(field_error({{"trials", -3}}).find("trials") != std::string::npos);
    CHECK(field_error({{"init", "nowhere"}}).find("init") != std::string::npos);
    CHECK(field_error({{"surprise", true}}).find("surprise") != std::string::npos);
    CHECK(field_error({{"experiment", "clt"}, {"suite_options", {{"bogus", 1}}}}).find("suite_options.bogus") !=
          std::string::npos);
    CHECK(field_error({{"experiment", "nope"}}).find("experiment") != std::string::npos);
}

TEST_CASE("configs round-trip through json") {
    auto c = config_from_json({{"experiment", "clt"}, {"trials", 7}, {"init", "stationary:10:50"}});
    CHECK(c.trials == 7);
    CHECK(c.kernel == Kernel::JumpChain);  // suite default kept
    CHECK(c.suite_options["scales"].size() == 4);
    const auto again = config_from_json(to_json(c));
    CHECK(to_json(again) == to_json(c));
}

TEST_CASE("suite lookup") {
    CHECK(find_suite("clt").defaults.suite_options["scales"] == json({64.0, 128.0, 256.0, 512.0}));
    try {
        find_suite("nope");
        FAIL("expected UnknownSuite");
    } catch (const UnknownSuite& e) {
        for (const auto& s : named_suites()) CHECK(std::string(e.what()).find(s.name) != std::string::npos);
    }
    for (const char* name : {"oracle-agreement", "coupling-exactness", "edge-speed", "clt", "extinction-tail",
                             "survival-size", "large-deviation-shape", "box-crossing", "mixing", "renewal",
                             "liggett-domination"})
        CHECK_NOTHROW(find_suite(name));
}

TEST_CASE("the registry covers every acceptance criterion") {
    std::set<int> covered;
    for (const auto& s : named_suites()) covered.insert(s.criteria.begin(), s.criteria.end());
    for (int c = 1; c <= 12; ++c) CHECK_MESSAGE(covered.count(c) == 1, "criterion " << c);
}

TEST_CASE("zero trials: manifest only, exit 0") {
    TempDir d;
    auto c = small_config(d.path / "run");
    c.trials = 0;
    const auto out = run_experiment(c);
    CHECK(out.exit_code == 0);
    CHECK(out.manifest.status == "complete");
    CHECK(out.manifest.artifacts.empty());
    CHECK(fs::exists(d.path / "run" / "manifest.json"));
    CHECK_FALSE(fs::exists(d.path / "run" / "report.json"));
    CHECK(check_run_directory(d.path / "run").ok);
}

TEST_CASE("same config and seed give identical artifacts, whatever the thread count") {
    TempDir d;
    auto a = small_config(d.path / "a");
    a.threads = 1;
    auto b = small_config(d.path / "b");
    b.threads = 3;
    const auto ma = run_experiment(a).manifest;
    const auto mb = run_experiment(b).manifest;
    REQUIRE(ma.artifacts.size() == mb.artifacts.size());
    for (std::size_t k = 0; k < ma.artifacts.size(); ++k) {
        CHECK(ma.artifacts[k].path == mb.artifacts[k].path);
        CHECK(ma.artifacts[k].sha256 == mb.artifacts[k].sha256);
    }
    CHECK(check_run_directory(d.path / "a").ok);
}

TEST_CASE("replay matches stored digests and catches tampering") {
    TempDir d;
    const auto c = small_config(d.path / "run");
    const auto m = run_experiment(c).manifest;
    for (const auto& t : m.batches.front().trials)
        CHECK(replay(d.path / "run" / "manifest.json", t.index).digest() == t.digest);

    std::ifstream in(d.path / "run" / "manifest.json");
    json j = json::parse(in);
    j["batches"][0]["trials"][3]["seed"] = 12345;
    std::ofstream(d.path / "tampered.json") << j.dump();
    CHECK_THROWS_AS(replay(d.path / "tampered.json", 3), DigestMismatch);

    j = json::parse(std::ifstream(d.path / "run" / "manifest.json"));
    j["code_version"] = "bmcp 0.0.0-other";
    std::ofstream(d.path / "old.json") << j.dump();
    CHECK_THROWS_AS(replay(d.path / "old.json", 0), VersionMismatch);
}

TEST_CASE("the bijection checker notices stray, missing and altered files") {
    TempDir d;
    const auto c = small_config(d.path / "run");
    run_experiment(c);
    const fs::path dir = d.path / "run";
    REQUIRE(check_run_directory(dir).ok);
    std::ofstream(dir / "stray.txt") << "x";
    auto r = check_run_directory(dir);
    CHECK_FALSE(r.ok);
    CHECK(r.unlisted == std::vector<std::string>{"stray.txt"});
    fs::remove(dir / "stray.txt");
    std::ofstream(dir / "report.json", std::ios::app) << " ";
    CHECK(check_run_directory(dir).mismatched == std::vector<std::string>{"report.json"});
    fs::remove(dir / "report.json");
    CHECK(check_run_directory(dir).missing == std::vector<std::string>{"report.json"});
}

TEST_CASE("rerunning into a directory replaces the previous run, foreign files block it") {
    TempDir d;
    const auto c = small_config(d.path / "run");
    run_experiment(c);
    CHECK_NOTHROW(run_experiment(c));
    CHECK(check_run_directory(d.path / "run").ok);
    std::ofstream(d.path / "run" / "notes.txt") << "mine";
    CHECK_THROWS_AS(run_experiment(c), OutputUnwritable);
}

TEST_CASE("invalid fractions above the threshold give exit code 2") {
    TempDir d;
    auto c = small_config(d.path / "run");
    c.params = Params::standard(1.0);
    c.init = HalfLine{8};
    c.truncation.half_line_depth = 8;
    c.t_max = 200.0;
    c.trials = 5;
    const auto out = run_experiment(c);
    CHECK(out.manifest.batches.front().census.invalid > 0);
    CHECK(out.exit_code == 2);
}

TEST_CASE("two experiments in one process do not interact") {
    TempDir d;
    const auto a1 = run_experiment(small_config(d.path / "a1")).manifest;
    auto other = small_config(d.path / "x");
    other.seed = 99;
    run_experiment(other);
    const auto a2 = run_experiment(small_config(d.path / "a2")).manifest;
    CHECK(a1.artifacts.size() == a2.artifacts.size());
    for (std::size_t k = 0; k < a1.artifacts.size(); ++k) CHECK(a1.artifacts[k].sha256 == a2.artifacts[k].sha256);
}
