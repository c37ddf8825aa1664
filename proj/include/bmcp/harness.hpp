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

// Experiment configuration, run manifests, the named suite registry and
// replay. A run directory holds manifest.json plus every artifact listed in
// it with its SHA-256.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bmcp/trials.hpp"

namespace bmcp {

std::string code_version();

struct ExperimentConfig {
    std::string experiment = "custom";  // "custom" or a suite name
    Params params;
    InitialCondition init = SingleOrigin{};
    double t_max = 100.0;
    std::uint64_t trials = 100;
    std::uint64_t seed = 1;
    double cadence = 1.0;
    TruncationPolicy truncation;
    WindowMode mode = WindowMode::Open;
    Kernel kernel = Kernel::ClockField;
    std::filesystem::path out_dir = "out";
    double invalid_threshold = 0.01;
    /// Custom runs: per-trial trajectory CSVs are written up to this many trials.
    std::uint64_t max_trajectory_files = 1000;
    std::size_t threads = 0;  // 0: default_thread_count()
    /// Suite-specific knobs (object); unknown keys are rejected by the suite.
    nlohmann::json suite_options = nlohmann::json::object();

    TrialSpec trial_spec() const;
};

/// Strict parse: unknown or ill-typed fields throw ConfigInvalid naming the field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

nlohmann::json to_json(const TrialSpec& spec);
TrialSpec trial_spec_from_json(const nlohmann::json& j);

struct ArtifactEntry {
    std::string path;  // relative to the run directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

/// Trials of one homogeneous batch, replayable from `spec` and the seeds.
struct BatchRecord {
    std::string name;
    TrialSpec spec;
    std::uint64_t master_seed = 0;
    std::vector<TrialSummary> trials;  // samples dropped in the manifest
    Census census;
};

struct RunManifest {
    nlohmann::json config;
    std::string code_version;
    std::string status = "running";  // running | complete | failed
    std::vector<BatchRecord> batches;
    double wall_clock_seconds = 0.0;
    std::size_t threads = 0;
    std::vector<ArtifactEntry> artifacts;
    int exit_code = 0;
    std::string error;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest load_manifest(const std::filesystem::path& path);

/// Collects artifacts for one run directory; every write goes through here.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir);
    const std::filesystem::path& dir() const { return dir_; }
    /// Writes `content` to dir/relative and records its digest. Throws OutputUnwritable.
    void write(const std::string& relative, const std::string& content);
    void write_json(const std::string& relative, const nlohmann::json& j);
    const std::vector<ArtifactEntry>& entries() const { return entries_; }

private:
    std::filesystem::path dir_;
    std::vector<ArtifactEntry> entries_;
};

/// What a suite hands back: a JSON report (also written as report.json)
/// and the batches it ran.
struct SuiteResult {
    nlohmann::json report = nlohmann::json::object();
    std::vector<BatchRecord> batches;
};

struct SuiteContext {
    const ExperimentConfig& config;
    ArtifactWriter& writer;
    std::size_t threads;

    /// Runs a batch with trial seeds derived from `master` and records it.
    BatchRecord run_batch(const std::string& name, const TrialSpec& spec, std::uint64_t count, std::uint64_t master,
                          bool keep_samples) const;
};

struct SuiteDescriptor {
    std::string name;
    std::string summary;
    std::vector<int> criteria;  // acceptance criteria the suite exercises
    ExperimentConfig defaults;
    std::function<SuiteResult(const SuiteContext&)> run;
};

const std::vector<SuiteDescriptor>& named_suites();
/// Throws UnknownSuite listing every registered name.
const SuiteDescriptor& find_suite(const std::string& name);

struct RunOutcome {
    RunManifest manifest;
    nlohmann::json report;
    int exit_code = 0;
};

/// Writes manifest.json (status running) first, runs, writes artifacts,
/// then finalizes the manifest. Exit code 2 when a batch's invalid fraction
/// exceeds the threshold.
RunOutcome run_experiment(const ExperimentConfig& config);

/// Re-runs trial `index` of batch `batch` (empty: the first batch) from the
/// manifest and compares digests. Throws VersionMismatch, DigestMismatch.
Trajectory replay(const std::filesystem::path& manifest_path, std::uint64_t index, const std::string& batch = "");

struct BijectionReport {
    bool ok = true;
    std::vector<std::string> missing;     // listed but absent
    std::vector<std::string> unlisted;    // present but not listed
    std::vector<std::string> mismatched;  // digest differs
};

/// Every file under the run directory except manifest.json is listed with a
/// matching digest, and every listed file exists.
BijectionReport check_run_directory(const std::filesystem::path& dir);

}  // namespace bmcp
