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

#include "bmcp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "bmcp/digest.hpp"
#include "bmcp/errors.hpp"

#ifndef BMCP_VERSION
#define BMCP_VERSION "0.0.0"
#endif

namespace bmcp {

std::string code_version() { return "bmcp " BMCP_VERSION; }

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Enum names

namespace {

std::string mode_name(WindowMode m) { return m == WindowMode::Open ? "open" : "closed"; }
std::string kernel_name(Kernel k) { return k == Kernel::ClockField ? "clock_field" : "jump_chain"; }

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw ConfigInvalid("config field '" + field + "': " + why);
}

const json& require_type(const json& v, const std::string& field, json::value_t t, const char* what) {
    const bool ok = t == json::value_t::number_float ? v.is_number() : v.type() == t ||
                    (t == json::value_t::number_unsigned && v.is_number_integer() && v.get<std::int64_t>() >= 0);
    if (!ok) invalid(field, std::string("expected ") + what);
    return v;
}

double number(const json& v, const std::string& field) {
    return require_type(v, field, json::value_t::number_float, "a number").get<double>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& field) {
    return require_type(v, field, json::value_t::number_unsigned, "a non-negative integer").get<std::uint64_t>();
}

std::string string(const json& v, const std::string& field) {
    return require_type(v, field, json::value_t::string, "a string").get<std::string>();
}

void require_object(const json& v, const std::string& field) {
    if (!v.is_object()) invalid(field, "expected an object");
}

void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<const char*> known) {
    for (const auto& [k, _] : obj.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* n) { return k == n; }))
            invalid(prefix + k, "unknown field");
    }
}

WindowMode parse_mode(const std::string& s, const std::string& field) {
    if (s == "open") return WindowMode::Open;
    if (s == "closed") return WindowMode::Closed;
    invalid(field, "expected open|closed");
}

Kernel parse_kernel(const std::string& s, const std::string& field) {
    if (s == "clock_field") return Kernel::ClockField;
    if (s == "jump_chain") return Kernel::JumpChain;
    invalid(field, "expected clock_field|jump_chain");
}

void apply_params(const json& j, Params& p) {
    require_object(j, "params");
    reject_unknown(j, "params.", {"lambda_i", "lambda_e", "variant", "recovery_rate"});
    if (j.contains("lambda_i")) p.lambda_i = number(j["lambda_i"], "params.lambda_i");
    if (j.contains("lambda_e")) p.lambda_e = number(j["lambda_e"], "params.lambda_e");
    if (j.contains("recovery_rate")) p.recovery_rate = number(j["recovery_rate"], "params.recovery_rate");
    if (j.contains("variant")) {
        try {
            p.variant = parse_variant(string(j["variant"], "params.variant"));
        } catch (const std::invalid_argument& e) {
            invalid("params.variant", e.what());
        }
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        invalid("params", e.what());
    }
}

InitialCondition parse_init(const json& j) {
    try {
        if (j.is_string()) return parse_initial_condition(j.get<std::string>());
        if (j.is_object()) return initial_condition_from_json(j);
    } catch (const ConfigInvalid&) {
        throw;
    } catch (const std::exception& e) {
        invalid("init", e.what());
    }
    invalid("init", "expected a string such as \"origin\" or an object with a \"kind\"");
}

void apply_truncation(const json& j, TruncationPolicy& t) {
    require_object(j, "truncation");
    reject_unknown(j, "truncation.", {"margin", "guard_width", "half_line_depth"});
    if (j.contains("margin")) t.margin = static_cast<Site>(unsigned_integer(j["margin"], "truncation.margin"));
    if (j.contains("guard_width")) {
        t.guard_width = static_cast<Site>(unsigned_integer(j["guard_width"], "truncation.guard_width"));
        if (t.guard_width < 1) invalid("truncation.guard_width", "must be >= 1");
    }
    if (j.contains("half_line_depth"))
        t.half_line_depth = static_cast<Site>(unsigned_integer(j["half_line_depth"], "truncation.half_line_depth"));
}

json options_json(const SimulatorOptions& o) {
    return {{"mode", mode_name(o.mode)},
            {"cadence", o.cadence},
            {"kernel", kernel_name(o.kernel)},
            {"truncation", to_json(o.truncation)}};
}

}  // namespace

TrialSpec ExperimentConfig::trial_spec() const {
    TrialSpec s;
    s.params = params;
    s.init = init;
    s.horizon = t_max;
    s.options.mode = mode;
    s.options.truncation = truncation;
    s.options.cadence = cadence;
    s.options.kernel = kernel;
    return s;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
    reject_unknown(j, "", {"experiment", "params", "init", "t_max", "trials", "seed", "cadence", "truncation", "mode",
                           "kernel", "out_dir", "invalid_threshold", "max_trajectory_files", "threads",
                           "suite_options", "code_version"});
    ExperimentConfig c;
    if (j.contains("experiment")) {
        const auto name = string(j["experiment"], "experiment");
        if (name != "custom") {
            try {
                c = find_suite(name).defaults;
            } catch (const UnknownSuite& e) {
                invalid("experiment", e.what());
            }
        }
        c.experiment = name;
    }
    if (j.contains("params")) apply_params(j["params"], c.params);
    if (j.contains("init")) c.init = parse_init(j["init"]);
    if (j.contains("t_max")) {
        c.t_max = number(j["t_max"], "t_max");
        if (!(c.t_max > 0.0)) invalid("t_max", "must be > 0");
    }
    if (j.contains("trials")) c.trials = unsigned_integer(j["trials"], "trials");
    if (j.contains("seed")) c.seed = unsigned_integer(j["seed"], "seed");
    if (j.contains("cadence")) {
        c.cadence = number(j["cadence"], "cadence");
        if (!(c.cadence > 0.0)) invalid("cadence", "must be > 0");
    }
    if (j.contains("truncation")) apply_truncation(j["truncation"], c.truncation);
    if (j.contains("mode")) c.mode = parse_mode(string(j["mode"], "mode"), "mode");
    if (j.contains("kernel")) c.kernel = parse_kernel(string(j["kernel"], "kernel"), "kernel");
    if (j.contains("out_dir")) c.out_dir = string(j["out_dir"], "out_dir");
    if (j.contains("invalid_threshold")) {
        c.invalid_threshold = number(j["invalid_threshold"], "invalid_threshold");
        if (!(c.invalid_threshold >= 0.0 && c.invalid_threshold <= 1.0)) invalid("invalid_threshold", "must lie in [0, 1]");
    }
    if (j.contains("max_trajectory_files"))
        c.max_trajectory_files = unsigned_integer(j["max_trajectory_files"], "max_trajectory_files");
    if (j.contains("threads")) c.threads = unsigned_integer(j["threads"], "threads");
    if (j.contains("suite_options")) {
        const auto& so = j["suite_options"];
        require_object(so, "suite_options");
        for (const auto& [k, v] : so.items()) {
            if (!c.suite_options.contains(k)) invalid("suite_options." + k, "unknown for experiment " + c.experiment);
            if (c.suite_options[k].type() != v.type() && !(c.suite_options[k].is_number() && v.is_number()))
                invalid("suite_options." + k, "expected the same JSON type as the default");
            c.suite_options[k] = v;
        }
    }
    try {
        validate(c.init);
    } catch (const std::invalid_argument& e) {
        invalid("init", e.what());
    }
    return c;
}

json to_json(const ExperimentConfig& c) {
    return {{"experiment", c.experiment},
            {"params", to_json(c.params)},
            {"init", to_json(c.init)},
            {"t_max", c.t_max},
            {"trials", c.trials},
            {"seed", c.seed},
            {"cadence", c.cadence},
            {"truncation",
             {{"margin", c.truncation.margin},
              {"guard_width", c.truncation.guard_width},
              {"half_line_depth", c.truncation.half_line_depth}}},
            {"mode", mode_name(c.mode)},
            {"kernel", kernel_name(c.kernel)},
            {"out_dir", c.out_dir.string()},
            {"invalid_threshold", c.invalid_threshold},
            {"max_trajectory_files", c.max_trajectory_files},
            {"threads", c.threads},
            {"suite_options", c.suite_options}};
}

json to_json(const TrialSpec& spec) {
    return {{"params", to_json(spec.params)},
            {"init", to_json(spec.init)},
            {"horizon", spec.horizon},
            {"options", options_json(spec.options)},
            {"segment_length", spec.segment_length}};
}

TrialSpec trial_spec_from_json(const json& j) {
    TrialSpec s;
    apply_params(j.at("params"), s.params);
    s.init = initial_condition_from_json(j.at("init"));
    s.horizon = j.at("horizon").get<double>();
    const auto& o = j.at("options");
    s.options.mode = parse_mode(o.at("mode").get<std::string>(), "options.mode");
    s.options.cadence = o.at("cadence").get<double>();
    s.options.kernel = parse_kernel(o.at("kernel").get<std::string>(), "options.kernel");
    const auto& t = o.at("truncation");
    s.options.truncation.margin = t.at("margin").get<Site>();
    s.options.truncation.guard_width = t.at("guard_width").get<Site>();
    s.options.truncation.half_line_depth = t.at("half_line_depth").get<Site>();
    s.segment_length = j.value("segment_length", Site{0});
    return s;
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

json trial_entry(const TrialSummary& t) {
    json e{{"index", t.index}, {"seed", t.seed}, {"digest", t.digest}, {"valid", t.valid}, {"events", t.event_count}};
    if (!t.valid) e["invalid_reason"] = t.invalid_reason;
    if (t.extinction_time)
        e["extinction_time"] = *t.extinction_time;
    else
        e["censor_time"] = t.censor_time;
    return e;
}

TrialSummary trial_from_entry(const json& e, const TrialSpec& spec) {
    TrialSummary t;
    t.index = e.at("index").get<std::uint64_t>();
    t.seed = e.at("seed").get<std::uint64_t>();
    t.digest = e.at("digest").get<std::string>();
    t.valid = e.at("valid").get<bool>();
    t.invalid_reason = e.value("invalid_reason", "");
    t.event_count = e.value("events", std::uint64_t{0});
    if (e.contains("extinction_time")) t.extinction_time = e["extinction_time"].get<double>();
    t.censor_time = e.value("censor_time", 0.0);
    t.params = spec.params;
    t.init = spec.init;
    return t;
}

}  // namespace

json to_json(const RunManifest& m) {
    json batches = json::array();
    for (const auto& b : m.batches) {
        json trials = json::array();
        for (const auto& t : b.trials) trials.push_back(trial_entry(t));
        batches.push_back({{"name", b.name},
                           {"spec", to_json(b.spec)},
                           {"master_seed", b.master_seed},
                           {"census", to_json(b.census)},
                           {"trials", trials}});
    }
    json artifacts = json::array();
    for (const auto& a : m.artifacts) artifacts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    json j{{"config", m.config},
           {"code_version", m.code_version},
           {"status", m.status},
           {"batches", batches},
           {"wall_clock_seconds", m.wall_clock_seconds},
           {"threads", m.threads},
           {"artifacts", artifacts},
           {"exit_code", m.exit_code}};
    if (!m.error.empty()) j["error"] = m.error;
    return j;
}

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.config = j.at("config");
    m.code_version = j.at("code_version").get<std::string>();
    m.status = j.at("status").get<std::string>();
    m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    m.threads = j.value("threads", std::size_t{0});
    m.exit_code = j.value("exit_code", 0);
    m.error = j.value("error", "");
    for (const auto& b : j.at("batches")) {
        BatchRecord r;
        r.name = b.at("name").get<std::string>();
        r.spec = trial_spec_from_json(b.at("spec"));
        r.master_seed = b.at("master_seed").get<std::uint64_t>();
        for (const auto& e : b.at("trials")) r.trials.push_back(trial_from_entry(e, r.spec));
        r.census = census(r.trials);
        m.batches.push_back(std::move(r));
    }
    for (const auto& a : j.at("artifacts"))
        m.artifacts.push_back({a.at("path").get<std::string>(), a.at("sha256").get<std::string>(),
                               a.at("bytes").get<std::uintmax_t>()});
    return m;
}

RunManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read manifest " + path.string());
    return manifest_from_json(json::parse(in));
}

// ---------------------------------------------------------------------------
// Artifacts

ArtifactWriter::ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

void ArtifactWriter::write(const std::string& relative, const std::string& content) {
    const fs::path p = dir_ / relative;
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputUnwritable("cannot write " + p.string());
    out << content;
    out.close();
    if (!out) throw OutputUnwritable("write failed for " + p.string());
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ArtifactEntry& e) { return e.path == relative; });
    ArtifactEntry e{relative, sha256_hex(content), content.size()};
    if (it != entries_.end())
        *it = e;
    else
        entries_.push_back(e);
}

void ArtifactWriter::write_json(const std::string& relative, const json& j) { write(relative, j.dump(2) + "\n"); }

BatchRecord SuiteContext::run_batch(const std::string& name, const TrialSpec& spec, std::uint64_t count,
                                    std::uint64_t master, bool keep_samples) const {
    BatchRecord b;
    b.name = name;
    b.spec = spec;
    b.master_seed = master;
    b.trials = run_trials(spec, count, master, keep_samples, threads);
    b.census = census(b.trials);
    return b;
}

// ---------------------------------------------------------------------------
// Runs

namespace {

void write_manifest(const fs::path& dir, const RunManifest& m) {
    const fs::path p = dir / "manifest.json";
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw OutputUnwritable("cannot write " + p.string());
    out << to_json(m).dump(1) << "\n";
    if (!out) throw OutputUnwritable("write failed for " + p.string());
}

// A previous run's own files are removed; anything else in the way is an error.
void prepare_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw OutputUnwritable("cannot create output directory " + dir.string());
    const fs::path old = dir / "manifest.json";
    std::set<fs::path> owned;
    if (fs::exists(old)) {
        try {
            for (const auto& a : load_manifest(old).artifacts) owned.insert(dir / a.path);
        } catch (const std::exception&) {
            throw OutputUnwritable("output directory holds an unreadable manifest: " + old.string());
        }
        owned.insert(old);
    }
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        if (!owned.count(e.path()))
            throw OutputUnwritable("output directory contains a file not owned by a previous run: " + e.path().string());
    }
    for (const auto& p : owned) fs::remove(p, ec);
    // Empty subdirectories left behind are harmless; remove what we can.
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && fs::is_empty(e.path())) fs::remove(e.path(), ec);
}

std::string batch_csv(const BatchRecord& b) {
    std::ostringstream os;
    os.precision(17);
    os << "index,seed,valid,extinct,extinction_time,censor_time,events,digest\n";
    for (const auto& t : b.trials) {
        os << t.index << ',' << t.seed << ',' << (t.valid ? 1 : 0) << ',' << (t.extinct() ? 1 : 0) << ',';
        if (t.extinction_time) os << *t.extinction_time;
        os << ',' << t.censor_time << ',' << t.event_count << ',' << t.digest << '\n';
    }
    return os.str();
}

SuiteResult run_custom(const SuiteContext& ctx) {
    const auto& c = ctx.config;
    SuiteResult r;
    const bool keep = c.trials <= c.max_trajectory_files;
    auto batch = ctx.run_batch("main", c.trial_spec(), c.trials, c.seed, keep);
    if (c.trials == 0) {
        r.batches.push_back(std::move(batch));
        r.report = nullptr;  // no estimator output for an empty run
        return r;
    }
    if (keep) {
        for (const auto& t : batch.trials) {
            Trajectory tr;
            tr.samples = t.samples;
            std::ostringstream os;
            tr.write_csv(os);
            char name[64];
            std::snprintf(name, sizeof name, "trajectories/trial_%06llu.csv", static_cast<unsigned long long>(t.index));
            ctx.writer.write(name, os.str());
        }
    }
    json rep{{"census", to_json(batch.census)}};
    const bool half = std::holds_alternative<HalfLine>(c.init) || std::holds_alternative<StationaryApprox>(c.init);
    if (half) {
        if (keep) {
            try {
                rep["edge_speed"] = to_json(estimate_edge_speed(batch.trials, std::floor(c.t_max)));
            } catch (const TooFewTrials& e) {
                rep["edge_speed_error"] = e.what();
            }
        }
    } else {
        const auto& cs = batch.census;
        const double n = static_cast<double>(cs.valid);
        if (cs.valid) {
            const double theta = static_cast<double>(cs.censored) / n;
            rep["survival"] = {{"t_max", c.t_max}, {"theta", theta}, {"se", std::sqrt(theta * (1 - theta) / n)}};
        }
        try {
            rep["extinction_tail"] = to_json(extinction_tail(batch.trials, c.t_max));
        } catch (const Error& e) {
            rep["extinction_tail_error"] = e.what();
        }
    }
    r.report = rep;
    r.batches.push_back(std::move(batch));
    return r;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    prepare_directory(config.out_dir);
    RunManifest m;
    m.config = to_json(config);
    m.code_version = code_version();
    m.threads = config.threads ? config.threads : default_thread_count();
    write_manifest(config.out_dir, m);

    ArtifactWriter writer(config.out_dir);
    SuiteContext ctx{config, writer, m.threads};
    RunOutcome out;
    try {
        SuiteResult res = config.experiment == "custom" ? run_custom(ctx) : find_suite(config.experiment).run(ctx);
        for (auto& b : res.batches) {
            for (auto& t : b.trials) t.samples.clear();
            if (!b.trials.empty()) writer.write("batches/" + b.name + ".csv", batch_csv(b));
            if (b.census.invalid_fraction > config.invalid_threshold) m.exit_code = 2;
        }
        if (!res.report.is_null()) writer.write_json("report.json", res.report);
        m.batches = std::move(res.batches);
        out.report = std::move(res.report);
        m.status = "complete";
    } catch (const std::exception& e) {
        m.status = "failed";
        m.error = e.what();
        m.exit_code = 1;
        m.artifacts = writer.entries();
        m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        write_manifest(config.out_dir, m);
        throw;
    }
    m.artifacts = writer.entries();
    std::sort(m.artifacts.begin(), m.artifacts.end(),
              [](const ArtifactEntry& a, const ArtifactEntry& b) { return a.path < b.path; });
    m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    write_manifest(config.out_dir, m);
    out.exit_code = m.exit_code;
    out.manifest = std::move(m);
    return out;
}

Trajectory replay(const fs::path& manifest_path, std::uint64_t index, const std::string& batch) {
    const RunManifest m = load_manifest(manifest_path);
    if (m.code_version != code_version())
        throw VersionMismatch("manifest written by '" + m.code_version + "', this is '" + code_version() + "'");
    if (m.batches.empty()) throw std::invalid_argument("manifest has no trial batches");
    const BatchRecord* b = &m.batches.front();
    if (!batch.empty()) {
        auto it = std::find_if(m.batches.begin(), m.batches.end(), [&](const BatchRecord& r) { return r.name == batch; });
        if (it == m.batches.end()) throw std::invalid_argument("no batch named '" + batch + "' in the manifest");
        b = &*it;
    }
    auto it = std::find_if(b->trials.begin(), b->trials.end(), [&](const TrialSummary& t) { return t.index == index; });
    if (it == b->trials.end()) throw std::invalid_argument("trial " + std::to_string(index) + " not in batch " + b->name);
    Trajectory tr = run_one(b->spec, it->seed);
    const std::string d = tr.digest();
    if (d != it->digest)
        throw DigestMismatch("trial " + std::to_string(index) + " of batch " + b->name + ": stored " + it->digest +
                             ", replayed " + d);
    return tr;
}

BijectionReport check_run_directory(const fs::path& dir) {
    BijectionReport r;
    const RunManifest m = load_manifest(dir / "manifest.json");
    std::set<std::string> listed;
    for (const auto& a : m.artifacts) {
        listed.insert(a.path);
        const fs::path p = dir / a.path;
        if (!fs::exists(p)) {
            r.missing.push_back(a.path);
            continue;
        }
        if (sha256_file(p) != a.sha256) r.mismatched.push_back(a.path);
    }
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = fs::relative(e.path(), dir).generic_string();
        if (rel == "manifest.json") continue;
        if (!listed.count(rel)) r.unlisted.push_back(rel);
    }
    r.ok = r.missing.empty() && r.unlisted.empty() && r.mismatched.empty();
    return r;
}

}  // namespace bmcp
