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

// sim run | oracle | replay | suites

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bmcp/errors.hpp"
#include "bmcp/exact_oracle.hpp"
#include "bmcp/harness.hpp"

using nlohmann::json;

namespace {

struct RunFlags {
    std::string config_path;
    std::optional<std::string> suite, variant, init, out, kernel, mode;
    std::optional<double> lambda_i, lambda_e, t_max;
    std::optional<std::uint64_t> trials, seed;
    std::optional<std::size_t> threads;
    std::vector<std::string> options;  // key=json
};

json assemble(const RunFlags& f) {
    json j = json::object();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw bmcp::ConfigInvalid("cannot read config file " + f.config_path);
        j = json::parse(in);
    }
    if (f.suite) j["experiment"] = *f.suite;
    auto param = [&](const char* key, const json& v) {
        if (!j.contains("params")) j["params"] = json::object();
        j["params"][key] = v;
    };
    if (f.lambda_i) param("lambda_i", *f.lambda_i);
    if (f.lambda_e) param("lambda_e", *f.lambda_e);
    if (f.variant) param("variant", *f.variant);
    if (f.init) j["init"] = *f.init;
    if (f.t_max) j["t_max"] = *f.t_max;
    if (f.trials) j["trials"] = *f.trials;
    if (f.seed) j["seed"] = *f.seed;
    if (f.out) j["out_dir"] = *f.out;
    if (f.kernel) j["kernel"] = *f.kernel;
    if (f.mode) j["mode"] = *f.mode;
    if (f.threads) j["threads"] = *f.threads;
    for (const auto& kv : f.options) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw bmcp::ConfigInvalid("--option expects key=value, got " + kv);
        json v;
        try {
            v = json::parse(kv.substr(eq + 1));
        } catch (const json::parse_error&) {
            v = kv.substr(eq + 1);
        }
        j["suite_options"][kv.substr(0, eq)] = v;
    }
    return j;
}

int run(const RunFlags& f) {
    const auto cfg = bmcp::config_from_json(assemble(f));
    const auto outcome = bmcp::run_experiment(cfg);
    const auto& m = outcome.manifest;
    std::cout << cfg.experiment << ": " << m.status << " in " << m.wall_clock_seconds << " s, " << m.artifacts.size()
              << " artifacts in " << cfg.out_dir.string() << "\n";
    for (const auto& b : m.batches)
        std::cout << "  batch " << b.name << ": " << b.census.total << " trials, " << b.census.invalid << " invalid, "
                  << b.census.extinct << " extinct\n";
    if (outcome.report.is_object() && outcome.report.contains("criteria"))
        for (const auto& c : outcome.report["criteria"])
            std::cout << "  criterion " << c["id"] << " (" << c["name"].get<std::string>()
                      << "): " << (c["pass"].get<bool>() ? "PASS" : "FAIL") << " " << c["checks"].dump() << "\n";
    if (outcome.exit_code == 2) std::cerr << "invalid-trial fraction above " << cfg.invalid_threshold << "\n";
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary-modified contact process simulator"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run_cmd = app.add_subcommand("run", "Run a named suite or a custom experiment");
    run_cmd->add_option("--config", rf.config_path, "JSON config file; flags override its fields");
    run_cmd->add_option("--suite", rf.suite, "Suite name (see `sim suites`), or custom");
    run_cmd->add_option("--lambda-i", rf.lambda_i, "Interior infection rate");
    run_cmd->add_option("--lambda-e", rf.lambda_e, "Edge infection rate");
    run_cmd->add_option("--variant", rf.variant, "standard | right_edge | boundary");
    run_cmd->add_option("--init", rf.init, "origin | set:0,3,7 | halfline:L | stationary:B[:L]");
    run_cmd->add_option("--t-max", rf.t_max, "Horizon");
    run_cmd->add_option("--trials", rf.trials, "Trial count");
    run_cmd->add_option("--seed", rf.seed, "Master seed");
    run_cmd->add_option("--out", rf.out, "Output directory");
    run_cmd->add_option("--kernel", rf.kernel, "clock_field | jump_chain");
    run_cmd->add_option("--mode", rf.mode, "open | closed");
    run_cmd->add_option("--threads", rf.threads, "Worker threads (default: cores, capped by SIM_THREADS)");
    run_cmd->add_option("--option", rf.options, "Suite option key=json (repeatable)");

    int n = 0;
    double li = bmcp::kLambdaCriticalEstimate, le = bmcp::kLambdaCriticalEstimate;
    std::string variant = "boundary", out_csv;
    std::vector<double> times{1.0, 5.0};
    bool expected = false;
    auto* oracle_cmd = app.add_subcommand("oracle", "Exact extinction probabilities on a closed segment");
    oracle_cmd->add_option("--n", n, "Segment length")->required()->check(CLI::Range(1, bmcp::kOracleMaxSites));
    oracle_cmd->add_option("--lambda-i", li, "Interior infection rate");
    oracle_cmd->add_option("--lambda-e", le, "Edge infection rate");
    oracle_cmd->add_option("--variant", variant, "standard | right_edge | boundary");
    oracle_cmd->add_option("--t", times, "Evaluation times")->expected(1, -1);
    oracle_cmd->add_option("--out", out_csv, "CSV path (default: stdout)");
    oracle_cmd->add_flag("--expected-time", expected, "Print E[tau] per initial state instead");

    std::string manifest, batch;
    std::uint64_t trial = 0;
    bool print_csv = false;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run one stored trial and check its digest");
    replay_cmd->add_option("--manifest", manifest, "manifest.json of a run")->required();
    replay_cmd->add_option("--trial", trial, "Trial index")->required();
    replay_cmd->add_option("--batch", batch, "Batch name (default: the first)");
    replay_cmd->add_flag("--csv", print_csv, "Print the trajectory CSV");

    auto* suites_cmd = app.add_subcommand("suites", "List the named suites");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run_cmd) return run(rf);
        if (*oracle_cmd) {
            bmcp::Params p{li, le, 1.0, bmcp::parse_variant(variant)};
            p.validate();
            const auto model = bmcp::build_generator(n, p);
            std::ofstream file;
            if (!out_csv.empty()) {
                file.open(out_csv);
                if (!file) throw bmcp::OutputUnwritable("cannot write " + out_csv);
            }
            std::ostream& os = out_csv.empty() ? std::cout : file;
            if (expected) {
                const auto e = bmcp::expected_extinction_time(model);
                os.precision(17);
                os << "initial_state_bits,expected_extinction_time\n";
                for (std::uint32_t s = 0; s < model.states(); ++s) os << bmcp::state_bits(n, s) << ',' << e[s] << '\n';
            } else {
                bmcp::write_oracle_csv(os, model, times);
            }
            return 0;
        }
        if (*replay_cmd) {
            const auto tr = bmcp::replay(manifest, trial, batch);
            if (print_csv)
                tr.write_csv(std::cout);
            else
                std::cout << "trial " << trial << ": digest " << tr.digest() << " matches\n";
            return 0;
        }
        if (*suites_cmd) {
            for (const auto& s : bmcp::named_suites()) {
                std::cout << s.name << "  [criteria";
                for (int c : s.criteria) std::cout << ' ' << c;
                std::cout << "]  " << s.summary << "\n";
            }
            return 0;
        }
    } catch (const bmcp::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 64;
    } catch (const bmcp::DigestMismatch& e) {
        std::cerr << "digest mismatch: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
