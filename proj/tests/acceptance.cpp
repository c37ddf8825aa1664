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

// Runs every acceptance criterion through its suite at the default settings
// and prints one PASS/FAIL line per criterion. A criterion passes when the
// suite's statistical predicate holds and the suite finished within its
// runtime budget.
//
//   acceptance [--out DIR] [--only 1,4,9]

#include <chrono>
#include <cstring>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bmcp/harness.hpp"

using nlohmann::json;

namespace {


const std::map<int, std::optional<double>> kBudgets = {
    {1, 120.0}, {2, 60.0},  {3, 600.0}, {4, 600.0},      {5, 600.0},      {6, 300.0},
    {7, 600.0}, {8, 600.0}, {9, 180.0}, {10, 300.0}, {11, std::nullopt}, {12, std::nullopt}};

std::set<int> parse_only(const char* text) {
    std::set<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::filesystem::path out = "acceptance_runs";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--out") && i + 1 < argc) out = argv[++i];
        else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = parse_only(argv[++i]);
        else {
            std::cerr << "usage: acceptance [--out DIR] [--only 1,2,...]\n";
            return 64;
        }
    }

    struct Line {
        bool pass = false;
        std::string text;
    };
    std::map<int, Line> lines;
    for (const auto& suite : bmcp::named_suites()) {
        if (suite.criteria.empty()) continue;
        bool wanted = only.empty();
        for (int c : suite.criteria) wanted = wanted || only.count(c);
        if (!wanted) continue;

        auto cfg = suite.defaults;
        cfg.out_dir = out / suite.name;
        std::cout << "running " << suite.name << " ..." << std::endl;
        json report;
        double seconds = 0.0;
        std::string error;
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto outcome = bmcp::run_experiment(cfg);
            report = outcome.report;
            seconds = outcome.manifest.wall_clock_seconds;
            if (outcome.exit_code != 0) error = "invalid-trial fraction above threshold";
        } catch (const std::exception& e) {
            error = e.what();
            seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        for (int id : suite.criteria) {
            Line l;
            const auto budget = kBudgets.at(id);
            const bool in_time = !budget || seconds <= *budget;
            std::ostringstream os;
            os.precision(4);
            std::string name = suite.name;
            json checks;
            bool stat_pass = false;
            if (error.empty() && report.contains("criteria")) {
                for (const auto& c : report["criteria"])
                    if (c["id"] == id) {
                        stat_pass = c["pass"].get<bool>();
                        name = c["name"].get<std::string>();
                        checks = c["checks"];
                    }
            }
            l.pass = error.empty() && stat_pass && in_time;
            os << "criterion " << id << " [" << name << "]: " << (l.pass ? "PASS" : "FAIL") << "  runtime " << seconds
               << " s";
            if (budget) os << " (budget " << *budget << " s" << (in_time ? "" : ", EXCEEDED") << ")";
            if (!error.empty()) os << "  error: " << error;
            if (!checks.is_null()) os << "  " << checks.dump();
            l.text = os.str();
            lines[id] = l;
            std::cout << "  " << l.text << std::endl;
        }
    }

    std::cout << "\n==== acceptance summary ====\n";
    int failed = 0;
    for (const auto& [id, l] : lines) {
        std::cout << (l.pass ? "PASS" : "FAIL") << "  " << l.text << "\n";
        failed += !l.pass;
    }
    std::cout << (lines.size() - failed) << "/" << lines.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
