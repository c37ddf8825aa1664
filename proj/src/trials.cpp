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

#include "bmcp/trials.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "bmcp/jump_chain.hpp"
#include "bmcp/philox.hpp"

namespace bmcp {

std::size_t default_thread_count() {
    std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("SIM_THREADS")) {
        try {
            const long v = std::stol(cap);
            if (v >= 1) n = std::min(n, static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            // ignored: malformed caps fall back to the hardware count
        }
    }
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads) {
    if (threads == 0) threads = default_thread_count();
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                stop = true;
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

Trajectory run_one(const TrialSpec& spec, std::uint64_t seed) {
    if (spec.segment_length <= 0) return simulate_trial(spec.params, spec.init, seed, spec.horizon, spec.options);
    const auto* set = std::get_if<FiniteSet>(&spec.init);
    if (!set) throw std::invalid_argument("segment runs need a finite initial set");
    Configuration cfg(0, spec.segment_length - 1);
    for (Site x : set->sites) {
        if (!cfg.in_window(x)) throw std::invalid_argument("initial site outside the segment");
        cfg.infect(x);
    }
    auto opts = spec.options;
    opts.mode = WindowMode::Closed;
    if (opts.kernel == Kernel::JumpChain)
        return JumpChainSimulator(spec.params, std::move(cfg), seed, opts).run_until_extinction(spec.horizon);
    return Simulator(spec.params, std::move(cfg), ClockFieldView(ClockField(seed, ClockRates::from(spec.params))), opts)
        .run_until_extinction(spec.horizon);
}

std::vector<TrialSummary> run_trials(const TrialSpec& spec, std::uint64_t count, std::uint64_t master,
                                     bool keep_samples, std::size_t threads, std::uint64_t first) {
    std::vector<TrialSummary> out(count);
    parallel_for(
        count,
        [&](std::size_t k) {
            const std::uint64_t i = first + k;
            const std::uint64_t seed = derive_trial_seed(master, i);
            out[k] = summarize(i, seed, spec.params, spec.init, run_one(spec, seed), keep_samples);
        },
        threads);
    return out;
}

}  // namespace bmcp
