#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <cstdlib>
#include <functional>
#include <map>
#include <thread>
#include <vector>

#include "invforge/rng.hpp"

namespace invforge {

struct McEstimate {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double p_hat = 0;
    double sigma = 0;

    static McEstimate from_counts(std::uint64_t successes, std::uint64_t trials) {
        McEstimate e;
        e.trials = trials;
        e.successes = successes;
        e.p_hat = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
        e.sigma = trials ? std::sqrt(e.p_hat * (1 - e.p_hat) / static_cast<double>(trials)) : 0.0;
        return e;
    }
};

// Worker count from INVFORGE_THREADS, else hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("INVFORGE_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Runs trial(i, rng) for i in [0, trials) with rng seeded from (seed, i) and
// collects the returned keys into a histogram. The result does not depend on
// the number of workers.
template <class Key>
std::map<Key, std::uint64_t> run_trials(std::uint64_t trials, std::uint64_t seed,
                                        const std::function<Key(std::uint64_t, Rng&)>& trial) {
    unsigned workers = std::max(1u, std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max<std::uint64_t>(trials, 1))));
    std::vector<std::map<Key, std::uint64_t>> parts(workers);
    std::vector<std::exception_ptr> errors(workers);
    auto body = [&](unsigned w) {
        try {
            for (std::uint64_t i = w; i < trials; i += workers) {
                Rng rng(derive_seed(seed, i));
                ++parts[w][trial(i, rng)];
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::map<Key, std::uint64_t> out;
    for (auto& p : parts)
        for (auto& [k, v] : p) out[k] += v;
    return out;
}

inline McEstimate run_bernoulli(std::uint64_t trials, std::uint64_t seed,
                                const std::function<bool(std::uint64_t, Rng&)>& trial) {
    auto h = run_trials<bool>(trials, seed, trial);
    return McEstimate::from_counts(h[true], trials);
}

}  // namespace invforge
