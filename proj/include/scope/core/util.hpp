#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <spdlog/logger.h>

namespace scope {

/// Library logger ("scope"). Created on first use with a stderr sink at warn.
std::shared_ptr<spdlog::logger> logger();

std::string sha256_hex(std::string_view data);

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream = 0);

/// Portable random helpers on top of mt19937_64, whose output sequence is
/// fixed by the standard (unlike std::uniform_int_distribution/std::shuffle).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, n). Modulo bias is below 2^-60 for the sizes used here.
    std::size_t index(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(engine_() % n); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results keep index
/// order. The first exception (lowest index) is rethrown after all finish.
template <class R>
std::vector<R> parallel_map(std::size_t n, std::size_t workers, const std::function<R(std::size_t)>& fn) {
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace scope
