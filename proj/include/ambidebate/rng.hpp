#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "ambidebate/errors.hpp"

namespace ambidebate {

// All randomness in the library flows through this wrapper around
// std::mt19937_64, whose output sequence is pinned by the standard, so a
// seed reproduces the same dataset / simulation on any platform. The
// bounded draw uses plain modulo: the bias for our list sizes (< 100)
// against a 64-bit range is far below anything observable, and the mapping
// is portable, which is what matters here.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    std::size_t next_below(std::size_t n) {
        if (n == 0) throw PreconditionError("next_below: n must be positive");
        return static_cast<std::size_t>(next_u64() % n);
    }

    // Uniform in [0,1) with 53 mantissa bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bernoulli(double p) { return next_unit() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        if (items.empty()) throw PreconditionError("pick: empty list");
        return items[next_below(items.size())];
    }

private:
    std::mt19937_64 gen_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives an independent substream id from a base seed and a key tuple.
// Used by the stochastic backend so that (seed, entry, model, role, round)
// always sees the same draws regardless of call interleaving.
inline std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t p : parts) h = splitmix64(h ^ p);
    return h;
}

} // namespace ambidebate
