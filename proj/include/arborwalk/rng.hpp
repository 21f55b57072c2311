#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace arborwalk::rng {

// Domain tags keep unrelated consumers of the same seed on disjoint substreams.
enum class Domain : std::uint64_t {
    conductance = 0x1,
    walk_trial = 0x2,
    clock = 0x3,
    percolation = 0x4,
    bootstrap = 0x5,
    resolve = 0x6,
    generic = 0x7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + splitmix64(b)));
}

// Counter-based stream: the state is a pure function of the key path, so any
// (seed, key...) tuple names the same reproducible sequence on every platform.
class Stream {
public:
    explicit Stream(std::uint64_t key) : state_(splitmix64(key ^ 0x5851f42d4c957f2dULL)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform on the open interval (0,1).
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Exponential with mean 1.
    double next_exp() { return -std::log(next_unit()); }

    // Sum of `shape` unit exponentials (Gamma(shape, 1) for integer shape).
    double next_gamma_int(int shape) {
        double s = 0.0;
        for (int i = 0; i < shape; ++i) s += next_exp();
        return s;
    }

    // Index into `cumulative` (non-decreasing, last element = total mass).
    std::size_t pick_cumulative(std::span<const double> cumulative) {
        const double u = next_unit() * cumulative.back();
        std::size_t lo = 0, hi = cumulative.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cumulative[mid] > u) hi = mid; else lo = mid + 1;
        }
        return lo;
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t key_of(std::uint64_t seed, Domain d, std::initializer_list<std::uint64_t> path) {
    std::uint64_t k = mix(seed, static_cast<std::uint64_t>(d));
    for (std::uint64_t p : path) k = mix(k, p);
    return k;
}

inline Stream stream(std::uint64_t seed, Domain d, std::initializer_list<std::uint64_t> path) {
    return Stream(key_of(seed, d, path));
}

} // namespace arborwalk::rng
