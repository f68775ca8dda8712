#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace cphs {

// splitmix64 finalizer; also used to derive per-stage seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// FNV-1a over the bytes of a stage name.
constexpr std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char ch : name) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    return h;
}

// Stage seed for (master, lane, stage). Lane is typically a loop iteration.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t lane, std::string_view stage) {
    return mix64(mix64(master) ^ mix64(lane + 0x51ed270b) ^ hash_name(stage));
}

// Seeded generator with explicit value transforms. std::mt19937_64 output is
// fully specified by the standard and the transforms below avoid the
// library-defined distribution adaptors, so streams are identical across
// platforms and toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

    std::uint64_t bits() { return eng_(); }

    // uniform in [0,1) with 53 random bits
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // uniform integer in [0,n), n >= 1
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(eng_()) * n) >> 64);
    }

    // Box-Muller; draws two uniforms per call (no cached spare, keeps the
    // stream position independent of call history)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace cphs
