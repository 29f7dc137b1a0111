#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ersentinel {

/// splitmix64 step; also the mixer behind derived stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Folds the parts into one derived seed, so each simulation stream
/// (per pair, per node, per purpose) is independent of the others.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = 0x6a09e667f3bcc909ULL;
    for (const auto part : parts) {
        state ^= part;
        splitmix64(state);
        state ^= splitmix64(state);
    }
    return splitmix64(state);
}

/// mt19937_64 with hand-rolled draw helpers. The std engine is specified
/// bit-for-bit, but std distributions are not; rolling the transforms
/// here keeps traces identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    double exponential(double mean) { return -mean * std::log(1.0 - next_unit()); }

    bool chance(double p) { return next_unit() < p; }

    /// Uniform in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ersentinel
