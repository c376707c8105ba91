#pragma once

// Seedable 64-bit random streams. Sub-streams (per repetition, per search
// candidate, ...) are derived with splitmix64 so that concurrent work never
// shares generator state. Determinism is guaranteed within this
// implementation, not across implementations.

#include <cstdint>
#include <random>

namespace rescomp {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent sub-seed for a named stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Unit interval [0, 1) with 53-bit resolution.
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi) by inverse-range transform of u01.
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Uniform on the open interval (0, 1).
    double open01() {
        double v = u01();
        while (v == 0.0) v = u01();
        return v;
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace rescomp
