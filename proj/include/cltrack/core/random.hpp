#pragma once

#include <cstdint>
#include <random>

namespace cltrack {

/// splitmix64 finalizer; derives independent seeds from (seed, stream, index) tuples.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(a ^ mix_seed(b));
}

/// mt19937_64 with distribution code of our own: the standard distributions are
/// implementation-defined, and outputs must be byte-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Inclusive range.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Normal truncated to [-bound, bound] standard deviations by resampling.
    double truncated_normal(double stddev, double bound);

    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cltrack
