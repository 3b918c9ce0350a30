#pragma once

#include <cstdint>
#include <random>

namespace mhp {

/// Seeded generator threaded explicitly through init, dropout and sampling.
/// `split()` derives an independent child stream so that sub-tasks (a data
/// shard, one restart of Lloyd's method) do not perturb the parent sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
        return dist(engine_);
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        std::normal_distribution<double> dist(mean, stddev);
        return dist(engine_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    Rng split() { return Rng(mix(engine_() ^ 0xA0761D6478BD642FULL)); }

    /// Child stream keyed by an integer; does not advance this generator.
    Rng derive(std::uint64_t key) const { return Rng(mix(seed_ ^ mix(key + 0x9E3779B97F4A7C15ULL))); }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        // splitmix64 finalizer
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace mhp
