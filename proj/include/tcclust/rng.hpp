#pragma once

#include <cmath>
#include <cstdint>

namespace tcclust {

/// Run-level seed. Same seed + same config => bit-identical output.
struct Seed {
    std::uint64_t value = 0;
};

namespace detail {

// SplitMix64 finalizer, used for seeding and stream derivation.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

/// Splittable deterministic generator (xoshiro256++ seeded via SplitMix64).
///
/// Sub-streams derived with substream(i) are statistically independent and
/// reproducible regardless of evaluation order, which is what lets per-gene
/// and per-replicate generation parallelize without changing output.
class Rng {
public:
    explicit Rng(Seed seed) : Rng(seed.value) {}

    explicit Rng(std::uint64_t seed) : identity_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm = detail::mix64(sm);
            word = sm;
        }
        // xoshiro state must not be all-zero
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[3] = 1;
    }

    /// Derive an independent child stream. Deterministic in (seed, stream).
    Rng substream(std::uint64_t stream) const {
        return Rng(detail::mix64(identity_ ^ detail::mix64(stream ^ 0x632BE59BD9B4E019ULL)));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Index in [0, n).
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Standard normal via the polar method (pairs cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::uint64_t identity_;
    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace tcclust
