#pragma once

#include <cstdint>

namespace covertkey {

// Stateless counter-based generator. Every draw is a pure function of
// (seed, stream, counter), so substreams assigned to codebook entries or
// Monte Carlo trials are reproducible regardless of evaluation order or
// worker count.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t at(std::uint64_t stream, std::uint64_t counter) const {
        // splitmix64 finalizer applied to a keyed combination; two rounds to
        // decorrelate adjacent counters.
        std::uint64_t x = seed_;
        x += 0x9e3779b97f4a7c15ULL * (stream + 1);
        x ^= mix(counter + 0x632be59bd9b4e019ULL);
        return mix(mix(x));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform(std::uint64_t stream, std::uint64_t counter) const {
        return static_cast<double>(at(stream, counter) >> 11) * 0x1.0p-53;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

/// Sequential view over one substream: hands out consecutive counters.
class Substream {
public:
    Substream(const CounterRng& rng, std::uint64_t stream, std::uint64_t base = 0)
        : rng_(&rng), stream_(stream), counter_(base) {}

    std::uint64_t next_u64() { return rng_->at(stream_, counter_++); }
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Index sampled from unnormalized nonnegative weights.
    template <typename Container>
    std::size_t pick_weighted(const Container& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = next_double() * total;
        double acc = 0.0;
        std::size_t last = 0;
        std::size_t i = 0;
        for (double w : weights) {
            acc += w;
            if (u < acc) return i;
            if (w > 0.0) last = i;
            ++i;
        }
        return last;  // u landed on accumulated rounding at the top end
    }

private:
    const CounterRng* rng_;
    std::uint64_t stream_;
    std::uint64_t counter_;
};

// Stream ids used across the simulator. Kept in one place so substreams
// never collide.
namespace streams {
inline constexpr std::uint64_t kCodebookUser1 = 1;
inline constexpr std::uint64_t kCodebookUser2 = 2;
inline constexpr std::uint64_t kProtocolTrial = 3;
inline constexpr std::uint64_t kAuxRound = 4;
}  // namespace streams

}  // namespace covertkey
