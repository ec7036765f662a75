#pragma once

#include <cstdint>

namespace dczip {

// Deterministic counter-based random streams. Every (seed, tag, i, j) tuple
// opens an independent stream, so sampling is reproducible no matter how the
// pair loop is ordered or parallelized.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t state) : state_(state) {}

    static RandomStream for_pair(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t i, std::uint64_t j);

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double next_double();
    bool bernoulli(double p);
    // Exact Poisson draw by inversion; large rates are split into additive
    // chunks so the inversion never underflows.
    std::int64_t poisson(double rate);
    // Index in [0, k) with probabilities proportional to weights[0..k).
    int discrete(const double* weights, int k);

private:
    std::int64_t poisson_chunk(double rate);

    std::uint64_t state_;
};

// SplitMix64 step; also used as the mixing function for stream derivation.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace dczip
