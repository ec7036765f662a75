#include "dczip/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dczip {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RandomStream RandomStream::for_pair(std::uint64_t seed, std::uint64_t tag,
                                    std::uint64_t i, std::uint64_t j) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= tag * 0xD6E8FEB86659FD93ULL;
    (void)splitmix64(s);
    s ^= i * 0xA0761D6478BD642FULL;
    (void)splitmix64(s);
    s ^= j * 0xE7037ED1A0B428DBULL;
    std::uint64_t state = splitmix64(s) ^ s;
    return RandomStream(state);
}

std::uint64_t RandomStream::next_u64() { return splitmix64(state_); }

double RandomStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool RandomStream::bernoulli(double p) { return next_double() < p; }

std::int64_t RandomStream::poisson(double rate) {
    if (!(rate >= 0.0)) throw std::invalid_argument("poisson: rate must be >= 0");
    std::int64_t total = 0;
    // Additive split keeps the inversion product away from underflow.
    while (rate > 25.0) {
        total += poisson_chunk(25.0);
        rate -= 25.0;
    }
    total += poisson_chunk(rate);
    return total;
}

std::int64_t RandomStream::poisson_chunk(double rate) {
    if (rate <= 0.0) return 0;
    const double limit = std::exp(-rate);
    std::int64_t k = 0;
    double prod = 1.0;
    do {
        ++k;
        prod *= next_double();
    } while (prod > limit);
    return k - 1;
}

int RandomStream::discrete(const double* weights, int k) {
    double total = 0.0;
    for (int a = 0; a < k; ++a) total += weights[a];
    double u = next_double() * total;
    for (int a = 0; a < k; ++a) {
        u -= weights[a];
        if (u < 0.0) return a;
    }
    return k - 1;
}

}  // namespace dczip
