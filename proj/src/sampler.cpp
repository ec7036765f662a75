#include "dczip/sampler.hpp"

#include "dczip/rng.hpp"

#include <stdexcept>

namespace dczip {

namespace {
constexpr std::uint64_t kTagPartition = 0x5A11;
constexpr std::uint64_t kTagWeight = 0xED6E;
}  // namespace

Partition sample_partition(const Vector& pi, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_partition: n must be >= 1");
    const int K = static_cast<int>(pi.size());
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto rs = RandomStream::for_pair(seed, kTagPartition, static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(i));
        labels[static_cast<std::size_t>(i)] = rs.discrete(pi.data(), K) + 1;
    }
    return Partition(std::move(labels), K);
}

WeightedDigraph sample_weights(const Partition& z, const BlockParams& params,
                               std::uint64_t seed) {
    params.validate();
    const int n = z.n();
    if (params.n() != n) {
        throw std::invalid_argument("sample_weights: mu/nu length does not match partition size");
    }
    if (z.K != params.K) throw std::invalid_argument("sample_weights: K mismatch");
    Matrix W = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const int a = z.labels[static_cast<std::size_t>(i)] - 1;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const int b = z.labels[static_cast<std::size_t>(j)] - 1;
            auto rs = RandomStream::for_pair(seed, kTagWeight, static_cast<std::uint64_t>(i),
                                             static_cast<std::uint64_t>(j));
            if (rs.bernoulli(params.P(a, b))) continue;  // structural zero
            const double rate = params.mu(i) * params.nu(j) * params.Lambda(a, b);
            W(i, j) = static_cast<double>(rs.poisson(rate));
        }
    }
    return WeightedDigraph(std::move(W));
}

std::pair<WeightedDigraph, Partition> sample_network(const BlockParams& params, int n,
                                                     std::uint64_t seed) {
    params.validate();
    if (n < 2) throw std::invalid_argument("sample_network: n must be >= 2");
    if (params.n() != n) {
        throw std::invalid_argument("sample_network: n does not match length of mu and nu");
    }
    Partition z = sample_partition(params.pi, n, seed);
    WeightedDigraph A = sample_weights(z, params, seed);
    return {std::move(A), std::move(z)};
}

}  // namespace dczip
