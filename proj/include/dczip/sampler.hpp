#pragma once

#include "dczip/params.hpp"
#include "dczip/types.hpp"

#include <cstdint>
#include <utility>

namespace dczip {

// Draws community labels i.i.d. from params.pi.
Partition sample_partition(const Vector& pi, int n, std::uint64_t seed);

// Draws edge counts conditional on a fixed partition: each ordered pair (i,j),
// i != j, is a structural zero with probability p_{z_i z_j}, otherwise
// Poisson(mu_i nu_j lambda_{z_i z_j}).
WeightedDigraph sample_weights(const Partition& z, const BlockParams& params,
                               std::uint64_t seed);

// Full generative draw: partition then weights, both derived from `seed`.
std::pair<WeightedDigraph, Partition> sample_network(const BlockParams& params, int n,
                                                     std::uint64_t seed);

}  // namespace dczip
