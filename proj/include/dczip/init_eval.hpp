#pragma once

#include "dczip/types.hpp"

#include <cstdint>
#include <vector>

namespace dczip {

// Co-occurrence counts between two partitions.
struct ContingencyTable {
    Eigen::MatrixXi counts;  // K1 x K2
    int n = 0;

    static ContingencyTable build(const Partition& p1, const Partition& p2);
};

// Lloyd's algorithm with k-means++ seeding on the rows of the weight matrix.
// Ten seeded restarts internally, best within-cluster sum of squares kept
// (ties to the lowest restart index); empty clusters are re-seeded from the
// point farthest from its centroid.
Partition kmeans_rows(const WeightedDigraph& A, int K, std::uint64_t seed,
                      int max_iters = 100);

// k-means on strength-normalized rows: entry (i, j) is scaled by
// 1/(max(out_i, 1) * max(in_j, 1)). Hubs stop dominating the distances, which
// is what the degree-corrected fit wants from its initial partition.
Partition kmeans_normalized_rows(const WeightedDigraph& A, int K, std::uint64_t seed,
                                 int max_iters = 100);

// k-means on arbitrary row vectors; kmeans_rows and the spectral embedding
// share this. `wcss_traces`, when given, receives the per-restart objective
// after every Lloyd iteration.
Partition kmeans_points(const Matrix& X, int K, std::uint64_t seed, int max_iters = 100,
                        std::vector<std::vector<double>>* wcss_traces = nullptr);

// Directed spectral baseline: top-K left and right singular vectors of the
// weight matrix concatenated into an n x 2K embedding, then k-means.
Partition spectral_partition(const WeightedDigraph& A, int K, std::uint64_t seed);

// Normalized mutual information 2 I / (H1 + H2) with natural logs; 1 when both
// partitions are single-cluster, 0 when exactly one entropy is zero.
double nmi(const Partition& p1, const Partition& p2);

}  // namespace dczip
