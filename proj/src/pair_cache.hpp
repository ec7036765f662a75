#pragma once

#include "dczip/types.hpp"

#include <vector>

namespace dczip::detail {

// Decomposition of the weight matrix into positive and zero ordered pairs;
// shared by the E-step kernel, ELBO, and ECM accumulations. Built once per
// graph, O(n^2).
struct PairCache {
    int n = 0;
    const Matrix* W = nullptr;  // borrowed from the graph; used by slow reference paths
    std::vector<int> pos_i, pos_j;
    std::vector<double> pos_w;
    std::vector<double> pos_lgw;  // lgamma(w + 1)
    std::vector<int> zero_i, zero_j;
    Vector row_sum;  // observed out-strengths
    Vector col_sum;  // observed in-strengths

    explicit PairCache(const WeightedDigraph& A);

    std::size_t n_pos() const { return pos_i.size(); }
    std::size_t n_zero() const { return zero_i.size(); }
};

}  // namespace dczip::detail
