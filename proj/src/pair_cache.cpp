#include "pair_cache.hpp"

#include <cmath>

namespace dczip::detail {

PairCache::PairCache(const WeightedDigraph& A) : n(A.n()), W(&A.weights()) {
    const Matrix& Wm = *W;
    row_sum = Wm.rowwise().sum();
    col_sum = Wm.colwise().sum().transpose();
    const std::size_t total = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1);
    pos_i.reserve(total / 4);
    zero_i.reserve(total);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double w = Wm(i, j);
            if (w > 0.0) {
                pos_i.push_back(i);
                pos_j.push_back(j);
                pos_w.push_back(w);
                pos_lgw.push_back(std::lgamma(w + 1.0));
            } else {
                zero_i.push_back(i);
                zero_j.push_back(j);
            }
        }
    }
}

}  // namespace dczip::detail
