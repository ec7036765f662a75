#include "dczip/model.hpp"

#include "dczip/zip.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dczip {

std::pair<Vector, Vector> expected_strengths(const BlockParams& params) {
    params.validate();
    const int n = params.n();
    double block_rate = 0.0;  // sum_{a,b} (1-p_ab) lambda_ab pi_a pi_b
    for (int a = 0; a < params.K; ++a) {
        for (int b = 0; b < params.K; ++b) {
            block_rate += (1.0 - params.P(a, b)) * params.Lambda(a, b) * params.pi(a) * params.pi(b);
        }
    }
    const double mu_sum = params.mu.sum();
    const double nu_sum = params.nu.sum();
    Vector out(n), in(n);
    for (int i = 0; i < n; ++i) {
        out(i) = params.mu(i) * (nu_sum - params.nu(i)) * block_rate;
        in(i) = params.nu(i) * (mu_sum - params.mu(i)) * block_rate;
    }
    return {std::move(out), std::move(in)};
}

double complete_log_likelihood(const WeightedDigraph& A, const Partition& Z,
                               const BlockParams& params) {
    const int n = A.n();
    if (Z.n() != n) throw std::invalid_argument("complete_log_likelihood: partition size mismatch");
    if (Z.K != params.K) throw std::invalid_argument("complete_log_likelihood: K mismatch");
    if (params.n() != n) throw std::invalid_argument("complete_log_likelihood: mu/nu length mismatch");

    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
        const int a = Z.labels[static_cast<std::size_t>(i)] - 1;
        const double pa = params.pi(a);
        ll += pa > 0.0 ? std::log(pa) : -std::numeric_limits<double>::infinity();
    }
    for (int i = 0; i < n; ++i) {
        const int a = Z.labels[static_cast<std::size_t>(i)] - 1;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const int b = Z.labels[static_cast<std::size_t>(j)] - 1;
            const double rate = params.mu(i) * params.nu(j) * params.Lambda(a, b);
            ll += zip_log_pmf(static_cast<std::int64_t>(A.w(i, j)), params.P(a, b), rate);
        }
    }
    return ll;
}

}  // namespace dczip
