#include "dczip/params.hpp"

#include <cmath>
#include <stdexcept>

namespace dczip {

void BlockParams::validate(bool require_symmetric) const {
    if (K < 1) throw std::invalid_argument("BlockParams: K must be >= 1");
    if (pi.size() != K) throw std::invalid_argument("BlockParams: pi must have length K");
    if (P.rows() != K || P.cols() != K || Lambda.rows() != K || Lambda.cols() != K) {
        throw std::invalid_argument("BlockParams: P and Lambda must be K x K");
    }
    if (mu.size() != nu.size() || mu.size() < 1) {
        throw std::invalid_argument("BlockParams: mu and nu must share a positive length");
    }
    double pi_sum = 0.0;
    for (int a = 0; a < K; ++a) {
        if (!(pi(a) >= 0.0)) throw std::invalid_argument("BlockParams: pi entries must be >= 0");
        pi_sum += pi(a);
    }
    if (std::abs(pi_sum - 1.0) > 1e-12) {
        throw std::invalid_argument("BlockParams: pi must sum to 1 within 1e-12");
    }
    for (int a = 0; a < K; ++a) {
        for (int b = 0; b < K; ++b) {
            if (!(P(a, b) >= 0.0 && P(a, b) <= 1.0)) {
                throw std::invalid_argument("BlockParams: p entries must lie in [0, 1]");
            }
            if (!(Lambda(a, b) >= 0.0) || !std::isfinite(Lambda(a, b))) {
                throw std::invalid_argument("BlockParams: lambda entries must be finite and >= 0");
            }
            if (require_symmetric && (P(a, b) != P(b, a) || Lambda(a, b) != Lambda(b, a))) {
                throw std::invalid_argument("BlockParams: P and Lambda must be symmetric");
            }
        }
    }
    if (sparsity_mode == SparsityMode::global) {
        const double p0 = P(0, 0);
        if ((P.array() != p0).any()) {
            throw std::invalid_argument("BlockParams: global sparsity requires constant P");
        }
    }
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (!(mu(i) >= 0.0) || !(nu(i) >= 0.0)) {
            throw std::invalid_argument("BlockParams: mu and nu must be non-negative");
        }
    }
    if (!degree_corrected) {
        if ((mu.array() != 1.0).any() || (nu.array() != 1.0).any()) {
            throw std::invalid_argument(
                "BlockParams: without degree correction all mu and nu must equal 1");
        }
    }
}

BlockParams BlockParams::homogeneous(int K, int n, double p, double lambda,
                                     bool degree_corrected) {
    BlockParams params;
    params.K = K;
    params.pi = Vector::Constant(K, 1.0 / K);
    params.P = Matrix::Constant(K, K, p);
    params.Lambda = Matrix::Constant(K, K, lambda);
    params.mu = Vector::Ones(n);
    params.nu = Vector::Ones(n);
    params.degree_corrected = degree_corrected;
    params.validate();
    return params;
}

std::string to_string(SparsityMode mode) {
    return mode == SparsityMode::local ? "local" : "global";
}

SparsityMode sparsity_mode_from_string(const std::string& s) {
    if (s == "local") return SparsityMode::local;
    if (s == "global") return SparsityMode::global;
    throw std::invalid_argument("unknown sparsity mode '" + s + "'");
}

}  // namespace dczip
