#include "dczip/init_eval.hpp"

#include "dczip/io.hpp"
#include "dczip/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dczip {

namespace {

constexpr std::uint64_t kTagKmeansRestart = 0x6B6D;

struct LloydResult {
    std::vector<int> assign;  // 0-based cluster per point
    double wcss = 0.0;
};

double sq_dist(const Matrix& X, int i, const Matrix& C, int c) {
    return (X.row(i) - C.row(c)).squaredNorm();
}

// k-means++ seeding followed by Lloyd iterations; empty clusters are re-seeded
// from the point farthest from its centroid.
LloydResult lloyd_once(const Matrix& X, int K, RandomStream rs, int max_iters,
                       std::vector<double>* wcss_trace = nullptr) {
    const int n = static_cast<int>(X.rows());
    Matrix C(K, static_cast<int>(X.cols()));

    C.row(0) = X.row(static_cast<int>(rs.next_u64() % static_cast<std::uint64_t>(n)));
    Vector d2 = Vector::Constant(n, std::numeric_limits<double>::infinity());
    for (int c = 1; c < K; ++c) {
        for (int i = 0; i < n; ++i) d2(i) = std::min(d2(i), sq_dist(X, i, C, c - 1));
        const double total = d2.sum();
        int pick = 0;
        if (total > 0.0) {
            double u = rs.next_double() * total;
            for (int i = 0; i < n; ++i) {
                u -= d2(i);
                if (u < 0.0) {
                    pick = i;
                    break;
                }
                pick = i;
            }
        } else {
            pick = static_cast<int>(rs.next_u64() % static_cast<std::uint64_t>(n));
        }
        C.row(c) = X.row(pick);
    }

    LloydResult res;
    res.assign.assign(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = sq_dist(X, i, C, 0);
            for (int c = 1; c < K; ++c) {
                const double d = sq_dist(X, i, C, c);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (res.assign[static_cast<std::size_t>(i)] != best) {
                res.assign[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        // Recompute centroids; re-seed empties from the farthest point.
        Matrix sums = Matrix::Zero(K, X.cols());
        std::vector<int> counts(static_cast<std::size_t>(K), 0);
        for (int i = 0; i < n; ++i) {
            sums.row(res.assign[static_cast<std::size_t>(i)]) += X.row(i);
            counts[static_cast<std::size_t>(res.assign[static_cast<std::size_t>(i)])]++;
        }
        for (int c = 0; c < K; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                C.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
            }
        }
        for (int c = 0; c < K; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            int far = 0;
            double fd = -1.0;
            for (int i = 0; i < n; ++i) {
                const double d = sq_dist(X, i, C, res.assign[static_cast<std::size_t>(i)]);
                if (d > fd) {
                    fd = d;
                    far = i;
                }
            }
            C.row(c) = X.row(far);
            res.assign[static_cast<std::size_t>(far)] = c;
            changed = true;
        }
        if (wcss_trace) {
            double w = 0.0;
            for (int i = 0; i < n; ++i) w += sq_dist(X, i, C, res.assign[static_cast<std::size_t>(i)]);
            wcss_trace->push_back(w);
        }
        if (!changed && iter > 0) break;
    }

    res.wcss = 0.0;
    for (int i = 0; i < n; ++i) res.wcss += sq_dist(X, i, C, res.assign[static_cast<std::size_t>(i)]);
    return res;
}

}  // namespace

ContingencyTable ContingencyTable::build(const Partition& p1, const Partition& p2) {
    if (p1.n() != p2.n()) {
        throw std::invalid_argument("ContingencyTable: partitions have different sizes");
    }
    ContingencyTable t;
    t.n = p1.n();
    t.counts = Eigen::MatrixXi::Zero(p1.K, p2.K);
    for (int i = 0; i < t.n; ++i) {
        t.counts(p1.labels[static_cast<std::size_t>(i)] - 1,
                 p2.labels[static_cast<std::size_t>(i)] - 1)++;
    }
    return t;
}

Partition kmeans_points(const Matrix& X, int K, std::uint64_t seed, int max_iters,
                        std::vector<std::vector<double>>* wcss_traces) {
    const int n = static_cast<int>(X.rows());
    if (K < 1) throw std::invalid_argument("kmeans: K must be >= 1");
    if (K > n) throw std::invalid_argument("kmeans: K exceeds the number of points");

    LloydResult best;
    bool have = false;
    constexpr int kRestarts = 10;
    for (int r = 0; r < kRestarts; ++r) {
        auto rs = RandomStream::for_pair(seed, kTagKmeansRestart, static_cast<std::uint64_t>(r),
                                         static_cast<std::uint64_t>(r));
        std::vector<double> trace;
        LloydResult cand = lloyd_once(X, K, rs, max_iters, wcss_traces ? &trace : nullptr);
        if (wcss_traces) wcss_traces->push_back(std::move(trace));
        if (!have || cand.wcss < best.wcss) {
            best = std::move(cand);
            have = true;
        }
    }
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = best.assign[static_cast<std::size_t>(i)] + 1;
    return Partition(std::move(labels), K);
}

Partition kmeans_rows(const WeightedDigraph& A, int K, std::uint64_t seed, int max_iters) {
    return kmeans_points(A.weights(), K, seed, max_iters);
}

Partition kmeans_normalized_rows(const WeightedDigraph& A, int K, std::uint64_t seed,
                                 int max_iters) {
    const int n = A.n();
    const Vector su = A.weights().rowwise().sum();
    const Vector sv = A.weights().colwise().sum().transpose();
    const double scale = std::max(su.mean(), 1.0);
    Matrix X = A.weights();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j) X(i, j) *= scale / (std::max(su(i), 1.0) * std::max(sv(j), 1.0));
        }
    }
    return kmeans_points(X, K, seed, max_iters);
}

Partition spectral_partition(const WeightedDigraph& A, int K, std::uint64_t seed) {
    const int n = A.n();
    if (K < 1) throw std::invalid_argument("spectral_partition: K must be >= 1");
    if (K > n) throw std::invalid_argument("spectral_partition: K exceeds node count");

    Eigen::BDCSVD<Matrix> svd(A.weights(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw NumericalError("spectral_partition: SVD failed to converge on the weight matrix (n=" +
                             std::to_string(n) + ")");
    }
    Matrix emb(n, 2 * K);
    emb.leftCols(K) = svd.matrixU().leftCols(K);
    emb.rightCols(K) = svd.matrixV().leftCols(K);
    return kmeans_points(emb, K, seed);
}

double nmi(const Partition& p1, const Partition& p2) {
    // Canonical argument order makes nmi(p, q) == nmi(q, p) bit-exact.
    if (p2.labels < p1.labels) return nmi(p2, p1);
    const ContingencyTable t = ContingencyTable::build(p1, p2);
    const double n = t.n;
    const Eigen::VectorXi rows = t.counts.rowwise().sum();
    const Eigen::VectorXi cols = t.counts.colwise().sum();

    auto entropy = [n](const Eigen::VectorXi& counts) {
        double h = 0.0;
        for (Eigen::Index a = 0; a < counts.size(); ++a) {
            if (counts(a) > 0) {
                const double q = counts(a) / n;
                h -= q * std::log(q);
            }
        }
        return h;
    };
    const double h1 = entropy(rows);
    const double h2 = entropy(cols);
    if (h1 == 0.0 && h2 == 0.0) return 1.0;  // both single-cluster
    if (h1 == 0.0 || h2 == 0.0) return 0.0;

    double mi = 0.0;
    for (Eigen::Index a = 0; a < t.counts.rows(); ++a) {
        for (Eigen::Index b = 0; b < t.counts.cols(); ++b) {
            const int c = t.counts(a, b);
            if (c == 0) continue;
            const double q = c / n;
            mi += q * std::log(q * n * n / (static_cast<double>(rows(a)) * cols(b)));
        }
    }
    return 2.0 * mi / (h1 + h2);
}

}  // namespace dczip
