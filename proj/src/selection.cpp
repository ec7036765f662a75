#include "dczip/selection.hpp"

#include "dczip/init_eval.hpp"
#include "dczip/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dczip {

namespace {

// Exact one-hot tau; the ICL plug-in evaluates at the hard partition itself.
VariationalState one_hot(const Partition& z, int K) {
    Matrix T = Matrix::Zero(z.n(), K);
    for (int i = 0; i < z.n(); ++i) T(i, z.labels[static_cast<std::size_t>(i)] - 1) = 1.0;
    return VariationalState{std::move(T)};
}

bool is_symmetric(const Matrix& M) {
    return M.isApprox(M.transpose(), 0.0);
}

IclRow icl_decompose(const WeightedDigraph& A, const FitResult& fit, int k,
                     bool degree_corrected) {
    if (fit.params.K != k) {
        throw std::invalid_argument("icl_score: fit was produced with a different k");
    }
    if (fit.params.degree_corrected != degree_corrected) {
        throw std::invalid_argument("icl_score: fit degree-correction flag does not match");
    }
    const int n = A.n();

    // Re-maximize at the hard partition: pi from hard counts (via the ECM's pi
    // refresh at one-hot tau), block parameters by a single ECM pass.
    FitOptions remax;
    remax.ecm_max_iters = 1;
    remax.degree_corrected = degree_corrected;
    remax.sparsity_mode = fit.params.sparsity_mode;
    remax.symmetric_blocks = is_symmetric(fit.params.P) && is_symmetric(fit.params.Lambda);

    IclRow row;
    row.k = k;
    const VariationalState hard_tau = one_hot(fit.partition, k);
    BlockParams hard_params = ecm_m_step(A, hard_tau, fit.params, remax, &row.warnings);
    row.max_complete_ll = complete_log_likelihood(A, fit.partition, hard_params);
    row.block_penalty = icl_block_penalty(k, n, degree_corrected);
    row.mixing_penalty = icl_mixing_penalty(k, n);
    row.icl = row.max_complete_ll - row.block_penalty - row.mixing_penalty;
    row.fit_elbo = fit.best_elbo;
    row.fit_converged = fit.converged;

    const std::vector<int> sizes = fit.partition.community_sizes();
    for (int a = 0; a < k; ++a) {
        const int size = sizes[static_cast<std::size_t>(a)];
        if (size < 5) {
            row.warnings.push_back("icl: community " + std::to_string(a + 1) + " has only " +
                                   std::to_string(size) +
                                   " nodes; Stirling approximation of the mixing term is rough");
        }
    }
    return row;
}

}  // namespace

double icl_block_penalty(int k, int n, bool degree_corrected) {
    const double block_count = k * (k + 1.0) / 2.0 + (degree_corrected ? n : 0);
    return block_count * std::log(static_cast<double>(n) * (n - 1.0));
}

double icl_mixing_penalty(int k, int n) {
    return (k - 1.0) / 2.0 * std::log(static_cast<double>(n));
}

double icl_score(const WeightedDigraph& A, const FitResult& fit, int k, bool degree_corrected) {
    return icl_decompose(A, fit, k, degree_corrected).icl;
}

IclTable select_k(const WeightedDigraph& A, int k_min, int k_max, const FitOptions& opts,
                  const std::vector<std::uint64_t>& restarts) {
    if (k_min < 1 || k_min > k_max) {
        throw std::invalid_argument("select_k: need 1 <= k_min <= k_max");
    }
    if (k_max > A.n()) throw std::invalid_argument("select_k: k_max exceeds node count");
    if (restarts.empty()) throw std::invalid_argument("select_k: restart seed list is empty");

    IclTable table;
    for (int k = k_min; k <= k_max; ++k) {
        FitResult best;
        bool have = false;
        for (std::uint64_t seed : restarts) {
            // Degree-corrected fits start from strength-normalized rows so the
            // initial partition is not driven by hub strengths.
            Partition init = opts.degree_corrected ? kmeans_normalized_rows(A, k, seed)
                                                   : kmeans_rows(A, k, seed);
            FitResult fit = fit_vem(A, k, init, opts);
            if (!have || fit.best_elbo > best.best_elbo) {
                best = std::move(fit);
                have = true;
            }
        }
        IclRow row = icl_decompose(A, best, k, opts.degree_corrected);
        for (const auto& w : best.warnings) row.warnings.push_back(w);
        table.rows.push_back(std::move(row));
    }

    int best_idx = 0;
    for (std::size_t r = 1; r < table.rows.size(); ++r) {
        if (table.rows[r].icl > table.rows[static_cast<std::size_t>(best_idx)].icl) {
            best_idx = static_cast<int>(r);
        }
    }
    table.k_hat = table.rows[static_cast<std::size_t>(best_idx)].k;
    return table;
}

}  // namespace dczip
