#pragma once

#include "dczip/inference.hpp"
#include "dczip/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dczip {

struct IclRow {
    int k = 0;
    double max_complete_ll = 0.0;   // complete-data log-likelihood at the hard partition
    double block_penalty = 0.0;     // (k(k+1)/2 [+ n]) log(n(n-1))
    double mixing_penalty = 0.0;    // (k-1)/2 log n
    double icl = 0.0;
    double fit_elbo = 0.0;
    bool fit_converged = false;
    std::vector<std::string> warnings;
};

struct IclTable {
    std::vector<IclRow> rows;
    int k_hat = 0;
};

// Penalty pieces: (k(k+1)/2 [+ n]) log(n(n-1)) for the block parameters and
// (k-1)/2 log n for the mixing weights.
double icl_block_penalty(int k, int n, bool degree_corrected);
double icl_mixing_penalty(int k, int n);

// ICL of a fitted model: the complete-data log-likelihood at the hard
// partition (pi re-maximized from hard counts, the block parameters re-fit by
// one ECM pass at hard tau) minus the BIC-style penalties. The +n term in the
// block penalty appears only with degree correction.
double icl_score(const WeightedDigraph& A, const FitResult& fit, int k,
                 bool degree_corrected);

// Fits each k in [k_min, k_max] once per restart seed (k-means init), keeps
// the best-ELBO fit, and scores it; k_hat is the ICL argmax with ties broken
// toward smaller k.
IclTable select_k(const WeightedDigraph& A, int k_min, int k_max,
                  const FitOptions& opts, const std::vector<std::uint64_t>& restarts);

}  // namespace dczip
