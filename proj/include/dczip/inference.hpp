#pragma once

#include "dczip/params.hpp"
#include "dczip/types.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace dczip {

// Entries below this are floored (then rows renormalized) so one-hot starts
// cannot become absorbing states of the fixed-point iteration.
inline constexpr double kTauFloor = 1e-10;

// Mean-field distribution over community assignments: row i is the Q-law of
// node i on the K-simplex.
struct VariationalState {
    Matrix tau;

    int n() const { return static_cast<int>(tau.rows()); }
    int K() const { return static_cast<int>(tau.cols()); }
    void validate() const;
};

struct FitOptions {
    int max_outer_iters = 100;
    double elbo_tol = 1e-6;
    int estep_max_iters = 100;
    double estep_tol = 1e-8;   // max-abs change of tau between fixed-point passes
    int ecm_max_iters = 50;
    double ecm_tol = 1e-6;     // max relative parameter change between sweeps
    bool symmetric_blocks = true;
    SparsityMode sparsity_mode = SparsityMode::local;
    bool degree_corrected = true;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FitResult {
    BlockParams params;
    VariationalState tau;
    Partition partition;
    std::vector<double> elbo_trace;  // one entry per outer iteration
    bool converged = false;
    int outer_iters = 0;
    std::vector<std::string> warnings;
    double elbo_init = 0.0;  // ELBO of the bootstrap state, before iteration 1
    double best_elbo = 0.0;
    // Smallest ELBO change produced by an ECM call at fixed tau; EM theory
    // says this never goes (materially) negative.
    double min_mstep_gain = std::numeric_limits<double>::infinity();
    FitOptions options;  // the options the fit ran with, for run metadata
};

// Per-sweep ECM health data; the identity residuals compare each mu/nu update
// against an independently re-accumulated denominator (Appendix-style strength
// matching: corrected expected strength == observed strength).
struct EcmDiagnostics {
    int sweeps = 0;
    bool converged = false;
    double max_mu_identity_rel_err = 0.0;
    double max_nu_identity_rel_err = 0.0;
    bool check_identities = false;  // set by caller; residual checks cost an extra pass
};

// Posterior probability that an observed zero is structural:
//   alpha = p 1{a_ij=0} / (p 1{a_ij=0} + (1-p) e^{-rate}).
double compute_alpha(std::int64_t a_ij, double p_ab, double rate);

// One-hot tau from a partition, with the floor applied and rows renormalized.
VariationalState tau_from_partition(const Partition& init, int K);

// argmax per row; ties go to the smallest community index. Labels are 1-based.
Partition hard_assign(const VariationalState& tau);

// pi_a = column mean of tau.
Vector update_pi(const VariationalState& tau);

// Synchronous fixed-point iteration of
//   log tau_ia <- log pi_a + sum_{j != i} sum_b tau_jb log f_ab(A_ij),
// rows normalized by log-sum-exp, floored, renormalized. `damping` in (0,1]
// mixes old and new log-tau (1 = undamped). Non-convergence within the cap is
// recorded in `warnings`, never thrown.
VariationalState e_step(const WeightedDigraph& A, const VariationalState& tau,
                        const BlockParams& params, const FitOptions& opts,
                        double damping = 1.0,
                        std::vector<std::string>* warnings = nullptr);

// ECM sweeps over (P, Lambda, mu, nu) at fixed tau, in that order, each sweep
// reusing the structural-zero responsibilities computed from the sweep-start
// parameters. Pooled (a,b)/(b,a) statistics under symmetric_blocks, fully
// pooled P under global sparsity, mu/nu skipped without degree correction.
// mu and nu are rescaled to mean one after every sweep, Lambda absorbing the
// scale; pi is refreshed from tau.
BlockParams ecm_m_step(const WeightedDigraph& A, const VariationalState& tau,
                       const BlockParams& params_in, const FitOptions& opts,
                       std::vector<std::string>* warnings = nullptr,
                       EcmDiagnostics* diag = nullptr);

// Evidence lower bound
//   sum_{i!=j} sum_{a,b} tau_ia tau_jb log f_ab(A_ij)
//   + sum_i sum_a tau_ia (log pi_a - log tau_ia),
// with 0 log 0 = 0 and -inf propagated as a sentinel.
double elbo(const WeightedDigraph& A, const VariationalState& tau,
            const BlockParams& params);

// Outer variational EM driver. Bootstraps (P, Lambda) by moment matching from
// the one-hot tau, alternates e_step / ecm_m_step until the ELBO change drops
// below elbo_tol, and returns the best-ELBO iterate seen.
FitResult fit_vem(const WeightedDigraph& A, int K, const Partition& init,
                  const FitOptions& opts, EcmDiagnostics* diag = nullptr);

}  // namespace dczip
