#include "dczip/inference.hpp"

#include "dczip/sampler.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dczip;

namespace {

VariationalState soft_random_tau(int n, int K, std::uint64_t salt) {
    Matrix T(n, K);
    std::uint64_t s = salt;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int a = 0; a < K; ++a) {
            s = s * 6364136223846793005ULL + 1442695040888963407ULL;
            T(i, a) = 0.05 + static_cast<double>(s >> 40);
            row += T(i, a);
        }
        T.row(i) /= row;
    }
    return VariationalState{T};
}

}  // namespace

TEST_CASE("a fully positive adjacency forces p_hat to zero") {
    const int n = 12;
    Matrix W = Matrix::Constant(n, n, 2.0);
    W.diagonal().setZero();
    const WeightedDigraph A(W);
    FitOptions opts;
    opts.degree_corrected = false;
    opts.ecm_max_iters = 3;
    const auto tau = soft_random_tau(n, 2, 19);
    const auto params = ecm_m_step(A, tau, BlockParams::homogeneous(2, n, 0.5, 2.0), opts);
    CHECK(params.P.maxCoeff() == 0.0);
}

TEST_CASE("K=1 ECM without degree correction matches the brute-force ZIP MLE") {
    BlockParams truth = BlockParams::homogeneous(1, 40, 0.4, 3.0);
    const auto [A, z] = sample_network(truth, 40, 2718);
    FitOptions opts;
    opts.degree_corrected = false;
    opts.ecm_max_iters = 20000;
    opts.ecm_tol = 1e-14;
    VariationalState tau{Matrix::Ones(40, 1)};
    const auto fitted = ecm_m_step(A, tau, BlockParams::homogeneous(1, 40, 0.5, 1.0), opts);
    const auto mle = oracle::zip_mle_grid(A);
    CHECK(std::abs(fitted.P(0, 0) - mle.p) <= 1e-6);
    CHECK(std::abs(fitted.Lambda(0, 0) - mle.lambda) <= 1e-6);
}

TEST_CASE("mu update satisfies the strength-matching identity") {
    BlockParams truth = BlockParams::homogeneous(2, 30, 0.4, 4.0, true);
    truth.Lambda(0, 0) = truth.Lambda(1, 1) = 7.0;
    for (int i = 0; i < 30; ++i) truth.mu(i) = (i % 4 == 0) ? 3.0 : 0.8;
    truth.validate();
    const auto [A, z] = sample_network(truth, 30, 555);
    FitOptions opts;
    opts.ecm_max_iters = 5;
    EcmDiagnostics diag;
    diag.check_identities = true;
    const auto tau = soft_random_tau(30, 2, 7);
    (void)ecm_m_step(A, tau, BlockParams::homogeneous(2, 30, 0.5, 2.0, true), opts, nullptr, &diag);
    CHECK(diag.sweeps >= 1);
    CHECK(diag.max_mu_identity_rel_err <= 1e-10);
    CHECK(diag.max_nu_identity_rel_err <= 1e-10);
}

TEST_CASE("ECM never decreases the ELBO at fixed tau") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        BlockParams truth = BlockParams::homogeneous(2, 25, 0.5, 5.0);
        truth.Lambda(0, 0) = truth.Lambda(1, 1) = 8.0;
        truth.P(0, 1) = truth.P(1, 0) = 0.7;
        truth.validate();
        const auto [A, z] = sample_network(truth, 25, seed);
        for (const bool dc : {false, true}) {
            FitOptions opts;
            opts.degree_corrected = dc;
            opts.ecm_max_iters = 1;
            const auto tau = soft_random_tau(25, 2, seed * 13 + dc);
            BlockParams cur = BlockParams::homogeneous(2, 25, 0.4, 2.0, dc);
            cur.pi = update_pi(tau);
            for (int sweep = 0; sweep < 6; ++sweep) {
                const double before = elbo(A, tau, cur);
                cur = ecm_m_step(A, tau, cur, opts);
                const double after = elbo(A, tau, cur);
                CHECK(after >= before - 1e-9);
            }
        }
    }
}

TEST_CASE("symmetric_blocks yields exactly symmetric estimates") {
    BlockParams truth = BlockParams::homogeneous(3, 30, 0.5, 4.0);
    const auto [A, z] = sample_network(truth, 30, 31337);
    FitOptions opts;
    opts.degree_corrected = true;
    opts.ecm_max_iters = 4;
    const auto tau = soft_random_tau(30, 3, 99);
    const auto params = ecm_m_step(A, tau, BlockParams::homogeneous(3, 30, 0.4, 2.0, true), opts);
    CHECK(params.P == params.P.transpose().eval());
    CHECK(params.Lambda == params.Lambda.transpose().eval());
}

TEST_CASE("global sparsity pools P into a single value") {
    BlockParams truth = BlockParams::homogeneous(2, 25, 0.6, 5.0);
    truth.Lambda(0, 0) = truth.Lambda(1, 1) = 8.0;
    truth.validate();
    const auto [A, z] = sample_network(truth, 25, 4040);
    FitOptions opts;
    opts.degree_corrected = false;
    opts.sparsity_mode = SparsityMode::global;
    opts.ecm_max_iters = 6;
    const auto tau = soft_random_tau(25, 2, 5);
    BlockParams start = BlockParams::homogeneous(2, 25, 0.4, 2.0);
    start.sparsity_mode = SparsityMode::global;
    const auto params = ecm_m_step(A, tau, start, opts);
    CHECK(params.P(0, 0) == params.P(0, 1));
    CHECK(params.P(0, 0) == params.P(1, 1));
    CHECK(params.sparsity_mode == SparsityMode::global);
}

TEST_CASE("degree corrections pin the means at one") {
    BlockParams truth = BlockParams::homogeneous(2, 30, 0.4, 5.0, true);
    for (int i = 0; i < 30; ++i) truth.mu(i) = (i < 5) ? 6.0 : 1.0;
    truth.validate();
    const auto [A, z] = sample_network(truth, 30, 808);
    FitOptions opts;
    opts.degree_corrected = true;
    opts.ecm_max_iters = 7;
    const auto tau = soft_random_tau(30, 2, 4);
    const auto params = ecm_m_step(A, tau, BlockParams::homogeneous(2, 30, 0.4, 2.0, true), opts);
    CHECK(params.mu.mean() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(params.nu.mean() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("without degree correction mu and nu stay at one") {
    BlockParams truth = BlockParams::homogeneous(2, 20, 0.4, 5.0);
    const auto [A, z] = sample_network(truth, 20, 123);
    FitOptions opts;
    opts.degree_corrected = false;
    opts.ecm_max_iters = 5;
    const auto tau = soft_random_tau(20, 2, 3);
    const auto params = ecm_m_step(A, tau, BlockParams::homogeneous(2, 20, 0.5, 2.0), opts);
    CHECK((params.mu.array() == 1.0).all());
    CHECK((params.nu.array() == 1.0).all());
}

TEST_CASE("empty effective blocks keep their previous value and warn") {
    // All tau mass on community 1: community 2 block pairs are empty.
    const int n = 10;
    Matrix W = Matrix::Zero(n, n);
    W(0, 1) = 3.0;
    const WeightedDigraph A(W);
    Matrix T = Matrix::Zero(n, 2);
    T.col(0).setOnes();
    FitOptions opts;
    opts.degree_corrected = false;
    opts.ecm_max_iters = 1;
    BlockParams start = BlockParams::homogeneous(2, n, 0.25, 1.5);
    std::vector<std::string> warnings;
    const auto params = ecm_m_step(A, VariationalState{T}, start, opts, &warnings);
    CHECK(params.P(1, 1) == 0.25);
    CHECK(params.Lambda(1, 1) == 1.5);
    CHECK(!warnings.empty());
}
