#include "dczip/inference.hpp"

#include "dczip/model.hpp"
#include "dczip/sampler.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dczip;

TEST_CASE("K=1 ELBO equals the complete log-likelihood") {
    const auto params = BlockParams::homogeneous(1, 15, 0.3, 4.0);
    const auto [A, z] = sample_network(params, 15, 21);
    VariationalState tau{Matrix::Ones(15, 1)};
    CHECK(elbo(A, tau, params) ==
          doctest::Approx(complete_log_likelihood(A, z, params)).epsilon(1e-12));
}

TEST_CASE("hard tau ELBO equals the complete log-likelihood") {
    BlockParams params = BlockParams::homogeneous(2, 12, 0.4, 3.0);
    params.Lambda(0, 0) = params.Lambda(1, 1) = 6.0;
    params.validate();
    const auto [A, z] = sample_network(params, 12, 9);
    Matrix T = Matrix::Zero(12, 2);
    for (int i = 0; i < 12; ++i) T(i, z.labels[static_cast<std::size_t>(i)] - 1) = 1.0;
    CHECK(elbo(A, VariationalState{T}, params) ==
          doctest::Approx(complete_log_likelihood(A, z, params)).epsilon(1e-11));
}

TEST_CASE("ELBO never exceeds the enumerated evidence") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        BlockParams params = BlockParams::homogeneous(2, 6, 0.4, 2.0);
        params.Lambda(0, 0) = params.Lambda(1, 1) = 5.0;
        params.pi(0) = 0.6;
        params.pi(1) = 0.4;
        params.validate();
        const auto [A, z] = sample_network(params, 6, seed);
        const double evidence = oracle::log_evidence_enum(A, params);

        // Any valid tau obeys the bound; use several.
        FitOptions opts;
        std::vector<VariationalState> taus;
        taus.push_back(VariationalState{Matrix::Constant(6, 2, 0.5)});
        taus.push_back(tau_from_partition(z, 2));
        taus.push_back(e_step(A, taus[0], params, opts));
        for (const auto& tau : taus) {
            CHECK(elbo(A, tau, params) <= evidence + 1e-9);
        }
    }
}

TEST_CASE("entropy term: ELBO at uniform tau includes n log K") {
    // For identical blocks the likelihood part is tau-independent, so the
    // uniform-tau ELBO differs from the hard-tau one by exactly the entropy.
    const auto params = BlockParams::homogeneous(2, 8, 0.5, 2.0);
    const auto [A, z] = sample_network(params, 8, 2);
    VariationalState uniform{Matrix::Constant(8, 2, 0.5)};
    Matrix H = Matrix::Zero(8, 2);
    for (int i = 0; i < 8; ++i) H(i, 0) = 1.0;
    const double lhard = complete_log_likelihood(A, Partition(std::vector<int>(8, 1), 2), params);
    const double luni = elbo(A, uniform, params);
    // log pi term: hard tau pays n log(0.5) too, entropy adds n log 2.
    CHECK(luni == doctest::Approx(lhard + 8.0 * std::log(2.0)).epsilon(1e-11));
}
