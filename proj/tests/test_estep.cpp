#include "dczip/inference.hpp"

#include "dczip/model.hpp"
#include "dczip/sampler.hpp"

#include <doctest.h>

#include <cmath>

using namespace dczip;

namespace {

BlockParams planted_two_block(int n, double lam_in, double lam_out, double p_in, double p_out) {
    BlockParams params = BlockParams::homogeneous(2, n, p_in, lam_in);
    params.P(0, 1) = params.P(1, 0) = p_out;
    params.Lambda(0, 1) = params.Lambda(1, 0) = lam_out;
    params.validate();
    return params;
}

}  // namespace

TEST_CASE("K=1 e-step is the trivial distribution") {
    const auto params = BlockParams::homogeneous(1, 10, 0.2, 3.0);
    const auto [A, z] = sample_network(params, 10, 5);
    FitOptions opts;
    VariationalState tau{Matrix::Ones(10, 1)};
    const auto out = e_step(A, tau, params, opts);
    CHECK(out.tau.minCoeff() == 1.0);
}

TEST_CASE("uniform tau is a fixed point when all blocks are identical") {
    const auto params = BlockParams::homogeneous(3, 15, 0.4, 2.0);
    const auto [A, z] = sample_network(params, 15, 8);
    FitOptions opts;
    opts.estep_max_iters = 5;
    VariationalState tau{Matrix::Constant(15, 3, 1.0 / 3.0)};
    const auto out = e_step(A, tau, params, opts);
    CHECK((out.tau.array() - 1.0 / 3.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("planted two-block network is recovered from a warm start") {
    const int n = 40;
    const auto params = planted_two_block(n, 10.0, 1.0, 0.3, 0.3);
    const auto [A, z] = sample_network(params, n, 77);
    FitOptions opts;
    const auto tau0 = tau_from_partition(z, 2);
    const auto out = e_step(A, tau0, params, opts);
    CHECK(hard_assign(out).labels == z.labels);
}

TEST_CASE("e-step rows stay on the simplex") {
    BlockParams params = planted_two_block(20, 6.0, 2.0, 0.5, 0.7);
    params.pi(0) = 0.3;
    params.pi(1) = 0.7;
    const auto [A, z] = sample_network(params, 20, 13);
    FitOptions opts;
    VariationalState tau{Matrix::Constant(20, 2, 0.5)};
    for (int round = 0; round < 4; ++round) {
        opts.estep_max_iters = round + 1;  // exercise intermediate iterates too
        const auto out = e_step(A, tau, params, opts);
        for (int i = 0; i < 20; ++i) {
            CHECK(std::abs(out.tau.row(i).sum() - 1.0) <= 1e-12);
            CHECK(out.tau.row(i).minCoeff() >= kTauFloor / 2.0);
        }
    }
}

TEST_CASE("e-step records non-convergence as a warning") {
    const auto params = planted_two_block(25, 6.0, 2.0, 0.5, 0.7);
    const auto [A, z] = sample_network(params, 25, 3);
    FitOptions opts;
    opts.estep_max_iters = 1;
    opts.estep_tol = 1e-300;  // unreachable once tau moves
    std::vector<std::string> warnings;
    Matrix T(25, 2);  // tilted start: off the symmetric fixed point
    T.col(0).setConstant(0.6);
    T.col(1).setConstant(0.4);
    (void)e_step(A, VariationalState{T}, params, opts, 1.0, &warnings);
    REQUIRE(!warnings.empty());
    CHECK(warnings.front().find("not converged") != std::string::npos);
}

TEST_CASE("e-step dimension checks") {
    const auto params = BlockParams::homogeneous(2, 10, 0.5, 2.0);
    const auto [A, z] = sample_network(params, 10, 5);
    FitOptions opts;
    VariationalState bad{Matrix::Constant(9, 2, 0.5)};
    CHECK_THROWS_AS(e_step(A, bad, params, opts), std::invalid_argument);
}
