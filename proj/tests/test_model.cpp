#include "dczip/model.hpp"

#include "dczip/sampler.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace dczip;

TEST_CASE("expected strengths: multiplicative mu factor") {
    BlockParams params = BlockParams::homogeneous(2, 8, 0.3, 2.0, true);
    params.mu(3) = 0.0;
    const auto [out, in] = expected_strengths(params);
    CHECK(out(3) == 0.0);
    CHECK(in(3) > 0.0);
}

TEST_CASE("expected strengths: K=1 collapses to (n-1) lambda") {
    const auto params = BlockParams::homogeneous(1, 100, 0.0, 5.0);
    const auto [out, in] = expected_strengths(params);
    for (int i = 0; i < 100; ++i) {
        CHECK(out(i) == doctest::Approx(495.0).epsilon(1e-12));
        CHECK(in(i) == doctest::Approx(495.0).epsilon(1e-12));
    }
}

TEST_CASE("expected strengths: two-block hand evaluation") {
    // sum_ab (1-0.5) * 4 * pi_a pi_b = 2, so every strength is 9 * 2 = 18.
    const auto params = BlockParams::homogeneous(2, 10, 0.5, 4.0);
    const auto [out, in] = expected_strengths(params);
    for (int i = 0; i < 10; ++i) {
        CHECK(out(i) == doctest::Approx(18.0).epsilon(1e-12));
        CHECK(in(i) == doctest::Approx(18.0).epsilon(1e-12));
    }
}

TEST_CASE("complete log-likelihood: degenerate all-zero case") {
    Matrix W = Matrix::Zero(2, 2);
    const WeightedDigraph A(W);
    const auto params = BlockParams::homogeneous(1, 2, 1.0, 3.0);
    const Partition Z({1, 1}, 1);
    CHECK(complete_log_likelihood(A, Z, params) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("complete log-likelihood: two-node Poisson case") {
    Matrix W = Matrix::Zero(2, 2);
    W(0, 1) = 3.0;
    const WeightedDigraph A(W);
    const auto params = BlockParams::homogeneous(1, 2, 0.0, 2.0);
    const Partition Z({1, 1}, 1);
    const double expected = std::log(std::pow(2.0, 3) * std::exp(-2.0) / 6.0) - 2.0;
    CHECK(complete_log_likelihood(A, Z, params) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(complete_log_likelihood(A, Z, params) == doctest::Approx(-3.7123179275482191).epsilon(1e-12));
}

TEST_CASE("complete log-likelihood agrees with the naive-loop oracle") {
    BlockParams params = BlockParams::homogeneous(3, 25, 0.4, 3.0, true);
    params.pi = Vector(3);
    params.pi << 0.2, 0.5, 0.3;
    params.Lambda << 6.0, 2.0, 1.0, 2.0, 5.0, 1.5, 1.0, 1.5, 7.0;
    params.P << 0.1, 0.6, 0.3, 0.6, 0.2, 0.5, 0.3, 0.5, 0.0;
    for (int i = 0; i < 25; ++i) {
        params.mu(i) = 0.5 + 0.1 * (i % 7);
        params.nu(i) = 0.3 + 0.2 * (i % 5);
    }
    params.validate();
    const auto [A, Z] = sample_network(params, 25, 31);
    const double got = complete_log_likelihood(A, Z, params);
    const double want = oracle::complete_ll(A, Z, params);
    CHECK(got == doctest::Approx(want).epsilon(1e-11));
}

TEST_CASE("complete log-likelihood is invariant under community relabeling") {
    BlockParams params = BlockParams::homogeneous(3, 20, 0.3, 2.0);
    params.pi = Vector(3);
    params.pi << 0.5, 0.2, 0.3;
    params.Lambda << 5.0, 1.0, 2.0, 1.0, 4.0, 0.5, 2.0, 0.5, 6.0;
    params.validate();
    const auto [A, Z] = sample_network(params, 20, 11);

    const std::vector<int> perm = {2, 0, 1};  // new index of old community a
    BlockParams permuted = params;
    std::vector<int> relabeled(Z.labels.size());
    for (std::size_t i = 0; i < Z.labels.size(); ++i) {
        relabeled[i] = perm[static_cast<std::size_t>(Z.labels[i] - 1)] + 1;
    }
    for (int a = 0; a < 3; ++a) {
        permuted.pi(perm[static_cast<std::size_t>(a)]) = params.pi(a);
        for (int b = 0; b < 3; ++b) {
            permuted.P(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]) =
                params.P(a, b);
            permuted.Lambda(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]) =
                params.Lambda(a, b);
        }
    }
    const double base = complete_log_likelihood(A, Z, params);
    const double moved = complete_log_likelihood(A, Partition(relabeled, 3), permuted);
    CHECK(base == doctest::Approx(moved).epsilon(1e-11));
}

TEST_CASE("probability-zero observations yield the -inf sentinel") {
    Matrix W = Matrix::Zero(2, 2);
    W(0, 1) = 2.0;
    const WeightedDigraph A(W);
    const auto params = BlockParams::homogeneous(1, 2, 1.0, 3.0);  // p = 1: positives impossible
    CHECK(complete_log_likelihood(A, Partition({1, 1}, 1), params) ==
          -std::numeric_limits<double>::infinity());
}
