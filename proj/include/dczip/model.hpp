#pragma once

#include "dczip/params.hpp"
#include "dczip/types.hpp"

#include <utility>

namespace dczip {

// Expected out- and in-strength per node under the model:
//   out_i = mu_i * sum_{j != i} nu_j * sum_{a,b} (1 - p_ab) lambda_ab pi_a pi_b
// and symmetrically for in with mu and nu swapped.
std::pair<Vector, Vector> expected_strengths(const BlockParams& params);

// Complete-data log-likelihood log P(A, Z | theta). Returns -inf (not an
// exception) when some observed pair has probability zero under params.
double complete_log_likelihood(const WeightedDigraph& A, const Partition& Z,
                               const BlockParams& params);

}  // namespace dczip
