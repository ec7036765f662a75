#pragma once

#include "dczip/types.hpp"

namespace dczip {

enum class SparsityMode { local, global };

// Smallest Poisson rate used inside log-pmf evaluations; keeps log terms finite
// when a degree correction collapses to zero.
inline constexpr double kRateFloor = 1e-12;

// Upper clamp for fitted structural-zero probabilities, so log(1-p) stays finite.
inline constexpr double kMaxStructuralZeroProb = 1.0 - 1e-10;

// Full parameter set of the block model: mixing weights pi, structural-zero
// probabilities P, Poisson rates Lambda, and per-node strength corrections
// mu (out) / nu (in).
struct BlockParams {
    int K = 0;
    Vector pi;
    Matrix P;
    Matrix Lambda;
    Vector mu;
    Vector nu;
    SparsityMode sparsity_mode = SparsityMode::local;
    bool degree_corrected = true;

    int n() const { return static_cast<int>(mu.size()); }

    // Checks shapes, simplex/symmetry/range invariants. Sampling accepts p up
    // to 1 exactly; fitted parameters are clamped to kMaxStructuralZeroProb by
    // the estimation code. Unconstrained fits (symmetric_blocks = false) may
    // carry asymmetric P/Lambda; pass require_symmetric = false for those.
    void validate(bool require_symmetric = true) const;

    // Uniform-pi, constant-block parameters; convenient base for tests and
    // simulation configs.
    static BlockParams homogeneous(int K, int n, double p, double lambda,
                                   bool degree_corrected = false);
};

std::string to_string(SparsityMode mode);
SparsityMode sparsity_mode_from_string(const std::string& s);

}  // namespace dczip
