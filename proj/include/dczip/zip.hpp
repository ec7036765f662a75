#pragma once

#include <cstdint>

namespace dczip {

// Log pmf of the zero-inflated Poisson: f(0) = p + (1-p)e^{-rate},
// f(w) = (1-p) rate^w e^{-rate} / w! for w >= 1. The rate is floored at
// kRateFloor; p = 1 puts all mass at zero and yields -inf for w > 0.
// Throws std::invalid_argument for w < 0, p outside [0,1] or rate < 0.
double zip_log_pmf(std::int64_t w, double p, double rate);

}  // namespace dczip
