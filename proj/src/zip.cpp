#include "dczip/zip.hpp"

#include "dczip/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dczip {

double zip_log_pmf(std::int64_t w, double p, double rate) {
    if (w < 0) throw std::invalid_argument("zip_log_pmf: w must be >= 0");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("zip_log_pmf: p must lie in [0, 1]");
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("zip_log_pmf: rate must be finite and >= 0");
    }
    const double r = std::max(rate, kRateFloor);
    if (w == 0) {
        if (p == 0.0) return -r;
        if (p == 1.0) return 0.0;
        // log(p + (1-p)e^{-r}) via log-sum-exp; stable for r up to ~700.
        const double la = std::log(p);
        const double lb = std::log1p(-p) - r;
        const double m = std::max(la, lb);
        return m + std::log(std::exp(la - m) + std::exp(lb - m));
    }
    if (p == 1.0) return -std::numeric_limits<double>::infinity();
    return std::log1p(-p) + static_cast<double>(w) * std::log(r) - r -
           std::lgamma(static_cast<double>(w) + 1.0);
}

}  // namespace dczip
