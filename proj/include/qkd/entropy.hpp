#pragma once

#include <cmath>
#include <stdexcept>

namespace qkd {

namespace detail {

// 0 log 0 := 0 throughout entropy evaluation.
inline double xlog2x(double p) { return p <= 0.0 ? 0.0 : p * std::log2(p); }

}  // namespace detail

// Binary entropy h(e) in bits.
inline double binary_entropy(double e) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("binary_entropy: e outside [0,1]");
    return -detail::xlog2x(e) - detail::xlog2x(1.0 - e);
}

}  // namespace qkd
