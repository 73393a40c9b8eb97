#pragma once

#include <cstdint>

namespace slqg {

// Li_s(r) = sum_{k>=1} k^{-s} r^k for r in [0, 1] and real s > 1. Near r = 1
// the singular expansion in lambda = -log r is used, which needs s outside
// the positive integers.
double polylog(double s, double r);

// sum_{k >= k0} k^{-s} r^k
double polylog_tail(double s, double r, std::uint64_t k0);

} // namespace slqg
