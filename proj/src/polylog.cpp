#include "slqg/polylog.hpp"

#include "slqg/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>

namespace slqg {

double polylog(double s, double r)
{
    if (!(r >= 0 && r <= 1))
        throw DomainError("polylog argument must lie in [0, 1]");
    if (!(s > 1))
        throw DomainError("polylog order must exceed 1");
    if (r == 0)
        return 0;
    if (r == 1)
        return boost::math::zeta(s);
    if (r <= 0.75) {
        double sum = 0, rk = r;
        for (std::uint64_t k = 1; k < 4000; ++k) {
            const double term = rk * std::pow(static_cast<double>(k), -s);
            sum += term;
            if (term < 1e-18 * sum)
                break;
            rk *= r;
        }
        return sum;
    }
    if (std::abs(s - std::round(s)) < 1e-9)
        throw DomainError("polylog near r = 1 needs a non-integer order");
    // Li_s(e^{-l}) = Gamma(1-s) l^{s-1} + sum_n zeta(s-n) (-l)^n / n!, |l| < 2 pi
    const double l = -std::log(r);
    double sum = boost::math::tgamma(1 - s) * std::pow(l, s - 1);
    double fact = 1, pw = 1;
    for (int n = 0; n < 80; ++n) {
        if (n > 0) {
            fact *= n;
            pw *= -l;
        }
        const double term = boost::math::zeta(s - n) * pw / fact;
        sum += term;
        if (n > 4 && std::abs(term) < 1e-18)
            break;
    }
    return sum;
}

double polylog_tail(double s, double r, std::uint64_t k0)
{
    if (k0 <= 1)
        return polylog(s, r);
    double part = 0, rk = r;
    for (std::uint64_t k = 1; k < k0; ++k) {
        part += rk * std::pow(static_cast<double>(k), -s);
        rk *= r;
    }
    return polylog(s, r) - part;
}

} // namespace slqg
