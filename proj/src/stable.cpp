#include "slqg/stable.hpp"

#include "slqg/errors.hpp"
#include "slqg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace slqg {

double gamma_minus_three_halves() { return 4 * std::sqrt(std::numbers::pi) / 3; }

void StableOptions::validate() const
{
    if (!(eps > 0) || !(delta > 0))
        throw DomainError("eps and delta must be positive");
    if (eps > delta)
        throw DomainError("eps must not exceed delta");
    if (!(time_budget > 0))
        throw DomainError("time budget must be positive");
}

double StableExcursion::unresolved_moment(double theta) const
{
    if (!(theta > 1.5))
        throw DomainError("small-jump compensator needs theta > 3/2");
    const double g = gamma_minus_three_halves();
    double s = 0;
    for (std::size_t k = 0; k < level_time.size(); ++k)
        s += level_time[k] * std::pow(level_cutoff[k], theta - 1.5) / ((theta - 1.5) * g);
    return s;
}

double StableExcursion::moment(double theta) const
{
    double s = unresolved_moment(theta);
    for (double x : jumps)
        s += std::pow(x, theta);
    return s;
}

namespace {

struct Level {
    double eps, cutoff, rate, drift, var;
};

Level make_level(const StableOptions& o, int k)
{
    const double g = gamma_minus_three_halves();
    Level l;
    l.eps = o.adaptive ? o.eps * std::pow(2.0, 2.0 * k / 3.0) : o.eps;
    l.cutoff = std::max(o.delta, l.eps);
    l.rate = (2.0 / 3.0) * std::pow(l.eps, -1.5) / g;
    l.drift = 2 / std::sqrt(l.eps) / g;
    l.var = o.gaussian ? 2 * std::sqrt(l.eps) / g : 0.0;
    return l;
}

// Brownian segment from height a > 0 to height b (drift already folded into
// the endpoint), duration D, variance rate v, known to touch 0. Returns the
// first touching time by recursive conditional bisection.
double locate_crossing(Rng& rng, double a, double b, double D, double v, double resolution)
{
    double t0 = 0;
    while (D > resolution) {
        const double h = D / 2;
        double m, p1, pc;
        for (;;) {
            m = 0.5 * (a + b) + std::sqrt(v * D / 4) * rng.normal();
            p1 = m <= 0 ? 1.0 : std::exp(-2 * a * m / (v * h));
            const double p2 = (m <= 0 || b <= 0) ? 1.0 : std::exp(-2 * m * b / (v * h));
            pc = 1 - (1 - p1) * (1 - p2);
            if (rng.uniform() < pc)
                break;
        }
        if (rng.uniform() * pc < p1) {
            b = m;
        } else {
            t0 += h;
            a = m;
        }
        D = h;
    }
    return t0 + D / 2;
}

} // namespace

StableExcursion sample_stable_excursion(const StableOptions& opt, Rng& rng)
{
    opt.validate();
    StableExcursion e;
    double x = 0, t = 0;
    int k = 0;
    double t_change = 1.0;
    Level lv = make_level(opt, 0);
    e.level_time.push_back(0);
    e.level_cutoff.push_back(lv.cutoff);
    for (;;) {
        double D = rng.exponential() / lv.rate;
        bool jump = true;
        if (opt.adaptive && t + D > t_change) {
            D = t_change - t;
            jump = false;
        }
        const double a = x + 1;
        const double y = x - lv.drift * D + (lv.var > 0 ? std::sqrt(lv.var * D) * rng.normal() : 0.0);
        bool hit = false;
        double off = 0;
        if (lv.var == 0) {
            if (y <= -1) {
                hit = true;
                off = a / lv.drift;
            }
        } else {
            if (y <= -1)
                hit = true;
            else if (rng.uniform() < std::exp(-2 * a * (y + 1) / (lv.var * D)))
                hit = true;
            if (hit)
                off = locate_crossing(rng, a, y + 1, D, lv.var, opt.hit_resolution * std::max(1.0, t));
        }
        if (hit) {
            e.level_time.back() += off;
            e.tau = t + off;
            break;
        }
        x = y;
        t += D;
        e.level_time.back() += D;
        if (t > opt.time_budget) {
            e.censored = true;
            e.tau = t;
            break;
        }
        if (jump) {
            const double J = lv.eps * std::pow(rng.uniform_pos(), -2.0 / 3.0);
            x += J;
            if (J >= lv.cutoff)
                e.jumps.push_back(J);
        } else {
            ++k;
            t_change *= 2;
            lv = make_level(opt, k);
            e.level_time.push_back(0);
            e.level_cutoff.push_back(lv.cutoff);
        }
    }
    std::sort(e.jumps.begin(), e.jumps.end(), std::greater<>());
    e.weight = 1 / e.tau;
    return e;
}

std::vector<StableExcursion> sample_rho1(const StableOptions& opt, std::size_t n_raw, std::uint64_t seed,
                                         unsigned threads)
{
    opt.validate();
    if (n_raw < 1)
        throw DomainError("n_raw must be at least 1");
    std::vector<StableExcursion> out(n_raw);
    parallel_for(n_raw, threads, [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        out[i] = sample_stable_excursion(opt, rng);
    });
    return out;
}

} // namespace slqg
