#pragma once

#include "slqg/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace slqg {

// Gamma(-3/2) = 4 sqrt(pi) / 3; the Levy density is x^{-5/2} / Gamma(-3/2)
double gamma_minus_three_halves();

struct StableOptions {
    // jump cutoff at unit time; with `adaptive` it grows like t^{2/3}, which
    // keeps the cost per excursion logarithmic in tau
    double eps = 1e-2;
    // reporting threshold, at least eps
    double delta = 1e-2;
    // Brownian stand-in for the jumps below the cutoff (crossings located by
    // bridge bisection); off gives the pure compensated-drift scheme
    bool gaussian = true;
    bool adaptive = true;
    double time_budget = 1e10;
    double hit_resolution = 1e-12;

    void validate() const;
};

// One path of the centered spectrally positive 3/2-stable process started at
// 0 and stopped at tau = first hitting time of -1.
struct StableExcursion {
    std::vector<double> jumps; // non-increasing; each at least the active cutoff
    double tau = 0;
    double weight = 0; // 1 / tau
    bool censored = false;
    // time spent under each cutoff level and the level's cutoff max(delta, eps_k)
    std::vector<double> level_time;
    std::vector<double> level_cutoff;

    // expected sum of x^theta over the unreported jumps (compensator)
    double unresolved_moment(double theta) const;
    // recorded jumps^theta plus the compensator
    double moment(double theta) const;
};

StableExcursion sample_stable_excursion(const StableOptions& opt, Rng& rng);

std::vector<StableExcursion> sample_rho1(const StableOptions& opt, std::size_t n_raw, std::uint64_t seed,
                                         unsigned threads = 1);

} // namespace slqg
