#pragma once

#include "slqg/offspring.hpp"
#include "slqg/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace slqg {

#ifdef NDEBUG
inline constexpr bool kDebugChecks = false;
#else
inline constexpr bool kDebugChecks = true;
#endif

// Draws k ~ mu in O(1): alias table over an explicit head plus one bucket for
// the power tail, which is sampled exactly by rejection from a Pareto envelope.
class StepSampler {
public:
    explicit StepSampler(const OffspringDistribution& mu, std::size_t explicit_head = 256);

    std::uint64_t operator()(Rng& rng) const
    {
        const unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n_;
        const auto i = static_cast<std::size_t>(m >> 64);
        const double u = static_cast<double>(static_cast<std::uint64_t>(m) >> 11) * 0x1.0p-53;
        const std::uint32_t j = u < threshold_[i] ? static_cast<std::uint32_t>(i) : alias_[i];
        return j == tail_index_ ? sample_tail(rng) : j;
    }

    const OffspringDistribution& distribution() const { return mu_; }
    double mass_at_zero() const { return mu_.prob(0); }

private:
    std::uint64_t sample_tail(Rng& rng) const;

    OffspringDistribution mu_;
    std::vector<double> threshold_;
    std::vector<std::uint32_t> alias_;
    std::uint64_t n_ = 0;
    std::uint32_t tail_index_ = UINT32_MAX;
    double tail_s_ = 0;
    std::uint64_t tail_k_ = 0;
};

struct WalkOptions {
    std::uint64_t step_budget = 1'000'000'000;
    bool check_invariants = kDebugChecks;
};

// Steps X_i = k_i - 1 until the walk first hits -p.
struct WalkExcursion {
    std::vector<std::int64_t> steps;
    std::uint64_t T = 0;
    std::uint64_t L = 0;
    // sorted (step + 1) values, zeros included
    std::vector<std::uint64_t> jump_multiset;
    bool censored = false;
};

WalkExcursion sample_excursion(const StepSampler& s, std::uint64_t p, Rng& rng, const WalkOptions& opt = {});

// throws std::logic_error naming the first violated invariant
void validate_excursion(const WalkExcursion& e, std::uint64_t p);

struct HittingSummary {
    std::uint64_t T = 0;
    std::uint64_t L = 0;
    bool censored = false;
};

// same law as sample_excursion without storing the path
HittingSummary sample_hitting(const StepSampler& s, std::uint64_t p, Rng& rng,
                              std::uint64_t step_budget = 1'000'000'000);

struct BoltzmannStats {
    std::uint64_t attempts = 0;
    std::uint64_t steps = 0;
    std::uint64_t L = 0;
};

// Face half-perimeters (k >= 1) of a Boltzmann map with boundary 2p, sorted
// non-increasingly. Excursions are accepted with probability (p+1)/(L+1);
// the uniform is drawn first so hopeless paths stop as soon as L passes the
// acceptance threshold, which leaves the accepted law unchanged.
std::vector<std::uint64_t> sample_boltzmann_perimeters(const StepSampler& s, std::uint64_t p, Rng& rng,
                                                       const WalkOptions& opt = {}, BoltzmannStats* stats = nullptr);

struct InvLEstimate {
    double estimate = 0;
    double std_error = 0;
    std::size_t censored = 0; // counted as 0, so the estimate is a lower bound
};

InvLEstimate estimate_inv_L_mean(const StepSampler& s, std::uint64_t p, std::size_t n_samples, std::uint64_t seed,
                                 unsigned threads = 1, std::uint64_t step_budget = 100'000'000);

} // namespace slqg
