#pragma once

#include "slqg/ftable.hpp"
#include "slqg/rng.hpp"

#include <cstdint>
#include <map>
#include <vector>

#include <json.hpp>

namespace slqg {

struct RingAtom {
    std::uint64_t m = 0;
    double prob = 0;
};

enum class RingVariant { default_floor, custom_table, zero_inner };

// Law of the inner half-perimeter of a ring with outer half-perimeter p.
class RingLaw {
public:
    // floor(p e^{beta Y}), Y = +-1 with probability 1/2
    static RingLaw default_floor(double Q);
    // per_in = 0 always (every ring closes up)
    static RingLaw zero_inner(double Q);
    static RingLaw custom(double Q, std::map<std::uint64_t, std::vector<RingAtom>> table);
    // accepts one object {"p":..,"atoms":[[m,prob],..]} or an array of them
    static RingLaw custom_from_json(double Q, const nlohmann::json& j);

    double Q() const { return Q_; }
    double beta() const { return beta_; }
    RingVariant variant() const { return variant_; }

    std::uint64_t down_atom(std::uint64_t p) const;
    std::uint64_t up_atom(std::uint64_t p) const;

    std::vector<RingAtom> atoms(std::uint64_t p) const;
    std::uint64_t sample(std::uint64_t p, Rng& rng) const;

    double tilted_expectation(std::uint64_t p, const FTable& F) const;
    // P(m) F(m) / E[F(per_in)]
    std::uint64_t sample_tilted(std::uint64_t p, const FTable& F, Rng& rng) const;

    // E_ring^(k)[F] equals `value` for every k > K0
    struct Asymptote {
        std::uint64_t K0 = 0;
        double value = 0;
    };
    Asymptote tilt_asymptote(const FTable& F) const;

    // admissibility diagnostics for a custom table (non-triviality, moment
    // bound, lower-tail rates); reported, never asserted
    nlohmann::json validate_table(double delta = 0.5) const;

private:
    RingLaw() = default;
    const std::vector<RingAtom>& table_row(std::uint64_t p) const;

    double Q_ = 1;
    double beta_ = 0;
    double e_up_ = 1;
    double e_down_ = 1;
    RingVariant variant_ = RingVariant::default_floor;
    std::map<std::uint64_t, std::vector<RingAtom>> table_;
};

} // namespace slqg
