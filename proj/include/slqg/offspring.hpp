#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

namespace slqg {

// mass c * k^{-s} for every k >= k_start
struct PowerTail {
    double c = 0;
    double s = 2.5;
    std::uint64_t k_start = 2;
};

// Probability measure on {0, 1, 2, ...}: an explicit head plus an optional
// pure power tail. The tail keeps heavy-tailed laws exact without truncation.
class OffspringDistribution {
public:
    OffspringDistribution() = default;
    explicit OffspringDistribution(std::vector<double> head, std::optional<PowerTail> tail = std::nullopt);

    static OffspringDistribution point_mass(std::uint64_t k);

    double prob(std::uint64_t k) const;
    const std::vector<double>& head() const { return head_; }
    const std::optional<PowerTail>& tail() const { return tail_; }
    bool finite_support() const { return !tail_; }
    std::uint64_t support_max() const; // only for finite support

    double tail_mass() const { return tail_mass_; }
    double mean() const { return mean_; }
    double variance() const { return variance_; }
    std::optional<double> tail_exponent() const;

    nlohmann::json to_json(std::uint64_t explicit_terms = 64) const;

private:
    std::vector<double> head_;
    std::optional<PowerTail> tail_;
    double tail_mass_ = 0;
    double mean_ = 0;
    double variance_ = 0;
};

// sum_{k >= k0} k^{-s}
double zeta_tail(double s, std::uint64_t k0);

double default_c_max();
OffspringDistribution make_default_critical_mu(double c_tail);

OffspringDistribution size_bias(const OffspringDistribution& nu);

// nu(k) = (1 - a) a^k, truncated where the mass drops below 1e-18
OffspringDistribution make_geometric(double a);

} // namespace slqg
