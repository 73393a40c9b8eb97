#pragma once

#include "slqg/ftable.hpp"
#include "slqg/offspring.hpp"

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

namespace slqg {

class RingLaw;

// q_k = c k^{-s} R^{-(k-1)} / binom(2k-1, k-1) for k >= k_start: the weight
// tail whose step law at x = R is a pure power tail
struct WeightTail {
    double c = 0;
    double s = 2.5;
    std::uint64_t k_start = 2;
    double R = 1;
};

double log_central_binom(std::uint64_t k); // log binom(2k-1, k-1)

// Face weights q_1, q_2, ... stored as logs (binomial growth overflows
// otherwise). log_q[0] is unused.
struct WeightCoefficients {
    std::vector<double> log_q;
    std::optional<WeightTail> tail;

    static WeightCoefficients from_values(const std::vector<double>& q);
    double q(std::uint64_t k) const;
    double log_q_at(std::uint64_t k) const;

    // g(x) = 1 - x + x f_q(x); Z is the smallest zero of g
    double f(double x) const;
    double g(double x) const;
    double g_prime(double x) const;
    // largest x where the series converges (finite support: infinity)
    double radius() const;
};

double solve_partition_point(const WeightCoefficients& q, double tol = 1e-10);

enum class Criticality { subcritical, generic_critical, non_generic_critical };
const char* to_string(Criticality c);

class WeightSequence {
public:
    explicit WeightSequence(WeightCoefficients q, double tol = 1e-10);

    const WeightCoefficients& coefficients() const { return q_; }
    double Z() const { return Z_; }
    Criticality classification() const { return cls_; }
    // a in the non-generic case, from the step-law tail k^{-(a + 1/2)}
    std::optional<double> type_a() const { return type_a_; }
    double mean() const { return mean_; }

    nlohmann::json to_json(std::uint64_t explicit_terms = 64) const;

private:
    WeightCoefficients q_;
    double Z_ = 1;
    Criticality cls_ = Criticality::subcritical;
    std::optional<double> type_a_;
    double mean_ = 0;
};

OffspringDistribution mu_from_weights(const WeightSequence& q);
WeightSequence weights_from_mu(const OffspringDistribution& mu);

struct TiltOptions {
    // 0 selects the full range the F table can resolve
    std::uint64_t k_max = 0;
    std::uint64_t k_limit = 50'000'000;
};

// q'_k = E_ring^(k)[F(per_in)] q_k
WeightSequence tilt_subcritical(const WeightSequence& q, const FTable& F, const RingLaw& ring,
                                const TiltOptions& opt = {});

} // namespace slqg
