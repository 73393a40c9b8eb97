#include "slqg/errors.hpp"
#include "slqg/offspring.hpp"
#include "slqg/rings.hpp"
#include "slqg/supermap.hpp"
#include "slqg/weights.hpp"

#include <cmath>

#include <doctest.h>

using namespace slqg;

namespace {

// sum_{k >= 2} k^{-s} by brute force to 1e7 terms plus the midpoint-integral tail
double brute_tail_sum(double s)
{
    const long N = 10'000'000;
    long double acc = 0;
    for (long k = N; k >= 2; --k)
        acc += std::pow(static_cast<long double>(k), -s);
    return static_cast<double>(acc) + std::pow(N + 0.5, 1 - s) / (s - 1);
}

} // namespace

TEST_CASE("default critical mu against brute-force zeta sums")
{
    const double c = 0.5;
    const double s32 = brute_tail_sum(1.5), s52 = brute_tail_sum(2.5);
    const double mu1 = 1 - c * s32;
    const double mu0 = 1 - mu1 - c * s52;
    const OffspringDistribution mu = make_default_critical_mu(c);
    CHECK(mu.prob(1) == doctest::Approx(mu1).epsilon(1e-9));
    CHECK(mu.prob(0) == doctest::Approx(mu0).epsilon(1e-9));
    CHECK(std::abs(mu.prob(1) - 0.19381) < 1e-4);
    CHECK(std::abs(mu.prob(0) - 0.63544) < 1e-4);
    CHECK(std::abs(mu.mean() - 1) < 1e-10);
    REQUIRE(mu.tail_exponent());
    CHECK(*mu.tail_exponent() == 2.5);
    CHECK(mu.prob(7) == doctest::Approx(c * std::pow(7.0, -2.5)));
}

TEST_CASE("c_tail admissible interval")
{
    const double cmax = default_c_max();
    CHECK_NOTHROW(make_default_critical_mu(cmax));
    CHECK_THROWS_AS(make_default_critical_mu(cmax * (1 + 1e-9)), DomainError);
    CHECK_THROWS_AS(make_default_critical_mu(0.0), DomainError);
    for (double c : {0.05, 0.2, 0.5, cmax})
        CHECK(std::abs(make_default_critical_mu(c).mean() - 1) < 1e-10);
}

TEST_CASE("offspring distribution validation")
{
    CHECK_THROWS_AS(OffspringDistribution({0.5, 0.6}), DomainError);
    CHECK_THROWS_AS(OffspringDistribution({-0.1, 1.1}), DomainError);
    const OffspringDistribution d({0.25, 0.5, 0.25});
    CHECK(d.mean() == doctest::Approx(1.0));
    CHECK(d.variance() == doctest::Approx(0.5));
    const auto j = d.to_json();
    CHECK(j.contains("probs"));
    CHECK(j["mean"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("partition point")
{
    // f(x) = 3 q_2 x = x / 4 from q_2 = 1/12 alone: x/4 = 1 - 1/x has the
    // double root 2
    const auto q = WeightCoefficients::from_values({0.0, 0.0, 1.0 / 12});
    CHECK(solve_partition_point(q) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(q.f(2.0) - 0.5) < 1e-10);
    // q_1 alone: 1 - x + x q_1 = 0
    CHECK(solve_partition_point(WeightCoefficients::from_values({0.0, 0.25})) == doctest::Approx(4.0 / 3).epsilon(1e-9));
    // q = 0: Z = 1
    const WeightSequence empty(WeightCoefficients::from_values({}));
    CHECK(empty.Z() == doctest::Approx(1.0));
    CHECK(mu_from_weights(empty).prob(0) == doctest::Approx(1.0));
    // too heavy: no root
    CHECK_THROWS_AS(solve_partition_point(WeightCoefficients::from_values({0.0, 0.0, 0.1})), AdmissibilityError);
}

TEST_CASE("default weights: Z = 1/mu(0), classification, round trip")
{
    const OffspringDistribution mu = make_default_critical_mu(0.5);
    const WeightSequence q = weights_from_mu(mu);
    CHECK(q.Z() == doctest::Approx(1 / mu.prob(0)).epsilon(1e-10));
    CHECK(std::abs(q.Z() - 1.5737) < 1e-4);
    CHECK(q.classification() == Criticality::non_generic_critical);
    REQUIRE(q.type_a());
    CHECK(*q.type_a() == doctest::Approx(2.0));
    const OffspringDistribution back = mu_from_weights(q);
    for (std::uint64_t k = 0; k < 200; ++k)
        CHECK(std::abs(back.prob(k) - mu.prob(k)) < 1e-12);
    // the partition point solves g(Z) = 0 directly as well
    CHECK(std::abs(q.coefficients().g(q.Z())) < 1e-10);
}

TEST_CASE("generic and subcritical classifications")
{
    // binary critical law has finite variance: generic critical
    const WeightSequence g = weights_from_mu(OffspringDistribution({0.5, 0.0, 0.5}));
    CHECK(g.classification() == Criticality::generic_critical);
    const WeightSequence s = weights_from_mu(OffspringDistribution({0.6, 0.2, 0.2}));
    CHECK(s.classification() == Criticality::subcritical);
    CHECK(s.mean() < 1);
}

TEST_CASE("size bias")
{
    CHECK(size_bias(OffspringDistribution::point_mass(1)).prob(1) == doctest::Approx(1.0));
    const OffspringDistribution b = size_bias(OffspringDistribution({0.5, 0.0, 0.5}));
    CHECK(b.prob(2) == doctest::Approx(1.0));
    CHECK(b.prob(0) == 0.0);
    const OffspringDistribution geo = make_geometric(0.5);
    const OffspringDistribution gs = size_bias(geo);
    double m1 = 0, m2 = 0;
    for (std::uint64_t i = 1; i < 60; ++i) {
        CHECK(gs.prob(i) == doctest::Approx(i * std::pow(2.0, -double(i) - 1)).epsilon(1e-9));
        m1 += i * geo.prob(i);
        m2 += double(i) * i * geo.prob(i);
    }
    CHECK(gs.mean() == doctest::Approx(m2 / m1).epsilon(1e-9));
    CHECK_THROWS_AS(size_bias(OffspringDistribution::point_mass(0)), DomainError);
    // heavy tail: c k^{-5/2} becomes (c / m) k^{-3/2}
    const OffspringDistribution mu = make_default_critical_mu(0.5);
    const OffspringDistribution ms = size_bias(mu);
    CHECK(ms.prob(10) == doctest::Approx(10 * mu.prob(10) / mu.mean()));
}

TEST_CASE("tilts")
{
    const ModelConfig cfg;
    const SupermapModel model(cfg);
    // F = 1: identity
    const WeightSequence same =
        tilt_subcritical(model.weights(), FTable::constant_one(cfg.p_max), model.ring());
    CHECK(same.Z() == doctest::Approx(model.weights().Z()).epsilon(1e-9));
    CHECK(same.classification() == model.weights().classification());
    // zero inner ring: q' = q F(0) = q
    const RingLaw zero = RingLaw::zero_inner(1.0);
    const auto F = estimate_F_fixed_point(model, 24, 6, 2000, 5);
    const WeightSequence z = tilt_subcritical(model.weights(), F, zero);
    CHECK(z.Z() == doctest::Approx(model.weights().Z()).epsilon(1e-9));
    // estimated F at Q = 1: strictly subcritical, and Z shrinks
    const WeightSequence t = tilt_subcritical(model.weights(), F, model.ring());
    CHECK(t.classification() == Criticality::subcritical);
    CHECK(t.mean() < 1);
    CHECK(t.Z() < model.weights().Z());
    // asking for more terms than the table resolves
    TiltOptions o;
    o.k_max = 100'000;
    CHECK_THROWS_AS(tilt_subcritical(model.weights(), F, model.ring(), o), CoverageError);
}
