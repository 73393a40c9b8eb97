#include "slqg/errors.hpp"
#include "slqg/ftable.hpp"
#include "slqg/rings.hpp"

#include <cmath>

#include <doctest.h>

using namespace slqg;

namespace {

std::uint64_t floor_atom(long double Q, std::uint64_t p, int sign)
{
    const long double pi = 3.14159265358979323846264338327950288L;
    const long double beta = pi * std::sqrt(4.0L - Q * Q) / Q;
    return static_cast<std::uint64_t>(std::floor(static_cast<long double>(p) * std::exp(sign * beta)));
}

} // namespace

TEST_CASE("default atoms against a long-double evaluation")
{
    const RingLaw r = RingLaw::default_floor(1.0);
    CHECK(r.beta() == doctest::Approx(5.441398092702653));
    CHECK(r.up_atom(4) == 923);
    CHECK(r.down_atom(4) == 0);
    for (double Q : {0.3, 1.0, 1.5, 1.9, 1.99})
        for (std::uint64_t p : {1u, 2u, 7u, 100u, 12345u}) {
            const RingLaw law = RingLaw::default_floor(Q);
            CHECK(law.up_atom(p) == floor_atom(Q, p, 1));
            CHECK(law.down_atom(p) == floor_atom(Q, p, -1));
        }
}

TEST_CASE("Q close to 2 makes rings nearly perimeter preserving")
{
    const RingLaw r = RingLaw::default_floor(1.999999);
    CHECK(r.beta() < 0.01);
    for (std::uint64_t p : {10u, 1000u}) {
        CHECK(r.up_atom(p) >= p);
        CHECK(r.up_atom(p) <= p + 1 + p / 100);
        CHECK(r.down_atom(p) + 1 >= p - p / 100);
        const double rat = static_cast<double>(r.up_atom(p)) / p;
        CHECK(std::abs(rat - std::exp(r.beta())) <= 1.0 / p);
    }
    const RingLaw two = RingLaw::default_floor(2.0);
    CHECK(two.beta() == 0);
    CHECK(two.atoms(5).size() == 1);
    CHECK(two.atoms(5)[0].m == 5);
}

TEST_CASE("ratio tracks exp(beta Y) within the floor error")
{
    const RingLaw r = RingLaw::default_floor(1.6);
    for (std::uint64_t p = 1; p < 2000; p += 37) {
        CHECK(std::exp(r.beta()) - static_cast<double>(r.up_atom(p)) / p <= 1.0 / p + 1e-12);
        CHECK(std::exp(-r.beta()) - static_cast<double>(r.down_atom(p)) / p <= 1.0 / p + 1e-12);
    }
}

TEST_CASE("invalid Q is rejected")
{
    CHECK_THROWS_AS(RingLaw::default_floor(0.0), DomainError);
    CHECK_THROWS_AS(RingLaw::default_floor(2.5), DomainError);
    CHECK_THROWS_AS(RingLaw::default_floor(std::nan("")), DomainError);
}

TEST_CASE("up-atom frequency is one half")
{
    const RingLaw r = RingLaw::default_floor(1.0);
    Rng rng(3);
    const int n = 100'000;
    int up = 0;
    for (int i = 0; i < n; ++i) {
        const auto m = r.sample(4, rng);
        REQUIRE((m == 923 || m == 0));
        up += m == 923;
    }
    CHECK(std::abs(up / double(n) - 0.5) < 0.006);
}

TEST_CASE("tilted expectation")
{
    const RingLaw r = RingLaw::default_floor(1.0);
    CHECK(r.tilted_expectation(4, FTable::constant_one(10)) == 1.0);
    CHECK(r.tilted_expectation(4, FTable::constant_one(1000)) == 1.0);

    // up-atom beyond the table: only the down branch F(0)/2 survives
    const FTable small = FTable::from_values({1.0, 0.8, 0.6});
    CHECK(r.tilted_expectation(4, small) == 0.5);

    std::vector<double> v(1000, 0.5);
    v[0] = 1;
    v[923] = 0.2;
    const FTable big = FTable::from_values(v);
    CHECK(r.tilted_expectation(4, big) == doctest::Approx((0.2 + 1) / 2));

    const RingLaw z = RingLaw::zero_inner(1.0);
    CHECK(z.tilted_expectation(123, small) == 1.0);
}

TEST_CASE("tilted sampler follows two-atom Bayes")
{
    const RingLaw r = RingLaw::default_floor(1.0);
    Rng rng(17);
    const int n = 100'000;

    SUBCASE("F = 1 keeps the law")
    {
        int up = 0;
        for (int i = 0; i < n; ++i)
            up += r.sample_tilted(4, FTable::constant_one(1000), rng) == 923;
        CHECK(std::abs(up / double(n) - 0.5) < 3 * std::sqrt(0.25 / n));
    }
    SUBCASE("F(up) = 0 forces the down atom")
    {
        for (int i = 0; i < 1000; ++i)
            CHECK(r.sample_tilted(4, FTable::from_values({1.0, 0.5}), rng) == 0);
    }
    SUBCASE("partial weight")
    {
        std::vector<double> v(1000, 0.5);
        v[0] = 1;
        v[923] = 0.3;
        const FTable F = FTable::from_values(v);
        const double p_down = 1 / (1 + 0.3);
        int down = 0;
        for (int i = 0; i < n; ++i)
            down += r.sample_tilted(4, F, rng) == 0;
        CHECK(std::abs(down / double(n) - p_down) < 3 * std::sqrt(p_down * (1 - p_down) / n));
    }
    SUBCASE("zero normalizer")
    {
        // the default law always has F(0) = 1 on one atom, so use a custom row
        const RingLaw c = RingLaw::custom(1.0, {{3, {{5, 0.5}, {6, 0.5}}}});
        CHECK_THROWS_AS(c.sample_tilted(3, FTable::from_values({1.0, 0.5}), rng), ConditioningError);
    }
}

TEST_CASE("custom tables from JSON")
{
    const auto j = nlohmann::json::parse(R"([
        {"p": 1, "atoms": [[0, 0.25], [3, 0.75]]},
        {"p": 2, "atoms": [[1, 0.5], [6, 0.5]]}
    ])");
    const RingLaw r = RingLaw::custom_from_json(1.2, j);
    CHECK(r.variant() == RingVariant::custom_table);
    CHECK(r.atoms(1).size() == 2);
    CHECK(r.atoms(2)[1].m == 6);
    CHECK_THROWS_AS(r.atoms(5), CoverageError);

    const FTable F = FTable::from_values({1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4});
    CHECK(r.tilted_expectation(1, F) == doctest::Approx(0.25 * 1.0 + 0.75 * 0.7));

    Rng rng(5);
    int three = 0;
    const int n = 40'000;
    for (int i = 0; i < n; ++i)
        three += r.sample(1, rng) == 3;
    CHECK(std::abs(three / double(n) - 0.75) < 4 * std::sqrt(0.75 * 0.25 / n));

    const auto single = RingLaw::custom_from_json(1.0, nlohmann::json::parse(R"({"p": 4, "atoms": [[2, 1.0]]})"));
    CHECK(single.atoms(4)[0].m == 2);

    CHECK_THROWS_AS(RingLaw::custom(1.0, {{1, {{0, 0.3}}}}), DomainError);
    CHECK_THROWS_AS(RingLaw::custom(1.0, {{1, {{0, -0.5}, {1, 1.5}}}}), DomainError);
    CHECK_THROWS_AS(RingLaw::custom(1.0, {}), DomainError);
}

TEST_CASE("admissibility diagnostics are reported")
{
    const RingLaw good = RingLaw::custom(1.0, {{1, {{0, 0.5}, {2, 0.5}}}, {2, {{1, 0.5}, {4, 0.5}}}});
    const auto rep = good.validate_table();
    CHECK(rep["applicable"] == true);
    CHECK(rep["nontrivial"] == true);
    CHECK(rep["sup_moment"].get<double>() == doctest::Approx(0.5 * std::pow(0.5, 2.5) + 0.5 * std::pow(2.0, 2.5)));
    for (const auto& l : rep["lower_tail"])
        CHECK(l["pass"] == true);

    const RingLaw dead = RingLaw::custom(1.0, {{3, {{0, 1.0}}}});
    const auto rep2 = dead.validate_table();
    CHECK(rep2["nontrivial"] == false);
    for (const auto& l : rep2["lower_tail"])
        CHECK(l["pass"] == false);

    CHECK(RingLaw::default_floor(1.0).validate_table()["applicable"] == false);
}

TEST_CASE("tilt asymptote")
{
    const RingLaw r = RingLaw::default_floor(1.0);
    std::vector<double> v(30, 0.5);
    v[0] = 1;
    const FTable F = FTable::from_values(v);
    const auto a = r.tilt_asymptote(F);
    CHECK(a.value == 0);
    // just past K0 both atoms leave the table
    CHECK(r.down_atom(a.K0 + 1) > F.p_max());
    CHECK(r.down_atom(a.K0) <= F.p_max());
    for (std::uint64_t k = a.K0 + 1; k < a.K0 + 500; ++k)
        CHECK(r.tilted_expectation(k, F) == a.value);
}
