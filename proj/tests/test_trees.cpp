#include "slqg/crt.hpp"
#include "slqg/errors.hpp"
#include "slqg/offspring.hpp"
#include "slqg/stats.hpp"
#include "slqg/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <doctest.h>

using namespace slqg;

namespace {

OffspringDistribution binary() { return OffspringDistribution({0.5, 0.0, 0.5}); }

// every preorder child-count sequence of a plane tree with n vertices
void enumerate_trees(std::size_t n, std::vector<std::uint32_t>& cur, long open,
                     std::vector<std::vector<std::uint32_t>>& out)
{
    if (cur.size() == n) {
        if (open == 0)
            out.push_back(cur);
        return;
    }
    if (open <= 0)
        return;
    for (std::uint32_t k = 0; k < n; ++k) {
        cur.push_back(k);
        enumerate_trees(n, cur, open - 1 + k, out);
        cur.pop_back();
    }
}

std::vector<std::vector<std::uint32_t>> all_trees(std::size_t n)
{
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> cur;
    enumerate_trees(n, cur, 1, out);
    return out;
}

PlaneTree star(std::uint32_t k)
{
    std::vector<std::uint32_t> c{k};
    c.insert(c.end(), k, 0u);
    return PlaneTree::from_child_counts(c);
}

std::vector<std::uint32_t> degrees(const Multigraph& g)
{
    std::vector<std::uint32_t> d(g.vertex_count, 0);
    for (auto [a, b] : g.edges) {
        ++d[a];
        ++d[b];
    }
    return d;
}

// brute-force height of a tree through parent pointers
std::uint32_t slow_height(const PlaneTree& t)
{
    std::uint32_t h = 0;
    for (std::uint32_t v = 0; v < t.size(); ++v) {
        std::uint32_t d = 0;
        for (std::uint32_t u = v; u != t.root(); u = t.parent(u))
            ++d;
        h = std::max(h, d);
    }
    return h;
}

} // namespace

TEST_CASE("construction and encodings")
{
    const PlaneTree single;
    CHECK(single.size() == 1);
    CHECK(single.height() == 0);
    CHECK(single.leaf_count() == 1);
    CHECK(PlaneTree::from_newick(single.newick()) == single);

    const PlaneTree cherry = PlaneTree::from_child_counts({2, 0, 0});
    CHECK(cherry.lukasiewicz() == std::vector<std::int64_t>{0, 1, 0, -1});
    CHECK(PlaneTree::from_lukasiewicz({0, 1, 0, -1}) == cherry);
    CHECK(cherry.newick() == "(,);");

    const PlaneTree t = PlaneTree::from_newick("((,),);");
    CHECK(t.child_counts() == std::vector<std::uint32_t>{2, 2, 0, 0, 0});
    CHECK(t.children(0).size() == 2);
    CHECK(t.children(0)[1] == 4);
    CHECK(t.parent(2) == 1);
    CHECK(t.depth(3) == 2);

    CHECK_THROWS_AS(PlaneTree::from_child_counts({}), DomainError);
    CHECK_THROWS_AS(PlaneTree::from_child_counts({1, 1}), DomainError);
    CHECK_THROWS_AS(PlaneTree::from_child_counts({0, 1, 0}), DomainError);
    CHECK_THROWS_AS(PlaneTree::from_lukasiewicz({0, -1, 0, -1}), DomainError);
    CHECK_THROWS_AS(PlaneTree::from_lukasiewicz({0, -2}), DomainError);
    CHECK_THROWS_AS(PlaneTree::from_newick("((,);"), DomainError);
}

TEST_CASE("looptree of small trees")
{
    const PlaneTree single;
    const Multigraph g0 = looptree(single);
    CHECK(g0.vertex_count == 1);
    CHECK(g0.edges.empty());

    // star with four children is a 5-cycle
    const Multigraph g = looptree(star(4));
    CHECK(g.vertex_count == 5);
    CHECK(g.edges.size() == 5);
    CHECK(g.components() == 1);
    for (auto d : degrees(g))
        CHECK(d == 2);

    const ContractedLooptree c = contract_looptree(star(4));
    CHECK(c.graph.vertex_count == 4);
    CHECK(c.graph.edges.size() == 4);
    CHECK(c.graph.components() == 1);
    for (auto d : degrees(c.graph))
        CHECK(d == 2);
    CHECK(c.inner_faces() == 1);

    // an only child gets a double edge
    const Multigraph p = looptree(PlaneTree::from_child_counts({1, 1, 0}));
    CHECK(p.edges.size() == 4);
}

TEST_CASE("combinatorial invariants on random trees")
{
    Rng rng(1);
    const OffspringDistribution geo = make_geometric(0.5);
    for (int r = 0; r < 10'000; ++r) {
        const std::size_t n = 1 + rng.below(60);
        const PlaneTree t = sample_conditioned_bgw(geo, n, rng);
        REQUIRE(t.size() == n);
        CHECK(PlaneTree::from_lukasiewicz(t.lukasiewicz()) == t);
        CHECK(PlaneTree::from_newick(t.newick()) == t);

        const Multigraph g = looptree(t);
        std::size_t expect = 0, internal = 0;
        for (std::uint32_t v = 0; v < n; ++v)
            if (t.child_count(v) > 0) {
                expect += t.child_count(v) + 1;
                ++internal;
            }
        CHECK(g.vertex_count == n);
        CHECK(g.edges.size() == expect);
        CHECK(g.components() == 1);

        const ContractedLooptree c = contract_looptree(t);
        CHECK(c.graph.vertex_count == t.leaf_count());
        CHECK(c.inner_faces() == internal);
        std::vector<int> seen(c.graph.vertex_count, 0);
        for (std::uint32_t v = 0; v < n; ++v)
            if (t.child_count(v) == 0)
                ++seen[c.projection[v]];
        CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));

        const PathFunction C = contour_function(t);
        CHECK(C.samples.size() == 2 * (n - 1) + 1);
        CHECK(C.samples.front() == 0);
        CHECK(C.samples.back() == 0);
        bool unit = true, nonneg = true;
        for (std::size_t i = 1; i < C.samples.size(); ++i) {
            unit = unit && std::abs(C.samples[i] - C.samples[i - 1]) == 1;
            nonneg = nonneg && C.samples[i] >= 0;
        }
        CHECK(unit);
        CHECK(nonneg);
        CHECK(C.max() == t.height());
        CHECK(t.height() == slow_height(t));

        const PathFunction H = height_function(t);
        CHECK(H.samples.size() == n);
        CHECK(H.samples.front() == 0);
    }
}

TEST_CASE("path functions of small trees")
{
    const PathFunction z = contour_function(PlaneTree{});
    CHECK(z.max() == 0);
    CHECK(z.value(0.3) == 0);
    CHECK(height_function(PlaneTree{}).max() == 0);

    const PathFunction c = contour_function(PlaneTree::from_child_counts({1, 1, 0}));
    CHECK(c.samples == std::vector<double>{0, 1, 2, 1, 0});
    CHECK(c.value(0.5) == 2);
    CHECK(c.value(0.125) == doctest::Approx(0.5));
    CHECK(c.max() == 2);

    std::ostringstream os;
    c.write_csv(os);
    CHECK(os.str().rfind("t,value\n0,0\n", 0) == 0);
}

TEST_CASE("conditioned trees of small size follow the exact law")
{
    for (const auto& nu : {make_geometric(0.5), OffspringDistribution({0.5, 0.2, 0.3})}) {
        for (std::size_t n : {3u, 4u, 5u}) {
            std::map<std::vector<std::uint32_t>, double> exact;
            double z = 0;
            for (const auto& c : all_trees(n)) {
                double w = 1;
                for (auto k : c)
                    w *= nu.prob(k);
                exact[c] = w;
                z += w;
            }
            Rng rng(100 + n);
            const int m = 40'000;
            std::map<std::vector<std::uint32_t>, int> hits;
            for (int r = 0; r < m; ++r)
                ++hits[sample_conditioned_bgw(nu, n, rng).child_counts()];
            for (const auto& [c, w] : exact) {
                const double p = w / z;
                const double f = hits[c] / double(m);
                CHECK(std::abs(f - p) < 4 * std::sqrt(p * (1 - p) / m) + 1e-9);
            }
            CHECK(hits.size() <= exact.size());
        }
    }
    // under the geometric law both 3-vertex shapes have probability 1/2
    Rng rng(7);
    int path = 0;
    const int m = 20'000;
    for (int r = 0; r < m; ++r)
        path += sample_conditioned_bgw(make_geometric(0.5), 3, rng).height() == 2;
    CHECK(std::abs(path / double(m) - 0.5) < 4 * std::sqrt(0.25 / m));
}

TEST_CASE("conditioned sampler preconditions")
{
    Rng rng(2);
    const auto one = sample_conditioned_bgw(OffspringDistribution::point_mass(0), 1, rng);
    CHECK(one.size() == 1);
    CHECK_THROWS_AS(sample_conditioned_bgw(OffspringDistribution::point_mass(0), 2, rng), ParityError);
    CHECK(support_period(binary()) == 2);
    CHECK(support_period(make_geometric(0.5)) == 1);
    CHECK_THROWS_AS(sample_conditioned_bgw(binary(), 4, rng), ParityError);
    CHECK(sample_conditioned_bgw(binary(), 5, rng).size() == 5);
    CHECK_THROWS_AS(sample_conditioned_bgw(OffspringDistribution::point_mass(1), 3, rng), DomainError);
    CHECK_THROWS_AS(sample_conditioned_bgw(OffspringDistribution({0.2, 0.2, 0.6}), 3, rng), DomainError);
    CHECK_THROWS_AS(sample_conditioned_bgw(make_geometric(0.5), 0, rng), DomainError);
}

TEST_CASE("heavy-tailed offspring use the rejection path")
{
    Rng rng(3);
    const OffspringDistribution mu = make_default_critical_mu(0.5);
    for (int r = 0; r < 200; ++r) {
        const auto t = sample_conditioned_bgw(mu, 31, rng);
        CHECK(t.size() == 31);
        CHECK(PlaneTree::from_lukasiewicz(t.lukasiewicz()) == t);
    }
}

TEST_CASE("heights scale like the square root of the size")
{
    Rng rng(4);
    RunningStats small, large;
    for (int r = 0; r < 400; ++r) {
        small.add(sample_conditioned_bgw(binary(), 1001, rng).height());
        large.add(sample_conditioned_bgw(binary(), 4001, rng).height());
    }
    CHECK(std::abs(large.mean() / small.mean() - 2) < 0.15);
}

TEST_CASE("contour and height functions share a limit")
{
    Rng rng(5);
    std::vector<double> gap_small, gap_large;
    for (int r = 0; r < 30; ++r)
        for (std::size_t p : {100u, 4000u}) {
            const PlaneTree t = sample_conditioned_bgw(binary(), 2 * p + 1, rng);
            const PathFunction C = contour_function(t), H = height_function(t);
            const double s = 1.0 / (2 * std::sqrt(2.0 * p));
            double gap = 0;
            for (int i = 0; i <= 2000; ++i) {
                const double u = i / 2000.0;
                gap = std::max(gap, s * std::abs(C.value(u) - H.value(u)));
            }
            (p == 100 ? gap_small : gap_large).push_back(gap);
        }
    CHECK(median(gap_large) < median(gap_small));
}

TEST_CASE("trunk with a point-mass law is a path")
{
    Rng rng(6);
    const auto s = sample_trunk_star(OffspringDistribution::point_mass(1), 7, rng);
    CHECK(s.tree.size() == 8);
    CHECK(s.tree.height() == 7);
    CHECK_THROWS_AS(sample_trunk_star(make_geometric(0.5), 5, rng), DomainError);
    CHECK_THROWS_AS(sample_trunk_star(OffspringDistribution::point_mass(1), 0, rng), DomainError);
}

TEST_CASE("trunk spine statistics")
{
    const OffspringDistribution star_law = size_bias(make_geometric(0.5));
    Rng rng(8);
    const std::size_t h = 50;
    std::vector<std::size_t> counts(40, 0);
    std::map<std::uint32_t, std::vector<std::size_t>> ranks;
    for (int r = 0; r < 200; ++r) {
        const auto s = sample_trunk_star(star_law, h, rng);
        REQUIRE(s.spine.size() == h);
        for (std::size_t i = 0; i < h; ++i) {
            const auto v = s.spine[i];
            CHECK(s.tree.child_count(v) == s.spine_children[i]);
            ++counts[std::min<std::size_t>(s.spine_children[i], counts.size() - 1)];
            if (i + 1 < h) {
                CHECK(s.tree.children(v)[s.spine_rank[i] - 1] == s.spine[i + 1]);
                for (auto c : s.tree.children(v))
                    if (c != s.spine[i + 1])
                        CHECK(s.tree.child_count(c) == 0);
                auto& rk = ranks[s.spine_children[i]];
                rk.resize(s.spine_children[i], 0);
                ++rk[s.spine_rank[i] - 1];
            }
        }
    }
    std::vector<double> expected(counts.size());
    double acc = 0;
    for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
        expected[k] = star_law.prob(k);
        acc += expected[k];
    }
    expected.back() = 1 - acc;
    CHECK(chi_square_pvalue(counts, expected) > 0.01);
    for (std::uint32_t k : {2u, 3u, 4u}) {
        const auto& rk = ranks[k];
        CHECK(chi_square_pvalue(rk, std::vector<double>(k, 1.0 / k)) > 0.01);
    }
}

TEST_CASE("uniform vertex heights are Rayleigh")
{
    // int_0^inf 2x exp(-x^2) dx = 1
    double integral = 0;
    for (int i = 0; i < 200'000; ++i) {
        const double x = (i + 0.5) * 1e-4;
        integral += 2 * x * std::exp(-x * x) * 1e-4;
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));

    CHECK(spine_height_check(make_geometric(0.5), 10'000, 2000, 9) < 0.05);
    CHECK(spine_height_check(binary(), 2000, 2000, 10) < 0.05);
    CHECK_THROWS_AS(spine_height_check(OffspringDistribution::point_mass(1), 10, 10, 1), DomainError);
    CHECK_THROWS_AS(spine_height_check(make_geometric(0.3), 10, 10, 1), DomainError);
}

TEST_CASE("Brownian excursion oracle")
{
    Rng rng(11);
    RunningStats mx;
    bool ok = true;
    for (int r = 0; r < 2000; ++r) {
        const PathFunction e = brownian_excursion(12, rng);
        ok = ok && e.samples.size() == 4097 && e.samples.front() == 0 && e.samples.back() == 0;
        ok = ok && std::all_of(e.samples.begin(), e.samples.end(), [](double x) { return x >= 0; });
        mx.add(e.max());
    }
    CHECK(ok);
    // E[max] of the normalized excursion is sqrt(pi / 2)
    CHECK(std::abs(mx.mean() / std::sqrt(std::numbers::pi / 2) - 1) < 0.03);
    const auto o = excursion_max_oracle(200, 10, 12);
    CHECK(o.value > 1);
    CHECK(o.std_error > 0);
    CHECK_THROWS_AS(brownian_excursion(0, rng), DomainError);
}

TEST_CASE("pseudo-metric axioms")
{
    Rng rng(13);
    const PseudoMetricExcursion d(brownian_excursion(12, rng));
    CHECK(pseudo_metric_violations(d, 10'000, rng) == 0);
    CHECK(d.distance(0.3, 0.3) == 0);
    CHECK(d.distance(0.2, 0.7) == d.distance(0.7, 0.2));

    const PseudoMetricExcursion tree(contour_function(sample_conditioned_bgw(binary(), 201, rng)));
    CHECK(pseudo_metric_violations(tree, 10'000, rng) == 0);

    PathFunction neg;
    neg.samples = {0, -1, 0};
    CHECK_THROWS_AS(PseudoMetricExcursion{neg}, DomainError);

    // tent: d(0, 1/2) = 1
    PathFunction tent;
    tent.samples = {0, 1, 0};
    const PseudoMetricExcursion t(tent);
    CHECK(t.distance(0, 0.5) == doctest::Approx(1));
    CHECK(t.distance(0.25, 0.75) == doctest::Approx(0));
    CHECK(t.distance(0.25, 0.5) == doctest::Approx(0.5));
    CHECK(t.distance(0, 1) == doctest::Approx(0));
}

TEST_CASE("distortion of a correspondence")
{
    Rng rng(14);
    const PseudoMetricExcursion e(brownian_excursion(10, rng));
    std::vector<double> times;
    for (int i = 0; i < 40; ++i)
        times.push_back(rng.uniform());
    std::vector<std::vector<double>> D(times.size(), std::vector<double>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = 0; j < times.size(); ++j)
            D[i][j] = e.distance(times[i], times[j]);
    std::vector<std::pair<std::size_t, std::size_t>> id;
    for (std::size_t i = 0; i < times.size(); ++i)
        id.push_back({i, i});
    CHECK(gh_distortion(D, times, e, id) == doctest::Approx(0).epsilon(1e-12));

    D[3][7] += 0.25;
    D[7][3] += 0.25;
    const double dist = gh_distortion(D, times, e, id);
    CHECK(dist >= 0.25 - 1e-12);
    CHECK(dist >= std::abs(D[1][2] - e.distance(times[1], times[2])));

    auto partial = id;
    partial.pop_back();
    CHECK_THROWS_AS(gh_distortion(D, times, e, partial), CoverageError);
    partial.push_back({99, 0});
    CHECK_THROWS_AS(gh_distortion(D, times, e, partial), CoverageError);
}

TEST_CASE("coupled tree and excursion")
{
    Rng rng(15);
    const auto c = sample_coupled_tree_excursion(125, rng);
    CHECK(c.tree.size() == 251);
    CHECK(c.excursion.samples.size() == 252);
    CHECK(c.excursion.samples.front() == doctest::Approx(0).epsilon(1e-12));
    for (auto k : c.tree.child_counts())
        CHECK((k == 0 || k == 2));
    CHECK_THROWS_AS(sample_coupled_tree_excursion(0, rng), DomainError);

    std::vector<double> small, large;
    for (int r = 0; r < 20; ++r) {
        for (std::size_t p : {125u, 2000u}) {
            const auto s = sample_coupled_tree_excursion(p, rng);
            const PseudoMetricExcursion e(s.excursion);
            (p == 125 ? small : large).push_back(tree_excursion_distortion(s.tree, 1.0, e, 300, rng));
        }
    }
    CHECK(median(large) < median(small));
}
