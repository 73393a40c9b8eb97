#pragma once

#include "slqg/offspring.hpp"
#include "slqg/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace slqg {

// Plane tree with vertices numbered in lexicographic (preorder) order; the
// root is vertex 0.
class PlaneTree {
public:
    // single vertex
    PlaneTree() : counts_{0}, offset_{0, 0}, parent_{0}, depth_{0} {}

    // preorder child counts; throws DomainError unless they encode a tree
    static PlaneTree from_child_counts(std::vector<std::uint32_t> counts);
    // path W_0 = 0, ..., W_n = -1 with W_{i+1} - W_i = k_i - 1
    static PlaneTree from_lukasiewicz(const std::vector<std::int64_t>& path);
    static PlaneTree from_newick(const std::string& s);

    std::size_t size() const { return counts_.size(); }
    std::uint32_t root() const { return 0; }
    std::uint32_t child_count(std::uint32_t v) const { return counts_[v]; }
    std::span<const std::uint32_t> children(std::uint32_t v) const
    {
        return {children_.data() + offset_[v], counts_[v]};
    }
    std::uint32_t parent(std::uint32_t v) const { return parent_[v]; } // root: itself
    std::uint32_t depth(std::uint32_t v) const { return depth_[v]; }
    std::uint32_t height() const;
    std::size_t leaf_count() const;
    const std::vector<std::uint32_t>& child_counts() const { return counts_; }

    std::vector<std::int64_t> lukasiewicz() const;
    // "((,),);" style; leaves are empty labels
    std::string newick() const;

    bool operator==(const PlaneTree& o) const { return counts_ == o.counts_; }

private:
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint32_t> offset_;
    std::vector<std::uint32_t> children_;
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> depth_;
};

struct Multigraph {
    std::size_t vertex_count = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges; // parallel edges and loops allowed

    std::size_t components() const;
};

// consecutive siblings joined, plus leftmost and rightmost child to the
// parent (an only child gets two parallel edges)
Multigraph looptree(const PlaneTree& t);

struct ContractedLooptree {
    Multigraph graph;
    std::vector<std::uint32_t> projection; // tree vertex -> contracted vertex (leaf rank)
    // bounded faces of the planar embedding: E - V + components
    std::size_t inner_faces() const;
};

// contracts the edge from each internal vertex to its rightmost child
ContractedLooptree contract_looptree(const PlaneTree& t);

// samples on the uniform grid i / (samples.size() - 1), linearly interpolated
struct PathFunction {
    std::vector<double> samples;

    double denominator() const { return samples.size() > 1 ? static_cast<double>(samples.size() - 1) : 1.0; }
    double value(double t) const;
    double max() const;
    void write_csv(std::ostream& os) const; // "t,value"
};

// 2(n-1) unit steps between neighbouring vertices along the contour
PathFunction contour_function(const PlaneTree& t);
// depth of the i-th vertex in lexicographic order at i / (n - 1)
PathFunction height_function(const PlaneTree& t);

// BGW tree with offspring law nu conditioned on size n, by drawing the
// multiset of child counts and cyclically shifting a uniform arrangement
PlaneTree sample_conditioned_bgw(const OffspringDistribution& nu, std::size_t n, Rng& rng,
                                 std::size_t max_attempts = 10'000'000);

// gcd of the positive support points; sizes n need (n - 1) divisible by it
std::uint64_t support_period(const OffspringDistribution& nu);

struct TrunkSample {
    PlaneTree tree;
    std::vector<std::uint32_t> spine;          // v_0 .. v_{h-1}
    std::vector<std::uint32_t> spine_children; // child count of v_i
    std::vector<std::uint32_t> spine_rank;     // 1-based position of v_{i+1} among the children of v_i
};

// spine vertices carry nu_star offspring, off-spine children are leaves
TrunkSample sample_trunk_star(const OffspringDistribution& nu_star, std::size_t h, Rng& rng);

// sigma H / sqrt(2n) for the height H of a uniform vertex in a conditioned
// tree of size n = 2p + 1; Rayleigh with density 2x exp(-x^2) in the limit
std::vector<double> rescaled_uniform_heights(const OffspringDistribution& nu, std::size_t p, std::size_t n_samples,
                                             std::uint64_t seed, unsigned threads = 1);
double spine_height_check(const OffspringDistribution& nu, std::size_t p, std::size_t n_samples, std::uint64_t seed,
                          unsigned threads = 1);

} // namespace slqg
