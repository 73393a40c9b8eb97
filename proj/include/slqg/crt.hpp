#pragma once

#include "slqg/rng.hpp"
#include "slqg/stats.hpp"
#include "slqg/trees.hpp"

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace slqg {

// range minimum over a fixed array in O(1) after O(n log n) setup
class SparseMin {
public:
    SparseMin() = default;
    explicit SparseMin(const std::vector<double>& v);
    double min(std::size_t lo, std::size_t hi) const; // inclusive, lo <= hi

private:
    std::vector<std::vector<double>> t_;
};

// d(s, t) = e_s + e_t - 2 min_{[s ^ t, s v t]} e for a nonnegative excursion
class PseudoMetricExcursion {
public:
    explicit PseudoMetricExcursion(PathFunction e);

    const PathFunction& path() const { return e_; }
    double distance(double s, double t) const;

private:
    PathFunction e_;
    SparseMin rmq_;
};

// Bessel(3) bridge from three Brownian bridges on a grid of 2^grid_log2 steps
PathFunction brownian_excursion(int grid_log2, Rng& rng);

// Monte Carlo mean of max e over n_paths excursions
Estimate excursion_max_oracle(std::size_t n_paths, int grid_log2, std::uint64_t seed, unsigned threads = 1);

// number of violated symmetry / triangle / nonnegativity checks on random triples
std::size_t pseudo_metric_violations(const PseudoMetricExcursion& d, std::size_t n_triples, Rng& rng,
                                     double tol = 1e-12);

// Tree with offspring law on {0, 2} with size 2p + 1, and a normalized
// Brownian excursion on the grid i / (2p + 1) built from the same uniforms:
// the +-1 bridge and a Gaussian bridge are refined dyadically with
// quantile-coupled midpoints, then both are cyclically shifted at their minimum.
struct CoupledTreeExcursion {
    PlaneTree tree;
    PathFunction excursion;
};
CoupledTreeExcursion sample_coupled_tree_excursion(std::size_t p, Rng& rng);

// sup over pairs of correspondence pairs of |D(i, i') - d_e(t_j, t_j')|;
// every tree point and every time must appear in some pair
double gh_distortion(const std::vector<std::vector<double>>& tree_metric, const std::vector<double>& times,
                     const PseudoMetricExcursion& e, const std::vector<std::pair<std::size_t, std::size_t>>& corr);

// distortion of the lexicographic correspondence i = floor(2p s) on k sampled
// times, tree distances scaled by sigma / (2 sqrt(2p))
double tree_excursion_distortion(const PlaneTree& t, double sigma, const PseudoMetricExcursion& e, std::size_t k,
                                 Rng& rng);

} // namespace slqg
