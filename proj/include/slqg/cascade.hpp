#pragma once

#include "slqg/analytic.hpp"
#include "slqg/rng.hpp"
#include "slqg/stable.hpp"
#include "slqg/stats.hpp"
#include "slqg/ulam.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace slqg {

// Weighted collection of excursions; draw() resamples an index with
// probability proportional to 1/tau (alias method).
class Rho1Pool {
public:
    explicit Rho1Pool(std::vector<StableExcursion> excursions);
    static std::shared_ptr<const Rho1Pool> sample(const StableOptions& opt, std::size_t n_raw, std::uint64_t seed,
                                                  unsigned threads = 1);

    std::size_t size() const { return ex_.size(); }
    const StableExcursion& operator[](std::size_t i) const { return ex_[i]; }
    const std::vector<StableExcursion>& excursions() const { return ex_; }
    std::size_t draw(Rng& rng) const;

    // sd(w) / (mean(w) sqrt(n)): relative noise of the normalizer
    double normalizer_rel_sigma() const { return norm_rel_sigma_; }
    std::size_t censored() const { return censored_; }

private:
    std::vector<StableExcursion> ex_;
    std::vector<double> threshold_;
    std::vector<std::uint32_t> alias_;
    double norm_rel_sigma_ = 0;
    std::size_t censored_ = 0;
};

struct CascadeNode {
    static constexpr std::uint32_t npos = 0xffffffffu;
    std::uint32_t parent = npos;
    std::uint32_t rank = 0; // 1-based among siblings, 0 at the root
    std::uint32_t generation = 0;
    double x = 1;   // Z(u) / Z(parent)
    int y = 0;      // Rademacher tilt; the root carries none
    double Z = 1;
    double ZQ = 1;
    double log_ZQ = 0; // ZQ overflows a double for small Q and moderate depth
    std::uint32_t first_child = 0;
    std::uint32_t child_count = 0;
    std::uint32_t source = npos; // pool excursion that produced the children
    std::uint32_t dropped = 0;   // children removed by the cap
};

struct CascadeTree {
    double Q = 2;
    double beta = 0;
    int depth = 0;
    std::size_t children_cap = 0;
    std::vector<CascadeNode> nodes;         // breadth-first; siblings contiguous
    std::vector<std::uint32_t> gen_begin;   // nodes of generation g: [gen_begin[g], gen_begin[g+1])
    // per node, seeds the Rademacher draws of all its children so the dropped
    // ones can be replayed
    std::vector<std::uint64_t> tilt_seed;
    std::shared_ptr<const Rho1Pool> pool;

    std::size_t generation_size(int g) const { return gen_begin[g + 1] - gen_begin[g]; }
    UlamWord word(std::uint32_t i) const;
    // expected sum of tilted theta-moments over the children of node i that
    // are not in the tree (below the jump threshold or dropped by the cap)
    double unresolved_children_moment(std::uint32_t i, double theta) const;
    bool multiplicatively_consistent() const;
    // one node per line; a nonnegative tree_index is added as "tree"
    void write_jsonl(std::ostream& os, long tree_index = -1) const;
};

std::shared_ptr<const Rho1Pool> default_pool(double eps, double delta, std::uint64_t seed, std::size_t n_raw = 20000);

CascadeTree sample_cascade(std::shared_ptr<const Rho1Pool> pool, double Q, int depth, std::size_t children_cap,
                           Rng& rng);
CascadeTree sample_cascade(double Q, int depth, std::size_t children_cap, double eps, double delta, Rng& rng);

// #{u : |u| = n, Z_Q(u) in (a, b)}
std::size_t count_exceedances(const CascadeTree& t, int n, double a, double b);

struct MartingaleOptions {
    // add the expected contribution of children that are not in the tree
    bool compensate = false;
};

double additive_martingale(const CascadeTree& t, double theta, int n, const MartingaleOptions& opt = {});
// phi^{-n} sum over generation-n descendants v of node i of Z_Q(v)^theta
double restricted_additive_martingale(const CascadeTree& t, double theta, int n, std::uint32_t i);
double derivative_martingale(const CascadeTree& t, int n, const BigginsProfile& prof);

enum class MeasureMode { theta, star };

struct MeasureWeights {
    std::vector<double> w; // indexed like t.nodes; zero below n_trunc
    int n_trunc = 0;
    bool warning = false;
    std::string message;
};

MeasureWeights cascade_measure_weights(const CascadeTree& t, MeasureMode mode, double theta, int n_trunc);
bool weights_additive(const CascadeTree& t, const MeasureWeights& mw, double rel_tol = 1e-12);

// log max_{|u|=n} Z_Q(u)
double log_max_zq(const CascadeTree& t, int n);

// Self-normalized estimate of E[sum_{|u|=1} Z_Q(u)^theta] from excursions,
// with fresh Rademacher tilts per jump and the small-jump compensator.
Estimate first_generation_moment(const std::vector<StableExcursion>& ex, double Q, double theta, Rng& rng);

} // namespace slqg
