#include "slqg/crt.hpp"

#include "slqg/errors.hpp"
#include "slqg/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace slqg {

SparseMin::SparseMin(const std::vector<double>& v)
{
    t_.push_back(v);
    for (std::size_t w = 1; 2 * w <= v.size(); w *= 2) {
        const auto& prev = t_.back();
        std::vector<double> cur(v.size() - 2 * w + 1);
        for (std::size_t i = 0; i < cur.size(); ++i)
            cur[i] = std::min(prev[i], prev[i + w]);
        t_.push_back(std::move(cur));
    }
}

double SparseMin::min(std::size_t lo, std::size_t hi) const
{
    const std::size_t len = hi - lo + 1;
    const int k = std::bit_width(len) - 1;
    return std::min(t_[k][lo], t_[k][hi + 1 - (std::size_t{1} << k)]);
}

PseudoMetricExcursion::PseudoMetricExcursion(PathFunction e) : e_(std::move(e))
{
    if (e_.samples.empty())
        throw DomainError("empty excursion");
    for (double v : e_.samples)
        if (v < 0)
            throw DomainError("excursion must be nonnegative");
    rmq_ = SparseMin(e_.samples);
}

double PseudoMetricExcursion::distance(double s, double t) const
{
    const double lo = std::clamp(std::min(s, t), 0.0, 1.0), hi = std::clamp(std::max(s, t), 0.0, 1.0);
    const double a = e_.value(lo), b = e_.value(hi);
    double m = std::min(a, b);
    const double den = e_.denominator();
    const auto i = static_cast<std::size_t>(std::ceil(lo * den));
    const auto j = static_cast<std::size_t>(std::floor(hi * den));
    if (e_.samples.size() > 1 && i <= j && j < e_.samples.size())
        m = std::min(m, rmq_.min(i, j));
    return std::max(0.0, a + b - 2 * m);
}

PathFunction brownian_excursion(int grid_log2, Rng& rng)
{
    if (grid_log2 < 1 || grid_log2 > 26)
        throw DomainError("grid_log2 out of range");
    const std::size_t m = std::size_t{1} << grid_log2;
    const double sd = std::sqrt(1.0 / static_cast<double>(m));
    PathFunction f;
    f.samples.assign(m + 1, 0.0);
    std::vector<double> w(m + 1);
    for (int c = 0; c < 3; ++c) {
        w[0] = 0;
        for (std::size_t i = 1; i <= m; ++i)
            w[i] = w[i - 1] + sd * rng.normal();
        const double end = w[m];
        for (std::size_t i = 0; i <= m; ++i) {
            const double b = w[i] - end * static_cast<double>(i) / static_cast<double>(m);
            f.samples[i] += b * b;
        }
    }
    for (double& v : f.samples)
        v = std::sqrt(v);
    f.samples.front() = f.samples.back() = 0;
    return f;
}

Estimate excursion_max_oracle(std::size_t n_paths, int grid_log2, std::uint64_t seed, unsigned threads)
{
    std::vector<double> mx(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        mx[i] = brownian_excursion(grid_log2, rng).max();
    });
    RunningStats s;
    for (double v : mx)
        s.add(v);
    return {s.mean(), s.std_error()};
}

std::size_t pseudo_metric_violations(const PseudoMetricExcursion& d, std::size_t n_triples, Rng& rng, double tol)
{
    std::size_t bad = 0;
    for (std::size_t k = 0; k < n_triples; ++k) {
        const double r = rng.uniform(), s = rng.uniform(), t = rng.uniform();
        const double rs = d.distance(r, s), sr = d.distance(s, r), st = d.distance(s, t), rt = d.distance(r, t);
        const double scale = tol * (1 + rs + st + rt);
        if (rs < 0 || st < 0 || rt < 0)
            ++bad;
        if (std::abs(rs - sr) > scale)
            ++bad;
        if (rt > rs + st + scale)
            ++bad;
        if (d.distance(r, r) > scale)
            ++bad;
    }
    return bad;
}

namespace {

// quantile at u of Hypergeometric(N total, K marked, L drawn)
std::int64_t hypergeometric_quantile(std::int64_t N, std::int64_t K, std::int64_t L, double u)
{
    const std::int64_t lo = std::max<std::int64_t>(0, L - (N - K)), hi = std::min(K, L);
    if (lo == hi)
        return lo;
    const auto mode = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor((L + 1.0) * (K + 1.0) / (N + 2.0))), lo, hi);
    // pmf relative to the mode, walking outward until negligible; no
    // absolute pmf is needed, so nothing underflows for large N
    std::int64_t b = mode;
    std::vector<double> left, right;
    double pr = 1;
    for (std::int64_t x = mode; x > lo && pr > 1e-18; --x) {
        pr *= double(x) * double(N - K - L + x) / (double(K - x + 1) * double(L - x + 1));
        left.push_back(pr);
    }
    pr = 1;
    for (std::int64_t x = mode; x < hi && pr > 1e-18; ++x) {
        pr *= double(K - x) * double(L - x) / (double(x + 1) * double(N - K - L + x + 1));
        right.push_back(pr);
        b = x + 1;
    }
    double total = 1;
    for (double v : left)
        total += v;
    for (double v : right)
        total += v;
    double target = u * total, acc = 0;
    for (std::size_t i = left.size(); i-- > 0;) {
        acc += left[i];
        if (acc > target)
            return mode - static_cast<std::int64_t>(i) - 1;
    }
    acc += 1;
    if (acc > target)
        return mode;
    for (std::size_t i = 0; i < right.size(); ++i) {
        acc += right[i];
        if (acc > target)
            return mode + static_cast<std::int64_t>(i) + 1;
    }
    return b;
}

struct Coupler {
    Rng& rng;
    std::vector<int> inc;  // +-1 increments
    std::vector<double> g; // Gaussian bridge at integer times

    void refine(std::size_t a, std::size_t b, std::int64_t ups)
    {
        const std::size_t N = b - a;
        if (N == 1) {
            inc[a] = ups == 1 ? 1 : -1;
            return;
        }
        const std::size_t m = a + N / 2, L = m - a;
        const double u = rng.uniform_pos() * (1 - 0x1.0p-53);
        const std::int64_t left = hypergeometric_quantile(static_cast<std::int64_t>(N), ups,
                                                          static_cast<std::int64_t>(L), u);
        const double z = std::sqrt(2.0) * boost::math::erf_inv(2 * u - 1);
        const double fr = double(L) / double(N);
        g[m] = g[a] + fr * (g[b] - g[a]) + std::sqrt(double(L) * double(N - L) / double(N)) * z;
        refine(a, m, left);
        refine(m, b, ups - left);
    }
};

} // namespace

CoupledTreeExcursion sample_coupled_tree_excursion(std::size_t p, Rng& rng)
{
    if (p < 1)
        throw DomainError("p must be at least 1");
    const std::size_t n = 2 * p + 1;
    Coupler c{rng, std::vector<int>(n), std::vector<double>(n + 1, 0.0)};
    c.refine(0, n, static_cast<std::int64_t>(p));

    // first minimum of the walk over 1..n, and of the bridge over 0..n-1
    std::int64_t w = 0, wbest = 0;
    std::size_t jstar = 0;
    for (std::size_t j = 0; j < n; ++j) {
        w += c.inc[j];
        if (j == 0 || w < wbest) {
            wbest = w;
            jstar = j + 1;
        }
    }
    std::vector<std::uint32_t> counts(n);
    for (std::size_t i = 0; i < n; ++i)
        counts[i] = static_cast<std::uint32_t>(c.inc[(jstar + i) % n] + 1);
    const std::size_t kstar =
        static_cast<std::size_t>(std::min_element(c.g.begin(), c.g.begin() + static_cast<std::ptrdiff_t>(n)) - c.g.begin());
    PathFunction e;
    e.samples.resize(n + 1);
    const double s = 1 / std::sqrt(double(n));
    for (std::size_t k = 0; k < n; ++k)
        e.samples[k] = std::max(0.0, c.g[(kstar + k) % n] - c.g[kstar]) * s;
    e.samples[n] = 0;
    return {PlaneTree::from_child_counts(std::move(counts)), std::move(e)};
}

double gh_distortion(const std::vector<std::vector<double>>& tree_metric, const std::vector<double>& times,
                     const PseudoMetricExcursion& e, const std::vector<std::pair<std::size_t, std::size_t>>& corr)
{
    const std::size_t m = tree_metric.size(), k = times.size();
    std::vector<char> seen_a(m, 0), seen_b(k, 0);
    for (auto [i, j] : corr) {
        if (i >= m || j >= k)
            throw CoverageError("correspondence index out of range");
        seen_a[i] = seen_b[j] = 1;
    }
    if (std::find(seen_a.begin(), seen_a.end(), 0) != seen_a.end() ||
        std::find(seen_b.begin(), seen_b.end(), 0) != seen_b.end())
        throw CoverageError("correspondence does not cover both spaces");
    double d = 0;
    for (std::size_t x = 0; x < corr.size(); ++x)
        for (std::size_t y = x + 1; y < corr.size(); ++y) {
            const double a = tree_metric[corr[x].first][corr[y].first];
            const double b = e.distance(times[corr[x].second], times[corr[y].second]);
            d = std::max(d, std::abs(a - b));
        }
    return d;
}

double tree_excursion_distortion(const PlaneTree& t, double sigma, const PseudoMetricExcursion& e, std::size_t k,
                                 Rng& rng)
{
    const std::size_t n = t.size();
    if (n < 3 || k < 2)
        throw DomainError("distortion needs a nontrivial tree and at least two times");
    std::vector<double> depth(n);
    for (std::uint32_t v = 0; v < n; ++v)
        depth[v] = t.depth(v);
    const SparseMin rmq(depth);
    std::vector<double> times(k);
    for (double& s : times)
        s = rng.uniform();
    std::sort(times.begin(), times.end());
    const double twop = double(n - 1);
    std::vector<std::size_t> vert(k);
    for (std::size_t i = 0; i < k; ++i)
        vert[i] = std::min(n - 1, static_cast<std::size_t>(std::floor(twop * times[i])));
    const double scale = sigma / (2 * std::sqrt(twop));
    std::vector<std::vector<double>> D(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const std::size_t a = std::min(vert[i], vert[j]), b = std::max(vert[i], vert[j]);
            double dist = 0;
            if (a != b) {
                const double lca = rmq.min(a + 1, b) - 1;
                dist = depth[a] + depth[b] - 2 * lca;
            }
            D[i][j] = D[j][i] = scale * dist;
        }
    std::vector<std::pair<std::size_t, std::size_t>> corr(k);
    for (std::size_t i = 0; i < k; ++i)
        corr[i] = {i, i};
    return gh_distortion(D, times, e, corr);
}

} // namespace slqg
