#include "slqg/trees.hpp"

#include "slqg/errors.hpp"
#include "slqg/parallel.hpp"
#include "slqg/stats.hpp"
#include "slqg/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <boost/random/binomial_distribution.hpp>

namespace slqg {

PlaneTree PlaneTree::from_child_counts(std::vector<std::uint32_t> counts)
{
    const std::size_t n = counts.size();
    if (n == 0)
        throw DomainError("a tree has at least one vertex");
    PlaneTree t;
    t.counts_ = std::move(counts);
    t.offset_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v)
        t.offset_[v + 1] = t.offset_[v] + t.counts_[v];
    if (t.offset_[n] != n - 1)
        throw DomainError("child counts do not sum to n - 1");
    t.children_.assign(n - 1, 0);
    t.parent_.assign(n, 0);
    t.depth_.assign(n, 0);
    // (vertex, children still to attach)
    std::vector<std::pair<std::uint32_t, std::uint32_t>> stack;
    std::vector<std::uint32_t> filled(n, 0);
    for (std::uint32_t v = 0; v < n; ++v) {
        if (v > 0) {
            if (stack.empty())
                throw DomainError("child counts close the tree early");
            auto& top = stack.back();
            const std::uint32_t p = top.first;
            t.children_[t.offset_[p] + filled[p]++] = v;
            t.parent_[v] = p;
            t.depth_[v] = t.depth_[p] + 1;
            if (--top.second == 0)
                stack.pop_back();
        }
        if (t.counts_[v] > 0)
            stack.emplace_back(v, t.counts_[v]);
    }
    if (!stack.empty())
        throw DomainError("child counts leave open slots");
    return t;
}

PlaneTree PlaneTree::from_lukasiewicz(const std::vector<std::int64_t>& path)
{
    if (path.size() < 2 || path.front() != 0 || path.back() != -1)
        throw DomainError("Lukasiewicz path must run from 0 to -1");
    std::vector<std::uint32_t> c(path.size() - 1);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const std::int64_t d = path[i + 1] - path[i] + 1;
        if (d < 0)
            throw DomainError("Lukasiewicz steps must be at least -1");
        if (i + 1 < path.size() - 1 && path[i + 1] < 0)
            throw DomainError("Lukasiewicz path hits -1 early");
        c[i] = static_cast<std::uint32_t>(d);
    }
    return from_child_counts(std::move(c));
}

PlaneTree PlaneTree::from_newick(const std::string& s)
{
    std::vector<std::uint32_t> counts{0};
    std::vector<std::uint32_t> stack;
    std::uint32_t cur = 0;
    std::size_t pos = 0;
    auto peek = [&]() -> char { return pos < s.size() ? s[pos] : '\0'; };
    auto fresh = [&] {
        counts.push_back(0);
        return static_cast<std::uint32_t>(counts.size() - 1);
    };
    bool at_start = true;
    for (;;) {
        if (at_start) {
            if (peek() == '(') {
                ++pos;
                stack.push_back(cur);
                counts[cur]++;
                cur = fresh();
                continue;
            }
            at_start = false;
            continue;
        }
        if (stack.empty()) {
            if (peek() != ';' || pos + 1 != s.size())
                throw DomainError("malformed Newick string");
            break;
        }
        if (peek() == ',') {
            ++pos;
            counts[stack.back()]++;
            cur = fresh();
            at_start = true;
        } else if (peek() == ')') {
            ++pos;
            cur = stack.back();
            stack.pop_back();
        } else {
            throw DomainError("malformed Newick string");
        }
    }
    return from_child_counts(std::move(counts));
}

std::uint32_t PlaneTree::height() const { return *std::max_element(depth_.begin(), depth_.end()); }

std::size_t PlaneTree::leaf_count() const
{
    return static_cast<std::size_t>(std::count(counts_.begin(), counts_.end(), 0u));
}

std::vector<std::int64_t> PlaneTree::lukasiewicz() const
{
    std::vector<std::int64_t> w(size() + 1, 0);
    for (std::size_t i = 0; i < size(); ++i)
        w[i + 1] = w[i] + static_cast<std::int64_t>(counts_[i]) - 1;
    return w;
}

std::string PlaneTree::newick() const
{
    std::string out;
    // (vertex, next child index)
    std::vector<std::pair<std::uint32_t, std::uint32_t>> st{{0, 0}};
    if (counts_[0] > 0)
        out += '(';
    while (!st.empty()) {
        auto& [v, k] = st.back();
        if (k == counts_[v]) {
            if (counts_[v] > 0)
                out += ')';
            st.pop_back();
            continue;
        }
        if (k > 0)
            out += ',';
        const std::uint32_t c = children(v)[k++];
        if (counts_[c] > 0)
            out += '(';
        st.emplace_back(c, 0);
    }
    out += ';';
    return out;
}

std::size_t Multigraph::components() const
{
    std::vector<std::uint32_t> up(vertex_count);
    std::iota(up.begin(), up.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (up[x] != x)
            x = up[x] = up[up[x]];
        return x;
    };
    std::size_t c = vertex_count;
    for (auto [a, b] : edges) {
        const auto ra = find(a), rb = find(b);
        if (ra != rb) {
            up[ra] = rb;
            --c;
        }
    }
    return c;
}

Multigraph looptree(const PlaneTree& t)
{
    Multigraph g;
    g.vertex_count = t.size();
    for (std::uint32_t v = 0; v < t.size(); ++v) {
        const auto ch = t.children(v);
        if (ch.empty())
            continue;
        g.edges.emplace_back(v, ch.front());
        for (std::size_t i = 0; i + 1 < ch.size(); ++i)
            g.edges.emplace_back(ch[i], ch[i + 1]);
        g.edges.emplace_back(ch.back(), v);
    }
    return g;
}

std::size_t ContractedLooptree::inner_faces() const
{
    return graph.edges.size() + graph.components() - graph.vertex_count;
}

ContractedLooptree contract_looptree(const PlaneTree& t)
{
    const std::size_t n = t.size();
    ContractedLooptree c;
    c.projection.assign(n, 0);
    // leaf ranks, then every vertex inherits the class of its rightmost child;
    // children come after parents in preorder, so sweep backwards
    std::uint32_t rank = 0;
    std::vector<std::uint32_t> leaf_rank(n, 0);
    for (std::uint32_t v = 0; v < n; ++v)
        if (t.child_count(v) == 0)
            leaf_rank[v] = rank++;
    for (std::uint32_t v = static_cast<std::uint32_t>(n); v-- > 0;)
        c.projection[v] = t.child_count(v) == 0 ? leaf_rank[v] : c.projection[t.children(v).back()];
    c.graph.vertex_count = rank;
    for (std::uint32_t v = 0; v < n; ++v) {
        const auto ch = t.children(v);
        if (ch.empty())
            continue;
        c.graph.edges.emplace_back(c.projection[v], c.projection[ch.front()]);
        for (std::size_t i = 0; i + 1 < ch.size(); ++i)
            c.graph.edges.emplace_back(c.projection[ch[i]], c.projection[ch[i + 1]]);
        // the rightmost-child edge is the contracted one
    }
    return c;
}

double PathFunction::value(double t) const
{
    if (samples.empty())
        throw DomainError("empty path function");
    if (samples.size() == 1)
        return samples[0];
    const double x = std::clamp(t, 0.0, 1.0) * denominator();
    const std::size_t i = std::min(static_cast<std::size_t>(x), samples.size() - 2);
    const double f = x - static_cast<double>(i);
    return samples[i] + f * (samples[i + 1] - samples[i]);
}

double PathFunction::max() const { return *std::max_element(samples.begin(), samples.end()); }

void PathFunction::write_csv(std::ostream& os) const
{
    os << "t,value\n";
    char buf[64];
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", static_cast<double>(i) / denominator(), samples[i]);
        os << buf;
    }
}

PathFunction contour_function(const PlaneTree& t)
{
    PathFunction f;
    f.samples.reserve(2 * t.size() - 1);
    f.samples.push_back(0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> st{{0, 0}};
    while (!st.empty()) {
        auto& [v, k] = st.back();
        if (k == t.child_count(v)) {
            st.pop_back();
            if (!st.empty())
                f.samples.push_back(t.depth(st.back().first));
            continue;
        }
        const std::uint32_t c = t.children(v)[k++];
        f.samples.push_back(t.depth(c));
        st.emplace_back(c, 0);
    }
    return f;
}

PathFunction height_function(const PlaneTree& t)
{
    PathFunction f;
    f.samples.resize(t.size());
    for (std::uint32_t v = 0; v < t.size(); ++v)
        f.samples[v] = t.depth(v);
    return f;
}

std::uint64_t support_period(const OffspringDistribution& nu)
{
    std::uint64_t g = 0;
    const auto& h = nu.head();
    for (std::size_t k = 1; k < h.size(); ++k)
        if (h[k] > 0)
            g = std::gcd(g, static_cast<std::uint64_t>(k));
    if (nu.tail() && nu.tail()->c > 0)
        g = 1; // consecutive tail support points
    return g;
}

namespace {

std::vector<std::uint32_t> cyclic_shift(std::vector<std::uint32_t> c)
{
    std::int64_t s = 0, best = 0;
    std::size_t jstar = 0;
    bool first = true;
    for (std::size_t j = 0; j < c.size(); ++j) {
        s += static_cast<std::int64_t>(c[j]) - 1;
        if (first || s < best) {
            best = s;
            jstar = j + 1;
            first = false;
        }
    }
    std::rotate(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(jstar % c.size()), c.end());
    return c;
}

} // namespace

PlaneTree sample_conditioned_bgw(const OffspringDistribution& nu, std::size_t n, Rng& rng, std::size_t max_attempts)
{
    if (n < 1)
        throw DomainError("tree size must be at least 1");
    if (!(nu.prob(0) > 0))
        throw DomainError("offspring law needs mass at 0");
    if (nu.mean() > 1 + 1e-9)
        throw DomainError("offspring law must be critical or subcritical");
    if (n == 1)
        return PlaneTree::from_child_counts({0});
    const std::uint64_t d = support_period(nu);
    if (d == 0 || (n - 1) % d != 0)
        throw ParityError("size " + std::to_string(n) + " is unattainable for this offspring support");
    std::vector<std::uint32_t> c;
    c.reserve(n);
    const std::uint64_t target = n - 1;
    if (nu.finite_support()) {
        // multinomial type counts by sequential binomials, accepted when they
        // sum to n - 1 children
        const auto& h = nu.head();
        const std::size_t K = nu.support_max();
        std::vector<std::uint64_t> cnt(K + 1);
        bool ok = false;
        for (std::size_t att = 0; att < max_attempts && !ok; ++att) {
            std::uint64_t remaining = n, total = 0;
            double rest = 1;
            std::fill(cnt.begin(), cnt.end(), 0);
            for (std::size_t k = 0; k <= K && remaining > 0 && total <= target; ++k) {
                if (k == K) {
                    cnt[k] = remaining;
                } else {
                    const double q = rest > 0 ? std::clamp(h[k] / rest, 0.0, 1.0) : 1.0;
                    if (q >= 1) {
                        cnt[k] = remaining;
                    } else if (q > 0) {
                        boost::random::binomial_distribution<std::int64_t> b(static_cast<std::int64_t>(remaining), q);
                        cnt[k] = static_cast<std::uint64_t>(b(rng));
                    }
                }
                remaining -= cnt[k];
                total += cnt[k] * k;
                rest -= h[k];
            }
            ok = remaining == 0 && total == target;
        }
        if (!ok)
            throw FeasibilityError("conditioned tree rejection budget exhausted");
        for (std::size_t k = 0; k <= K; ++k)
            c.insert(c.end(), cnt[k], static_cast<std::uint32_t>(k));
        for (std::size_t i = n - 1; i > 0; --i)
            std::swap(c[i], c[rng.below(i + 1)]);
    } else {
        const StepSampler draw(nu);
        bool ok = false;
        for (std::size_t att = 0; att < max_attempts && !ok; ++att) {
            c.clear();
            std::uint64_t total = 0;
            for (std::size_t i = 0; i < n && total <= target; ++i) {
                const std::uint64_t k = draw(rng);
                total += k;
                c.push_back(static_cast<std::uint32_t>(std::min<std::uint64_t>(k, UINT32_MAX)));
            }
            ok = c.size() == n && total == target;
        }
        if (!ok)
            throw FeasibilityError("conditioned tree rejection budget exhausted");
    }
    return PlaneTree::from_child_counts(cyclic_shift(std::move(c)));
}

TrunkSample sample_trunk_star(const OffspringDistribution& nu_star, std::size_t h, Rng& rng)
{
    if (h < 1)
        throw DomainError("trunk height must be at least 1");
    if (nu_star.prob(0) != 0)
        throw DomainError("size-biased law must vanish at 0");
    const StepSampler draw(nu_star);
    TrunkSample s;
    s.spine_children.resize(h);
    s.spine_rank.resize(h > 1 ? h - 1 : 0);
    for (std::size_t i = 0; i < h; ++i) {
        const std::uint64_t k = draw(rng);
        if (k > UINT32_MAX / 4)
            throw DomainError("spine offspring too large to store");
        s.spine_children[i] = static_cast<std::uint32_t>(k);
        if (i + 1 < h)
            s.spine_rank[i] = static_cast<std::uint32_t>(rng.below(k) + 1);
    }
    // preorder: v_i, its leaves left of v_{i+1}, the subtree of v_{i+1}, then
    // the leaves to its right
    std::vector<std::uint32_t> counts;
    for (std::size_t i = 0; i < h; ++i) {
        s.spine.push_back(static_cast<std::uint32_t>(counts.size()));
        counts.push_back(s.spine_children[i]);
        const std::uint32_t left = i + 1 < h ? s.spine_rank[i] - 1 : s.spine_children[i];
        counts.insert(counts.end(), left, 0u);
    }
    for (std::size_t i = h - 1; i-- > 0;)
        counts.insert(counts.end(), s.spine_children[i] - s.spine_rank[i], 0u);
    s.tree = PlaneTree::from_child_counts(std::move(counts));
    return s;
}

std::vector<double> rescaled_uniform_heights(const OffspringDistribution& nu, std::size_t p, std::size_t n_samples,
                                             std::uint64_t seed, unsigned threads)
{
    if (std::abs(nu.mean() - 1) > 1e-9)
        throw DomainError("height check needs a critical offspring law");
    if (!(nu.prob(0) > 0) || !std::isfinite(nu.variance()) || !(nu.variance() > 0))
        throw DomainError("height check needs finite positive variance and mass at 0");
    const std::size_t n = 2 * p + 1;
    const double scale = std::sqrt(nu.variance()) / std::sqrt(2.0 * static_cast<double>(n));
    std::vector<double> out(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        const PlaneTree t = sample_conditioned_bgw(nu, n, rng);
        out[i] = scale * t.depth(static_cast<std::uint32_t>(rng.below(n)));
    });
    return out;
}

double spine_height_check(const OffspringDistribution& nu, std::size_t p, std::size_t n_samples, std::uint64_t seed,
                          unsigned threads)
{
    const auto x = rescaled_uniform_heights(nu, p, n_samples, seed, threads);
    return ks_statistic(x, [](double v) { return v <= 0 ? 0.0 : -std::expm1(-v * v); });
}

} // namespace slqg
