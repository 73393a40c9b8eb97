#include "slqg/cascade.hpp"

#include "slqg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

namespace slqg {

Rho1Pool::Rho1Pool(std::vector<StableExcursion> excursions) : ex_(std::move(excursions))
{
    const std::size_t n = ex_.size();
    if (n == 0)
        throw DomainError("empty excursion pool");
    std::vector<double> p(n);
    RunningStats ws;
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = ex_[i].weight;
        total += p[i];
        ws.add(p[i]);
        if (ex_[i].censored)
            ++censored_;
    }
    norm_rel_sigma_ = std::sqrt(ws.variance() / static_cast<double>(n)) / ws.mean();
    threshold_.assign(n, 1.0);
    alias_.resize(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] *= static_cast<double>(n) / total;
        alias_[i] = static_cast<std::uint32_t>(i);
        (p[i] < 1 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const std::uint32_t s = small.back();
        small.pop_back();
        const std::uint32_t l = large.back();
        threshold_[s] = p[s];
        alias_[s] = l;
        p[l] -= 1 - p[s];
        if (p[l] < 1) {
            large.pop_back();
            small.push_back(l);
        }
    }
}

std::shared_ptr<const Rho1Pool> Rho1Pool::sample(const StableOptions& opt, std::size_t n_raw, std::uint64_t seed,
                                                 unsigned threads)
{
    return std::make_shared<const Rho1Pool>(sample_rho1(opt, n_raw, seed, threads));
}

std::size_t Rho1Pool::draw(Rng& rng) const
{
    const std::size_t i = rng.below(ex_.size());
    return rng.uniform() < threshold_[i] ? i : alias_[i];
}

std::shared_ptr<const Rho1Pool> default_pool(double eps, double delta, std::uint64_t seed, std::size_t n_raw)
{
    StableOptions o;
    o.eps = eps;
    o.delta = delta;
    return Rho1Pool::sample(o, n_raw, seed);
}

namespace {

struct Child {
    double x;
    int y;
    double log_inc;
    std::uint32_t rank;
};

// Rademacher draws for the children of one node, replayable from the seed
void draw_children(const StableExcursion& e, double beta, std::uint64_t seed, std::vector<Child>& out)
{
    out.clear();
    Rng r(seed);
    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < e.jumps.size(); ++j) {
        if (j % 64 == 0)
            bits = r();
        const int y = ((bits >> (j % 64)) & 1) ? 1 : -1;
        out.push_back({e.jumps[j], y, std::log(e.jumps[j]) + beta * y, static_cast<std::uint32_t>(j + 1)});
    }
}

void check_depth(const CascadeTree& t, int n)
{
    if (n < 0 || n > t.depth)
        throw DomainError("generation " + std::to_string(n) + " outside tree depth " + std::to_string(t.depth));
}

void check_theta(double theta)
{
    if (!(theta > 1.5 && theta < 2.5))
        throw DomainError("theta must lie in (3/2, 5/2)");
}

} // namespace

UlamWord CascadeTree::word(std::uint32_t i) const
{
    UlamWord w;
    while (nodes[i].parent != CascadeNode::npos) {
        w.push_back(nodes[i].rank);
        i = nodes[i].parent;
    }
    std::reverse(w.begin(), w.end());
    return w;
}

double CascadeTree::unresolved_children_moment(std::uint32_t i, double theta) const
{
    const CascadeNode& nd = nodes[i];
    if (nd.source == CascadeNode::npos)
        throw DomainError("node has not been expanded");
    const StableExcursion& e = (*pool)[nd.source];
    double s = std::cosh(beta * theta) * e.unresolved_moment(theta);
    if (nd.dropped > 0) {
        std::vector<Child> ch;
        draw_children(e, beta, tilt_seed[i], ch);
        double all = 0, kept = 0;
        for (const Child& c : ch)
            all += std::exp(theta * c.log_inc);
        for (std::uint32_t k = 0; k < nd.child_count; ++k) {
            const CascadeNode& c = nodes[nd.first_child + k];
            kept += std::exp(theta * (std::log(c.x) + beta * c.y));
        }
        s += std::max(0.0, all - kept);
    }
    return s;
}

bool CascadeTree::multiplicatively_consistent() const
{
    if (nodes.empty() || nodes[0].Z != 1 || nodes[0].ZQ != 1)
        return false;
    const double up = std::exp(beta), down = std::exp(-beta);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const CascadeNode& c = nodes[i];
        const CascadeNode& p = nodes[c.parent];
        if (c.y != 1 && c.y != -1)
            return false;
        if (c.Z != p.Z * c.x)
            return false;
        if (c.ZQ != p.ZQ * c.x * (c.y > 0 ? up : down))
            return false;
        if (c.generation != p.generation + 1)
            return false;
    }
    return true;
}

void CascadeTree::write_jsonl(std::ostream& os, long tree_index) const
{
    for (std::uint32_t i = 0; i < nodes.size(); ++i) {
        const CascadeNode& n = nodes[i];
        nlohmann::json j;
        if (tree_index >= 0)
            j["tree"] = tree_index;
        j["u"] = word_to_string(word(i));
        j["Z"] = n.Z;
        j["ZQ"] = n.ZQ;
        j["Y"] = n.y;
        os << j.dump() << '\n';
    }
}

CascadeTree sample_cascade(std::shared_ptr<const Rho1Pool> pool, double Q, int depth, std::size_t children_cap,
                           Rng& rng)
{
    if (depth < 1)
        throw DomainError("depth must be at least 1");
    if (children_cap < 1)
        throw DomainError("children_cap must be at least 1");
    if (!pool)
        throw DomainError("missing excursion pool");
    CascadeTree t;
    t.Q = Q;
    t.beta = beta_q(Q);
    t.depth = depth;
    t.children_cap = children_cap;
    t.pool = pool;
    t.nodes.push_back(CascadeNode{});
    t.tilt_seed.push_back(0);
    t.gen_begin = {0, 1};
    const double up = std::exp(t.beta), down = std::exp(-t.beta);
    std::vector<Child> ch;
    for (int g = 0; g < depth; ++g) {
        const std::uint32_t b = t.gen_begin[g], e = t.gen_begin[g + 1];
        for (std::uint32_t i = b; i < e; ++i) {
            const std::uint32_t src = static_cast<std::uint32_t>(pool->draw(rng));
            const std::uint64_t seed = rng();
            draw_children((*pool)[src], t.beta, seed, ch);
            std::uint32_t dropped = 0;
            if (ch.size() > children_cap) {
                // keep the largest Z_Q increments, then restore jump order
                std::nth_element(ch.begin(), ch.begin() + static_cast<std::ptrdiff_t>(children_cap), ch.end(),
                                 [](const Child& a, const Child& c) { return a.log_inc > c.log_inc; });
                dropped = static_cast<std::uint32_t>(ch.size() - children_cap);
                ch.resize(children_cap);
                std::sort(ch.begin(), ch.end(), [](const Child& a, const Child& c) { return a.rank < c.rank; });
            }
            CascadeNode& parent = t.nodes[i];
            t.tilt_seed[i] = seed;
            parent.source = src;
            parent.dropped = dropped;
            parent.first_child = static_cast<std::uint32_t>(t.nodes.size());
            parent.child_count = static_cast<std::uint32_t>(ch.size());
            const double pZ = parent.Z, pZQ = parent.ZQ, plog = parent.log_ZQ;
            for (const Child& c : ch) {
                CascadeNode n;
                n.parent = i;
                n.rank = c.rank;
                n.generation = static_cast<std::uint32_t>(g + 1);
                n.x = c.x;
                n.y = c.y;
                n.Z = pZ * c.x;
                n.ZQ = pZQ * c.x * (c.y > 0 ? up : down);
                n.log_ZQ = plog + c.log_inc;
                t.nodes.push_back(n);
                t.tilt_seed.push_back(0);
            }
        }
        t.gen_begin.push_back(static_cast<std::uint32_t>(t.nodes.size()));
    }
    return t;
}

CascadeTree sample_cascade(double Q, int depth, std::size_t children_cap, double eps, double delta, Rng& rng)
{
    return sample_cascade(default_pool(eps, delta, rng()), Q, depth, children_cap, rng);
}

std::size_t count_exceedances(const CascadeTree& t, int n, double a, double b)
{
    check_depth(t, n);
    std::size_t c = 0;
    for (std::uint32_t i = t.gen_begin[n]; i < t.gen_begin[n + 1]; ++i)
        if (t.nodes[i].ZQ > a && t.nodes[i].ZQ < b)
            ++c;
    return c;
}

double additive_martingale(const CascadeTree& t, double theta, int n, const MartingaleOptions& opt)
{
    check_theta(theta);
    check_depth(t, n);
    const double lphi = phi(t.Q, theta).log_value;
    double s = 0;
    for (std::uint32_t i = t.gen_begin[n]; i < t.gen_begin[n + 1]; ++i)
        s += std::exp(theta * t.nodes[i].log_ZQ - n * lphi);
    if (opt.compensate) {
        for (std::uint32_t i = 0; i < t.gen_begin[n]; ++i) {
            const double r = t.unresolved_children_moment(i, theta);
            if (r > 0)
                s += std::exp(theta * t.nodes[i].log_ZQ + std::log(r) - (t.nodes[i].generation + 1) * lphi);
        }
    }
    return s;
}

double restricted_additive_martingale(const CascadeTree& t, double theta, int n, std::uint32_t i)
{
    check_theta(theta);
    check_depth(t, n);
    if (static_cast<int>(t.nodes[i].generation) > n)
        throw DomainError("node lies below generation n");
    const double lphi = phi(t.Q, theta).log_value;
    std::vector<std::uint32_t> frontier{i}, next;
    for (int g = static_cast<int>(t.nodes[i].generation); g < n; ++g) {
        next.clear();
        for (std::uint32_t v : frontier)
            for (std::uint32_t k = 0; k < t.nodes[v].child_count; ++k)
                next.push_back(t.nodes[v].first_child + k);
        frontier.swap(next);
    }
    double s = 0;
    for (std::uint32_t v : frontier)
        s += std::exp(theta * t.nodes[v].log_ZQ - n * lphi);
    return s;
}

double derivative_martingale(const CascadeTree& t, int n, const BigginsProfile& prof)
{
    check_depth(t, n);
    double s = 0;
    for (std::uint32_t i = t.gen_begin[n]; i < t.gen_begin[n + 1]; ++i) {
        const double l = t.nodes[i].log_ZQ;
        s += std::exp(prof.theta_star * l - n * prof.log_phi_star) * (n * prof.dlog_phi_star - l);
    }
    return s;
}

MeasureWeights cascade_measure_weights(const CascadeTree& t, MeasureMode mode, double theta, int n_trunc)
{
    check_depth(t, n_trunc);
    MeasureWeights mw;
    mw.n_trunc = n_trunc;
    mw.w.assign(t.nodes.size(), 0.0);
    const BigginsProfile prof = biggins_profile(t.Q);
    double th, lphi, dlog = 0;
    if (mode == MeasureMode::theta) {
        check_theta(theta);
        th = theta;
        lphi = phi(t.Q, theta).log_value;
        if (theta >= prof.theta_star) {
            mw.warning = true;
            mw.message = "theta is at or above theta*; the limit measure degenerates";
        }
    } else {
        th = prof.theta_star;
        lphi = prof.log_phi_star;
        dlog = prof.dlog_phi_star;
    }
    for (std::uint32_t i = t.gen_begin[n_trunc]; i < t.gen_begin[n_trunc + 1]; ++i) {
        const double l = t.nodes[i].log_ZQ;
        double w = std::exp(th * l - n_trunc * lphi);
        if (mode == MeasureMode::star)
            w *= n_trunc * dlog - l;
        mw.w[i] = w;
    }
    for (int g = n_trunc - 1; g >= 0; --g) {
        for (std::uint32_t i = t.gen_begin[g]; i < t.gen_begin[g + 1]; ++i) {
            double s = 0;
            for (std::uint32_t k = 0; k < t.nodes[i].child_count; ++k)
                s += mw.w[t.nodes[i].first_child + k];
            mw.w[i] = s;
        }
    }
    if (mode == MeasureMode::star) {
        const bool neg = std::any_of(mw.w.begin(), mw.w.end(), [](double v) { return v < 0; });
        if (neg) {
            mw.warning = true;
            mw.message = "derivative weights are negative at some nodes for this truncation";
        }
    }
    return mw;
}

bool weights_additive(const CascadeTree& t, const MeasureWeights& mw, double rel_tol)
{
    for (int g = 0; g < mw.n_trunc; ++g) {
        for (std::uint32_t i = t.gen_begin[g]; i < t.gen_begin[g + 1]; ++i) {
            double s = 0, a = 0;
            for (std::uint32_t k = 0; k < t.nodes[i].child_count; ++k) {
                s += mw.w[t.nodes[i].first_child + k];
                a += std::abs(mw.w[t.nodes[i].first_child + k]);
            }
            if (std::abs(s - mw.w[i]) > rel_tol * a)
                return false;
        }
    }
    return true;
}

double log_max_zq(const CascadeTree& t, int n)
{
    check_depth(t, n);
    double m = -INFINITY;
    for (std::uint32_t i = t.gen_begin[n]; i < t.gen_begin[n + 1]; ++i)
        m = std::max(m, t.nodes[i].log_ZQ);
    return m;
}

Estimate first_generation_moment(const std::vector<StableExcursion>& ex, double Q, double theta, Rng& rng)
{
    check_theta(theta);
    const double beta = beta_q(Q);
    const double ch = std::cosh(beta * theta);
    std::vector<double> w, v;
    w.reserve(ex.size());
    v.reserve(ex.size());
    for (const StableExcursion& e : ex) {
        double s = ch * e.unresolved_moment(theta);
        std::uint64_t bits = 0;
        for (std::size_t j = 0; j < e.jumps.size(); ++j) {
            if (j % 64 == 0)
                bits = rng();
            const int y = ((bits >> (j % 64)) & 1) ? 1 : -1;
            s += std::exp(theta * (std::log(e.jumps[j]) + beta * y));
        }
        w.push_back(e.weight);
        v.push_back(s);
    }
    return ratio_estimate(w, v);
}

} // namespace slqg
