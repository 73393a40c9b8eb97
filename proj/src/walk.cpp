#include "slqg/walk.hpp"

#include "slqg/errors.hpp"
#include "slqg/parallel.hpp"
#include "slqg/stats.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>

namespace slqg {

StepSampler::StepSampler(const OffspringDistribution& mu, std::size_t explicit_head) : mu_(mu)
{
    std::vector<double> w;
    const auto& h = mu.head();
    w.assign(h.begin(), h.end());
    double tail_mass = 0;
    if (mu.tail() && mu.tail()->c > 0) {
        const auto& t = *mu.tail();
        const std::uint64_t K = std::max<std::uint64_t>(t.k_start, explicit_head);
        w.resize(K, 0.0);
        for (std::uint64_t k = t.k_start; k < K; ++k)
            w[k] = t.c * std::pow(static_cast<double>(k), -t.s);
        tail_mass = t.c * zeta_tail(t.s, K);
        tail_s_ = t.s;
        tail_k_ = K;
    }
    if (w.size() + 1 >= UINT32_MAX)
        throw DomainError("support too large for the step sampler");
    if (tail_mass > 0) {
        tail_index_ = static_cast<std::uint32_t>(w.size());
        w.push_back(tail_mass);
    }
    n_ = w.size();
    double total = 0;
    for (double x : w)
        total += x;
    // Vose's alias construction
    std::vector<double> scaled(n_);
    for (std::size_t i = 0; i < n_; ++i)
        scaled[i] = w[i] * static_cast<double>(n_) / total;
    threshold_.assign(n_, 1.0);
    alias_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i)
        alias_[i] = static_cast<std::uint32_t>(i);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n_; ++i)
        (scaled[i] < 1 ? small : large).push_back(static_cast<std::uint32_t>(i));
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        small.pop_back();
        const auto l = large.back();
        threshold_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1;
        if (scaled[l] < 1) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (auto i : small)
        threshold_[i] = 1.0;
    for (auto i : large)
        threshold_[i] = 1.0;
}

std::uint64_t StepSampler::sample_tail(Rng& rng) const
{
    // envelope: continuous density ~ x^{-s} on [K-1, inf), k = floor(x) + 1;
    // accept with k^{-s} / int_{k-1}^{k} x^{-s} dx
    const double a = static_cast<double>(tail_k_ - 1);
    const double s = tail_s_;
    for (;;) {
        const double x = a * std::pow(rng.uniform_pos(), -1.0 / (s - 1));
        if (x > 1e18)
            continue;
        const double k = std::floor(x) + 1;
        const double acc = (s - 1) / (k * std::expm1((1 - s) * std::log1p(-1 / k)));
        if (rng.uniform() < acc)
            return static_cast<std::uint64_t>(k);
    }
}

namespace {

void require_down_steps(const StepSampler& s, std::uint64_t p)
{
    if (p < 1)
        throw DomainError("boundary half-perimeter p must be at least 1");
    if (!(s.mass_at_zero() > 0))
        throw DomainError("mu(0) must be positive for the walk to hit -p");
}

} // namespace

WalkExcursion sample_excursion(const StepSampler& s, std::uint64_t p, Rng& rng, const WalkOptions& opt)
{
    require_down_steps(s, p);
    WalkExcursion e;
    const auto target = -static_cast<std::int64_t>(p);
    std::int64_t S = 0;
    while (S > target) {
        if (e.T >= opt.step_budget) {
            e.censored = true;
            break;
        }
        const auto k = s(rng);
        const auto x = static_cast<std::int64_t>(k) - 1;
        e.steps.push_back(x);
        S += x;
        ++e.T;
        if (k == 0)
            ++e.L;
    }
    e.jump_multiset.reserve(e.steps.size());
    for (auto x : e.steps)
        e.jump_multiset.push_back(static_cast<std::uint64_t>(x + 1));
    std::sort(e.jump_multiset.begin(), e.jump_multiset.end(), std::greater<>());
    if (opt.check_invariants && !e.censored)
        validate_excursion(e, p);
    return e;
}

void validate_excursion(const WalkExcursion& e, std::uint64_t p)
{
    auto fail = [](const std::string& m) { throw std::logic_error("walk excursion invariant: " + m); };
    const auto target = -static_cast<std::int64_t>(p);
    if (e.steps.size() != e.T)
        fail("T differs from the number of steps");
    std::int64_t S = 0;
    std::uint64_t L = 0;
    for (std::size_t i = 0; i < e.steps.size(); ++i) {
        if (e.steps[i] < -1)
            fail("step below -1");
        if (S <= target)
            fail("walk reached -p before T");
        S += e.steps[i];
        if (e.steps[i] == -1)
            ++L;
    }
    if (S != target)
        fail("walk does not end at -p");
    if (L != e.L)
        fail("L does not count the -1 steps");
    if (e.L < p || e.T < p)
        fail("L or T below p");
    std::vector<std::uint64_t> m;
    for (auto x : e.steps)
        m.push_back(static_cast<std::uint64_t>(x + 1));
    std::sort(m.begin(), m.end(), std::greater<>());
    if (m != e.jump_multiset)
        fail("jump multiset is not the sorted step multiset");
}

HittingSummary sample_hitting(const StepSampler& s, std::uint64_t p, Rng& rng, std::uint64_t step_budget)
{
    require_down_steps(s, p);
    HittingSummary h;
    const auto target = -static_cast<std::int64_t>(p);
    std::int64_t S = 0;
    while (S > target) {
        if (h.T >= step_budget) {
            h.censored = true;
            return h;
        }
        const auto k = s(rng);
        S += static_cast<std::int64_t>(k) - 1;
        ++h.T;
        h.L += (k == 0);
    }
    return h;
}

std::vector<std::uint64_t> sample_boltzmann_perimeters(const StepSampler& s, std::uint64_t p, Rng& rng,
                                                       const WalkOptions& opt, BoltzmannStats* stats)
{
    require_down_steps(s, p);
    const auto target = -static_cast<std::int64_t>(p);
    std::vector<std::uint64_t> faces;
    std::uint64_t steps = 0, attempts = 0;
    for (;;) {
        ++attempts;
        const double u = rng.uniform_pos();
        const double lim = std::floor(static_cast<double>(p + 1) / u);
        // accept iff L + 1 <= (p + 1) / u
        const std::uint64_t L_cap = lim > 1e18 ? UINT64_MAX : static_cast<std::uint64_t>(lim) - 1;
        if (L_cap < p)
            throw std::logic_error("acceptance ratio (p+1)/(L+1) would exceed 1");
        faces.clear();
        std::int64_t S = 0;
        std::uint64_t L = 0;
        bool aborted = false;
        while (S > target) {
            if (++steps > opt.step_budget)
                throw BudgetExceeded("Boltzmann sampler exceeded the step budget at p = " + std::to_string(p));
            const auto k = s(rng);
            if (k == 0) {
                --S;
                if (++L > L_cap) {
                    aborted = true;
                    break;
                }
            } else {
                S += static_cast<std::int64_t>(k) - 1;
                faces.push_back(k);
            }
        }
        if (aborted)
            continue;
        if (opt.check_invariants) {
            std::int64_t sum = -static_cast<std::int64_t>(L);
            for (auto k : faces)
                sum += static_cast<std::int64_t>(k) - 1;
            if (sum != target || L < p)
                throw std::logic_error("accepted excursion violates the hitting invariants");
        }
        std::sort(faces.begin(), faces.end(), std::greater<>());
        if (stats) {
            stats->attempts += attempts;
            stats->steps += steps;
            stats->L = L;
        }
        return faces;
    }
}

InvLEstimate estimate_inv_L_mean(const StepSampler& s, std::uint64_t p, std::size_t n_samples, std::uint64_t seed,
                                 unsigned threads, std::uint64_t step_budget)
{
    if (n_samples < 1)
        throw DomainError("n_samples must be at least 1");
    std::vector<double> v(n_samples);
    std::vector<char> cens(n_samples, 0);
    parallel_for(n_samples, threads, [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        const auto h = sample_hitting(s, p, rng, step_budget);
        cens[i] = h.censored;
        v[i] = h.censored ? 0.0 : 1.0 / static_cast<double>(h.L + 1);
    });
    RunningStats st;
    InvLEstimate r;
    for (std::size_t i = 0; i < n_samples; ++i) {
        st.add(v[i]);
        r.censored += cens[i];
    }
    r.estimate = st.mean();
    r.std_error = st.std_error();
    return r;
}

} // namespace slqg
