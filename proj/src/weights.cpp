#include "slqg/weights.hpp"

#include "slqg/errors.hpp"
#include "slqg/polylog.hpp"
#include "slqg/rings.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace slqg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

double log_central_binom(std::uint64_t k)
{
    const double x = static_cast<double>(k);
    return std::lgamma(2 * x) - std::lgamma(x) - std::lgamma(x + 1);
}

WeightCoefficients WeightCoefficients::from_values(const std::vector<double>& q)
{
    WeightCoefficients w;
    w.log_q.assign(q.size(), -kInf);
    for (std::size_t k = 1; k < q.size(); ++k) {
        if (q[k] < 0)
            throw DomainError("negative face weight at k = " + std::to_string(k));
        w.log_q[k] = q[k] > 0 ? std::log(q[k]) : -kInf;
    }
    return w;
}

double WeightCoefficients::log_q_at(std::uint64_t k) const
{
    if (k == 0)
        return -kInf;
    if (tail && k >= tail->k_start) {
        if (tail->c <= 0)
            return -kInf;
        const double x = static_cast<double>(k);
        return std::log(tail->c) - tail->s * std::log(x) - (x - 1) * std::log(tail->R) - log_central_binom(k);
    }
    return k < log_q.size() ? log_q[k] : -kInf;
}

double WeightCoefficients::q(std::uint64_t k) const { return std::exp(log_q_at(k)); }

double WeightCoefficients::radius() const { return tail && tail->c > 0 ? tail->R : kInf; }

namespace {

std::uint64_t head_end(const WeightCoefficients& w)
{
    std::uint64_t n = w.log_q.size();
    if (w.tail && w.tail->k_start < n)
        n = w.tail->k_start;
    return n;
}

// sum over the explicit head of k^j a_k x^(k - 1 + e) where a_k = binom q_k
double head_sum(const WeightCoefficients& w, double x, int j, int e)
{
    const std::uint64_t n = head_end(w);
    const double lx = std::log(x);
    double s = 0;
    for (std::uint64_t k = 1; k < n; ++k) {
        if (w.log_q[k] == -kInf)
            continue;
        const double kk = static_cast<double>(k);
        const double pw = (kk - 1 + e) == 0 ? 0.0 : (kk - 1 + e) * lx;
        s += std::pow(kk, j) * std::exp(log_central_binom(k) + w.log_q[k] + pw);
    }
    return s;
}

} // namespace

double WeightCoefficients::f(double x) const
{
    if (x > radius())
        return kInf;
    double s = head_sum(*this, x, 0, 0);
    if (tail && tail->c > 0 && x > 0)
        s += tail->c / (x / tail->R) * polylog_tail(tail->s, x / tail->R, tail->k_start);
    return s;
}

double WeightCoefficients::g(double x) const
{
    if (x > radius())
        return kInf;
    double s = head_sum(*this, x, 0, 1);
    if (tail && tail->c > 0 && x > 0)
        s += tail->c * tail->R * polylog_tail(tail->s, x / tail->R, tail->k_start);
    return 1 - x + s;
}

double WeightCoefficients::g_prime(double x) const
{
    if (x > radius())
        return kInf;
    double s = head_sum(*this, x, 1, 0);
    if (tail && tail->c > 0 && x > 0)
        s += tail->c / (x / tail->R) * polylog_tail(tail->s - 1, x / tail->R, tail->k_start);
    return -1 + s;
}

double solve_partition_point(const WeightCoefficients& q, double tol)
{
    // g is convex with g(0) = 1, so its first zero is either a transversal
    // crossing or a tangency at the minimizer
    const double R = q.radius();
    double U;
    if (std::isfinite(R)) {
        U = R;
    } else {
        U = 1;
        while (q.g(U) > 0 && q.g_prime(U) < 0) {
            U *= 2;
            if (U > 1e15)
                throw AdmissibilityError("no partition point: g stays positive and decreasing");
        }
    }
    auto bisect_root = [&](double lo, double hi) {
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            (q.g(mid) > 0 ? lo : hi) = mid;
        }
        return std::abs(q.g(lo)) <= std::abs(q.g(hi)) ? lo : hi;
    };
    if (q.g(U) < 0)
        return bisect_root(0, U);
    double xm = U;
    if (q.g_prime(U) > 0) {
        double lo = 0, hi = U;
        if (q.g_prime(0) >= 0)
            hi = 0;
        for (int it = 0; it < 400 && hi > 0; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            (q.g_prime(mid) < 0 ? lo : hi) = mid;
        }
        xm = hi;
    }
    const double gm = q.g(xm);
    if (gm < -tol)
        return bisect_root(0, xm);
    if (gm <= tol)
        return xm;
    throw AdmissibilityError("no partition point: min g = " + std::to_string(gm) + " > 0 on [0, " +
                             std::to_string(U) + "]");
}

const char* to_string(Criticality c)
{
    switch (c) {
    case Criticality::subcritical:
        return "subcritical";
    case Criticality::generic_critical:
        return "generic-critical";
    case Criticality::non_generic_critical:
        return "non-generic-critical";
    }
    return "?";
}

WeightSequence::WeightSequence(WeightCoefficients q, double tol) : q_(std::move(q))
{
    if (q_.tail && (q_.tail->k_start < 2 || !(q_.tail->R > 0) || !(q_.tail->s > 2)))
        throw DomainError("weight tail needs k_start >= 2, R > 0 and s > 2");
    Z_ = solve_partition_point(q_, tol);
    mean_ = q_.g_prime(Z_) + 1;
    if (std::abs(mean_ - 1) <= 1e-8) {
        const bool power_tail = q_.tail && q_.tail->c > 0 && Z_ >= q_.tail->R * (1 - 1e-12);
        if (power_tail && q_.tail->s <= 3) {
            cls_ = Criticality::non_generic_critical;
            type_a_ = q_.tail->s - 0.5;
        } else {
            cls_ = Criticality::generic_critical;
        }
    } else {
        cls_ = Criticality::subcritical;
    }
}

nlohmann::json WeightSequence::to_json(std::uint64_t explicit_terms) const
{
    nlohmann::json j;
    auto arr = nlohmann::json::array();
    const std::uint64_t n = std::max<std::uint64_t>(q_.log_q.size(), q_.tail ? explicit_terms : 0);
    for (std::uint64_t k = 1; k < n; ++k) {
        const double lq = q_.log_q_at(k);
        if (lq > -kInf)
            arr.push_back({k, std::exp(lq)});
    }
    j["q"] = arr;
    j["Z"] = Z_;
    j["classification"] = to_string(cls_);
    j["mean"] = mean_;
    if (q_.tail)
        j["tail"] = {{"c", q_.tail->c}, {"s", q_.tail->s}, {"k_start", q_.tail->k_start}, {"R", q_.tail->R}};
    return j;
}

OffspringDistribution mu_from_weights(const WeightSequence& ws)
{
    const auto& q = ws.coefficients();
    const double Z = ws.Z();
    const double lz = std::log(Z);
    std::vector<double> head;
    const std::uint64_t n = head_end(q);
    head.reserve(n);
    head.push_back(1 / Z);
    for (std::uint64_t k = 1; k < n; ++k)
        head.push_back(q.log_q[k] == -kInf ? 0.0
                                           : std::exp(q.log_q[k] + log_central_binom(k) +
                                                      static_cast<double>(k - 1) * lz));
    std::optional<PowerTail> tail;
    if (q.tail && q.tail->c > 0) {
        head.resize(q.tail->k_start, 0.0);
        if (Z >= q.tail->R * (1 - 1e-12)) {
            tail = PowerTail{q.tail->c, q.tail->s, q.tail->k_start};
        } else {
            // geometric damping (Z/R)^(k-1): expand explicitly until negligible
            const double lr = std::log(Z / q.tail->R);
            for (std::uint64_t k = q.tail->k_start;; ++k) {
                const double x = static_cast<double>(k);
                const double lm = std::log(q.tail->c) - q.tail->s * std::log(x) + (x - 1) * lr;
                head.push_back(std::exp(lm));
                if (lm < -52 && (x - 1) * lr < -40)
                    break;
                if (head.size() > 50'000'000)
                    throw DomainError("step law tail decays too slowly to expand");
            }
        }
    }
    double total = tail ? tail->c * zeta_tail(tail->s, tail->k_start) : 0;
    for (double p : head)
        total += p;
    // the partition point is exact only to rounding; absorb the residue
    for (double& p : head)
        p /= total;
    if (tail)
        tail->c /= total;
    return OffspringDistribution(std::move(head), tail);
}

WeightSequence weights_from_mu(const OffspringDistribution& mu)
{
    const double m0 = mu.prob(0);
    if (!(m0 > 0))
        throw AdmissibilityError("mu(0) must be positive");
    const double Z = 1 / m0;
    const double lz = std::log(Z);
    WeightCoefficients w;
    const auto& h = mu.head();
    w.log_q.assign(h.size(), -kInf);
    for (std::uint64_t k = 1; k < h.size(); ++k)
        if (h[k] > 0)
            w.log_q[k] = std::log(h[k]) - static_cast<double>(k - 1) * lz - log_central_binom(k);
    if (mu.tail() && mu.tail()->c > 0)
        w.tail = WeightTail{mu.tail()->c, mu.tail()->s, mu.tail()->k_start, Z};
    return WeightSequence(std::move(w));
}

WeightSequence tilt_subcritical(const WeightSequence& ws, const FTable& F, const RingLaw& ring, const TiltOptions& opt)
{
    F.validate(true);
    const auto& q = ws.coefficients();
    auto asym = ring.tilt_asymptote(F);
    double winf = std::isnan(asym.value) ? 0.0 : asym.value;
    std::uint64_t K0 = asym.K0;
    if (K0 > opt.k_limit)
        throw CoverageError("tilt range " + std::to_string(K0) + " exceeds the configured limit");

    std::uint64_t kmax;
    if (winf == 0) {
        kmax = K0;
        if (opt.k_max > 0) {
            if (opt.k_max > K0)
                throw CoverageError("F table up to p = " + std::to_string(F.p_max()) +
                                    " resolves faces only up to k = " + std::to_string(K0) + ", requested " +
                                    std::to_string(opt.k_max));
            kmax = opt.k_max;
        }
        if (!q.tail)
            kmax = std::min<std::uint64_t>(kmax, q.log_q.empty() ? 0 : q.log_q.size() - 1);
    } else {
        kmax = std::max<std::uint64_t>(K0, q.log_q.empty() ? 0 : q.log_q.size() - 1);
        if (q.tail)
            kmax = std::max<std::uint64_t>(kmax, q.tail->k_start - 1);
        if (opt.k_max > 0) {
            kmax = std::min(kmax, opt.k_max);
            winf = 0;
        }
    }

    WeightCoefficients out;
    out.log_q.assign(kmax + 1, -kInf);
    for (std::uint64_t k = 1; k <= kmax; ++k) {
        const double lq = q.log_q_at(k);
        if (lq == -kInf)
            continue;
        const double w = ring.tilted_expectation(k, F);
        if (w > 0)
            out.log_q[k] = lq + std::log(w);
    }
    if (winf > 0 && q.tail && q.tail->c > 0) {
        WeightTail t = *q.tail;
        t.c *= winf;
        t.k_start = std::max<std::uint64_t>(t.k_start, kmax + 1);
        out.tail = t;
    }
    return WeightSequence(std::move(out));
}

} // namespace slqg
