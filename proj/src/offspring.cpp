#include "slqg/offspring.hpp"

#include "slqg/errors.hpp"

#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <limits>
#include <string>

namespace slqg {

double zeta_tail(double s, std::uint64_t k0)
{
    if (!(s > 1))
        return std::numeric_limits<double>::infinity();
    if (k0 <= 1)
        return boost::math::zeta(s);
    // direct subtraction loses digits when the tail starts far out; use
    // Euler-Maclaurin from k0 in that case
    if (k0 <= 64) {
        double part = 0;
        for (std::uint64_t k = 1; k < k0; ++k)
            part += std::pow(static_cast<double>(k), -s);
        return boost::math::zeta(s) - part;
    }
    const double n = static_cast<double>(k0);
    return std::pow(n, 1 - s) / (s - 1) + 0.5 * std::pow(n, -s) + s / 12 * std::pow(n, -s - 1) -
           s * (s + 1) * (s + 2) / 720 * std::pow(n, -s - 3);
}

OffspringDistribution::OffspringDistribution(std::vector<double> head, std::optional<PowerTail> tail)
    : head_(std::move(head)), tail_(tail)
{
    while (!head_.empty() && head_.back() == 0 && !tail_)
        head_.pop_back();
    double total = 0, m1 = 0, m2 = 0;
    for (std::size_t k = 0; k < head_.size(); ++k) {
        const double p = head_[k];
        if (!(p >= 0) || !std::isfinite(p))
            throw DomainError("negative or non-finite mass at k = " + std::to_string(k));
        total += p;
        m1 += static_cast<double>(k) * p;
        m2 += static_cast<double>(k) * static_cast<double>(k) * p;
    }
    if (tail_) {
        if (!(tail_->c >= 0) || !(tail_->s > 1) || tail_->k_start < 2)
            throw DomainError("power tail needs c >= 0, s > 1 and k_start >= 2");
        if (head_.size() > tail_->k_start)
            throw DomainError("head overlaps the power tail");
        head_.resize(tail_->k_start, 0.0);
        tail_mass_ = tail_->c * zeta_tail(tail_->s, tail_->k_start);
        total += tail_mass_;
        m1 += tail_->c * zeta_tail(tail_->s - 1, tail_->k_start);
        const double t2 = zeta_tail(tail_->s - 2, tail_->k_start);
        m2 = tail_->c > 0 && !std::isfinite(t2) ? std::numeric_limits<double>::infinity() : m2 + tail_->c * t2;
    }
    if (std::abs(total - 1) > 1e-12)
        throw DomainError("total mass " + std::to_string(total) + " differs from 1");
    if (head_.empty())
        throw DomainError("empty distribution");
    mean_ = m1;
    variance_ = std::isfinite(m2) ? m2 - m1 * m1 : m2;
}

OffspringDistribution OffspringDistribution::point_mass(std::uint64_t k)
{
    std::vector<double> h(k + 1, 0.0);
    h[k] = 1;
    return OffspringDistribution(std::move(h));
}

double OffspringDistribution::prob(std::uint64_t k) const
{
    if (k < head_.size())
        return head_[k];
    if (tail_ && k >= tail_->k_start)
        return tail_->c * std::pow(static_cast<double>(k), -tail_->s);
    return 0;
}

std::uint64_t OffspringDistribution::support_max() const
{
    if (tail_)
        throw DomainError("support is infinite");
    return head_.size() - 1;
}

std::optional<double> OffspringDistribution::tail_exponent() const
{
    if (tail_ && tail_->c > 0)
        return tail_->s;
    return std::nullopt;
}

nlohmann::json OffspringDistribution::to_json(std::uint64_t explicit_terms) const
{
    nlohmann::json j;
    auto probs = nlohmann::json::array();
    const std::uint64_t n = tail_ ? std::max<std::uint64_t>(head_.size(), explicit_terms) : head_.size();
    for (std::uint64_t k = 0; k < n; ++k)
        if (prob(k) > 0)
            probs.push_back({k, prob(k)});
    j["probs"] = probs;
    j["mean"] = mean_;
    if (std::isfinite(variance_))
        j["variance"] = variance_;
    else
        j["variance"] = "inf";
    if (tail_) {
        j["tail"] = {{"c", tail_->c}, {"s", tail_->s}, {"k_start", tail_->k_start}};
        j["probs_truncated_at"] = n;
    }
    return j;
}

double default_c_max() { return 1.0 / (boost::math::zeta(1.5) - 1.0); }

OffspringDistribution make_default_critical_mu(double c_tail)
{
    const double cmax = default_c_max();
    if (!(c_tail > 0) || c_tail > cmax)
        throw DomainError("c_tail must lie in (0, " + std::to_string(cmax) + "], got " + std::to_string(c_tail));
    const double z32 = boost::math::zeta(1.5) - 1.0;
    const double z52 = boost::math::zeta(2.5) - 1.0;
    const double mu1 = std::max(0.0, 1.0 - c_tail * z32);
    const double mu0 = 1.0 - mu1 - c_tail * z52;
    return OffspringDistribution({mu0, mu1}, PowerTail{c_tail, 2.5, 2});
}

OffspringDistribution size_bias(const OffspringDistribution& nu)
{
    const double m = nu.mean();
    if (!(m > 0))
        throw DomainError("size bias of a distribution with zero mean");
    if (!std::isfinite(m))
        throw DomainError("size bias needs a finite mean");
    std::vector<double> h(nu.head().size(), 0.0);
    for (std::size_t k = 1; k < h.size(); ++k)
        h[k] = static_cast<double>(k) * nu.head()[k] / m;
    std::optional<PowerTail> t;
    if (nu.tail())
        t = PowerTail{nu.tail()->c / m, nu.tail()->s - 1, nu.tail()->k_start};
    // renormalize away rounding so the mass check is about the input, not the arithmetic
    double total = t ? t->c * zeta_tail(t->s, t->k_start) : 0;
    for (double x : h)
        total += x;
    for (double& x : h)
        x /= total;
    if (t)
        t->c /= total;
    return OffspringDistribution(std::move(h), t);
}

OffspringDistribution make_geometric(double a)
{
    if (!(a > 0 && a < 1))
        throw DomainError("geometric parameter must lie in (0, 1)");
    std::vector<double> h;
    double p = 1 - a;
    while (p > 1e-18) {
        h.push_back(p);
        p *= a;
    }
    double total = 0;
    for (double x : h)
        total += x;
    for (double& x : h)
        x /= total;
    return OffspringDistribution(std::move(h));
}

} // namespace slqg
