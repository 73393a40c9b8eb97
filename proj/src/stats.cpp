#include "slqg/stats.hpp"

#include "slqg/errors.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

namespace slqg {

void RunningStats::add(double x)
{
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void RunningStats::merge(const RunningStats& o)
{
    if (o.n_ == 0)
        return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
}

double RunningStats::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningStats::std_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

Estimate ratio_estimate(const std::vector<double>& w, const std::vector<double>& x)
{
    if (w.size() != x.size() || w.empty())
        throw DomainError("ratio_estimate: weight and value arrays must be nonempty and equal length");
    const double n = static_cast<double>(w.size());
    double sw = 0, swx = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        sw += w[i];
        swx += w[i] * x[i];
    }
    const double r = swx / sw;
    const double wbar = sw / n;
    double s2 = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double e = w[i] * (x[i] - r);
        s2 += e * e;
    }
    s2 /= (n - 1 > 0 ? n - 1 : 1);
    return {r, std::sqrt(s2 / n) / wbar};
}

double binomial_std_error(double p_hat, std::size_t n)
{
    if (n == 0)
        return 0;
    return std::sqrt(std::max(0.0, p_hat * (1 - p_hat)) / static_cast<double>(n));
}

double quantile(std::vector<double> v, double q)
{
    if (v.empty())
        throw DomainError("quantile of empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double f = pos - static_cast<double>(lo);
    return v[lo] * (1 - f) + v[hi] * f;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double ks_statistic(std::vector<double> s, const std::function<double(double)>& cdf)
{
    if (s.empty())
        throw DomainError("ks_statistic of empty sample");
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double total_variation(const Histogram& a, const Histogram& b)
{
    double na = 0, nb = 0;
    for (auto& [k, c] : a)
        na += static_cast<double>(c);
    for (auto& [k, c] : b)
        nb += static_cast<double>(c);
    if (na == 0 || nb == 0)
        throw DomainError("total_variation of an empty histogram");
    Histogram keys = a;
    for (auto& [k, c] : b)
        keys[k];
    double tv = 0;
    for (auto& [k, unused] : keys) {
        auto ia = a.find(k);
        auto ib = b.find(k);
        const double pa = ia == a.end() ? 0 : static_cast<double>(ia->second) / na;
        const double pb = ib == b.end() ? 0 : static_cast<double>(ib->second) / nb;
        tv += std::abs(pa - pb);
    }
    return tv / 2;
}

double chi_square_pvalue(const std::vector<std::size_t>& observed, const std::vector<double>& expected_prob,
                         double min_expected)
{
    if (observed.size() != expected_prob.size())
        throw DomainError("chi_square_pvalue: size mismatch");
    double n = 0;
    for (auto c : observed)
        n += static_cast<double>(c);
    double stat = 0, pool_o = 0, pool_e = 0;
    int cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = expected_prob[i] * n;
        if (e < min_expected) {
            pool_o += static_cast<double>(observed[i]);
            pool_e += e;
            continue;
        }
        const double d = static_cast<double>(observed[i]) - e;
        stat += d * d / e;
        ++cells;
    }
    if (pool_e > 0) {
        const double d = pool_o - pool_e;
        stat += d * d / pool_e;
        ++cells;
    }
    if (cells < 2)
        return 1.0;
    return boost::math::gamma_q(0.5 * (cells - 1), 0.5 * stat);
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw DomainError("least_squares needs at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0)
        throw DomainError("least_squares: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        f.slope_std_error = std::sqrt(rss / (n - 2) / sxx);
    }
    return f;
}

} // namespace slqg
