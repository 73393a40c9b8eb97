#include "slqg/analytic.hpp"

#include "slqg/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

namespace slqg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLo = 1.5;
constexpr double kHi = 2.5;

void check_q(double Q, bool allow_two)
{
    const bool ok = Q > 0 && (allow_two ? Q <= 2 : Q < 2);
    if (!ok)
        throw DomainError("Q must lie in (0, " + std::string(allow_two ? "2]" : "2)") + ", got " + std::to_string(Q));
}

double objective(double Q, double theta)
{
    const PhiValue v = phi(Q, theta);
    return v.infinite ? std::numeric_limits<double>::infinity() : v.log_value / theta;
}

} // namespace

double beta_q(double Q)
{
    check_q(Q, true);
    return kPi * std::sqrt(std::max(0.0, 4 - Q * Q)) / Q;
}

double log_cosh(double x)
{
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2 * a)) - std::numbers::ln2;
}

double PhiValue::value() const
{
    if (infinite)
        return std::numeric_limits<double>::infinity();
    return std::exp(log_value);
}

double PhiValue::derivative() const { return value() * dlog; }

PhiValue phi(double Q, double theta)
{
    const double b = beta_q(Q);
    PhiValue r;
    if (!(theta > kLo && theta < kHi))
        return r;
    const double c = std::cos(kPi * theta);
    if (!(c > 0))
        return r;
    r.infinite = false;
    r.log_value = log_cosh(b * theta) - std::log(c);
    r.dlog = b * std::tanh(b * theta) + kPi * std::tan(kPi * theta);
    return r;
}

double theta_star_residual(double Q, double theta)
{
    const PhiValue v = phi(Q, theta);
    if (v.infinite)
        throw DomainError("theta outside (3/2, 5/2)");
    return v.dlog - v.log_value / theta;
}

double theta_star(double Q)
{
    check_q(Q, true);
    double lo = kLo + 1e-12, hi = kHi - 1e-12;
    if (!(theta_star_residual(Q, lo) < 0 && theta_star_residual(Q, hi) > 0))
        throw DomainError("theta* bracket lost its sign change");
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (theta_star_residual(Q, mid) < 0)
            lo = mid;
        else
            hi = mid;
    }
    const double rl = std::abs(theta_star_residual(Q, lo));
    const double rh = std::abs(theta_star_residual(Q, hi));
    return rl <= rh ? lo : hi;
}

double velocity_mu(double Q)
{
    check_q(Q, true);
    // golden section on the convex objective
    const double g = (std::sqrt(5.0) - 1) / 2;
    double a = kLo + 1e-9, b = kHi - 1e-9;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = objective(Q, x1), f2 = objective(Q, x2);
    while (b - a > 1e-7) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = objective(Q, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = objective(Q, x2);
        }
    }
    // polish: the objective's derivative has the sign of the residual
    double lo = std::max(kLo + 1e-12, a - 1e-6), hi = std::min(kHi - 1e-12, b + 1e-6);
    if (!(theta_star_residual(Q, lo) < 0 && theta_star_residual(Q, hi) > 0)) {
        lo = kLo + 1e-12;
        hi = kHi - 1e-12;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        (theta_star_residual(Q, mid) < 0 ? lo : hi) = mid;
    }
    return objective(Q, 0.5 * (lo + hi));
}

BigginsProfile biggins_profile(double Q)
{
    BigginsProfile p;
    p.Q = Q;
    p.beta = beta_q(Q);
    p.theta_star = theta_star(Q);
    p.mu_Q = velocity_mu(Q);
    const PhiValue v = phi(Q, p.theta_star);
    p.log_phi_star = v.log_value;
    p.dlog_phi_star = v.dlog;
    p.phi_star = v.value();
    return p;
}

std::vector<FigureRow> figure_theta_star(const std::vector<double>& grid)
{
    std::vector<FigureRow> rows;
    rows.reserve(grid.size());
    for (double Q : grid) {
        check_q(Q, true);
        rows.push_back({Q, theta_star(Q), velocity_mu(Q)});
    }
    return rows;
}

std::vector<double> uniform_q_grid(double q_min, double q_max, int steps)
{
    if (steps < 1)
        throw UsageError("steps must be at least 1");
    if (!(q_min > 0 && q_min <= q_max && q_max < 2))
        throw UsageError("Q range must satisfy 0 < q-min <= q-max < 2");
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i)
        g.push_back(steps == 1 ? q_min : q_min + (q_max - q_min) * i / (steps - 1));
    return g;
}

void write_figure_csv(std::ostream& os, const std::vector<FigureRow>& rows)
{
    os << "Q,theta_star,mu_Q\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", r.Q, r.theta_star, r.mu_Q);
        os << buf;
    }
}

} // namespace slqg
