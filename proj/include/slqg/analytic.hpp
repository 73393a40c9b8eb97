#pragma once

#include <iosfwd>
#include <vector>

namespace slqg {

// beta_Q = pi * sqrt(4 - Q^2) / Q, defined for Q in (0, 2]
double beta_q(double Q);

// log cosh without overflow for large arguments
double log_cosh(double x);

// Biggins transform value. Outside (3/2, 5/2) the transform diverges and only
// the flag is meaningful. Values are carried in log form because for small Q
// cosh(beta * theta) overflows a double.
struct PhiValue {
    bool infinite = true;
    double log_value = 0; // log phi
    double dlog = 0;      // phi' / phi

    double value() const;      // +inf when infinite or on overflow
    double derivative() const; // phi * dlog
};

PhiValue phi(double Q, double theta);

// pi tan(pi theta) + beta tanh(beta theta) - log(phi) / theta; strictly
// increasing in theta on (3/2, 5/2), vanishing at theta*
double theta_star_residual(double Q, double theta);

double theta_star(double Q);

// min over theta of log(phi) / theta
double velocity_mu(double Q);

struct BigginsProfile {
    double Q = 0;
    double beta = 0;
    double theta_star = 0;
    double mu_Q = 0;
    double phi_star = 0;  // phi(theta*), may be +inf for very small Q
    double log_phi_star = 0;
    double dlog_phi_star = 0;
};

BigginsProfile biggins_profile(double Q);

struct FigureRow {
    double Q;
    double theta_star;
    double mu_Q;
};

std::vector<FigureRow> figure_theta_star(const std::vector<double>& grid);
std::vector<double> uniform_q_grid(double q_min, double q_max, int steps);
void write_figure_csv(std::ostream& os, const std::vector<FigureRow>& rows);

} // namespace slqg
