#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace slqg {

// Welford accumulator; merge() keeps reductions order-deterministic
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& o);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;
    double std_error() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0;
    double m2_ = 0;
};

struct Estimate {
    double value = 0;
    double std_error = 0;
};

// self-normalized importance-sampling ratio sum(w*x)/sum(w) with a
// delta-method standard error
Estimate ratio_estimate(const std::vector<double>& w, const std::vector<double>& x);

double binomial_std_error(double p_hat, std::size_t n);

double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);

// sup |F_n - F| against a continuous cdf
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

using Histogram = std::map<std::int64_t, std::size_t>;
double total_variation(const Histogram& a, const Histogram& b);

// Pearson chi-square goodness of fit; expected probabilities with cells of
// expected count below min_expected pooled into a remainder cell
double chi_square_pvalue(const std::vector<std::size_t>& observed, const std::vector<double>& expected_prob,
                         double min_expected = 5.0);

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double slope_std_error = 0;
};
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

} // namespace slqg
