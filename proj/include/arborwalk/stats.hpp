#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace arborwalk::stats {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

struct MeanCi {
    double mean = 0.0;
    Interval ci95;
    double stddev = 0.0;
    std::size_t n = 0;
};

double mean(std::span<const double> xs);
double sample_stddev(std::span<const double> xs);

// 95% CI by normal approximation across the given per-group means.
MeanCi normal_ci(std::span<const double> xs);

// Wilson score interval for a binomial proportion at 95%.
Interval wilson_ci(std::size_t successes, std::size_t trials);

// Standard-error floor for a proportion; never returns 0 for trials > 0.
double proportion_se(std::size_t successes, std::size_t trials);

double normal_cdf(double z);

// Regularized incomplete gamma P(a,x) and upper tail Q(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Gamma(shape, 1) CDF; exponential when shape == 1.
double gamma_cdf(double shape, double x);

// Survival function of the chi-square distribution with `dof` degrees of freedom.
double chi2_sf(double x, double dof);

// Kolmogorov distribution tail Q(t) = P(sup|B| > t) (asymptotic law).
double kolmogorov_sf(double t);

// One-sample Kolmogorov-Smirnov test against a CDF; returns the asymptotic p-value.
struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample chi-square over categorical counts (cells with small totals are
// expected to be merged by the caller). Returns the p-value.
struct Chi2Result {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};
Chi2Result chi2_two_sample(std::span<const std::size_t> a, std::span<const std::size_t> b);

// Least-squares slope of y against x.
double lsq_slope(std::span<const double> x, std::span<const double> y);

} // namespace arborwalk::stats
