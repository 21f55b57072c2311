#include "arborwalk/stats.hpp"

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_sf_gamma.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace arborwalk::stats {

double mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

MeanCi normal_ci(std::span<const double> xs) {
    MeanCi r;
    r.n = xs.size();
    r.mean = mean(xs);
    r.stddev = sample_stddev(xs);
    const double se = r.n > 0 ? r.stddev / std::sqrt(static_cast<double>(r.n)) : 0.0;
    r.ci95 = {r.mean - 1.959963984540054 * se, r.mean + 1.959963984540054 * se};
    return r;
}

Interval wilson_ci(std::size_t successes, std::size_t trials) {
    if (trials == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double proportion_se(std::size_t successes, std::size_t trials) {
    if (trials == 0) return 1.0;
    const double n = static_cast<double>(trials);
    // Agresti-Coull style shrinkage keeps the SE positive at 0 or n successes.
    const double p = (static_cast<double>(successes) + 1.0) / (n + 2.0);
    return std::sqrt(p * (1.0 - p) / n);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    return gsl_sf_gamma_inc_P(a, x);
}

double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    return gsl_sf_gamma_inc_Q(a, x);
}

double gamma_cdf(double shape, double x) {
    if (x <= 0.0) return 0.0;
    return gsl_cdf_gamma_P(x, shape, 1.0);
}

double chi2_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    return gsl_cdf_chisq_Q(x, dof);
}

double kolmogorov_sf(double t) {
    if (t <= 0.0) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 101; ++k) {
        const double term = std::exp(-2.0 * k * k * t * t);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * s));
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    KsResult r;
    r.statistic = d;
    const double sn = std::sqrt(n);
    r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    return r;
}

Chi2Result chi2_two_sample(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("chi2_two_sample: size mismatch");
    double na = 0.0, nb = 0.0;
    for (std::size_t x : a) na += static_cast<double>(x);
    for (std::size_t x : b) nb += static_cast<double>(x);
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("chi2_two_sample: empty sample");
    const double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
    Chi2Result r;
    int cells = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = static_cast<double>(a[i]), bi = static_cast<double>(b[i]);
        if (ai + bi == 0.0) continue;
        const double t = ka * ai - kb * bi;
        r.statistic += t * t / (ai + bi);
        ++cells;
    }
    r.dof = std::max(1, cells - 1);
    r.p_value = chi2_sf(r.statistic, r.dof);
    return r;
}

double lsq_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("lsq_slope: need >= 2 points");
    const double mx = mean(x), my = mean(y);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    if (den == 0.0) throw std::invalid_argument("lsq_slope: degenerate x");
    return num / den;
}

} // namespace arborwalk::stats
