#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bca {

class Rng;

// Standard normal CDF, accurate to full double precision via erfc.
double norm_cdf(double x);

// Inverse standard normal CDF. Rational approximation refined by one Halley
// step against norm_cdf; absolute error well below 1e-12 on (1e-16, 1-1e-16).
double norm_ppf(double p);

// Regularized incomplete beta function I_x(a, b).
double inc_beta(double a, double b, double x);

// Two-sided p-value for a Pearson correlation r computed from n paired
// observations (t-test with n-2 degrees of freedom). |r| = 1 gives 0.
double pearson_p_two_sided(double r, std::size_t n);

// Pearson correlation of two equal-length vectors. Returns the flag
// `defined = false` when either vector is constant.
struct PearsonResult {
    double r = 0.0;
    bool defined = false;
};
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

// Kolmogorov-Smirnov statistic of a sample against U(0,1).
double ks_uniform_statistic(std::vector<double> sample);

// Two-sided asymptotic KS critical value at level alpha for sample size n
// (with the usual finite-sample correction in the denominator).
double ks_critical_value(double alpha, std::size_t n);

// Marsaglia-Tsang gamma sampler, shape alpha >= 1, unit scale.
double gamma_sample(double alpha, Rng& rng);

// Beta(a, b) via two gamma draws; a, b >= 1.
double beta_sample(double a, double b, Rng& rng);

}  // namespace bca
