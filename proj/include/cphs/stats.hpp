#pragma once

#include <cstddef>

namespace cphs::stats {

// Standard normal CDF via erfc; absolute error well below 1e-7.
double normal_cdf(double x);

// Survival function of the chi-square distribution with df degrees of
// freedom, i.e. P(X > x). Computed through the regularized incomplete
// gamma function.
double chi_square_sf(double x, double df);

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double mean(const double* values, std::size_t n);
double variance(const double* values, std::size_t n);  // population variance

}  // namespace cphs::stats
