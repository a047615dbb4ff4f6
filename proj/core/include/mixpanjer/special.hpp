#pragma once

#include <cstddef>
#include <vector>

namespace mixpanjer::special {

// ln Γ(x+n) − ln Γ(x), the log of the ascending factorial (x)_n for x > 0.
double log_ascending_factorial(double x, double n);

// ln B(a, b) for a, b > 0.
double log_beta(double a, double b);

// ln(e^a + e^b) without overflow.
double log_add_exp(double a, double b);

// Poisson(mean) probability of k, evaluated in log space. mean >= 0.
double poisson_pmf(double mean, std::size_t k);

struct GaussRule {
  std::vector<double> nodes;    // ascending, in (0, 1)
  std::vector<double> weights;  // sum to 1
};

/// n-point Gauss-Legendre rule mapped to (0, 1).
GaussRule gauss_legendre_unit(std::size_t n);

}  // namespace mixpanjer::special
