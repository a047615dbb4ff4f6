#pragma once

// Reference values computed straight from the probability definitions, with
// no shared code path with the library recursions.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline double log_choose(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }
inline double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

inline double poisson(double mean, std::size_t n) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
}

inline double binomial(unsigned m, double p, std::size_t n) {
  if (n > m) return 0.0;
  return std::exp(log_choose(m, n) + n * std::log(p) + (m - n) * std::log1p(-p));
}

// C(r + n - 1, n) p^r (1 - p)^n
inline double negbin(double r, double p, std::size_t n) {
  return std::exp(std::lgamma(r + n) - std::lgamma(r) - std::lgamma(n + 1.0) + r * std::log(p) + n * std::log1p(-p));
}

// Poisson mixed over Gamma(alpha, rate beta).
inline double gamma_poisson(double alpha, double beta, std::size_t n) { return negbin(alpha, beta / (beta + 1), n); }

// Poisson mixed over Lindley(beta): integral of e^-t t^n / n! * beta^2/(beta+1) (1+t) e^-beta t.
inline double lindley_poisson(double beta, std::size_t n) {
  return beta * beta * (n + beta + 2) / std::pow(beta + 1, n + 3.0);
}

// Binomial(m, Theta) with Theta ~ Beta(alpha, beta).
inline double beta_binomial(unsigned m, double alpha, double beta, std::size_t n) {
  if (n > m) return 0.0;
  return std::exp(log_choose(m, n) + log_beta(alpha + n, beta + m - n) - log_beta(alpha, beta));
}

// NB(r, Theta) with Theta ~ Beta(alpha, beta).
inline double beta_negbin(double r, double alpha, double beta, std::size_t n) {
  return std::exp(std::lgamma(r + n) - std::lgamma(r) - std::lgamma(n + 1.0) + log_beta(alpha + r, beta + n) -
                  log_beta(alpha, beta));
}

// Double series sum_k Poisson(k; n) Poisson(a; k), summing k until the
// Poisson(a) tail is below 1e-16.
inline double neyman_a(double a, std::size_t n) {
  double total = 0.0, mass = 0.0;
  for (std::size_t k = 0; k < 2000; ++k) {
    const double w = poisson(a, k);
    total += w * poisson(static_cast<double>(k), n);
    mass += w;
    if (k > a && 1.0 - mass < 1e-16) break;
  }
  return total;
}

inline std::vector<double> convolve(const std::vector<double>& f, const std::vector<double>& g, std::size_t x_max) {
  std::vector<double> out(x_max + 1, 0.0);
  for (std::size_t i = 0; i < f.size() && i <= x_max; ++i)
    for (std::size_t j = 0; j < g.size() && i + j <= x_max; ++j) out[i + j] += f[i] * g[j];
  return out;
}

// Compound distribution of sum_{n} p[n] f^{*n} on 0..x_max by explicit convolution powers.
inline std::vector<double> compound(const std::vector<double>& p, const std::vector<double>& f, std::size_t x_max) {
  std::vector<double> out(x_max + 1, 0.0);
  std::vector<double> power(x_max + 1, 0.0);
  power[0] = 1.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    for (std::size_t x = 0; x <= x_max; ++x) out[x] += p[n] * power[x];
    power = convolve(power, f, x_max);
  }
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Composite Gauss-Legendre (8 points per panel) of f over [lo, hi].
template <class F>
double integrate(F f, double lo, double hi, std::size_t panels = 2000) {
  static const double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
  static const double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  const double h = (hi - lo) / panels;
  double total = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double c = lo + (k + 0.5) * h;
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += w[i] * (f(c - 0.5 * h * x[i]) + f(c + 0.5 * h * x[i]));
    total += 0.5 * h * s;
  }
  return total;
}

}  // namespace oracle
