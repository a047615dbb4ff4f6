#include "mixpanjer/mixing.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "mixpanjer/errors.hpp"
#include "mixpanjer/special.hpp"

namespace mixpanjer {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

void validate(const MixingLaw::Variant& v) {
  std::visit(overloaded{
                 [](const law::Degenerate& l) { require(std::isfinite(l.theta0), "Degenerate: theta0 must be finite"); },
                 [](const law::Gamma& l) {
                   require(positive_finite(l.alpha) && positive_finite(l.beta), "Gamma: alpha and beta must be > 0");
                 },
                 [](const law::Exponential& l) { require(positive_finite(l.beta), "Exponential: beta must be > 0"); },
                 [](const law::Beta& l) {
                   require(positive_finite(l.alpha) && positive_finite(l.beta), "Beta: alpha and beta must be > 0");
                 },
                 [](const law::InverseGaussian& l) {
                   require(positive_finite(l.mu) && positive_finite(l.phi), "InverseGaussian: mu and phi must be > 0");
                 },
                 [](const law::Lindley& l) { require(positive_finite(l.beta), "Lindley: beta must be > 0"); },
                 [](const law::PoissonMix& l) { require(positive_finite(l.a), "PoissonMix: a must be > 0"); },
                 [](const law::ExpGammaMixture& l) {
                   require(positive_finite(l.alpha) && positive_finite(l.beta),
                           "ExpGammaMixture: alpha and beta must be > 0");
                   require(l.w1 >= 0.0 && l.w1 <= 1.0 && l.w2 >= 0.0 && l.w2 <= 1.0,
                           "ExpGammaMixture: weights must lie in [0, 1]");
                   require(std::abs(l.w1 + l.w2 - 1.0) <= 1e-12, "ExpGammaMixture: weights must sum to 1");
                 },
             },
             v);
}

double gamma_log_density(double alpha, double beta, double theta) {
  return alpha * std::log(beta) - std::lgamma(alpha) + (alpha - 1.0) * std::log(theta) - beta * theta;
}

double draw_gamma(double alpha, double beta, Xoshiro256& rng) {
  return std::gamma_distribution<double>(alpha, 1.0 / beta)(rng);
}

double draw_exponential(double beta, Xoshiro256& rng) { return -std::log(rng.uniform_open()) / beta; }

// Michael, Schucany and Haas transformation with one rejection step.
double draw_inverse_gaussian(double mu, double phi, Xoshiro256& rng) {
  const double nu = std::normal_distribution<double>(0.0, 1.0)(rng);
  const double y = nu * nu;
  const double x = mu + mu * mu * y / (2.0 * phi) - mu / (2.0 * phi) * std::sqrt(4.0 * mu * phi * y + mu * mu * y * y);
  const double u = rng.uniform_open();
  return u <= mu / (mu + x) ? x : mu * mu / x;
}

}  // namespace

MixingLaw::MixingLaw(Variant v) : v_(std::move(v)) { validate(v_); }

std::string MixingLaw::name() const {
  return std::visit(overloaded{
                        [](const law::Degenerate&) { return std::string("Degenerate"); },
                        [](const law::Gamma&) { return std::string("Gamma"); },
                        [](const law::Exponential&) { return std::string("Exponential"); },
                        [](const law::Beta&) { return std::string("Beta"); },
                        [](const law::InverseGaussian&) { return std::string("InverseGaussian"); },
                        [](const law::Lindley&) { return std::string("Lindley"); },
                        [](const law::PoissonMix&) { return std::string("PoissonMix"); },
                        [](const law::ExpGammaMixture&) { return std::string("ExpGammaMixture"); },
                    },
                    v_);
}

std::string MixingLaw::describe() const {
  return std::visit(overloaded{
                        [](const law::Degenerate& l) { return fmt::format("Degenerate({})", l.theta0); },
                        [](const law::Gamma& l) { return fmt::format("Ga({},{})", l.alpha, l.beta); },
                        [](const law::Exponential& l) { return fmt::format("Exp({})", l.beta); },
                        [](const law::Beta& l) { return fmt::format("Be({},{})", l.alpha, l.beta); },
                        [](const law::InverseGaussian& l) { return fmt::format("IG({},{})", l.mu, l.phi); },
                        [](const law::Lindley& l) { return fmt::format("Lindley({})", l.beta); },
                        [](const law::PoissonMix& l) { return fmt::format("P({})", l.a); },
                        [](const law::ExpGammaMixture& l) {
                          return fmt::format("{}*Exp({})+{}*Ga({},{})", l.w1, l.beta, l.w2, l.alpha, l.beta);
                        },
                    },
                    v_);
}

bool MixingLaw::is_discrete() const {
  return std::holds_alternative<law::PoissonMix>(v_) || std::holds_alternative<law::Degenerate>(v_);
}

bool MixingLaw::is_degenerate() const { return std::holds_alternative<law::Degenerate>(v_); }

Interval MixingLaw::support() const {
  return std::visit(overloaded{
                        [](const law::Degenerate& l) { return Interval::point(l.theta0); },
                        [](const law::Beta&) { return Interval::unit_open(); },
                        [](const law::PoissonMix&) { return Interval::nonnegative(); },
                        [](const auto&) { return Interval::positive(); },
                    },
                    v_);
}

double MixingLaw::density(double theta) const {
  return std::visit(
      overloaded{
          [&](const law::Degenerate& l) { return theta == l.theta0 ? 1.0 : 0.0; },
          [&](const law::Gamma& l) { return theta > 0.0 ? std::exp(gamma_log_density(l.alpha, l.beta, theta)) : 0.0; },
          [&](const law::Exponential& l) { return theta > 0.0 ? l.beta * std::exp(-l.beta * theta) : 0.0; },
          [&](const law::Beta& l) {
            if (!(theta > 0.0 && theta < 1.0)) return 0.0;
            return std::exp((l.alpha - 1.0) * std::log(theta) + (l.beta - 1.0) * std::log1p(-theta) -
                            special::log_beta(l.alpha, l.beta));
          },
          [&](const law::InverseGaussian& l) {
            if (!(theta > 0.0)) return 0.0;
            const double d = theta - l.mu;
            return std::sqrt(l.phi / (2.0 * std::numbers::pi * theta * theta * theta)) *
                   std::exp(-l.phi * d * d / (2.0 * l.mu * l.mu * theta));
          },
          [&](const law::Lindley& l) {
            if (!(theta > 0.0)) return 0.0;
            return l.beta * l.beta / (l.beta + 1.0) * (theta + 1.0) * std::exp(-l.beta * theta);
          },
          [&](const law::PoissonMix& l) {
            if (!(theta >= 0.0) || theta != std::floor(theta)) return 0.0;
            return special::poisson_pmf(l.a, static_cast<std::size_t>(theta));
          },
          [&](const law::ExpGammaMixture& l) {
            if (!(theta > 0.0)) return 0.0;
            double value = 0.0;
            if (l.w1 > 0.0) value += l.w1 * l.beta * std::exp(-l.beta * theta);
            if (l.w2 > 0.0) value += l.w2 * std::exp(gamma_log_density(l.alpha, l.beta, theta));
            return value;
          },
      },
      v_);
}

double MixingLaw::mean() const {
  return std::visit(overloaded{
                        [](const law::Degenerate& l) { return l.theta0; },
                        [](const law::Gamma& l) { return l.alpha / l.beta; },
                        [](const law::Exponential& l) { return 1.0 / l.beta; },
                        [](const law::Beta& l) { return l.alpha / (l.alpha + l.beta); },
                        [](const law::InverseGaussian& l) { return l.mu; },
                        [](const law::Lindley& l) { return (l.beta + 2.0) / (l.beta * (l.beta + 1.0)); },
                        [](const law::PoissonMix& l) { return l.a; },
                        [](const law::ExpGammaMixture& l) { return l.w1 / l.beta + l.w2 * l.alpha / l.beta; },
                    },
                    v_);
}

double MixingLaw::variance() const {
  return std::visit(
      overloaded{
          [](const law::Degenerate&) { return 0.0; },
          [](const law::Gamma& l) { return l.alpha / (l.beta * l.beta); },
          [](const law::Exponential& l) { return 1.0 / (l.beta * l.beta); },
          [](const law::Beta& l) {
            const double s = l.alpha + l.beta;
            return l.alpha * l.beta / (s * s * (s + 1.0));
          },
          [](const law::InverseGaussian& l) { return l.mu * l.mu * l.mu / l.phi; },
          [](const law::Lindley& l) {
            const double b = l.beta;
            return (b * b + 4.0 * b + 2.0) / (b * b * (b + 1.0) * (b + 1.0));
          },
          [](const law::PoissonMix& l) { return l.a; },
          [](const law::ExpGammaMixture& l) {
            const double m = l.w1 / l.beta + l.w2 * l.alpha / l.beta;
            const double m2 = (2.0 * l.w1 + l.w2 * l.alpha * (l.alpha + 1.0)) / (l.beta * l.beta);
            return m2 - m * m;
          },
      },
      v_);
}

double MixingLaw::draw(Xoshiro256& rng) const {
  return std::visit(overloaded{
                        [&](const law::Degenerate& l) { return l.theta0; },
                        [&](const law::Gamma& l) { return draw_gamma(l.alpha, l.beta, rng); },
                        [&](const law::Exponential& l) { return draw_exponential(l.beta, rng); },
                        [&](const law::Beta& l) {
                          const double x = draw_gamma(l.alpha, 1.0, rng);
                          const double y = draw_gamma(l.beta, 1.0, rng);
                          return x / (x + y);
                        },
                        [&](const law::InverseGaussian& l) { return draw_inverse_gaussian(l.mu, l.phi, rng); },
                        [&](const law::Lindley& l) {
                          const bool exp_part = rng.uniform_open() < l.beta / (l.beta + 1.0);
                          return exp_part ? draw_exponential(l.beta, rng) : draw_gamma(2.0, l.beta, rng);
                        },
                        [&](const law::PoissonMix& l) {
                          return static_cast<double>(std::poisson_distribution<long long>(l.a)(rng));
                        },
                        [&](const law::ExpGammaMixture& l) {
                          const bool exp_part = rng.uniform_open() < l.w1;
                          return exp_part ? draw_exponential(l.beta, rng) : draw_gamma(l.alpha, l.beta, rng);
                        },
                    },
                    v_);
}

namespace {

QuadratureRule poisson_rule(double a) {
  // Terms past the mode decay faster than geometrically; stop once they are
  // negligible against the truncation threshold.
  std::vector<double> pmf;
  for (std::size_t k = 0;; ++k) {
    const double p = special::poisson_pmf(a, k);
    pmf.push_back(p);
    if (static_cast<double>(k) > a + 1.0 && p < 1e-32) break;
  }
  std::vector<double> upper(pmf.size() + 1, 0.0);  // upper[k] = sum_{j >= k} pmf[j]
  for (std::size_t k = pmf.size(); k-- > 0;) upper[k] = upper[k + 1] + pmf[k];
  std::size_t last = 0;
  while (upper[last + 1] >= kDiscreteTailThreshold) ++last;

  QuadratureRule rule;
  rule.kind = RuleKind::Discrete;
  for (std::size_t k = 0; k <= last; ++k) {
    rule.nodes.push_back(static_cast<double>(k));
    rule.weights.push_back(pmf[k]);
  }
  return rule;
}

struct Grading {
  double left = 1.0;   // exponent applied at the lower end of (0, 1)
  double right = 1.0;  // exponent applied at the upper end of (0, 1)
};

Grading grading_for(const MixingLaw::Variant& v) {
  Grading g;
  if (const auto* l = std::get_if<law::Gamma>(&v); l && l->alpha < 1.0) g.left = 1.0 / l->alpha;
  if (const auto* l = std::get_if<law::Beta>(&v)) {
    if (l->alpha < 1.0) g.left = 1.0 / l->alpha;
    if (l->beta < 1.0) g.right = 1.0 / l->beta;
  }
  if (const auto* l = std::get_if<law::ExpGammaMixture>(&v); l && l->w2 > 0.0 && l->alpha < 1.0)
    g.left = 1.0 / l->alpha;
  return g;
}

// Points t in (0, 1) with weights dt, graded at either end.
void unit_points(std::size_t n, const Grading& g, std::vector<double>& t, std::vector<double>& dt) {
  auto graded = [&](std::size_t count, double lo, double hi, double q_lo, double q_hi) {
    const auto gl = special::gauss_legendre_unit(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double s = gl.nodes[i];
      const double w = gl.weights[i];
      if (q_hi == 1.0) {
        // t = lo + (hi - lo) s^q
        t.push_back(lo + (hi - lo) * std::pow(s, q_lo));
        dt.push_back(w * (hi - lo) * q_lo * std::pow(s, q_lo - 1.0));
      } else {
        // t = hi - (hi - lo) (1 - s)^q
        const double r = 1.0 - s;
        t.push_back(hi - (hi - lo) * std::pow(r, q_hi));
        dt.push_back(w * (hi - lo) * q_hi * std::pow(r, q_hi - 1.0));
      }
    }
  };
  if (g.right == 1.0) {
    graded(n, 0.0, 1.0, g.left, 1.0);
  } else if (g.left == 1.0) {
    graded(n, 0.0, 1.0, 1.0, g.right);
  } else {
    const std::size_t n_lo = std::max<std::size_t>(1, n / 2);
    const std::size_t n_hi = std::max<std::size_t>(1, n - n_lo);
    graded(n_lo, 0.0, 0.5, g.left, 1.0);
    graded(n_hi, 0.5, 1.0, 1.0, g.right);
  }
}

}  // namespace

QuadratureRule quadrature(const MixingLaw& law, std::size_t node_count) {
  if (node_count == 0) throw ParameterError("quadrature: node_count must be >= 1");
  const auto& v = law.variant();
  QuadratureRule rule;
  if (const auto* d = std::get_if<law::Degenerate>(&v)) {
    rule.kind = RuleKind::Discrete;
    rule.nodes = {d->theta0};
    rule.weights = {1.0};
    return rule;
  }
  if (const auto* p = std::get_if<law::PoissonMix>(&v)) {
    rule = poisson_rule(p->a);
  } else {
    std::vector<double> t;
    std::vector<double> dt;
    unit_points(node_count, grading_for(v), t, dt);
    const bool on_unit = law.support().hi == 1.0;
    const Interval support = law.support();
    for (std::size_t i = 0; i < t.size(); ++i) {
      double theta = t[i];
      double jac = dt[i];
      if (!on_unit) {
        const double one_minus = 1.0 - t[i];
        theta = t[i] / one_minus;
        jac /= one_minus * one_minus;
      }
      const double w = jac * law.density(theta);
      if (!support.contains(theta) || !std::isfinite(w) || w <= 0.0) continue;
      rule.nodes.push_back(theta);
      rule.weights.push_back(w);
    }
    if (rule.nodes.empty()) throw NumericalError("quadrature: every node has zero weight for " + law.describe());
  }
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

double expect(const QuadratureRule& rule, const ThetaFunction& h) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double value = h(rule.nodes[i]);
    if (!std::isfinite(value))
      throw NonFiniteError(fmt::format("expect: integrand is {} at node {} (theta = {})", value, i, rule.nodes[i]));
    acc += rule.weights[i] * value;
  }
  return acc;
}

double log_abs_laplace_derivative(const MixingLaw& law, unsigned n, double t) {
  if (!(t >= 0.0)) throw DomainError("laplace_derivative: t must be >= 0");
  const double nn = static_cast<double>(n);
  auto gamma_term = [&](double alpha, double beta) {
    return special::log_ascending_factorial(alpha, nn) + alpha * std::log(beta) - (alpha + nn) * std::log(beta + t);
  };
  const auto& v = law.variant();
  if (const auto* l = std::get_if<law::Gamma>(&v)) return gamma_term(l->alpha, l->beta);
  if (const auto* l = std::get_if<law::Exponential>(&v)) return gamma_term(1.0, l->beta);
  if (const auto* l = std::get_if<law::ExpGammaMixture>(&v)) {
    const double exp_part = l->w1 > 0.0 ? std::log(l->w1) + gamma_term(1.0, l->beta) : -INFINITY;
    const double gamma_part = l->w2 > 0.0 ? std::log(l->w2) + gamma_term(l->alpha, l->beta) : -INFINITY;
    return special::log_add_exp(exp_part, gamma_part);
  }
  throw UnsupportedLawError("laplace_derivative: no closed form for " + law.name());
}

double laplace_derivative(const MixingLaw& law, unsigned n, double t) {
  const double magnitude = std::exp(log_abs_laplace_derivative(law, n, t));
  return n % 2 == 0 ? magnitude : -magnitude;
}

std::vector<double> sample(const MixingLaw& law, std::uint64_t seed, std::size_t count) {
  if (count == 0) throw ParameterError("sample: count must be >= 1");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = Xoshiro256::stream(seed, i);
    out[i] = law.draw(rng);
  }
  return out;
}

}  // namespace mixpanjer
