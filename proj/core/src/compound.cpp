#include "mixpanjer/compound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

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

double checked_probability(const ParameterMap& v, double theta, bool allow_one) {
  const double p = v(theta);
  const bool ok = p > 0.0 && (p < 1.0 || (allow_one && p == 1.0));
  if (!ok)
    throw DomainError(fmt::format("claim probability {} at theta = {} is outside (0, 1{}", p, theta,
                                  allow_one ? "]" : ")"));
  return p;
}

// Direct count pmf at theta, independent of the Panjer recursion.
std::vector<double> direct_count_pmf(const CountModel& model, double theta, std::size_t n_max) {
  std::vector<double> p(n_max + 1, 0.0);
  std::visit(overloaded{
                 [&](const family::MP& f) {
                   const double mean = f.xi(theta);
                   for (std::size_t n = 0; n <= n_max; ++n) p[n] = special::poisson_pmf(mean, n);
                 },
                 [&](const family::MB& f) {
                   const double z = f.z2(theta);
                   const double m = f.m;
                   for (std::size_t n = 0; n <= std::min<std::size_t>(n_max, f.m); ++n) {
                     const double k = static_cast<double>(n);
                     p[n] = std::exp(std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0) +
                                     k * std::log(z) + (m - k) * std::log1p(-z));
                   }
                 },
                 [&](const family::MNB& f) {
                   const double r = f.rho1(theta);
                   const double rho = f.rho2(theta);
                   for (std::size_t n = 0; n <= n_max; ++n) {
                     const double k = static_cast<double>(n);
                     p[n] = std::exp(std::lgamma(r + k) - std::lgamma(r) - std::lgamma(k + 1.0) + r * std::log(rho) +
                                     k * std::log1p(-rho));
                   }
                 },
             },
             model.family());
  return p;
}

// (lhs * rhs) restricted to 0..x_max.
std::vector<double> convolve_truncated(const std::vector<double>& lhs, const std::vector<double>& rhs) {
  const std::size_t len = lhs.size();
  std::vector<double> out(len, 0.0);
  for (std::size_t x = 0; x < len; ++x) {
    double acc = 0.0;
    for (std::size_t y = 0; y <= x; ++y) acc += lhs[x - y] * rhs[y];
    out[x] = acc;
  }
  return out;
}

}  // namespace

ClaimModel::ClaimModel(Variant v) : v_(std::move(v)) {}

std::string ClaimModel::name() const {
  return std::visit(overloaded{
                        [](const claim::GeometricOnN0&) { return std::string("GeometricOnN0"); },
                        [](const claim::ZeroTruncGeometric&) { return std::string("ZeroTruncGeometric"); },
                        [](const claim::Bernoulli&) { return std::string("Bernoulli"); },
                        [](const claim::DegenerateAtOne&) { return std::string("DegenerateAtOne"); },
                    },
                    v_);
}

const ParameterMap* ClaimModel::probability_map() const {
  return std::visit(overloaded{
                        [](const claim::DegenerateAtOne&) -> const ParameterMap* { return nullptr; },
                        [](const auto& c) -> const ParameterMap* { return &c.v; },
                    },
                    v_);
}

void ClaimModel::validate(const Interval& support) const {
  const ParameterMap* v = probability_map();
  if (v == nullptr) return;
  const Interval required =
      std::holds_alternative<claim::Bernoulli>(v_) ? Interval::unit_right_closed() : Interval::unit_open();
  if (!check_range(*v, support, required))
    throw ParameterError(fmt::format("{} claims: map {} does not send {} into {}", name(), v->name(),
                                     to_string(support), to_string(required)));
}

bool ClaimModel::depends_on_theta() const {
  const ParameterMap* v = probability_map();
  return v != nullptr && !v->is_constant();
}

double ClaimModel::f0(double theta) const {
  return std::visit(overloaded{
                        [&](const claim::GeometricOnN0& c) { return checked_probability(c.v, theta, false); },
                        [](const claim::ZeroTruncGeometric&) { return 0.0; },
                        [&](const claim::Bernoulli& c) { return 1.0 - checked_probability(c.v, theta, true); },
                        [](const claim::DegenerateAtOne&) { return 0.0; },
                    },
                    v_);
}

double ClaimModel::conditional_mean(double theta) const {
  return std::visit(overloaded{
                        [&](const claim::GeometricOnN0& c) {
                          const double v = c.v(theta);
                          return (1.0 - v) / v;
                        },
                        [&](const claim::ZeroTruncGeometric& c) { return 1.0 / c.v(theta); },
                        [&](const claim::Bernoulli& c) { return c.v(theta); },
                        [](const claim::DegenerateAtOne&) { return 1.0; },
                    },
                    v_);
}

double ClaimModel::conditional_variance(double theta) const {
  return std::visit(overloaded{
                        [&](const claim::GeometricOnN0& c) {
                          const double v = c.v(theta);
                          return (1.0 - v) / (v * v);
                        },
                        [&](const claim::ZeroTruncGeometric& c) {
                          const double v = c.v(theta);
                          return (1.0 - v) / (v * v);
                        },
                        [&](const claim::Bernoulli& c) {
                          const double v = c.v(theta);
                          return v * (1.0 - v);
                        },
                        [](const claim::DegenerateAtOne&) { return 0.0; },
                    },
                    v_);
}

long long ClaimModel::draw(double theta, Xoshiro256& rng) const {
  auto geometric = [&](double v) -> long long {
    if (v >= 1.0) return 0;
    return static_cast<long long>(std::floor(std::log(rng.uniform_open()) / std::log1p(-v)));
  };
  return std::visit(overloaded{
                        [&](const claim::GeometricOnN0& c) { return geometric(c.v(theta)); },
                        [&](const claim::ZeroTruncGeometric& c) { return 1 + geometric(c.v(theta)); },
                        [&](const claim::Bernoulli& c) { return rng.uniform_open() < c.v(theta) ? 1LL : 0LL; },
                        [](const claim::DegenerateAtOne&) { return 1LL; },
                    },
                    v_);
}

std::vector<double> claim_pmf(const ClaimModel& model, double theta, std::size_t x_max) {
  std::vector<double> f(x_max + 1, 0.0);
  std::visit(overloaded{
                 [&](const claim::GeometricOnN0& c) {
                   const double v = checked_probability(c.v, theta, false);
                   f[0] = v;
                   for (std::size_t x = 1; x <= x_max; ++x) f[x] = f[x - 1] * (1.0 - v);
                 },
                 [&](const claim::ZeroTruncGeometric& c) {
                   const double v = checked_probability(c.v, theta, false);
                   if (x_max >= 1) f[1] = v;
                   for (std::size_t x = 2; x <= x_max; ++x) f[x] = f[x - 1] * (1.0 - v);
                 },
                 [&](const claim::Bernoulli& c) {
                   const double v = checked_probability(c.v, theta, true);
                   f[0] = 1.0 - v;
                   if (x_max >= 1) f[1] = v;
                 },
                 [&](const claim::DegenerateAtOne&) {
                   if (x_max >= 1) f[1] = 1.0;
                 },
             },
             model.variant());
  return f;
}

double claim_tail_mass(const ClaimModel& model, double theta, std::size_t x_max) {
  const double k = static_cast<double>(x_max);
  return std::visit(overloaded{
                        [&](const claim::GeometricOnN0& c) { return std::pow(1.0 - c.v(theta), k + 1.0); },
                        [&](const claim::ZeroTruncGeometric& c) { return std::pow(1.0 - c.v(theta), k); },
                        [&](const claim::Bernoulli& c) { return x_max == 0 ? c.v(theta) : 0.0; },
                        [&](const claim::DegenerateAtOne&) { return x_max == 0 ? 1.0 : 0.0; },
                    },
                    model.variant());
}

double AggregatePmf::total_mass() const {
  double total = 0.0;
  for (double v : g) total += v;
  return total;
}

std::vector<double> AggregatePmf::cumulative() const {
  std::vector<double> out(g.size());
  double acc = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) out[x] = acc += g[x];
  return out;
}

std::vector<double> AggregatePmf::posterior_weights(std::span<const double> weights, std::size_t x) const {
  if (x >= g.size() || !(g[x] > 0.0)) return {};
  std::vector<double> out(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) out[i] = weights[i] * slices[i][x] / g[x];
  return out;
}

namespace {

// Claim pmf beyond zero as f(y) = f1 q^(y - 1) for 1 <= y <= last; q = 0 for
// the bounded families.
struct ClaimShape {
  double f0;
  double f1;
  double q;
};

ClaimShape claim_shape(const ClaimModel& model, double theta) {
  return std::visit(overloaded{
                        [&](const claim::GeometricOnN0& c) {
                          const double v = checked_probability(c.v, theta, false);
                          return ClaimShape{v, v * (1.0 - v), 1.0 - v};
                        },
                        [&](const claim::ZeroTruncGeometric& c) {
                          const double v = checked_probability(c.v, theta, false);
                          return ClaimShape{0.0, v, 1.0 - v};
                        },
                        [&](const claim::Bernoulli& c) {
                          const double v = checked_probability(c.v, theta, true);
                          return ClaimShape{1.0 - v, v, 0.0};
                        },
                        [&](const claim::DegenerateAtOne&) { return ClaimShape{0.0, 1.0, 0.0}; },
                    },
                    model.variant());
}

// g_theta(0..x_max) by the classical recursion. With f(y) = f1 q^(y-1) the
// sums over y reduce to the running sums
//   A(x) = sum_y q^(y-1) g(x-y),  B(x) = sum_y y q^(y-1) g(x-y),
// which makes each node linear in x_max.
// Subnormal values carry no mass worth keeping and make long recursions crawl.
double flush(double v) { return std::abs(v) < std::numeric_limits<double>::min() ? 0.0 : v; }

void node_recursion(double a, double b, const ClaimShape& f, double g0, std::size_t x_max, std::vector<double>& g) {
  const double denom = 1.0 - a * f.f0;
  const double scale = f.f1 / denom;
  g.assign(x_max + 1, 0.0);
  g[0] = g0;
  double A = 0.0;
  double B = 0.0;
  for (std::size_t x = 1; x <= x_max; ++x) {
    const double prev = g[x - 1];
    B = flush(prev + f.q * (B + A));
    A = flush(prev + f.q * A);
    // With a < 0 the exact value is zero past the binomial size; rounding can leave it slightly negative.
    g[x] = flush(std::max(0.0, scale * (a * A + b * B / static_cast<double>(x))));
  }
}

}  // namespace

AggregatePmf aggregate_pmf(const CountModel& count, const ClaimModel& claims, const QuadratureRule& rule,
                           std::size_t x_max, bool emit_D, bool keep_slices) {
  if (emit_D && x_max > kMaxDiagnosticXMax)
    throw ParameterError(fmt::format("D diagnostics are limited to x_max <= {} (requested {})", kMaxDiagnosticXMax, x_max));
  keep_slices = keep_slices || emit_D;
  const AbMaps maps = ab_maps(count);
  const std::size_t nodes = rule.size();
  AggregatePmf out;
  out.g.assign(x_max + 1, 0.0);
  if (keep_slices) out.slices.resize(nodes);
  std::vector<double> a_at(nodes);
  std::vector<double> b_at(nodes);
  std::vector<double> scratch;

  for (std::size_t i = 0; i < nodes; ++i) {
    const double theta = rule.nodes[i];
    const double a = maps.a(theta);
    const double b = maps.b(theta);
    const ClaimShape f = claim_shape(claims, theta);
    const double denom = 1.0 - a * f.f0;
    if (!(denom > kDenominatorEpsilon))
      throw DenominatorError(
          fmt::format("1 - a f(0) = {} at node {} (theta = {}) is not above {}", denom, i, theta, kDenominatorEpsilon));

    std::vector<double>& g = keep_slices ? out.slices[i] : scratch;
    node_recursion(a, b, f, pgf(count, theta, f.f0), x_max, g);
    const double w = rule.weights[i];
    for (std::size_t x = 0; x <= x_max; ++x) {
      if (!std::isfinite(g[x]))
        throw NumericalError(fmt::format("aggregate recursion produced {} for term x = {} at node {} (theta = {})",
                                         g[x], x, i, theta));
      out.g[x] += w * g[x];
    }
    a_at[i] = a;
    b_at[i] = b;
    out.truncated_claim_mass += w * claim_tail_mass(claims, theta, x_max);
  }

  if (emit_D) {
    constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
    // c[i][y] = f_i(y) / (1 - a_i f_i(0))
    std::vector<std::vector<double>> c(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      c[i] = claim_pmf(claims, rule.nodes[i], x_max);
      const double denom = 1.0 - a_at[i] * c[i][0];
      for (double& v : c[i]) v /= denom;
    }
    out.D.assign(x_max + 1, {});
    for (std::size_t x = 1; x <= x_max; ++x) {
      const double xx = static_cast<double>(x);
      out.D[x].assign(x + 1, kUndefined);
      for (std::size_t y = 1; y <= x; ++y) {
        const double prev = out.g[x - y];
        if (!(prev > 0.0)) continue;
        const double yy = static_cast<double>(y);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes; ++i)
          acc += rule.weights[i] * (a_at[i] + b_at[i] * yy / xx) * c[i][y] * out.slices[i][x - y];
        out.D[x][y] = acc / prev;
      }
    }
  }
  return out;
}

AggregatePmf aggregate_pmf_auto(const CountModel& count, const ClaimModel& claims, const QuadratureRule& rule,
                                bool emit_D, double target_mass) {
  // The moment-based floor is used only when the moments are finite, judged
  // by their stability under node doubling.
  const AggregateMoments m1 = aggregate_moments(count, claims, rule);
  const AggregateMoments m2 = aggregate_moments(count, claims, quadrature(count.law(), 2 * rule.size()));
  auto close = [](double u, double v) { return std::abs(u - v) <= 1e-6 * std::max(std::abs(u), std::abs(v)); };
  const bool finite_moments = close(m1.mean, m2.mean) && close(m1.variance, m2.variance);
  const std::size_t floor_x = finite_moments ? auto_x_max(count, claims, rule) : 0;
  std::size_t x = std::max<std::size_t>(floor_x, 64);
  AggregatePmf r = aggregate_pmf(count, claims, rule, x, false, false);
  while (r.total_mass() < target_mass && x < kMaxAutoXMax) {
    x = std::min(kMaxAutoXMax, 2 * x);
    r = aggregate_pmf(count, claims, rule, x, false, false);
  }
  // Smallest x reaching the target, but never below the moment-based choice.
  std::size_t chosen = x;
  double acc = 0.0;
  for (std::size_t k = 0; k <= x; ++k) {
    acc += r.g[k];
    if (acc >= target_mass) {
      chosen = std::max(floor_x, k);
      break;
    }
  }
  return aggregate_pmf(count, claims, rule, chosen, emit_D, false);
}

std::vector<double> truncated_mixture_oracle(const CountModel& count, const ClaimModel& claims,
                                             const QuadratureRule& rule, std::size_t x_max, std::size_t n_cut) {
  if (n_cut == 0) throw ParameterError("truncated_mixture_oracle: n_cut must be >= 1");
  bool no_zero_claims = true;
  for (double theta : rule.nodes) no_zero_claims = no_zero_claims && claims.f0(theta) == 0.0;
  // Without zero claims, n-fold sums with n > x_max never land in 0..x_max.
  const bool exact_cut = no_zero_claims && n_cut >= x_max;
  const std::size_t n_used = exact_cut ? std::min(n_cut, x_max) : n_cut;

  std::vector<double> g(x_max + 1, 0.0);
  double neglected = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double theta = rule.nodes[i];
    const std::vector<double> p = direct_count_pmf(count, theta, n_used);
    if (!exact_cut) {
      double kept = 0.0;
      for (double v : p) kept += v;
      neglected += rule.weights[i] * std::max(0.0, 1.0 - kept);
    }
    const std::vector<double> f = claim_pmf(claims, theta, x_max);
    std::vector<double> power(x_max + 1, 0.0);  // f^{*n}
    power[0] = 1.0;
    std::vector<double> node_g(x_max + 1, 0.0);
    for (std::size_t n = 0; n <= n_used; ++n) {
      if (n > 0) power = convolve_truncated(power, f);
      for (std::size_t x = 0; x <= x_max; ++x) node_g[x] += p[n] * power[x];
    }
    for (std::size_t x = 0; x <= x_max; ++x) g[x] += rule.weights[i] * node_g[x];
  }
  if (!(neglected < 1e-12))
    throw TruncationError(fmt::format("truncated_mixture_oracle: count mass beyond n_cut = {} is {:g} (>= 1e-12)",
                                      n_cut, neglected));
  return g;
}

std::vector<double> mixed_convolution(const ClaimModel& claims, const QuadratureRule& rule, unsigned n,
                                      std::size_t x_max) {
  if (n == 0) throw ParameterError("mixed_convolution: n must be >= 1");
  std::vector<double> out(x_max + 1, 0.0);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const std::vector<double> f = claim_pmf(claims, rule.nodes[i], x_max);
    std::vector<double> power = f;
    for (unsigned k = 1; k < n; ++k) power = convolve_truncated(power, f);
    for (std::size_t x = 0; x <= x_max; ++x) out[x] += rule.weights[i] * power[x];
  }
  return out;
}

double tail_mixed_compound_geometric(const ParameterMap& rho2, const ParameterMap& v, const QuadratureRule& rule,
                                     double u) {
  if (!(u > 0.0) || !std::isfinite(u)) throw DomainError(fmt::format("tail: u = {} must be positive", u));
  return expect(rule, [&](double theta) {
    const double r = rho2(theta);
    const double rate = v(theta);
    if (!(r > 0.0 && r < 1.0)) throw DomainError(fmt::format("tail: rho2({}) = {} outside (0, 1)", theta, r));
    if (!(rate > 0.0)) throw DomainError(fmt::format("tail: v({}) = {} is not positive", theta, rate));
    return (1.0 - r) * std::exp(-r * rate * u);
  });
}

double generalized_pareto_density(double alpha, double beta, unsigned n, double x) {
  if (!(alpha > 0.0) || !(beta > 0.0) || n == 0)
    throw ParameterError("generalized Pareto: alpha, beta and n must be positive");
  if (!(x > 0.0)) throw ParameterError(fmt::format("generalized Pareto: x = {} must be positive", x));
  const double nn = n;
  return std::exp(alpha * std::log(beta) - special::log_beta(alpha, nn) + (nn - 1.0) * std::log(x) -
                  (alpha + nn) * std::log(beta + x));
}

double generalized_pareto_cdf(double alpha, double beta, unsigned n, double x) {
  if (!(x > 0.0)) return 0.0;
  // x = beta t / (1 - t), t in (0, x / (beta + x)).
  static const special::GaussRule gl = special::gauss_legendre_unit(128);
  const double upper = x / (beta + x);
  double acc = 0.0;
  for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
    const double t = upper * gl.nodes[k];
    const double one_minus = 1.0 - t;
    const double xt = beta * t / one_minus;
    acc += gl.weights[k] * generalized_pareto_density(alpha, beta, n, xt) * beta / (one_minus * one_minus);
  }
  return acc * upper;
}

AggregateMoments aggregate_moments(const CountModel& count, const ClaimModel& claims, const QuadratureRule& rule) {
  double mean = 0.0;
  double within = 0.0;
  std::vector<double> cond_mean(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double theta = rule.nodes[i];
    const double mn = count.conditional_mean(theta);
    const double vn = count.conditional_variance(theta);
    const double mx = claims.conditional_mean(theta);
    const double vx = claims.conditional_variance(theta);
    cond_mean[i] = mn * mx;
    mean += rule.weights[i] * cond_mean[i];
    within += rule.weights[i] * (mn * vx + vn * mx * mx);
  }
  double between = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double d = cond_mean[i] - mean;
    between += rule.weights[i] * d * d;
  }
  return {mean, within + between};
}

std::size_t auto_x_max(const CountModel& count, const ClaimModel& claims, const QuadratureRule& rule) {
  const AggregateMoments m = aggregate_moments(count, claims, rule);
  const double target = std::ceil(m.mean + 10.0 * std::sqrt(std::max(0.0, m.variance)));
  if (!std::isfinite(target) || target >= static_cast<double>(kMaxAutoXMax)) return kMaxAutoXMax;
  return std::max<std::size_t>(1, static_cast<std::size_t>(target));
}

}  // namespace mixpanjer
