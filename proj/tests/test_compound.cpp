#include <cmath>
#include <numeric>

#include <doctest.h>

#include "mixpanjer/compound.hpp"
#include "mixpanjer/errors.hpp"
#include "oracles.hpp"

using namespace mixpanjer;
using PM = ParameterMap;

namespace {

// Per-node oracle of the mixed compound pmf: direct count pmf, explicit
// convolution powers, then the weighted sum.
std::vector<double> brute_force(const QuadratureRule& rule, double (*count)(double, std::size_t),
                                std::vector<double> (*claim)(double, std::size_t), std::size_t x_max,
                                std::size_t n_cut) {
  std::vector<double> g(x_max + 1, 0.0);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    std::vector<double> p(n_cut + 1);
    for (std::size_t n = 0; n <= n_cut; ++n) p[n] = count(rule.nodes[i], n);
    const auto gi = oracle::compound(p, claim(rule.nodes[i], x_max), x_max);
    for (std::size_t x = 0; x <= x_max; ++x) g[x] += rule.weights[i] * gi[x];
  }
  return g;
}

std::vector<double> ztg_logistic(double t, std::size_t x_max) {
  const double v = t / (1 + t);
  std::vector<double> f(x_max + 1, 0.0);
  for (std::size_t x = 1; x <= x_max; ++x) f[x] = v * std::pow(1 - v, x - 1.0);
  return f;
}

}  // namespace

TEST_SUITE("compound") {

TEST_CASE("claim pmf examples") {
  const ClaimModel ztg(claim::ZeroTruncGeometric{PM::constant(0.6)});
  const auto f = claim_pmf(ztg, 4.2, 3);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(f[2] == doctest::Approx(0.24).epsilon(1e-15));
  CHECK(f[3] == doctest::Approx(0.096).epsilon(1e-15));

  const auto g = claim_pmf(ClaimModel(claim::GeometricOnN0{PM::logistic()}), 1.0, 2);
  CHECK(g == std::vector<double>{0.5, 0.25, 0.125});

  CHECK(claim_pmf(ClaimModel(claim::DegenerateAtOne{}), 1.0, 3) == std::vector<double>{0, 1, 0, 0});
  CHECK(claim_pmf(ClaimModel(claim::Bernoulli{PM::constant(0.25)}), 1.0, 2) == std::vector<double>{0.75, 0.25, 0});
}

TEST_CASE("claim pmfs sum to one with their closed-form tails") {
  for (const ClaimModel& c : {ClaimModel(claim::GeometricOnN0{PM::logistic()}),
                              ClaimModel(claim::ZeroTruncGeometric{PM::reciprocal1p()})}) {
    for (double t : {0.05, 1.0, 9.0}) {
      const auto f = claim_pmf(c, t, 25);
      CHECK(std::accumulate(f.begin(), f.end(), 0.0) + claim_tail_mass(c, t, 25) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("claim validation") {
  CHECK_THROWS_AS(ClaimModel(claim::GeometricOnN0{PM::identity()}).validate(Interval::positive()), ParameterError);
  CHECK_NOTHROW(ClaimModel(claim::GeometricOnN0{PM::identity()}).validate(Interval::unit_open()));
  CHECK_THROWS_AS(ClaimModel(claim::ZeroTruncGeometric{PM::constant(1.0)}).validate(Interval::positive()),
                  ParameterError);
  CHECK_NOTHROW(ClaimModel(claim::Bernoulli{PM::constant(1.0)}).validate(Interval::positive()));
}

TEST_CASE("aggregate examples") {
  const CountModel pois2(family::MP{PM::constant(2)}, law::Degenerate{1});
  const auto r = aggregate_pmf(pois2, ClaimModel(claim::DegenerateAtOne{}), quadrature(pois2.law()), 25);
  const auto p = conditional_count_pmf(pois2, 1.0, 25);
  for (std::size_t x = 0; x <= 25; ++x) CHECK(std::abs(r.g[x] - p[x]) <= 1e-14);

  const CountModel pois1(family::MP{PM::constant(1)}, law::Degenerate{1});
  const auto g = aggregate_pmf(pois1, ClaimModel(claim::GeometricOnN0{PM::constant(0.5)}), quadrature(pois1.law()), 5);
  CHECK(g.g[0] == doctest::Approx(0.6065307).epsilon(1e-7));
  CHECK(g.g[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));

  const CountModel mp(family::MP{PM::identity()}, law::Gamma{5, 4});
  const auto rule = quadrature(mp.law());
  const auto e = aggregate_pmf(mp, ClaimModel(claim::ZeroTruncGeometric{PM::logistic()}), rule, 30);
  const auto o = brute_force(rule, oracle::poisson, ztg_logistic, 30, 120);
  CHECK(oracle::max_abs_diff(e.g, o) <= 1e-8);
}

TEST_CASE("engine against the library oracle") {
  const CountModel mb(family::MB{2, PM::constant(0.5)}, law::Degenerate{1});
  const auto b = truncated_mixture_oracle(mb, ClaimModel(claim::DegenerateAtOne{}), quadrature(mb.law()), 4, 10);
  CHECK(b[0] == doctest::Approx(0.25));
  CHECK(b[1] == doctest::Approx(0.5));
  CHECK(b[2] == doctest::Approx(0.25));
  CHECK(b[3] == 0.0);

  const CountModel p1(family::MP{PM::constant(1)}, law::Degenerate{1});
  const auto q = truncated_mixture_oracle(p1, ClaimModel(claim::DegenerateAtOne{}), quadrature(p1.law()), 30, 40);
  for (std::size_t x = 0; x <= 30; ++x) CHECK(std::abs(q[x] - oracle::poisson(1, x)) <= 1e-12);

  const CountModel mnb(family::MNB{PM::identity(), PM::reciprocal1p()}, law::Gamma{5, 4});
  const ClaimModel c(claim::GeometricOnN0{PM::logistic()});
  const auto rule = quadrature(mnb.law());
  CHECK(oracle::max_abs_diff(aggregate_pmf(mnb, c, rule, 30).g, truncated_mixture_oracle(mnb, c, rule, 30, 400)) <=
        1e-8);
  CHECK_THROWS_AS(truncated_mixture_oracle(mnb, c, rule, 30, 3), TruncationError);
}

TEST_CASE("constant count maps with mixed claims") {
  const CountModel pois3(family::MP{PM::constant(3)}, law::Beta{5, 5});
  const ClaimModel c(claim::ZeroTruncGeometric{PM::logistic()});
  const auto rule = quadrature(pois3.law());
  const auto e = aggregate_pmf(pois3, c, rule, 30);
  const auto o = brute_force(rule, [](double, std::size_t n) { return oracle::poisson(3, n); }, ztg_logistic, 30, 40);
  CHECK(oracle::max_abs_diff(e.g, o) <= 1e-8);
}

TEST_CASE("degenerate mixing reproduces the classical recursion") {
  const CountModel m(family::MNB{PM::constant(2.5), PM::constant(0.4)}, law::Degenerate{0.7});
  const ClaimModel c(claim::GeometricOnN0{PM::constant(0.3)});
  const auto r = aggregate_pmf(m, c, quadrature(m.law()), 40);
  // Classical Panjer recursion for NB(2.5, 0.4) with geometric claims.
  const double a = 0.6, b = 1.5 * 0.6, f0 = 0.3;
  std::vector<double> f(41), g(41);
  for (std::size_t x = 0; x <= 40; ++x) f[x] = 0.3 * std::pow(0.7, double(x));
  g[0] = std::pow(0.4 / (1 - 0.6 * f0), 2.5);
  for (std::size_t x = 1; x <= 40; ++x) {
    double s = 0.0;
    for (std::size_t y = 1; y <= x; ++y) s += (a + b * y / x) * f[y] * g[x - y];
    g[x] = s / (1 - a * f0);
  }
  for (std::size_t x = 0; x <= 40; ++x) CHECK(std::abs(r.g[x] - g[x]) <= 1e-14);
}

TEST_CASE("D identity and posterior weights") {
  const CountModel m(family::MB{5, PM::exp_neg()}, law::Gamma{3, 4});
  const ClaimModel c(claim::ZeroTruncGeometric{PM::logistic()});
  const auto rule = quadrature(m.law());
  const auto r = aggregate_pmf(m, c, rule, 40, true);
  for (std::size_t x = 1; x <= 40; ++x) {
    double s = 0.0;
    for (std::size_t y = 1; y <= x; ++y)
      if (r.g[x - y] > 0) s += r.D[x][y] * r.g[x - y];
    CHECK(std::abs(r.g[x] - s) <= 1e-12);
  }
  for (std::size_t x = 0; x <= 40; ++x) {
    double mixed = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) mixed += rule.weights[i] * r.slices[i][x];
    CHECK(std::abs(mixed - r.g[x]) <= 1e-12);
  }
  const auto w = r.posterior_weights(rule.weights, 7);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mass is bounded and grows with x_max") {
  const CountModel m(family::MNB{PM::scale(2), PM::reciprocal1p()}, law::InverseGaussian{2, 5});
  const ClaimModel c(claim::ZeroTruncGeometric{PM::logistic()});
  const auto rule = quadrature(m.law());
  double prev = 0.0;
  for (std::size_t x_max : {5, 20, 80, 320}) {
    const auto r = aggregate_pmf(m, c, rule, x_max);
    for (double v : r.g) CHECK(v >= 0.0);
    CHECK(r.total_mass() <= 1 + 1e-9);
    CHECK(r.total_mass() >= prev);
    prev = r.total_mass();
  }
  const auto cum = aggregate_pmf(m, c, rule, 20).cumulative();
  CHECK(std::is_sorted(cum.begin(), cum.end()));
}

TEST_CASE("mixed convolution") {
  const ClaimModel c(claim::GeometricOnN0{PM::logistic()});
  const auto rule = quadrature(law::Beta{2, 2});
  const auto p1 = mixed_convolution(c, rule, 1, 30);
  for (std::size_t x = 0; x <= 30; ++x) {
    double marginal = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) marginal += rule.weights[i] * claim_pmf(c, rule.nodes[i], x)[x];
    CHECK(std::abs(p1[x] - marginal) <= 1e-15);
  }
  const auto deg = mixed_convolution(ClaimModel(claim::DegenerateAtOne{}), rule, 3, 6);
  CHECK(deg == std::vector<double>{0, 0, 0, 1, 0, 0, 0});

  const auto p2 = mixed_convolution(c, rule, 2, 30);
  const double want = expect(rule, [](double t) { return std::pow(t / (1 + t), 2); });
  CHECK(p2[0] == doctest::Approx(want).epsilon(1e-14));
  CHECK(oracle::max_abs_diff(p2, oracle::convolve(p1, p1, 30)) > 1e-6);
}

TEST_CASE("tail formula") {
  const auto deg = quadrature(law::Degenerate{1.5});
  for (double u : {0.5, 2.0, 7.0}) {
    const double rho = 1 / 2.5, v = 1.5 * 1.5;
    CHECK(tail_mixed_compound_geometric(PM::reciprocal1p(), PM::power(2), deg, u) ==
          doctest::Approx((1 - rho) * std::exp(-rho * v * u)).epsilon(1e-15));
  }
  const auto rule = quadrature(law::InverseGaussian{2, 5});
  const double at0 = expect(rule, [](double t) { return t / (1 + t); });
  CHECK(tail_mixed_compound_geometric(PM::reciprocal1p(), PM::power(2), rule, 1e-12) ==
        doctest::Approx(at0).epsilon(1e-10));
  double prev = 1.0;
  for (double u = 0.5; u <= 20; u += 0.5) {
    const double t = tail_mixed_compound_geometric(PM::identity(), PM::neg_log_sq(), quadrature(law::Beta{3, 3}), u);
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("generalized Pareto") {
  CHECK(generalized_pareto_density(1, 1, 1, 1) == doctest::Approx(0.25).epsilon(1e-15));
  const double mass = oracle::integrate([](double s) {
    const double x = s / (1 - s);
    return generalized_pareto_density(1, 1, 1, x) / ((1 - s) * (1 - s));
  }, 0, 1 - 1e-12);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  for (double x : {0.1, 1.0, 4.0, 30.0}) {
    const double want = oracle::integrate([](double y) { return generalized_pareto_density(2, 3, 2, y); }, 0, x);
    CHECK(generalized_pareto_cdf(2, 3, 2, x) == doctest::Approx(want).epsilon(1e-10));
  }
  // n = 1: Lomax cdf 1 - (beta / (beta + x))^alpha.
  CHECK(generalized_pareto_cdf(2, 3, 1, 2) == doctest::Approx(1 - std::pow(0.6, 2)).epsilon(1e-12));
  CHECK_THROWS_AS(generalized_pareto_density(-1, 1, 1, 1), ParameterError);
}

TEST_CASE("aggregate moments and automatic x_max") {
  const CountModel m(family::MP{PM::identity()}, law::Gamma{5, 4});
  const ClaimModel c(claim::ZeroTruncGeometric{PM::logistic()});
  const auto rule = quadrature(m.law());
  const auto mom = aggregate_moments(m, c, rule);
  // E[S] = E[Theta (1 + Theta) / Theta] = 1 + E[Theta].
  CHECK(mom.mean == doctest::Approx(2.25).epsilon(1e-10));
  const auto r = aggregate_pmf(m, c, rule, auto_x_max(m, c, rule));
  CHECK(r.total_mass() >= 0.999);
}

}
