#include <cmath>
#include <numeric>

#include <doctest.h>

#include "mixpanjer/counts.hpp"
#include "mixpanjer/errors.hpp"
#include "oracles.hpp"

using namespace mixpanjer;
using PM = ParameterMap;

TEST_SUITE("counts") {

TEST_CASE("conditional pmf examples") {
  const CountModel mp(family::MP{PM::identity()}, law::Gamma{1, 1});
  const auto p = conditional_count_pmf(mp, 2.0, 3);
  const double e2 = std::exp(-2.0);
  CHECK(p[0] == doctest::Approx(e2).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(2 * e2).epsilon(1e-15));
  CHECK(p[2] == doctest::Approx(2 * e2).epsilon(1e-15));
  CHECK(p[3] == doctest::Approx(4.0 / 3 * e2).epsilon(1e-15));

  const CountModel mb(family::MB{2, PM::constant(0.5)}, law::Gamma{1, 1});
  CHECK(conditional_count_pmf(mb, 0.7, 4) == std::vector<double>{0.25, 0.5, 0.25, 0.0, 0.0});

  const CountModel mnb(family::MNB{PM::constant(1), PM::constant(0.5)}, law::Gamma{1, 1});
  CHECK(conditional_count_pmf(mnb, 1.0, 2) == std::vector<double>{0.5, 0.25, 0.125});
}

TEST_CASE("conditional pmfs match direct formulas and sum to one") {
  const CountModel mp(family::MP{PM::identity()}, law::Gamma{1, 1});
  const CountModel mb(family::MB{7, PM::logistic()}, law::Gamma{1, 1});
  const CountModel mnb(family::MNB{PM::scale(2), PM::reciprocal1p()}, law::Gamma{1, 1});
  for (double t : {0.1, 1.0, 3.7}) {
    const auto a = conditional_count_pmf(mp, t, 200);
    const auto b = conditional_count_pmf(mb, t, 200);
    const auto c = conditional_count_pmf(mnb, t, 400);
    for (std::size_t n = 0; n <= 40; ++n) {
      CHECK(a[n] == doctest::Approx(oracle::poisson(t, n)).epsilon(1e-12));
      CHECK(b[n] == doctest::Approx(oracle::binomial(7, t / (1 + t), n)).epsilon(1e-12));
      CHECK(c[n] == doctest::Approx(oracle::negbin(2 * t, 1 / (1 + t), n)).epsilon(1e-12));
    }
    CHECK(std::accumulate(a.begin(), a.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::accumulate(b.begin(), b.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::accumulate(c.begin(), c.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("pgf") {
  const CountModel mp(family::MP{PM::identity()}, law::Gamma{1, 1});
  CHECK(pgf(mp, 2.0, 1.0) == 1.0);
  CHECK(pgf(mp, 2.0, 0.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  const CountModel mnb(family::MNB{PM::constant(1), PM::constant(0.5)}, law::Gamma{1, 1});
  CHECK(pgf(mnb, 1.0, 0.5) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  const CountModel mb(family::MB{3, PM::constant(0.2)}, law::Gamma{1, 1});
  CHECK(pgf(mb, 1.0, -1.0) == doctest::Approx(std::pow(0.6, 3)).epsilon(1e-15));
  CHECK_THROWS_AS(pgf(mp, 1.0, 1.5), DomainError);
}

TEST_CASE("Table 1 maps") {
  const CountModel mb(family::MB{4, PM::constant(0.25)}, law::Gamma{1, 1});
  const auto m = ab_maps(mb);
  CHECK(m.a(1.0) == doctest::Approx(-1.0 / 3));
  CHECK(m.b(1.0) == doctest::Approx(5.0 / 3));
  const CountModel mnb(family::MNB{PM::constant(3), PM::constant(0.25)}, law::Gamma{1, 1});
  CHECK(ab_maps(mnb).a(2.0) == doctest::Approx(0.75));
  CHECK(ab_maps(mnb).b(2.0) == doctest::Approx(1.5));
  const CountModel mp(family::MP{PM::scale(2)}, law::Gamma{1, 1});
  CHECK(ab_maps(mp).a(2.0) == 0.0);
  CHECK(ab_maps(mp).b(2.0) == 4.0);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(CountModel(family::MB{3, PM::identity()}, law::Gamma{1, 1}), ParameterError);
  CHECK_NOTHROW(CountModel(family::MB{3, PM::identity()}, law::Beta{1, 1}));
  CHECK_THROWS_AS(CountModel(family::MB{0, PM::constant(0.5)}, law::Gamma{1, 1}), ParameterError);
  CHECK_THROWS_AS(CountModel(family::MNB{PM::constant(1), PM::identity()}, law::Gamma{1, 1}), ParameterError);
  CHECK_THROWS_AS(CountModel(family::MNB{PM::affine(1, -1), PM::constant(0.5)}, law::Gamma{1, 1}), ParameterError);
  CHECK_THROWS_AS(CountModel(family::MP{PM::affine(1, -1)}, law::Gamma{1, 1}), ParameterError);
  CHECK_THROWS_AS(CountModel(family::MB{2, PM::neg_log_sq()}, law::Gamma{1, 1}), ParameterError);
}

TEST_CASE("mixed count examples") {
  const auto r = mixed_count_pmf(CountModel(family::MP{PM::identity()}, law::Gamma{1, 1}), quadrature(law::Gamma{1, 1}), 2);
  CHECK(std::abs(r.p[0] - 0.5) <= 1e-10);
  CHECK(std::abs(r.p[1] - 0.25) <= 1e-10);
  CHECK(std::abs(r.p[2] - 0.125) <= 1e-10);

  const CountModel deg(family::MP{PM::identity()}, law::Degenerate{2});
  const auto d = mixed_count_pmf(deg, quadrature(deg.law()), 20);
  const auto c = conditional_count_pmf(deg, 2.0, 20);
  for (std::size_t n = 0; n <= 20; ++n) CHECK(std::abs(d.p[n] - c[n]) <= 1e-14);

  const CountModel bern(family::MB{1, PM::identity()}, law::Beta{1, 1});
  const auto b = mixed_count_pmf(bern, quadrature(bern.law(), 64), 3);
  CHECK(std::abs(b.p[0] - 0.5) <= 1e-12);
  CHECK(std::abs(b.p[1] - 0.5) <= 1e-12);
  CHECK(b.p[2] == 0.0);
  CHECK(b.p[3] == 0.0);
}

TEST_CASE("mixed pmf against closed-form mixtures") {
  for (auto [a, b] : {std::pair{1.0, 1.0}, {5.0, 4.0}, {0.5, 2.0}}) {
    const CountModel m(family::MP{PM::identity()}, law::Gamma{a, b});
    const auto r = mixed_count_pmf(m, quadrature(m.law()), 50);
    for (std::size_t n = 0; n <= 50; ++n) CHECK(std::abs(r.p[n] - oracle::gamma_poisson(a, b, n)) <= 1e-8);
  }
  for (auto [mm, a, b] : {std::tuple{1u, 1.0, 1.0}, {5u, 2.0, 3.0}, {10u, 6.0, 8.0}}) {
    const CountModel m(family::MB{mm, PM::identity()}, law::Beta{a, b});
    const auto r = mixed_count_pmf(m, quadrature(m.law()), 50);
    for (std::size_t n = 0; n <= 50; ++n) CHECK(std::abs(r.p[n] - oracle::beta_binomial(mm, a, b, n)) <= 1e-8);
  }
  for (auto [rr, a, b] : {std::tuple{1.0, 1.0, 1.0}, {2.0, 2.0, 4.0}, {5.0, 4.0, 4.0}}) {
    const CountModel m(family::MNB{PM::constant(rr), PM::identity()}, law::Beta{a, b});
    const auto r = mixed_count_pmf(m, quadrature(m.law()), 50);
    for (std::size_t n = 0; n <= 50; ++n) CHECK(std::abs(r.p[n] - oracle::beta_negbin(rr, a, b, n)) <= 1e-8);
  }
}

TEST_CASE("ratio diagnostics satisfy p_n = C_n p_{n-1}") {
  const CountModel models[] = {
      CountModel(family::MP{PM::identity()}, law::InverseGaussian{2, 5}),
      CountModel(family::MB{10, PM::identity()}, law::Beta{6, 8}),
      CountModel(family::MNB{PM::identity(), PM::exp_neg()}, law::Gamma{5, 4}),
  };
  for (const auto& m : models) {
    const auto r = mixed_count_pmf(m, quadrature(m.law()), 60);
    CHECK_FALSE(r.C[0].has_value());
    for (std::size_t n = 1; n <= 60; ++n)
      if (r.C[n]) CHECK(std::abs(r.p[n] - *r.C[n] * r.p[n - 1]) <= 1e-12);
    double total = 0.0;
    for (double p : r.p) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(total <= 1 + 1e-9);
  }
}

TEST_CASE("posterior weights") {
  const CountModel m(family::MP{PM::identity()}, law::Gamma{2, 1});
  const auto rule = quadrature(m.law());
  const auto r = mixed_count_pmf(m, rule, 5);
  const auto w = r.posterior_weights(rule.weights, 3);
  REQUIRE(w.size() == rule.size());
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // Posterior of Theta given N = n under Gamma(2, 1) is Gamma(2 + n, 2).
  double mean = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) mean += w[i] * rule.nodes[i];
  CHECK(mean == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("closed-form recursions") {
  auto neyman = closed_form_count_pmf(ClosedForm::NeymanA, std::vector<double>{1.0}, 1);
  CHECK(neyman[0] == doctest::Approx(0.5314636).epsilon(1e-7));
  CHECK(neyman[1] == doctest::Approx(std::exp(-1.0) * neyman[0]).epsilon(1e-15));
  CHECK(neyman[1] == doctest::Approx(0.1955151).epsilon(1e-6));

  const auto nh = closed_form_count_pmf(ClosedForm::NegHypergeometric, std::vector<double>{1, 1, 1}, 3);
  CHECK(nh[0] == doctest::Approx(0.5));
  CHECK(nh[1] == doctest::Approx(0.5));
  CHECK(nh[2] == 0.0);
  CHECK(nh[3] == 0.0);

  const auto gw = closed_form_count_pmf(ClosedForm::GeneralizedWaring, std::vector<double>{1, 1, 1}, 1);
  CHECK(gw[0] == doctest::Approx(0.5));
  CHECK(gw[1] == doctest::Approx(1.0 / 6));

  const auto lp = closed_form_count_pmf(ClosedForm::LindleyPoisson, std::vector<double>{1}, 2);
  CHECK(lp[0] == doctest::Approx(0.375));
  CHECK(lp[1] == doctest::Approx(0.25));
  CHECK(lp[2] == doctest::Approx(0.15625));

  for (double a : {0.5, 1.0, 2.0}) {
    const auto p = closed_form_count_pmf(ClosedForm::NeymanA, std::vector<double>{a}, 30);
    for (std::size_t n = 0; n <= 30; ++n) CHECK(std::abs(p[n] - oracle::neyman_a(a, n)) <= 1e-10);
  }
  for (double b : {0.5, 1.0, 3.0}) {
    const auto p = closed_form_count_pmf(ClosedForm::LindleyPoisson, std::vector<double>{b}, 50);
    for (std::size_t n = 0; n <= 50; ++n) CHECK(p[n] == doctest::Approx(oracle::lindley_poisson(b, n)).epsilon(1e-12));
  }
  const auto eg = closed_form_count_pmf(ClosedForm::ExpGammaPoisson, std::vector<double>{0.3, 0.7, 2.5, 1.5}, 40);
  for (std::size_t n = 0; n <= 40; ++n) {
    const double want = 0.3 * oracle::gamma_poisson(1, 1.5, n) + 0.7 * oracle::gamma_poisson(2.5, 1.5, n);
    CHECK(eg[n] == doctest::Approx(want).epsilon(1e-12));
  }
  const auto nb = closed_form_count_pmf(ClosedForm::NegBinGamma, std::vector<double>{5, 4}, 40);
  for (std::size_t n = 0; n <= 40; ++n) CHECK(nb[n] == doctest::Approx(oracle::gamma_poisson(5, 4, n)).epsilon(1e-12));

  CHECK(closed_form_from_name("GeneralizedWaring") == ClosedForm::GeneralizedWaring);
  CHECK_THROWS_AS(closed_form_from_name("Delaporte"), ParameterError);
  CHECK_THROWS_AS(closed_form_count_pmf(ClosedForm::NeymanA, std::vector<double>{-1}, 3), ParameterError);
  CHECK_THROWS_AS(closed_form_count_pmf(ClosedForm::NegBinGamma, std::vector<double>{1}, 3), ParameterError);
  CHECK_THROWS_AS(closed_form_count_pmf(ClosedForm::NegHypergeometric, std::vector<double>{1.5, 1, 1}, 3),
                  ParameterError);
}

TEST_CASE("Neyman Type A through the mixture engine") {
  const CountModel m(family::MP{PM::identity()}, law::PoissonMix{2});
  const auto r = mixed_count_pmf(m, quadrature(m.law()), 30);
  for (std::size_t n = 0; n <= 30; ++n) CHECK(std::abs(r.p[n] - oracle::neyman_a(2, n)) <= 1e-12);
}

TEST_CASE("Laplace-derivative recursion") {
  const auto g = laplace_mixed_poisson_pmf(law::Gamma{1, 1}, 3);
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[1] == doctest::Approx(0.25));
  CHECK(g[2] == doctest::Approx(0.125));
  for (double b : {0.5, 1.0, 3.0}) {
    const auto lap = laplace_mixed_poisson_pmf(law::ExpGammaMixture{b / (b + 1), 1 / (b + 1), 2, b}, 50);
    const auto lin = closed_form_count_pmf(ClosedForm::LindleyPoisson, std::vector<double>{b}, 50);
    for (std::size_t n = 0; n <= 50; ++n) CHECK(std::abs(lap[n] - lin[n]) <= 1e-12);
  }
  CHECK_THROWS_AS(laplace_mixed_poisson_pmf(law::Beta{1, 1}, 3), UnsupportedLawError);
}

TEST_CASE("thinning transform") {
  const CountModel mp(family::MP{PM::identity()}, law::Gamma{1, 1});
  const auto t = thin(ab_maps(mp), PM::constant(0.5));
  CHECK(t.a(3.0) == 0.0);
  CHECK(t.b(3.0) == 1.5);

  const CountModel mnb(family::MNB{PM::constant(3), PM::logistic()}, law::Gamma{1, 1});
  const auto id = thin(ab_maps(mnb), PM::constant(1.0));
  for (double th : {0.2, 1.0, 5.0}) {
    CHECK(id.a(th) == doctest::Approx(ab_maps(mnb).a(th)).epsilon(1e-15));
    CHECK(id.b(th) == doctest::Approx(ab_maps(mnb).b(th)).epsilon(1e-15));
  }

  const AbMaps half([](double) { return 0.5; }, [](double) { return 0.5; });
  const auto h = thin(half, PM::constant(0.5));
  CHECK(h.a(1.0) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(h.b(1.0) == doctest::Approx(1.0 / 3).epsilon(1e-15));

  const CountModel pois(family::MP{PM::constant(4)}, law::Degenerate{1});
  const auto r = thinned_count_pmf(pois, PM::constant(0.5), quadrature(pois.law()), 20);
  for (std::size_t n = 0; n <= 20; ++n) CHECK(r.p[n] == doctest::Approx(oracle::poisson(2, n)).epsilon(1e-14));

  const auto same = thinned_count_pmf(mnb, PM::constant(1.0), quadrature(mnb.law()), 20);
  const auto orig = mixed_count_pmf(mnb, quadrature(mnb.law()), 20);
  for (std::size_t n = 0; n <= 20; ++n) CHECK(std::abs(same.p[n] - orig.p[n]) <= 1e-15);

  CHECK_THROWS_AS(thin(ab_maps(mp), PM::constant(1.5)).a(1.0), DomainError);
}

}
