#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mixpanjer/mixing.hpp"
#include "mixpanjer/param_maps.hpp"

namespace mixpanjer {

namespace family {

// Mixed Poisson with conditional mean xi(theta).
struct MP {
  ParameterMap xi;
};
// Mixed binomial with fixed size m and success probability z2(theta).
struct MB {
  unsigned m;
  ParameterMap z2;
};
// Mixed negative binomial: p_n = C(rho1 + n - 1, n) rho2^rho1 (1 - rho2)^n.
struct MNB {
  ParameterMap rho1;
  ParameterMap rho2;
};

}  // namespace family

/// Claim-number model of the mixed Panjer class together with its mixing law.
class CountModel {
 public:
  using Family = std::variant<family::MP, family::MB, family::MNB>;

  /// Validates the parameter maps against the law's support; throws
  /// ParameterError naming the offending map.
  CountModel(Family family, MixingLaw law);

  const Family& family() const { return family_; }
  const MixingLaw& law() const { return law_; }
  std::string family_name() const;

  /// Largest attainable count (m for MB), or nullopt for unbounded support.
  std::optional<std::size_t> max_count() const;

  /// Conditional mean and variance of N given theta.
  double conditional_mean(double theta) const;
  double conditional_variance(double theta) const;

 private:
  Family family_;
  MixingLaw law_;
};

/// The pair (a(theta), b(theta)) of the conditional Panjer recursion.
class AbMaps {
 public:
  using Fn = std::function<double(double)>;

  AbMaps(Fn a, Fn b) : a_(std::move(a)), b_(std::move(b)) {}

  double a(double theta) const { return a_(theta); }
  double b(double theta) const { return b_(theta); }

 private:
  Fn a_;
  Fn b_;
};

AbMaps ab_maps(const CountModel& model);

/// Transformed maps for the number of claims exceeding a retention, where
/// each claim exceeds it with probability v(theta).
AbMaps thin(const AbMaps& maps, const ParameterMap& v);

/// E[t^N | theta].
double pgf(const CountModel& model, double theta, double t);

/// p_0(theta), ..., p_{n_max}(theta) by the conditional Panjer recursion.
std::vector<double> conditional_count_pmf(const CountModel& model, double theta, std::size_t n_max);

struct CountPmfResult {
  std::vector<double> p;                 // p_0 .. p_{n_max}
  std::vector<std::optional<double>> C;  // C[n] for n = 1..n_max; C[0] is unused
  // slices[i][n] = p_n(theta_i).
  std::vector<std::vector<double>> slices;
  // First n whose ratio could not be formed because p_{n-1} underflowed
  // while the support had not ended.
  std::optional<std::size_t> underflow_at;

  /// Normalized node weights w_i p_n(theta_i) / p_n; empty if p_n == 0.
  std::vector<double> posterior_weights(std::span<const double> weights, std::size_t n) const;
};

/// Mixture p_n = sum_i w_i p_n(theta_i) with the ratio diagnostics
/// C_n = E_{mu_{n-1}}[a + b / n].
CountPmfResult mixed_count_pmf(const CountModel& model, const QuadratureRule& rule, std::size_t n_max);

/// Mixed count pmf of the thinned model: per node, the recursion with the
/// maps of `thin` started from pgf(1 - v(theta)).
CountPmfResult thinned_count_pmf(const CountModel& model, const ParameterMap& v, const QuadratureRule& rule,
                                 std::size_t n_max);

enum class ClosedForm {
  NeymanA,            // (a)
  NegBinGamma,        // (alpha, beta)
  LindleyPoisson,     // (beta)
  ExpGammaPoisson,    // (w1, w2, alpha, beta)
  NegHypergeometric,  // (m, alpha, beta)
  GeneralizedWaring,  // (r, alpha, beta)
};

ClosedForm closed_form_from_name(const std::string& name);
std::string to_string(ClosedForm kind);

/// Two-term (or, for Neyman Type A, convolution-type) recursions for mixed
/// counts whose mixing law admits them.
std::vector<double> closed_form_count_pmf(ClosedForm kind, std::span<const double> params, std::size_t n_max);

/// Mixed Poisson pmf with xi = identity via ratios of Laplace-transform
/// derivatives of the mixing law.
std::vector<double> laplace_mixed_poisson_pmf(const MixingLaw& law, std::size_t n_max);

}  // namespace mixpanjer
