#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "mixpanjer/counts.hpp"
#include "mixpanjer/mixing.hpp"
#include "mixpanjer/param_maps.hpp"

namespace mixpanjer {

namespace claim {

// f(x) = v (1 - v)^x on {0, 1, ...}.
struct GeometricOnN0 {
  ParameterMap v;
};
// f(x) = v (1 - v)^(x - 1) on {1, 2, ...}.
struct ZeroTruncGeometric {
  ParameterMap v;
};
// f(1) = v, f(0) = 1 - v.
struct Bernoulli {
  ParameterMap v;
};
struct DegenerateAtOne {};

}  // namespace claim

/// Conditional claim-size law on the nonnegative integers.
class ClaimModel {
 public:
  using Variant = std::variant<claim::GeometricOnN0, claim::ZeroTruncGeometric, claim::Bernoulli, claim::DegenerateAtOne>;

  ClaimModel(Variant v);  // NOLINT(google-explicit-constructor)

  const Variant& variant() const { return v_; }
  std::string name() const;

  /// Checks the parameter map against `support`; throws ParameterError.
  void validate(const Interval& support) const;

  /// Maps v, or nullptr for DegenerateAtOne.
  const ParameterMap* probability_map() const;

  double f0(double theta) const;
  double conditional_mean(double theta) const;
  double conditional_variance(double theta) const;
  bool depends_on_theta() const;

  /// One draw of a claim given theta.
  long long draw(double theta, Xoshiro256& rng) const;

 private:
  Variant v_;
};

/// f_theta(0), ..., f_theta(x_max).
std::vector<double> claim_pmf(const ClaimModel& model, double theta, std::size_t x_max);

/// Mass of f_theta beyond x_max, in closed form.
double claim_tail_mass(const ClaimModel& model, double theta, std::size_t x_max);

struct AggregatePmf {
  std::vector<double> g;                    // g(0) .. g(x_max)
  std::vector<std::vector<double>> slices;  // slices[i][x] = g_{theta_i}(x); may be empty
  // D[x][y] for 1 <= y <= x <= x_max when requested; NaN where g(x - y) == 0.
  std::vector<std::vector<double>> D;
  // Claim mass beyond x_max averaged over the rule.
  double truncated_claim_mass = 0.0;

  double total_mass() const;
  std::vector<double> cumulative() const;
  /// Normalized node weights w_i g_{theta_i}(x) / g(x); empty if g(x) == 0.
  std::vector<double> posterior_weights(std::span<const double> weights, std::size_t x) const;
};

inline constexpr double kDenominatorEpsilon = 1e-12;

/// Aggregate-claims pmf of the mixed compound model: per node the classical
/// recursion
///   g_theta(x) = sum_{y=1}^{x} (a + b y / x) f_theta(y) g_theta(x - y) / (1 - a f_theta(0))
/// started from g_theta(0) = pgf(f_theta(0)), then mixed over the rule.
/// The per-node slices are kept when `keep_slices` or `emit_D` is set.
AggregatePmf aggregate_pmf(const CountModel& count, const ClaimModel& claims, const QuadratureRule& rule,
                           std::size_t x_max, bool emit_D = false, bool keep_slices = true);

inline constexpr std::size_t kMaxDiagnosticXMax = 5000;
inline constexpr double kAutoMassTarget = 0.9995;

/// aggregate_pmf with x_max chosen automatically: at least auto_x_max, and
/// extended by doubling (up to kMaxAutoXMax) until the captured mass reaches
/// `target_mass`; then trimmed to the first x reaching it. Slices are not kept.
AggregatePmf aggregate_pmf_auto(const CountModel& count, const ClaimModel& claims, const QuadratureRule& rule,
                                bool emit_D = false, double target_mass = kAutoMassTarget);

/// Brute-force reference: sum_i w_i sum_{n <= n_cut} p_n(theta_i) f_theta_i^{*n}(x)
/// with counts from their closed-form pmfs and direct convolutions. Throws
/// TruncationError if the neglected count mass could reach 1e-12.
std::vector<double> truncated_mixture_oracle(const CountModel& count, const ClaimModel& claims,
                                             const QuadratureRule& rule, std::size_t x_max, std::size_t n_cut);

/// sum_i w_i f_theta_i^{*n}(x); not the n-fold convolution of the mixed marginal.
std::vector<double> mixed_convolution(const ClaimModel& claims, const QuadratureRule& rule, unsigned n,
                                      std::size_t x_max);

/// P(S > u) = E[(1 - rho2) exp(-rho2 v u)] for geometric counts and
/// conditionally exponential claims with rate v.
double tail_mixed_compound_geometric(const ParameterMap& rho2, const ParameterMap& v, const QuadratureRule& rule,
                                     double u);

/// Density of the sum of n conditionally Exp(theta) claims with Theta ~ Ga(alpha, beta).
double generalized_pareto_density(double alpha, double beta, unsigned n, double x);

/// Distribution function of the same law by quadrature of the density.
double generalized_pareto_cdf(double alpha, double beta, unsigned n, double x);

struct AggregateMoments {
  double mean;
  double variance;
};

/// Mean and variance of S from conditional moments, by quadrature.
AggregateMoments aggregate_moments(const CountModel& count, const ClaimModel& claims, const QuadratureRule& rule);

inline constexpr std::size_t kMaxAutoXMax = std::size_t{1} << 20;

/// ceil(mean + 10 sd) of S, capped at kMaxAutoXMax.
std::size_t auto_x_max(const CountModel& count, const ClaimModel& claims, const QuadratureRule& rule);

}  // namespace mixpanjer
