#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "mixpanjer/param_maps.hpp"
#include "mixpanjer/random.hpp"

namespace mixpanjer {

namespace law {

struct Degenerate {
  double theta0;
};
// Rate parametrization: density beta^alpha / Gamma(alpha) x^(alpha-1) e^(-beta x).
struct Gamma {
  double alpha;
  double beta;
};
struct Exponential {
  double beta;
};
struct Beta {
  double alpha;
  double beta;
};
// Mean mu, shape phi.
struct InverseGaussian {
  double mu;
  double phi;
};
// Density beta^2 / (beta + 1) (t + 1) e^(-beta t).
struct Lindley {
  double beta;
};
// Poisson(a) on {0, 1, 2, ...}.
struct PoissonMix {
  double a;
};
// w1 Exp(beta) + w2 Gamma(alpha, beta).
struct ExpGammaMixture {
  double w1;
  double w2;
  double alpha;
  double beta;
};

}  // namespace law

/// Distribution of the structural parameter.
class MixingLaw {
 public:
  using Variant = std::variant<law::Degenerate, law::Gamma, law::Exponential, law::Beta, law::InverseGaussian,
                               law::Lindley, law::PoissonMix, law::ExpGammaMixture>;

  // Throws ParameterError if the parameters are invalid.
  MixingLaw(Variant v);  // NOLINT(google-explicit-constructor)
  template <class Law>
    requires std::is_constructible_v<Variant, Law> && (!std::is_same_v<std::decay_t<Law>, Variant>)
  MixingLaw(Law law) : MixingLaw(Variant(std::move(law))) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const { return v_; }
  std::string name() const;
  std::string describe() const;

  bool is_discrete() const;
  bool is_degenerate() const;
  Interval support() const;

  /// Density (continuous laws) or pmf (discrete laws) at theta.
  double density(double theta) const;
  double mean() const;
  double variance() const;

  /// One draw using `rng`.
  double draw(Xoshiro256& rng) const;

 private:
  Variant v_;
};

enum class RuleKind { Continuous, Discrete };

/// Nodes and weights standing in for the conditional family indexed by the
/// structural parameter. Weights already include the mixing density and sum
/// to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  RuleKind kind = RuleKind::Continuous;

  std::size_t size() const { return nodes.size(); }
};

inline constexpr std::size_t kDefaultNodeCount = 200;
inline constexpr double kDiscreteTailThreshold = 1e-14;

/// Builds the quadrature rule for `law`.
///
/// Continuous laws use Gauss-Legendre on (0, 1), composed with t / (1 - t)
/// for laws on (0, inf). When the density has an integrable power singularity
/// at an end of its support (shape parameter below one) that end is graded by
/// s -> s^(1/shape), which makes the transformed integrand regular. Zero
/// weight nodes are dropped and the weights are renormalized to sum to one.
QuadratureRule quadrature(const MixingLaw& law, std::size_t node_count = kDefaultNodeCount);

using ThetaFunction = std::function<double(double)>;

/// Sum of w_i h(theta_i) in node order. Throws NonFiniteError if h is not
/// finite at some node.
double expect(const QuadratureRule& rule, const ThetaFunction& h);

/// n-th derivative at t of the Laplace transform E[exp(-t Theta)]. Available
/// for Gamma, Exponential and ExpGammaMixture; UnsupportedLawError otherwise.
double laplace_derivative(const MixingLaw& law, unsigned n, double t);

/// Natural log of |laplace_derivative(law, n, t)|; its sign is (-1)^n.
double log_abs_laplace_derivative(const MixingLaw& law, unsigned n, double t);

/// `count` i.i.d. draws; draw i comes from stream (seed, i).
std::vector<double> sample(const MixingLaw& law, std::uint64_t seed, std::size_t count);

}  // namespace mixpanjer
