#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mixpanjer/compound.hpp"
#include "mixpanjer/counts.hpp"
#include "mixpanjer/mixing.hpp"

namespace mixpanjer {

/// Claims that are conditionally exponential with rate v(theta). Simulated
/// runs with these report tails and moments only.
struct ConditionalExponential {
  ParameterMap rate;
};

using ClaimSpec = std::variant<ClaimModel, ConditionalExponential>;

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
};

struct CorrelationEstimate {
  double value = 0.0;
  double se = 0.0;  // batch-means standard error
};

/// Predicted sign of a correlation: +1, -1, 0 (independent), or no
/// prediction when the conditional means are not monotone.
using SignPrediction = std::optional<int>;

struct SignPredictions {
  SignPrediction n_x1;
  SignPrediction x1_x2;
  SignPrediction n_theta;
};

struct SimulationReport {
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  std::size_t batches = 0;
  bool integer_claims = true;

  // Empirical pmf of S on 0..x_max plus the mass above x_max. Counts are exact.
  std::vector<std::uint64_t> counts;
  std::uint64_t overflow_count = 0;
  std::vector<double> pmf;
  std::vector<double> pmf_se;
  double overflow = 0.0;

  std::vector<double> u_grid;
  std::vector<double> tail;  // P(S > u)
  std::vector<double> tail_se;

  SampleMoments theta;
  SampleMoments n;
  SampleMoments x1;
  SampleMoments s;

  CorrelationEstimate corr_n_x1;
  CorrelationEstimate corr_x1_x2;
  CorrelationEstimate corr_n_theta;

  SignPredictions predictions;
};

struct SimulationOptions {
  std::size_t paths = 100000;
  std::uint64_t seed = 1;
  std::size_t x_max = 0;
  std::vector<double> u_grid;
  std::size_t batches = 100;
  // Worker threads; results do not depend on this value.
  unsigned threads = 1;
};

/// Simulates Theta, then N given Theta, then conditionally i.i.d. claims.
/// Path i uses stream (seed, i). The first two claims of every path are
/// always drawn so that corr(X1, X2) is observable when N < 2.
SimulationReport simulate(const CountModel& count, const ClaimSpec& claims, const SimulationOptions& options);

/// Predicted correlation signs from the monotonicity of theta -> E[N | theta]
/// and theta -> E[X1 | theta] over the nodes of `rule`.
SignPredictions predict_signs(const CountModel& count, const ClaimSpec& claims, const QuadratureRule& rule);

struct SignTestResult {
  std::string name;
  SignPrediction predicted;
  double estimate = 0.0;
  double se = 0.0;
  bool passed = false;
};

inline constexpr std::size_t kMinCorrelationPaths = 100000;
inline constexpr double kSignTestSigmas = 3.0;

/// One-sided sign tests at three standard errors (two-sided band for a zero
/// prediction). Throws InsufficientPathsError below kMinCorrelationPaths.
std::vector<SignTestResult> correlation_checks(const SimulationReport& report);

}  // namespace mixpanjer
