#include "mixpanjer/counts.hpp"

#include <cmath>

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

void require_range(const ParameterMap& map, const MixingLaw& law, const Interval& required, std::string_view what) {
  if (!check_range(map, law.support(), required))
    throw ParameterError(fmt::format("{}: map {} does not send the support {} of {} into {}", what, map.name(),
                                     to_string(law.support()), law.describe(), to_string(required)));
}

// Evaluates p_n(theta) for n = 1..n_max from p_0 with factor(n) = a + b / n.
// Entries past `last` are exactly zero.
template <class Factor>
void run_recursion(std::vector<double>& p, Factor factor, std::optional<std::size_t> last) {
  for (std::size_t n = 1; n < p.size(); ++n) {
    if (last && n > *last) {
      p[n] = 0.0;
      continue;
    }
    p[n] = factor(static_cast<double>(n)) * p[n - 1];
  }
}

CountPmfResult mix_slices(std::vector<std::vector<double>> slices, const QuadratureRule& rule, const AbMaps& maps,
                          std::optional<std::size_t> last, std::size_t n_max) {
  CountPmfResult out;
  out.p.assign(n_max + 1, 0.0);
  out.C.assign(n_max + 1, std::nullopt);
  for (std::size_t i = 0; i < slices.size(); ++i) {
    for (std::size_t n = 0; n <= n_max; ++n) {
      const double v = slices[i][n];
      if (!std::isfinite(v))
        throw NumericalError(
            fmt::format("count recursion produced {} for term n = {} at node {} (theta = {})", v, n, i, rule.nodes[i]));
    }
  }
  for (std::size_t n = 0; n <= n_max; ++n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < slices.size(); ++i) acc += rule.weights[i] * slices[i][n];
    out.p[n] = acc;
  }
  for (std::size_t n = 1; n <= n_max; ++n) {
    if (out.p[n - 1] > 0.0) {
      const double nn = static_cast<double>(n);
      double num = 0.0;
      for (std::size_t i = 0; i < slices.size(); ++i) {
        const double theta = rule.nodes[i];
        num += rule.weights[i] * (maps.a(theta) + maps.b(theta) / nn) * slices[i][n - 1];
      }
      out.C[n] = num / out.p[n - 1];
    } else if (!(last && n - 1 > *last) && !out.underflow_at) {
      out.underflow_at = n;
    }
  }
  out.slices = std::move(slices);
  return out;
}

}  // namespace

CountModel::CountModel(Family family, MixingLaw law) : family_(std::move(family)), law_(std::move(law)) {
  std::visit(overloaded{
                 [&](const family::MP& f) {
                   // xi = 0 is allowed: Poisson(0) is the point mass at zero (Neyman Type A at theta = 0).
                   require_range(f.xi, law_, Interval::nonnegative(), "MP xi");
                 },
                 [&](const family::MB& f) {
                   if (f.m < 1) throw ParameterError("MB: m must be >= 1");
                   require_range(f.z2, law_, Interval::unit_open(), "MB z2");
                 },
                 [&](const family::MNB& f) {
                   require_range(f.rho1, law_, Interval::positive(), "MNB rho1");
                   require_range(f.rho2, law_, Interval::unit_open(), "MNB rho2");
                 },
             },
             family_);
}

std::string CountModel::family_name() const {
  return std::visit(overloaded{
                        [](const family::MP&) { return std::string("MP"); },
                        [](const family::MB&) { return std::string("MB"); },
                        [](const family::MNB&) { return std::string("MNB"); },
                    },
                    family_);
}

std::optional<std::size_t> CountModel::max_count() const {
  if (const auto* f = std::get_if<family::MB>(&family_)) return f->m;
  return std::nullopt;
}

double CountModel::conditional_mean(double theta) const {
  return std::visit(overloaded{
                        [&](const family::MP& f) { return f.xi(theta); },
                        [&](const family::MB& f) { return f.m * f.z2(theta); },
                        [&](const family::MNB& f) {
                          const double rho = f.rho2(theta);
                          return f.rho1(theta) * (1.0 - rho) / rho;
                        },
                    },
                    family_);
}

double CountModel::conditional_variance(double theta) const {
  return std::visit(overloaded{
                        [&](const family::MP& f) { return f.xi(theta); },
                        [&](const family::MB& f) {
                          const double z = f.z2(theta);
                          return f.m * z * (1.0 - z);
                        },
                        [&](const family::MNB& f) {
                          const double rho = f.rho2(theta);
                          return f.rho1(theta) * (1.0 - rho) / (rho * rho);
                        },
                    },
                    family_);
}

AbMaps ab_maps(const CountModel& model) {
  return std::visit(overloaded{
                        [](const family::MP& f) {
                          return AbMaps([](double) { return 0.0; }, [xi = f.xi](double t) { return xi(t); });
                        },
                        [](const family::MB& f) {
                          const double m = f.m;
                          return AbMaps(
                              [z2 = f.z2](double t) {
                                const double z = z2(t);
                                return -z / (1.0 - z);
                              },
                              [z2 = f.z2, m](double t) {
                                const double z = z2(t);
                                return (m + 1.0) * z / (1.0 - z);
                              });
                        },
                        [](const family::MNB& f) {
                          return AbMaps([rho2 = f.rho2](double t) { return 1.0 - rho2(t); },
                                        [rho1 = f.rho1, rho2 = f.rho2](double t) {
                                          return (rho1(t) - 1.0) * (1.0 - rho2(t));
                                        });
                        },
                    },
                    model.family());
}

AbMaps thin(const AbMaps& maps, const ParameterMap& v) {
  auto denominator = [maps, v](double theta) {
    const double vt = v(theta);
    if (!(vt > 0.0 && vt <= 1.0))
      throw DomainError(fmt::format("thin: retention probability {} at theta = {} is outside (0, 1]", vt, theta));
    const double d = 1.0 - maps.a(theta) * (1.0 - vt);
    if (!(d > 0.0)) throw DomainError(fmt::format("thin: 1 - a (1 - v) = {} at theta = {}", d, theta));
    return std::pair{vt, d};
  };
  return AbMaps(
      [maps, denominator](double theta) {
        const auto [vt, d] = denominator(theta);
        return maps.a(theta) * vt / d;
      },
      [maps, denominator](double theta) {
        const auto [vt, d] = denominator(theta);
        return maps.b(theta) * vt / d;
      });
}

double pgf(const CountModel& model, double theta, double t) {
  if (!(t >= -1.0 && t <= 1.0)) throw DomainError(fmt::format("pgf: argument {} outside [-1, 1]", t));
  return std::visit(overloaded{
                        [&](const family::MP& f) { return std::exp(f.xi(theta) * (t - 1.0)); },
                        [&](const family::MB& f) {
                          const double z = f.z2(theta);
                          return std::pow(1.0 - z + z * t, static_cast<double>(f.m));
                        },
                        [&](const family::MNB& f) {
                          const double rho = f.rho2(theta);
                          return std::pow(rho / (1.0 - (1.0 - rho) * t), f.rho1(theta));
                        },
                    },
                    model.family());
}

std::vector<double> conditional_count_pmf(const CountModel& model, double theta, std::size_t n_max) {
  const AbMaps maps = ab_maps(model);
  const double a = maps.a(theta);
  const double b = maps.b(theta);
  std::vector<double> p(n_max + 1, 0.0);
  p[0] = pgf(model, theta, 0.0);
  run_recursion(p, [&](double n) { return a + b / n; }, model.max_count());
  return p;
}

std::vector<double> CountPmfResult::posterior_weights(std::span<const double> weights, std::size_t n) const {
  if (n >= p.size() || !(p[n] > 0.0)) return {};
  std::vector<double> out(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) out[i] = weights[i] * slices[i][n] / p[n];
  return out;
}

CountPmfResult mixed_count_pmf(const CountModel& model, const QuadratureRule& rule, std::size_t n_max) {
  std::vector<std::vector<double>> slices;
  slices.reserve(rule.size());
  for (double theta : rule.nodes) slices.push_back(conditional_count_pmf(model, theta, n_max));
  return mix_slices(std::move(slices), rule, ab_maps(model), model.max_count(), n_max);
}

CountPmfResult thinned_count_pmf(const CountModel& model, const ParameterMap& v, const QuadratureRule& rule,
                                 std::size_t n_max) {
  const AbMaps maps = thin(ab_maps(model), v);
  std::vector<std::vector<double>> slices;
  slices.reserve(rule.size());
  for (double theta : rule.nodes) {
    const double a = maps.a(theta);
    const double b = maps.b(theta);
    std::vector<double> p(n_max + 1, 0.0);
    p[0] = pgf(model, theta, 1.0 - v(theta));
    run_recursion(p, [&](double n) { return a + b / n; }, model.max_count());
    slices.push_back(std::move(p));
  }
  return mix_slices(std::move(slices), rule, maps, model.max_count(), n_max);
}

ClosedForm closed_form_from_name(const std::string& name) {
  if (name == "NeymanA") return ClosedForm::NeymanA;
  if (name == "NegBinGamma") return ClosedForm::NegBinGamma;
  if (name == "LindleyPoisson") return ClosedForm::LindleyPoisson;
  if (name == "ExpGammaPoisson") return ClosedForm::ExpGammaPoisson;
  if (name == "NegHypergeometric") return ClosedForm::NegHypergeometric;
  if (name == "GeneralizedWaring") return ClosedForm::GeneralizedWaring;
  throw ParameterError(fmt::format("unknown closed-form kind '{}'", name));
}

std::string to_string(ClosedForm kind) {
  switch (kind) {
    case ClosedForm::NeymanA: return "NeymanA";
    case ClosedForm::NegBinGamma: return "NegBinGamma";
    case ClosedForm::LindleyPoisson: return "LindleyPoisson";
    case ClosedForm::ExpGammaPoisson: return "ExpGammaPoisson";
    case ClosedForm::NegHypergeometric: return "NegHypergeometric";
    case ClosedForm::GeneralizedWaring: return "GeneralizedWaring";
  }
  return "?";
}

std::vector<double> closed_form_count_pmf(ClosedForm kind, std::span<const double> params, std::size_t n_max) {
  auto need = [&](std::size_t count) {
    if (params.size() != count)
      throw ParameterError(
          fmt::format("{} takes {} parameter(s), got {}", to_string(kind), count, params.size()));
    for (double x : params)
      if (!std::isfinite(x)) throw ParameterError(fmt::format("{}: parameters must be finite", to_string(kind)));
  };
  auto positive = [&](double x, const char* what) {
    if (!(x > 0.0)) throw ParameterError(fmt::format("{}: {} must be > 0", to_string(kind), what));
  };

  std::vector<double> p(n_max + 1, 0.0);
  switch (kind) {
    case ClosedForm::NeymanA: {
      need(1);
      const double a = params[0];
      positive(a, "a");
      const double e1 = std::exp(-1.0);
      p[0] = std::exp(-a * (1.0 - e1));
      for (std::size_t n = 1; n <= n_max; ++n) {
        double acc = 0.0;
        double inv_fact = 1.0;  // 1 / k!
        for (std::size_t k = 0; k < n; ++k) {
          if (k > 0) inv_fact /= static_cast<double>(k);
          acc += inv_fact * p[n - 1 - k];
        }
        p[n] = a * e1 / static_cast<double>(n) * acc;
      }
      break;
    }
    case ClosedForm::NegBinGamma: {
      need(2);
      const double alpha = params[0];
      const double beta = params[1];
      positive(alpha, "alpha");
      positive(beta, "beta");
      p[0] = std::pow(beta / (beta + 1.0), alpha);
      for (std::size_t n = 1; n <= n_max; ++n) {
        const double nn = static_cast<double>(n);
        p[n] = (alpha + nn - 1.0) / (nn * (beta + 1.0)) * p[n - 1];
      }
      break;
    }
    case ClosedForm::LindleyPoisson: {
      need(1);
      const double beta = params[0];
      positive(beta, "beta");
      p[0] = beta * beta * (beta + 2.0) / std::pow(beta + 1.0, 3);
      for (std::size_t n = 1; n <= n_max; ++n) {
        const double nn = static_cast<double>(n);
        p[n] = (beta + nn + 2.0) / ((beta + 1.0) * (beta + 1.0 + nn)) * p[n - 1];
      }
      break;
    }
    case ClosedForm::ExpGammaPoisson: {
      need(4);
      const double w1 = params[0];
      const double w2 = params[1];
      const double alpha = params[2];
      const double beta = params[3];
      positive(alpha, "alpha");
      positive(beta, "beta");
      if (w1 < 0.0 || w2 < 0.0 || std::abs(w1 + w2 - 1.0) > 1e-12)
        throw ParameterError("ExpGammaPoisson: weights must be nonnegative and sum to 1");
      p[0] = w1 * beta / (beta + 1.0) + w2 * std::pow(beta / (beta + 1.0), alpha);
      // log of w1 n! (beta+1)^(alpha-1) + w2 (alpha)_n beta^(alpha-1)
      auto log_bracket = [&](double n) {
        const double exp_part = w1 > 0.0 ? std::log(w1) + std::lgamma(n + 1.0) + (alpha - 1.0) * std::log(beta + 1.0)
                                         : -INFINITY;
        const double gamma_part =
            w2 > 0.0 ? std::log(w2) + special::log_ascending_factorial(alpha, n) + (alpha - 1.0) * std::log(beta)
                     : -INFINITY;
        return special::log_add_exp(exp_part, gamma_part);
      };
      for (std::size_t n = 1; n <= n_max; ++n) {
        const double nn = static_cast<double>(n);
        p[n] = std::exp(log_bracket(nn) - log_bracket(nn - 1.0)) / (nn * (beta + 1.0)) * p[n - 1];
      }
      break;
    }
    case ClosedForm::NegHypergeometric: {
      need(3);
      const double m = params[0];
      const double alpha = params[1];
      const double beta = params[2];
      if (!(m >= 1.0) || m != std::floor(m)) throw ParameterError("NegHypergeometric: m must be a positive integer");
      positive(alpha, "alpha");
      positive(beta, "beta");
      double p0 = 1.0;
      for (double k = 0.0; k < m; k += 1.0) p0 *= (beta + k) / (alpha + beta + k);
      p[0] = p0;
      for (std::size_t n = 1; n <= n_max; ++n) {
        const double nn = static_cast<double>(n);
        p[n] = nn > m ? 0.0 : (m - nn + 1.0) * (alpha + nn - 1.0) / (nn * (beta + m - nn)) * p[n - 1];
      }
      break;
    }
    case ClosedForm::GeneralizedWaring: {
      need(3);
      const double r = params[0];
      const double alpha = params[1];
      const double beta = params[2];
      positive(r, "r");
      positive(alpha, "alpha");
      positive(beta, "beta");
      p[0] = std::exp(special::log_beta(alpha + r, beta) - special::log_beta(alpha, beta));
      for (std::size_t n = 1; n <= n_max; ++n) {
        const double nn = static_cast<double>(n);
        p[n] = (r + nn - 1.0) * (beta + nn - 1.0) / (nn * (alpha + beta + r + nn - 1.0)) * p[n - 1];
      }
      break;
    }
  }
  return p;
}

std::vector<double> laplace_mixed_poisson_pmf(const MixingLaw& law, std::size_t n_max) {
  std::vector<double> p(n_max + 1, 0.0);
  double log_prev = log_abs_laplace_derivative(law, 0, 1.0);
  p[0] = std::exp(log_prev);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double log_cur = log_abs_laplace_derivative(law, static_cast<unsigned>(n), 1.0);
    // -(1/n) u^(n)(1) / u^(n-1)(1); consecutive derivatives alternate in sign.
    p[n] = std::exp(log_cur - log_prev) / static_cast<double>(n) * p[n - 1];
    log_prev = log_cur;
  }
  return p;
}

}  // namespace mixpanjer
