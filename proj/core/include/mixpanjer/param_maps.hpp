#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mixpanjer {

/// Real interval with independently open or closed ends. Infinite ends are
/// always treated as open.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = false;
  bool hi_closed = false;

  static Interval open(double lo, double hi) { return {lo, hi, false, false}; }
  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
  static Interval left_closed(double lo, double hi) { return {lo, hi, true, false}; }
  static Interval point(double x) { return {x, x, true, true}; }

  static Interval positive();      // (0, inf)
  static Interval nonnegative();   // [0, inf)
  static Interval unit_open();     // (0, 1)
  static Interval unit_right_closed();  // (0, 1]
  static Interval real_line();

  bool contains(double x) const;
  bool contains(const Interval& other) const;
  bool empty() const;
};

enum class MapKind {
  Constant,
  Identity,
  Affine,
  Logistic,
  Reciprocal1p,
  ExpNeg,
  OneMinus,
  Power,
  NegLogSq,
  Scale,
};

/// A function of the structural parameter, drawn from a closed catalog.
///
/// Every variant is monotone on its natural domain, which is what lets
/// `check_range` decide image containment from the endpoint limits alone.
class ParameterMap {
 public:
  static ParameterMap constant(double c);
  static ParameterMap identity();
  static ParameterMap affine(double slope, double intercept);
  static ParameterMap logistic();       // t / (1 + t)
  static ParameterMap reciprocal1p();   // 1 / (1 + t)
  static ParameterMap exp_neg();        // exp(-t)
  static ParameterMap one_minus();      // 1 - t
  static ParameterMap power(double k);  // t^k
  static ParameterMap neg_log_sq();     // -ln(t^2), t in (0, 1)
  static ParameterMap scale(double c);  // c * t

  /// Builds a map from its catalog name and parameter list; throws
  /// ParameterError on an unknown name or wrong parameter count.
  static ParameterMap from_name(std::string_view name, const std::vector<double>& params);

  MapKind kind() const { return kind_; }
  std::string_view name() const;
  std::vector<double> params() const;

  /// Throws DomainError outside natural_domain().
  double operator()(double theta) const;
  double eval(double theta) const { return (*this)(theta); }

  Interval natural_domain() const;

  /// Image of `domain` under the map. `domain` must lie inside natural_domain().
  Interval image(const Interval& domain) const;

  bool is_constant() const;

  friend bool operator==(const ParameterMap&, const ParameterMap&) = default;

 private:
  ParameterMap(MapKind kind, double p0 = 0.0, double p1 = 0.0) : kind_(kind), p0_(p0), p1_(p1) {}

  double raw(double theta) const;
  // Value, or one-sided limit, at a domain endpoint (possibly infinite).
  double limit(double x) const;

  MapKind kind_;
  double p0_;
  double p1_;
};

/// True iff the map's image over `domain` lies inside `required`.
bool check_range(const ParameterMap& map, const Interval& domain, const Interval& required);

std::string to_string(const Interval& interval);

}  // namespace mixpanjer
