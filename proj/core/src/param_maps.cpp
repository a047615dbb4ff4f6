#include "mixpanjer/param_maps.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mixpanjer/errors.hpp"

namespace mixpanjer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lower_ok(double lo, bool lo_closed, double other_lo, bool other_lo_closed) {
  if (other_lo > lo) return true;
  if (other_lo < lo) return false;
  return lo_closed || !other_lo_closed;
}

bool upper_ok(double hi, bool hi_closed, double other_hi, bool other_hi_closed) {
  if (other_hi < hi) return true;
  if (other_hi > hi) return false;
  return hi_closed || !other_hi_closed;
}

}  // namespace

Interval Interval::positive() { return open(0.0, kInf); }
Interval Interval::nonnegative() { return left_closed(0.0, kInf); }
Interval Interval::unit_open() { return open(0.0, 1.0); }
Interval Interval::unit_right_closed() { return {0.0, 1.0, false, true}; }
Interval Interval::real_line() { return open(-kInf, kInf); }

bool Interval::empty() const {
  if (std::isnan(lo) || std::isnan(hi)) return true;
  if (lo < hi) return false;
  return !(lo == hi && lo_closed && hi_closed && std::isfinite(lo));
}

bool Interval::contains(double x) const {
  if (std::isnan(x)) return false;
  const bool lo_in = x > lo || (x == lo && lo_closed && std::isfinite(lo));
  const bool hi_in = x < hi || (x == hi && hi_closed && std::isfinite(hi));
  return lo_in && hi_in;
}

bool Interval::contains(const Interval& other) const {
  if (other.empty()) return true;
  return lower_ok(lo, lo_closed && std::isfinite(lo), other.lo, other.lo_closed && std::isfinite(other.lo)) &&
         upper_ok(hi, hi_closed && std::isfinite(hi), other.hi, other.hi_closed && std::isfinite(other.hi));
}

std::string to_string(const Interval& iv) {
  return fmt::format("{}{}, {}{}", iv.lo_closed ? '[' : '(', iv.lo, iv.hi, iv.hi_closed ? ']' : ')');
}

ParameterMap ParameterMap::constant(double c) {
  if (!std::isfinite(c)) throw ParameterError("Constant map requires a finite value");
  return {MapKind::Constant, c};
}
ParameterMap ParameterMap::identity() { return {MapKind::Identity}; }
ParameterMap ParameterMap::affine(double slope, double intercept) {
  if (!std::isfinite(slope) || !std::isfinite(intercept))
    throw ParameterError("Affine map requires finite coefficients");
  return {MapKind::Affine, slope, intercept};
}
ParameterMap ParameterMap::logistic() { return {MapKind::Logistic}; }
ParameterMap ParameterMap::reciprocal1p() { return {MapKind::Reciprocal1p}; }
ParameterMap ParameterMap::exp_neg() { return {MapKind::ExpNeg}; }
ParameterMap ParameterMap::one_minus() { return {MapKind::OneMinus}; }
ParameterMap ParameterMap::power(double k) {
  if (!std::isfinite(k)) throw ParameterError("Power map requires a finite exponent");
  return {MapKind::Power, k};
}
ParameterMap ParameterMap::neg_log_sq() { return {MapKind::NegLogSq}; }
ParameterMap ParameterMap::scale(double c) {
  if (!std::isfinite(c)) throw ParameterError("Scale map requires a finite factor");
  return {MapKind::Scale, c};
}

ParameterMap ParameterMap::from_name(std::string_view name, const std::vector<double>& params) {
  auto expect = [&](std::size_t n) {
    if (params.size() != n)
      throw ParameterError(fmt::format("map '{}' takes {} parameter(s), got {}", name, n, params.size()));
  };
  if (name == "Constant") { expect(1); return constant(params[0]); }
  if (name == "Identity") { expect(0); return identity(); }
  if (name == "Affine") { expect(2); return affine(params[0], params[1]); }
  if (name == "Logistic") { expect(0); return logistic(); }
  if (name == "Reciprocal1p") { expect(0); return reciprocal1p(); }
  if (name == "ExpNeg") { expect(0); return exp_neg(); }
  if (name == "OneMinus") { expect(0); return one_minus(); }
  if (name == "Power") { expect(1); return power(params[0]); }
  if (name == "NegLogSq") { expect(0); return neg_log_sq(); }
  if (name == "Scale") { expect(1); return scale(params[0]); }
  throw ParameterError(fmt::format("unknown map '{}'", name));
}

std::string_view ParameterMap::name() const {
  switch (kind_) {
    case MapKind::Constant: return "Constant";
    case MapKind::Identity: return "Identity";
    case MapKind::Affine: return "Affine";
    case MapKind::Logistic: return "Logistic";
    case MapKind::Reciprocal1p: return "Reciprocal1p";
    case MapKind::ExpNeg: return "ExpNeg";
    case MapKind::OneMinus: return "OneMinus";
    case MapKind::Power: return "Power";
    case MapKind::NegLogSq: return "NegLogSq";
    case MapKind::Scale: return "Scale";
  }
  return "?";
}

std::vector<double> ParameterMap::params() const {
  switch (kind_) {
    case MapKind::Constant:
    case MapKind::Power:
    case MapKind::Scale:
      return {p0_};
    case MapKind::Affine:
      return {p0_, p1_};
    default:
      return {};
  }
}

Interval ParameterMap::natural_domain() const {
  switch (kind_) {
    case MapKind::Logistic:
    case MapKind::Reciprocal1p:
      return Interval::open(-1.0, kInf);
    case MapKind::Power:
      return p0_ < 0.0 ? Interval::positive() : Interval::nonnegative();
    case MapKind::NegLogSq:
      return Interval::unit_open();
    default:
      return Interval::real_line();
  }
}

bool ParameterMap::is_constant() const {
  switch (kind_) {
    case MapKind::Constant: return true;
    case MapKind::Affine: return p0_ == 0.0;
    case MapKind::Scale: return p0_ == 0.0;
    case MapKind::Power: return p0_ == 0.0;
    default: return false;
  }
}

double ParameterMap::raw(double t) const {
  switch (kind_) {
    case MapKind::Constant: return p0_;
    case MapKind::Identity: return t;
    case MapKind::Affine: return p0_ * t + p1_;
    case MapKind::Logistic: return t / (1.0 + t);
    case MapKind::Reciprocal1p: return 1.0 / (1.0 + t);
    case MapKind::ExpNeg: return std::exp(-t);
    case MapKind::OneMinus: return 1.0 - t;
    case MapKind::Power: return p0_ == 0.0 ? 1.0 : std::pow(t, p0_);
    case MapKind::NegLogSq: return -2.0 * std::log(t);
    case MapKind::Scale: return p0_ * t;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double ParameterMap::operator()(double theta) const {
  if (!natural_domain().contains(theta))
    throw DomainError(fmt::format("{} map evaluated at {} outside its domain {}", name(), theta,
                                  to_string(natural_domain())));
  return raw(theta);
}

double ParameterMap::limit(double x) const {
  if (is_constant()) return raw(0.0);
  switch (kind_) {
    case MapKind::Logistic:
      if (x == kInf) return 1.0;
      if (x == -1.0) return -kInf;
      break;
    case MapKind::Reciprocal1p:
      if (x == kInf) return 0.0;
      if (x == -1.0) return kInf;
      break;
    case MapKind::Power:
      if (x == 0.0 && p0_ < 0.0) return kInf;
      break;
    case MapKind::NegLogSq:
      if (x == 0.0) return kInf;
      break;
    default:
      break;
  }
  return raw(x);
}

Interval ParameterMap::image(const Interval& domain) const {
  if (is_constant()) return Interval::point(raw(0.0));
  bool increasing = true;
  switch (kind_) {
    case MapKind::Affine:
    case MapKind::Power:
    case MapKind::Scale:
      increasing = p0_ > 0.0;
      break;
    case MapKind::Reciprocal1p:
    case MapKind::ExpNeg:
    case MapKind::OneMinus:
    case MapKind::NegLogSq:
      increasing = false;
      break;
    default:
      break;
  }
  const double at_lo = limit(domain.lo);
  const double at_hi = limit(domain.hi);
  const bool lo_closed = domain.lo_closed && std::isfinite(domain.lo) && std::isfinite(at_lo);
  const bool hi_closed = domain.hi_closed && std::isfinite(domain.hi) && std::isfinite(at_hi);
  if (increasing) return {at_lo, at_hi, lo_closed, hi_closed};
  return {at_hi, at_lo, hi_closed, lo_closed};
}

bool check_range(const ParameterMap& map, const Interval& domain, const Interval& required) {
  if (domain.empty()) return true;
  if (!map.natural_domain().contains(domain)) return false;
  return required.contains(map.image(domain));
}

}  // namespace mixpanjer
