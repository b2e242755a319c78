#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace paoi {

/// Nonnegative real extended with +inf.
///
/// Holds IEEE +inf for the infinite value; NaN and negative inputs are
/// rejected at construction so comparisons stay total.
class ExtendedReal {
public:
  constexpr ExtendedReal() = default;

  ExtendedReal(double v) : value_(v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v) || v < 0.0) {
      throw std::domain_error("ExtendedReal: value must be nonnegative, got " +
                              std::to_string(v));
    }
  }

  static ExtendedReal infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }

  [[nodiscard]] bool is_infinite() const { return std::isinf(value_); }
  [[nodiscard]] bool is_finite() const { return !is_infinite(); }

  /// Finite payload; throws for +inf.
  [[nodiscard]] double finite_value() const {
    if (is_infinite()) throw std::domain_error("ExtendedReal: value is +inf");
    return value_;
  }

  /// Raw double, +inf included.
  [[nodiscard]] double value() const { return value_; }

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    return ExtendedReal(a.value_ + b.value_);
  }
  ExtendedReal& operator+=(ExtendedReal o) { return *this = *this + o; }

  // 0 * inf = 0 (measure-theoretic convention).
  friend ExtendedReal operator*(ExtendedReal a, ExtendedReal b) {
    if (a.value_ == 0.0 || b.value_ == 0.0) return ExtendedReal(0.0);
    return ExtendedReal(a.value_ * b.value_);
  }

  friend bool operator==(ExtendedReal a, ExtendedReal b) { return a.value_ == b.value_; }
  friend std::partial_ordering operator<=>(ExtendedReal a, ExtendedReal b) {
    return a.value_ <=> b.value_;
  }

private:
  double value_ = 0.0;
};

inline ExtendedReal min(ExtendedReal a, ExtendedReal b) { return b < a ? b : a; }
inline ExtendedReal max(ExtendedReal a, ExtendedReal b) { return a < b ? b : a; }

/// Relative difference |a-b|/max(|a|,|b|); 0 when both are +inf, +inf when
/// exactly one is.
inline double relative_difference(ExtendedReal a, ExtendedReal b) {
  if (a.is_infinite() || b.is_infinite()) {
    return (a.is_infinite() && b.is_infinite())
               ? 0.0
               : std::numeric_limits<double>::infinity();
  }
  const double scale = std::max(a.value(), b.value());
  return scale == 0.0 ? 0.0 : std::abs(a.value() - b.value()) / scale;
}

inline std::ostream& operator<<(std::ostream& os, ExtendedReal x) {
  if (x.is_infinite()) return os << "inf";
  return os << x.value();
}

}  // namespace paoi
