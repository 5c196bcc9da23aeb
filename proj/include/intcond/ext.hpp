#pragma once

// Extended half-line [0, +inf] and extended real line [-inf, +inf].
//
// Monotone functions in this library take and return plain doubles where
// +inf / -inf carry their usual meaning. ExtReal and ExtSigned are the
// checked value types used at API boundaries that need the conventions
// spelled out (reciprocal of 0 is inf, log of 0 is -inf, ...).

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <compare>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace intcond {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class ExtSigned;

/// A point of [0, +inf].
class ExtReal {
 public:
  constexpr ExtReal() = default;
  explicit ExtReal(double v) : v_(v) {
    if (std::isnan(v) || v < 0.0)
      throw std::domain_error("ExtReal: value outside [0, inf]: " + std::to_string(v));
  }
  static ExtReal infinity() { return ExtReal(kInf); }

  [[nodiscard]] constexpr double value() const { return v_; }
  [[nodiscard]] bool is_infinite() const { return std::isinf(v_); }

  /// 1/x with 1/0 = inf and 1/inf = 0.
  [[nodiscard]] ExtReal recip() const {
    if (v_ == 0.0) return infinity();
    if (is_infinite()) return ExtReal(0.0);
    return ExtReal(1.0 / v_);
  }
  [[nodiscard]] ExtSigned log() const;

  constexpr auto operator<=>(const ExtReal&) const = default;

 private:
  double v_ = 0.0;
};

/// A point of [-inf, +inf].
class ExtSigned {
 public:
  constexpr ExtSigned() = default;
  explicit ExtSigned(double v) : v_(v) {
    if (std::isnan(v)) throw std::domain_error("ExtSigned: NaN");
  }
  [[nodiscard]] constexpr double value() const { return v_; }
  [[nodiscard]] bool is_infinite() const { return std::isinf(v_); }
  [[nodiscard]] ExtReal exp() const { return ExtReal(std::exp(v_)); }

  constexpr auto operator<=>(const ExtSigned&) const = default;

 private:
  double v_ = 0.0;
};

inline ExtSigned ExtReal::log() const { return ExtSigned(std::log(v_)); }

/// Relative closeness with infinities compared exactly.
inline bool near(double a, double b, double rel, double abs_tol = 0.0) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::fabs(a - b) <= abs_tol + rel * std::max(std::fabs(a), std::fabs(b));
}

/// Shortest round-trip decimal form; infinities print as "inf" / "-inf".
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

/// |x| without underflow or overflow of the squares.
inline double euclidean_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  if (m == 0.0 || std::isinf(m)) return m;
  double s = 0.0;
  for (double v : x) s += (v / m) * (v / m);
  return m * std::sqrt(s);
}

}  // namespace intcond
