#pragma once

// Monotone functions on [0, inf] and their generalized inverses.
//
// A MonotoneFn is an immutable value. Its representation is one of
//   - PiecewiseLinear: knots with separate left / right values (jumps allowed),
//     linear between knots, an optional linear tail, and an explicit f(inf);
//   - Family: closed-form members (powers, exponentials, affine, log-affine);
//   - StepSeries: a pure-jump function given by a (possibly infinite) jump list;
//   - Composite / Inverse: lazily evaluated combinations of other functions;
//   - Callback: any monotone callable.
//
// Values may be signed (log-type functions take values in [-inf, inf]); the
// domain is always [0, inf]. At a jump knot eval() returns the right limit.

#include "intcond/ext.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace intcond {

enum class Direction { NonDecreasing, NonIncreasing };

inline Direction combine(Direction outer, Direction inner) {
  return outer == inner ? Direction::NonDecreasing : Direction::NonIncreasing;
}

struct Knot {
  double at = 0.0;
  double left = 0.0;
  double right = 0.0;
};

struct PiecewiseLinear {
  std::vector<Knot> knots;  // knots.front().at == 0
  double tail_slope = 0.0;  // slope after the last knot
  double at_infinity = 0.0;
};

enum class FamilyKind { Power, Exp, ExpPower, Affine, Constant, LogAffine };

// Power:     a * t^p   (a > 0, p != 0; p < 0 is non-increasing)
// Exp:       exp(t)
// ExpPower:  exp(t^p)  (p > 0)
// Affine:    a * t + b (a >= 0)
// Constant:  a
// LogAffine: a + b * log(t) (b > 0)
struct Family {
  FamilyKind kind = FamilyKind::Power;
  double p = 1.0;
  double a = 1.0;
  double b = 0.0;
};

struct Jump {
  double at = 0.0;
  double size = 0.0;
};

struct StepSeries {
  double base = 0.0;
  // k-th jump in increasing order of location; nullopt ends the series.
  std::function<std::optional<Jump>(std::size_t)> jump;
  std::string label;
};

class MonotoneFn;
using FnPtr = std::shared_ptr<const MonotoneFn>;

struct Composite {
  FnPtr outer;
  FnPtr inner;
};

struct Inverse {
  FnPtr of;
};

struct Callback {
  std::function<double(double)> fn;
  std::string label;
};

namespace detail {

inline constexpr std::size_t kMaxJumps = std::size_t{1} << 20;

inline double family_eval(const Family& f, double t) {
  switch (f.kind) {
    case FamilyKind::Power:
      if (t == 0.0) return f.p > 0 ? 0.0 : kInf;
      if (std::isinf(t)) return f.p > 0 ? kInf : 0.0;
      return f.a * std::pow(t, f.p);
    case FamilyKind::Exp:
      return std::exp(t);
    case FamilyKind::ExpPower:
      return std::exp(std::pow(t, f.p));
    case FamilyKind::Affine:
      return f.a == 0.0 ? f.b : f.a * t + f.b;
    case FamilyKind::Constant:
      return f.a;
    case FamilyKind::LogAffine:
      return f.a + f.b * std::log(t);
  }
  return 0.0;
}

inline double family_derivative(const Family& f, double t) {
  switch (f.kind) {
    case FamilyKind::Power:
      return f.a * f.p * std::pow(t, f.p - 1.0);
    case FamilyKind::Exp:
      return std::exp(t);
    case FamilyKind::ExpPower:
      return f.p * std::pow(t, f.p - 1.0) * std::exp(std::pow(t, f.p));
    case FamilyKind::Affine:
      return f.a;
    case FamilyKind::Constant:
      return 0.0;
    case FamilyKind::LogAffine:
      return f.b / t;
  }
  return 0.0;
}

inline double family_inverse(const Family& f, double tau) {
  switch (f.kind) {
    case FamilyKind::Power:
      if (f.p > 0) {
        if (tau <= 0.0) return 0.0;
        return std::pow(tau / f.a, 1.0 / f.p);
      }
      // non-increasing: inf{t : a t^p <= tau}
      if (tau <= 0.0) return kInf;
      if (std::isinf(tau)) return 0.0;
      return std::pow(tau / f.a, 1.0 / f.p);
    case FamilyKind::Exp:
      return tau <= 1.0 ? 0.0 : std::log(tau);
    case FamilyKind::ExpPower:
      return tau <= 1.0 ? 0.0 : std::pow(std::log(tau), 1.0 / f.p);
    case FamilyKind::Affine:
      if (tau <= f.b) return 0.0;
      if (f.a == 0.0) return kInf;
      return (tau - f.b) / f.a;
    case FamilyKind::Constant:
      return tau <= f.a ? 0.0 : kInf;
    case FamilyKind::LogAffine:
      if (tau == -kInf) return 0.0;
      return std::exp((tau - f.a) / f.b);
  }
  return kInf;
}

// Power laws and linear maps: continuous bijections of [0, inf].
inline bool bijective(const Family& f) {
  if (f.kind == FamilyKind::Power) return f.p != 0.0 && f.a > 0.0;
  return f.kind == FamilyKind::Affine && f.a > 0.0 && f.b == 0.0;
}

inline bool continuous_strict(const Family& f) {
  switch (f.kind) {
    case FamilyKind::Power:
      return f.p != 0.0 && f.a > 0.0;
    case FamilyKind::Exp:
    case FamilyKind::ExpPower:
      return true;
    case FamilyKind::Affine:
      return f.a > 0.0;
    default:
      return false;
  }
}

inline bool strictly_increasing(const Family& f) {
  switch (f.kind) {
    case FamilyKind::Exp:
    case FamilyKind::ExpPower:
    case FamilyKind::LogAffine:
      return true;
    case FamilyKind::Power:
      return f.p > 0;
    case FamilyKind::Affine:
      return f.a > 0;
    case FamilyKind::Constant:
      return false;
  }
  return false;
}

inline double pl_eval(const PiecewiseLinear& f, double t) {
  if (std::isinf(t)) return f.at_infinity;
  const auto& k = f.knots;
  auto it = std::upper_bound(k.begin(), k.end(), t,
                             [](double v, const Knot& kn) { return v < kn.at; });
  const auto i = static_cast<std::size_t>(std::distance(k.begin(), it)) - 1;
  if (t == k[i].at) return k[i].right;
  if (i + 1 == k.size()) return k[i].right + f.tail_slope * (t - k[i].at);
  const double w = (t - k[i].at) / (k[i + 1].at - k[i].at);
  return k[i].right + w * (k[i + 1].left - k[i].right);
}

inline double pl_left_limit(const PiecewiseLinear& f, double t) {
  if (std::isinf(t)) return f.tail_slope > 0 ? kInf : f.knots.back().right;
  for (const auto& kn : f.knots)
    if (kn.at == t) return kn.left;
  return pl_eval(f, t);
}

inline double pl_finite_limit(const PiecewiseLinear& f) {
  return f.tail_slope > 0 ? kInf : f.knots.back().right;
}

// Moves x to the smallest double in (lo, hi] at which pl_eval meets the level,
// so that inverse_at(f(t)) <= t holds exactly in floating point.
template <class Meets>
double pl_snap(const PiecewiseLinear& f, const Meets& meets, double x, double lo, double hi) {
  // pl_eval is monotone under rounding, so bisection over doubles is exact
  auto ok = [&](double t) { return t >= hi || meets(pl_eval(f, t)); };
  double b = std::min(x, hi);
  for (double d = std::max(std::fabs(b), 1.0) * 1e-13; !ok(b); d *= 2) b = std::min(hi, b + d);
  double a = b;
  for (double d = std::max(std::fabs(b), 1.0) * 1e-13;; d *= 2) {
    a = std::max(lo, b - d);
    if (a <= lo || !ok(a)) break;
    b = a;
  }
  while (true) {
    const double m = a + (b - a) / 2;
    if (m <= a || m >= b) break;
    (ok(m) ? b : a) = m;
  }
  return b;
}

// inf{t : f(t) >= tau} (non-decreasing) or inf{t : f(t) <= tau} (non-increasing)
inline double pl_inverse(const PiecewiseLinear& f, Direction dir, double tau) {
  const bool up = dir == Direction::NonDecreasing;
  auto meets = [&](double v) { return up ? v >= tau : v <= tau; };
  const auto& k = f.knots;
  if (meets(k.front().right)) return 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const Knot& a = k[i];
    const Knot& b = k[i + 1];
    if (meets(b.left)) {
      const double w = (tau - a.right) / (b.left - a.right);
      return pl_snap(f, meets, std::min(b.at, a.at + w * (b.at - a.at)), a.at, b.at);
    }
    if (meets(b.right)) return b.at;
  }
  if (up && f.tail_slope > 0 && std::isfinite(tau))
    return pl_snap(f, meets, k.back().at + (tau - k.back().right) / f.tail_slope, k.back().at, kInf);
  return kInf;
}

// inf{t : f(t) > tau} (non-decreasing) or inf{t : f(t) < tau} (non-increasing):
// the right end of the plateau at level tau, or the lower inverse if there is none.
inline double pl_upper_inverse(const PiecewiseLinear& f, Direction dir, double tau) {
  const auto& k = f.knots;
  if (k.back().right == tau && (dir == Direction::NonIncreasing || f.tail_slope == 0.0)) return kInf;
  double end = -1.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i)
    if (k[i].right == tau && k[i + 1].left == tau) end = k[i + 1].at;
  return end >= 0.0 ? end : pl_inverse(f, dir, tau);
}

inline double steps_eval(const StepSeries& s, double t, bool strict) {
  double v = s.base;
  for (std::size_t i = 0; i < kMaxJumps; ++i) {
    auto j = s.jump(i);
    if (!j || !std::isfinite(j->at)) break;
    if (strict ? j->at >= t : j->at > t) break;
    v += j->size;
  }
  return v;
}

inline double steps_inverse(const StepSeries& s, double tau) {
  if (s.base >= tau) return 0.0;
  double v = s.base;
  for (std::size_t i = 0; i < kMaxJumps; ++i) {
    auto j = s.jump(i);
    if (!j || !std::isfinite(j->at)) break;
    v += j->size;
    if (v >= tau) return j->at;
  }
  return kInf;
}

}  // namespace detail

/// inf{t in [0, inf] : meets(t)} for a predicate that is monotone in t
/// (false below some point, true above). The empty set gives inf.
template <class Pred>
double infimum_where(Pred&& meets) {
  if (meets(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (!meets(hi)) {
    lo = hi;
    hi *= 2.0;
    if (std::isinf(hi)) return kInf;
  }
  for (int it = 0; it < 5000; ++it) {
    double mid;
    if (lo == 0.0)
      mid = hi > 1e-290 ? hi * 1e-8 : hi * 0.5;
    else if (hi / lo > 4.0)
      mid = std::sqrt(lo) * std::sqrt(hi);
    else
      mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    if (meets(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

class MonotoneFn {
 public:
  using Rep = std::variant<PiecewiseLinear, Family, StepSeries, Composite, Inverse, Callback>;

  /// Piecewise-linear function; direction is inferred from the data.
  /// Throws std::invalid_argument if the knots are malformed or not monotone.
  static MonotoneFn piecewise(std::vector<Knot> knots, double tail_slope = 0.0,
                              std::optional<double> at_infinity = std::nullopt) {
    if (knots.empty()) throw std::invalid_argument("piecewise: no knots");
    knots.front().left = knots.front().right;
    PiecewiseLinear pl{std::move(knots), tail_slope, 0.0};
    pl.at_infinity = at_infinity.value_or(tail_slope > 0 ? kInf : pl.knots.back().right);
    if (valid(pl, Direction::NonDecreasing)) return MonotoneFn(std::move(pl), Direction::NonDecreasing);
    if (valid(pl, Direction::NonIncreasing)) return MonotoneFn(std::move(pl), Direction::NonIncreasing);
    throw std::invalid_argument("piecewise: knots are malformed or not monotone");
  }

  /// Same with the direction fixed; needed for constant pieces, where the
  /// direction selects which generalized inverse applies.
  static MonotoneFn piecewise(Direction dir, std::vector<Knot> knots, double tail_slope = 0.0,
                              std::optional<double> at_infinity = std::nullopt) {
    auto f = piecewise(std::move(knots), tail_slope, at_infinity);
    if (f.dir_ == dir) return f;
    if (!valid(std::get<PiecewiseLinear>(f.rep_), dir))
      throw std::invalid_argument("piecewise: knots are not monotone in the requested direction");
    f.dir_ = dir;
    return f;
  }

  static MonotoneFn family(Family f) {
    switch (f.kind) {
      case FamilyKind::Power:
        if (f.p == 0.0 || !(f.a > 0.0)) throw std::invalid_argument("power family needs p != 0, a > 0");
        return MonotoneFn(f, f.p > 0 ? Direction::NonDecreasing : Direction::NonIncreasing);
      case FamilyKind::ExpPower:
        if (!(f.p > 0.0)) throw std::invalid_argument("exppow family needs p > 0");
        break;
      case FamilyKind::Affine:
        if (f.a < 0.0) throw std::invalid_argument("affine family needs a >= 0");
        break;
      case FamilyKind::LogAffine:
        if (!(f.b > 0.0)) throw std::invalid_argument("log-affine family needs b > 0");
        break;
      default:
        break;
    }
    return MonotoneFn(f, Direction::NonDecreasing);
  }

  static MonotoneFn identity() { return power(1.0); }
  static MonotoneFn power(double p, double a = 1.0) { return family({FamilyKind::Power, p, a, 0.0}); }
  static MonotoneFn exp() { return family({FamilyKind::Exp, 1.0, 1.0, 0.0}); }
  static MonotoneFn exppow(double p) { return family({FamilyKind::ExpPower, p, 1.0, 0.0}); }
  static MonotoneFn affine(double a, double b) { return family({FamilyKind::Affine, 1.0, a, b}); }
  static MonotoneFn constant(double c) { return family({FamilyKind::Constant, 1.0, c, 0.0}); }
  static MonotoneFn log_affine(double a, double b) { return family({FamilyKind::LogAffine, 1.0, a, b}); }
  /// j(t) = 1/t, the standard sense-reversing homeomorphism of [0, inf].
  static MonotoneFn reciprocal() { return power(-1.0); }

  /// Pure-jump non-decreasing function base + sum of jumps at or left of t.
  static MonotoneFn steps(double base, std::function<std::optional<Jump>(std::size_t)> jump,
                          std::string label) {
    return MonotoneFn(StepSeries{base, std::move(jump), std::move(label)}, Direction::NonDecreasing);
  }

  /// Any monotone callable; monotonicity in `dir` is the caller's promise.
  static MonotoneFn callback(std::function<double(double)> fn, Direction dir, std::string label) {
    return MonotoneFn(Callback{std::move(fn), std::move(label)}, dir);
  }

  [[nodiscard]] Direction direction() const { return dir_; }
  [[nodiscard]] bool non_decreasing() const { return dir_ == Direction::NonDecreasing; }
  [[nodiscard]] const Rep& rep() const { return rep_; }

  double operator()(double t) const {
    return std::visit(
        [t](const auto& r) -> double {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, PiecewiseLinear>)
            return detail::pl_eval(r, t);
          else if constexpr (std::is_same_v<R, Family>)
            return detail::family_eval(r, t);
          else if constexpr (std::is_same_v<R, StepSeries>)
            return std::isinf(t) ? detail::steps_eval(r, 1.7e308, false) : detail::steps_eval(r, t, false);
          else if constexpr (std::is_same_v<R, Composite>)
            return (*r.outer)((*r.inner)(t));
          else if constexpr (std::is_same_v<R, Inverse>)
            return r.of->inverse_at(t);
          else
            return r.fn(t);
        },
        rep_);
  }

  /// Left limit at t (equals eval where f is continuous from the left).
  [[nodiscard]] double left_limit(double t) const {
    if (const auto* pl = std::get_if<PiecewiseLinear>(&rep_)) return detail::pl_left_limit(*pl, t);
    if (const auto* st = std::get_if<StepSeries>(&rep_)) return detail::steps_eval(*st, t, true);
    return (*this)(t);
  }

  /// Generalized inverse evaluated at tau, straight from the infimum definition.
  [[nodiscard]] double inverse_at(double tau) const {
    if (const auto* pl = std::get_if<PiecewiseLinear>(&rep_)) return detail::pl_inverse(*pl, dir_, tau);
    if (const auto* fam = std::get_if<Family>(&rep_)) return detail::family_inverse(*fam, tau);
    if (const auto* st = std::get_if<StepSeries>(&rep_)) return detail::steps_inverse(*st, tau);
    if (const auto* c = std::get_if<Composite>(&rep_)) {
      // outer F strictly monotone and continuous: the level set of F o g pulls back
      // to a level set of g at F^-1(tau)
      if (const auto* fam = std::get_if<Family>(&c->outer->rep())) {
        const bool up_to_up = detail::strictly_increasing(*fam) && non_decreasing();
        if (up_to_up || detail::bijective(*fam)) {
          // exp is also a bijection of [-inf, inf] onto [0, inf], and inner may be log-valued
          const double x = fam->kind == FamilyKind::Exp ? std::log(tau) : detail::family_inverse(*fam, tau);
          return c->inner->inverse_at(x);
        }
      }
      // inner g strictly monotone and continuous: {t : g(t) in L} for the level set
      // L of the outer function, whose near end is its lower or upper inverse
      if (const auto* fam = std::get_if<Family>(&c->inner->rep()); fam && detail::continuous_strict(*fam)) {
        const bool g_up = c->inner->non_decreasing();
        return c->inner->inverse_at(g_up ? c->outer->inverse_at(tau) : c->outer->upper_inverse_at(tau));
      }
    }
    if (non_decreasing()) return infimum_where([&](double t) { return (*this)(t) >= tau; });
    return infimum_where([&](double t) { return (*this)(t) <= tau; });
  }

  /// inf{t : f(t) > tau} (non-decreasing) or inf{t : f(t) < tau} (non-increasing).
  /// Differs from inverse_at only at the value of a constancy interval.
  [[nodiscard]] double upper_inverse_at(double tau) const {
    if (const auto* pl = std::get_if<PiecewiseLinear>(&rep_)) return detail::pl_upper_inverse(*pl, dir_, tau);
    if (non_decreasing()) return infimum_where([&](double t) { return (*this)(t) > tau; });
    return infimum_where([&](double t) { return (*this)(t) < tau; });
  }

  /// The generalized inverse as a function; it has the same direction as *this.
  [[nodiscard]] MonotoneFn inverse() const {
    return MonotoneFn(Inverse{std::make_shared<const MonotoneFn>(*this)}, dir_);
  }

  [[nodiscard]] std::string to_string() const;
  static MonotoneFn parse(std::string_view text);

 private:
  MonotoneFn(Rep rep, Direction dir) : rep_(std::move(rep)), dir_(dir) {}

  static bool valid(const PiecewiseLinear& f, Direction dir) {
    const bool up = dir == Direction::NonDecreasing;
    auto ordered = [up](double lo, double hi) { return up ? lo <= hi : lo >= hi; };
    const auto& k = f.knots;
    if (k.front().at != 0.0) return false;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (!std::isfinite(k[i].at) || !std::isfinite(k[i].left) || !std::isfinite(k[i].right)) return false;
      if (!ordered(k[i].left, k[i].right)) return false;
      if (i > 0 && (k[i].at <= k[i - 1].at || !ordered(k[i - 1].right, k[i].left))) return false;
    }
    if (!std::isfinite(f.tail_slope)) return false;
    if (up ? f.tail_slope < 0 : f.tail_slope != 0) return false;
    if (std::isnan(f.at_infinity)) return false;
    return ordered(detail::pl_finite_limit(f), f.at_infinity);
  }

  Rep rep_;
  Direction dir_;

  friend MonotoneFn compose(const MonotoneFn& outer, const MonotoneFn& inner);
};

}  // namespace intcond

namespace intcond {

namespace detail {

inline bool is_identity(const MonotoneFn& f) {
  const auto* fam = std::get_if<Family>(&f.rep());
  if (!fam) return false;
  if (fam->kind == FamilyKind::Power) return fam->p == 1.0 && fam->a == 1.0;
  if (fam->kind == FamilyKind::Affine) return fam->a == 1.0 && fam->b == 0.0;
  return false;
}

inline const Family* as_family(const MonotoneFn& f, FamilyKind kind) {
  const auto* fam = std::get_if<Family>(&f.rep());
  return fam && fam->kind == kind ? fam : nullptr;
}

// Composite value when the inner function approaches v from one side.
enum class Approach { Above, Below, Constant };

inline double outer_limit(const MonotoneFn& outer, double v, Approach how) {
  return how == Approach::Below ? outer.left_limit(v) : outer(v);
}

inline Approach approach_from_right(double slope) {
  if (slope > 0) return Approach::Above;
  if (slope < 0) return Approach::Below;
  return Approach::Constant;
}

inline Approach approach_from_left(double slope) {
  if (slope > 0) return Approach::Below;
  if (slope < 0) return Approach::Above;
  return Approach::Constant;
}

// Exact piecewise-linear composition by merging the inner knots with the
// preimages of the outer knots.
inline MonotoneFn compose_pl(const MonotoneFn& outer, const PiecewiseLinear& O, const PiecewiseLinear& I) {
  const auto& ik = I.knots;
  const std::size_t m = ik.size();
  auto seg_slope = [&](std::size_t i) {
    if (i + 1 < m) return (ik[i + 1].left - ik[i].right) / (ik[i + 1].at - ik[i].at);
    return I.tail_slope;
  };

  std::vector<Knot> out;
  for (std::size_t i = 0; i < m; ++i) {
    Knot kn{ik[i].at, 0.0, 0.0};
    kn.right = outer_limit(outer, ik[i].right, approach_from_right(seg_slope(i)));
    kn.left = i == 0 ? kn.right : outer_limit(outer, ik[i].left, approach_from_left(seg_slope(i - 1)));
    out.push_back(kn);

    // Crossings of outer knot abscissae strictly inside this inner segment.
    const double v0 = ik[i].right;
    const double slope = seg_slope(i);
    if (slope == 0.0) continue;
    const double v1 = i + 1 < m ? ik[i + 1].left : kInf;
    const double lo = std::min(v0, v1);
    const double hi = std::max(v0, v1);
    std::vector<std::pair<double, double>> crossings;  // (t, outer knot value)
    for (const auto& ok : O.knots) {
      if (!(ok.at > lo && ok.at < hi)) continue;
      double t = i + 1 < m ? ik[i].at + (ok.at - v0) / (v1 - v0) * (ik[i + 1].at - ik[i].at)
                           : ik[i].at + (ok.at - v0) / slope;
      if (i + 1 < m) t = std::min(t, std::nextafter(ik[i + 1].at, 0.0));
      t = std::max(t, std::nextafter(ik[i].at, kInf));
      crossings.emplace_back(t, ok.at);
    }
    std::sort(crossings.begin(), crossings.end());
    for (const auto& [t, s] : crossings) {
      if (t <= out.back().at) continue;
      out.push_back({t, outer_limit(outer, s, approach_from_left(slope)),
                     outer_limit(outer, s, approach_from_right(slope))});
    }
  }
  const double tail = I.tail_slope > 0 ? O.tail_slope * I.tail_slope : 0.0;
  return MonotoneFn::piecewise(std::move(out), tail, outer(I.at_infinity));
}

}  // namespace detail

/// Pointwise composition outer(inner(t)). Piecewise-linear pairs compose
/// exactly; known closed forms are simplified; anything else is evaluated
/// lazily.
inline MonotoneFn compose(const MonotoneFn& outer, const MonotoneFn& inner) {
  using detail::as_family;
  if (detail::is_identity(outer)) return inner;
  if (detail::is_identity(inner)) return outer;

  if (const auto* lg = as_family(outer, FamilyKind::LogAffine); lg && lg->a == 0.0 && lg->b == 1.0) {
    if (as_family(inner, FamilyKind::Exp)) return MonotoneFn::identity();
    if (const auto* ep = as_family(inner, FamilyKind::ExpPower)) return MonotoneFn::power(ep->p);
    if (const auto* pw = as_family(inner, FamilyKind::Power); pw && pw->p > 0)
      return MonotoneFn::log_affine(std::log(pw->a), pw->p);
    if (const auto* c = as_family(inner, FamilyKind::Constant)) return MonotoneFn::constant(std::log(c->a));
    if (const auto* comp = std::get_if<Composite>(&inner.rep()); comp && as_family(*comp->outer, FamilyKind::Exp))
      return *comp->inner;
  }
  if (as_family(outer, FamilyKind::Exp)) {
    if (const auto* pw = as_family(inner, FamilyKind::Power); pw && pw->p > 0 && pw->a == 1.0)
      return MonotoneFn::exppow(pw->p);
    if (const auto* lg = as_family(inner, FamilyKind::LogAffine); lg && lg->a == 0.0 && lg->b == 1.0)
      return MonotoneFn::identity();
  }
  if (const auto* po = as_family(outer, FamilyKind::Power)) {
    if (const auto* pi = as_family(inner, FamilyKind::Power))
      return MonotoneFn::power(po->p * pi->p, po->a * std::pow(pi->a, po->p));
  }
  const auto* opl = std::get_if<PiecewiseLinear>(&outer.rep());
  const auto* ipl = std::get_if<PiecewiseLinear>(&inner.rep());
  if (opl && ipl) return detail::compose_pl(outer, *opl, *ipl);

  return MonotoneFn(Composite{std::make_shared<const MonotoneFn>(outer), std::make_shared<const MonotoneFn>(inner)},
                    combine(outer.direction(), inner.direction()));
}

/// lim f(t) as t -> inf through finite t (f(inf) itself is stored separately).
inline double limit_at_infinity(const MonotoneFn& f) {
  if (const auto* pl = std::get_if<PiecewiseLinear>(&f.rep())) return detail::pl_finite_limit(*pl);
  return f(1.7e308);
}

/// Jump discontinuities (left != right) with location and one-sided values.
struct JumpPoint {
  double at = 0.0;
  double left = 0.0;
  double right = 0.0;
};

/// Jumps located in (lo, hi]. Exact for piecewise-linear and step
/// representations, empty for closed-form families; nullopt when unknown.
inline std::optional<std::vector<JumpPoint>> jumps_in(const MonotoneFn& f, double lo, double hi) {
  std::vector<JumpPoint> out;
  if (const auto* pl = std::get_if<PiecewiseLinear>(&f.rep())) {
    for (const auto& k : pl->knots)
      if (k.at > lo && k.at <= hi && k.left != k.right) out.push_back({k.at, k.left, k.right});
    return out;
  }
  if (std::holds_alternative<Family>(f.rep())) return out;
  if (const auto* st = std::get_if<StepSeries>(&f.rep())) {
    double v = st->base;
    for (std::size_t i = 0; i < detail::kMaxJumps; ++i) {
      auto j = st->jump(i);
      if (!j || !std::isfinite(j->at) || j->at > hi) break;
      if (j->at > lo) out.push_back({j->at, v, v + j->size});
      v += j->size;
    }
    return out;
  }
  return std::nullopt;
}

struct ConstancyInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = false;
  double value = 0.0;

  [[nodiscard]] bool contains(double t) const {
    return (lo_closed ? t >= lo : t > lo) && (hi_closed ? t <= hi : t < hi);
  }
};

namespace detail {

inline std::vector<ConstancyInterval> pl_plateaus(const PiecewiseLinear& f) {
  struct Piece {
    double lo, hi;
    bool point;
    bool constant;
    double value;
  };
  std::vector<Piece> pieces;
  const auto& k = f.knots;
  for (std::size_t i = 0; i < k.size(); ++i) {
    pieces.push_back({k[i].at, k[i].at, true, true, k[i].right});
    if (i + 1 < k.size())
      pieces.push_back({k[i].at, k[i + 1].at, false, k[i].right == k[i + 1].left, k[i].right});
    else
      pieces.push_back({k[i].at, kInf, false, f.tail_slope == 0.0, k[i].right});
  }
  pieces.push_back({kInf, kInf, true, true, f.at_infinity});

  std::vector<ConstancyInterval> out;
  std::size_t i = 0;
  while (i < pieces.size()) {
    if (!pieces[i].constant) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool has_segment = !pieces[i].point;
    while (j + 1 < pieces.size() && pieces[j + 1].constant && pieces[j + 1].value == pieces[i].value) {
      ++j;
      has_segment = has_segment || !pieces[j].point;
    }
    if (has_segment)
      out.push_back({pieces[i].lo, pieces[j].hi, pieces[i].point, pieces[j].point, pieces[i].value});
    i = j + 1;
  }
  return out;
}

inline std::vector<double> probe_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 2000; ++i) g.push_back(0.005 * i);
  for (double t = 10.0 * 1.05; t < 1e6; t *= 1.05) g.push_back(t);
  g.push_back(kInf);
  return g;
}

// Plateaus detected by exact equality of consecutive probe values.
inline std::vector<ConstancyInterval> probed_plateaus(const MonotoneFn& f) {
  const auto g = probe_grid();
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g[i]);
  std::vector<ConstancyInterval> out;
  std::size_t i = 0;
  while (i + 1 < g.size()) {
    std::size_t j = i;
    while (j + 1 < g.size() && v[j + 1] == v[i]) ++j;
    if (j > i) out.push_back({g[i], g[j], true, true, v[i]});
    i = j + 1;
  }
  return out;
}

}  // namespace detail

/// Maximal intervals on which f is constant, in increasing order.
/// Lazily evaluated representations are probed on a fixed grid.
inline std::vector<ConstancyInterval> constancy_intervals(const MonotoneFn& f) {
  if (const auto* pl = std::get_if<PiecewiseLinear>(&f.rep())) return detail::pl_plateaus(*pl);
  if (const auto* fam = std::get_if<Family>(&f.rep())) {
    if (fam->kind == FamilyKind::Constant || (fam->kind == FamilyKind::Affine && fam->a == 0.0))
      return {{0.0, kInf, true, true, f(0.0)}};
    return {};
  }
  if (const auto* st = std::get_if<StepSeries>(&f.rep())) {
    std::vector<ConstancyInterval> out;
    double start = 0.0;
    double v = st->base;
    for (std::size_t i = 0; i < 4096; ++i) {
      auto j = st->jump(i);
      if (!j || !std::isfinite(j->at) || j->at > 1e300) {
        out.push_back({start, kInf, true, !j.has_value(), v});
        return out;
      }
      if (j->at > start) out.push_back({start, j->at, true, false, v});
      start = j->at;
      v += j->size;
    }
    return out;
  }
  if (const auto* inv = std::get_if<Inverse>(&f.rep())) {
    const MonotoneFn& g = *inv->of;
    auto jumps = jumps_in(g, -1.0, kInf);
    if (!jumps) return detail::probed_plateaus(f);
    std::vector<ConstancyInterval> out;
    const double g0 = g(0.0);
    const double lim = limit_at_infinity(g);
    if (g.non_decreasing()) {
      const double lo = g0 >= 0 ? 0.0 : -kInf;
      if (g0 > lo) out.push_back({lo, g0, true, true, 0.0});
      for (const auto& j : *jumps)
        if (j.left < j.right) out.push_back({j.left, j.right, false, true, j.at});
      if (lim < kInf) out.push_back({lim, kInf, false, true, kInf});
    } else {
      const double lo = lim >= 0 ? 0.0 : -kInf;
      if (lim > lo) out.push_back({lo, lim, true, false, kInf});
      for (const auto& j : *jumps)
        if (j.left > j.right) out.push_back({j.right, j.left, true, false, j.at});
      if (g0 < kInf) out.push_back({g0, kInf, true, true, 0.0});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    return out;
  }
  return detail::probed_plateaus(f);
}

struct ConvexityWitness {
  double t1 = 0.0;
  double t2 = 0.0;
  double lambda = 0.0;
  double lhs = 0.0;  // f(lambda t1 + (1 - lambda) t2)
  double rhs = 0.0;  // lambda f(t1) + (1 - lambda) f(t2)
};

struct ConvexityResult {
  bool convex = true;
  bool all_tight = true;  // every tested inequality held with equality
  std::size_t tested = 0;
  std::optional<ConvexityWitness> witness;
};

/// Tests f(l t1 + (1-l) t2) <= l f(t1) + (1-l) f(t2) for l in {1/4, 1/2, 3/4}
/// over all pairs of grid points (plus knots) and 100 seeded random pairs.
inline ConvexityResult is_convex(const MonotoneFn& f, std::span<const double> grid, double rel_tol = 1e-9) {
  std::vector<double> pts(grid.begin(), grid.end());
  if (const auto* pl = std::get_if<PiecewiseLinear>(&f.rep()))
    for (const auto& k : pl->knots) pts.push_back(k.at);
  std::erase_if(pts, [](double t) { return !std::isfinite(t) || t < 0; });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  ConvexityResult res;
  auto test = [&](double t1, double t2, double lam) {
    const double lhs = f(lam * t1 + (1 - lam) * t2);
    const double rhs = lam * f(t1) + (1 - lam) * f(t2);
    if (std::isinf(rhs) && rhs > 0) return;
    ++res.tested;
    const double slack = rel_tol * (std::fabs(rhs) + std::fabs(lhs)) + 1e-300;
    if (lhs > rhs + slack) {
      if (res.convex) res.witness = ConvexityWitness{t1, t2, lam, lhs, rhs};
      res.convex = false;
    }
    if (std::fabs(rhs - lhs) > slack) res.all_tight = false;
  };
  constexpr double lambdas[] = {0.25, 0.5, 0.75};
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (double lam : lambdas) test(pts[i], pts[j], lam);
  if (pts.size() >= 2) {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(pts.front(), pts.back());
    std::uniform_real_distribution<double> l(0.0, 1.0);
    for (int i = 0; i < 100; ++i) test(u(rng), u(rng), l(rng));
  }
  return res;
}

/// Jensen-type convexity check on a default grid covering [0, 10].
inline ConvexityResult is_convex(const MonotoneFn& f) {
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.25 * i);
  return is_convex(f, grid);
}

// ---------------------------------------------------------------------------
// Text form:
//   pl: (t0,v0) (t1,v1-) (t1,v1+) ... [slope=s] [inf=v] [dir=up|down]
//   fam:exp | fam:pow p [a] | fam:exppow p | fam:affine a b | fam:const c | fam:logaffine a b

inline std::string MonotoneFn::to_string() const {
  const bool up = non_decreasing();
  return std::visit(
      [up](const auto& r) -> std::string {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, PiecewiseLinear>) {
          std::string s = "pl:";
          auto pt = [&s](double t, double v) { s += " (" + format_double(t) + "," + format_double(v) + ")"; };
          for (std::size_t i = 0; i < r.knots.size(); ++i) {
            const auto& k = r.knots[i];
            if (i > 0 && k.left != k.right) pt(k.at, k.left);
            pt(k.at, k.right);
          }
          if (r.tail_slope != 0.0) s += " slope=" + format_double(r.tail_slope);
          const double dflt = r.tail_slope > 0 ? kInf : r.knots.back().right;
          if (r.at_infinity != dflt) s += " inf=" + format_double(r.at_infinity);
          if (!up && valid(r, Direction::NonDecreasing)) s += " dir=down";
          return s;
        } else if constexpr (std::is_same_v<R, Family>) {
          switch (r.kind) {
            case FamilyKind::Power:
              return "fam:pow " + format_double(r.p) + (r.a != 1.0 ? " " + format_double(r.a) : "");
            case FamilyKind::Exp:
              return "fam:exp";
            case FamilyKind::ExpPower:
              return "fam:exppow " + format_double(r.p);
            case FamilyKind::Affine:
              return "fam:affine " + format_double(r.a) + " " + format_double(r.b);
            case FamilyKind::Constant:
              return "fam:const " + format_double(r.a);
            case FamilyKind::LogAffine:
              return "fam:logaffine " + format_double(r.a) + " " + format_double(r.b);
          }
          return "fam:?";
        } else if constexpr (std::is_same_v<R, StepSeries>) {
          return "steps(" + r.label + ")";
        } else if constexpr (std::is_same_v<R, Composite>) {
          return "compose(" + r.outer->to_string() + ", " + r.inner->to_string() + ")";
        } else if constexpr (std::is_same_v<R, Inverse>) {
          return "inverse(" + r.of->to_string() + ")";
        } else {
          return r.label;
        }
      },
      rep_);
}

namespace detail {

inline double parse_number(std::string_view s) {
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw std::invalid_argument("bad number '" + tmp + "'");
  return v;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline MonotoneFn MonotoneFn::parse(std::string_view text) {
  using detail::parse_number;
  text = detail::trim(text);
  if (text.starts_with("fam:")) {
    std::istringstream in{std::string(text.substr(4))};
    std::string name;
    in >> name;
    std::vector<double> args;
    for (std::string tok; in >> tok;) args.push_back(parse_number(tok));
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (args.size() < lo || args.size() > hi)
        throw std::invalid_argument("fam:" + name + ": wrong number of parameters");
    };
    if (name == "exp") return need(0, 0), exp();
    if (name == "id") return need(0, 0), identity();
    if (name == "recip") return need(0, 0), reciprocal();
    if (name == "pow") return need(1, 2), power(args[0], args.size() > 1 ? args[1] : 1.0);
    if (name == "exppow") return need(1, 1), exppow(args[0]);
    if (name == "affine") return need(2, 2), affine(args[0], args[1]);
    if (name == "const") return need(1, 1), constant(args[0]);
    if (name == "logaffine") return need(2, 2), log_affine(args[0], args[1]);
    throw std::invalid_argument("unknown family '" + name + "'");
  }
  if (!text.starts_with("pl:")) throw std::invalid_argument("expected 'pl:' or 'fam:' descriptor");
  std::string_view rest = text.substr(3);
  std::vector<std::pair<double, double>> pts;
  double slope = 0.0;
  std::optional<double> at_inf;
  std::optional<bool> down;
  while (true) {
    rest = detail::trim(rest);
    if (rest.empty()) break;
    if (rest.front() == '(') {
      const auto close = rest.find(')');
      const auto comma = rest.find(',');
      if (close == std::string_view::npos || comma == std::string_view::npos || comma > close)
        throw std::invalid_argument("malformed point in '" + std::string(text) + "'");
      pts.emplace_back(parse_number(detail::trim(rest.substr(1, comma - 1))),
                       parse_number(detail::trim(rest.substr(comma + 1, close - comma - 1))));
      rest.remove_prefix(close + 1);
      continue;
    }
    const auto end = std::min(rest.find(' '), rest.size());
    std::string_view tok = rest.substr(0, end);
    rest.remove_prefix(end);
    if (tok.starts_with("slope="))
      slope = parse_number(tok.substr(6));
    else if (tok.starts_with("inf="))
      at_inf = parse_number(tok.substr(4));
    else if (tok == "dir=down")
      down = true;
    else if (tok == "dir=up")
      down = false;
    else
      throw std::invalid_argument("unexpected token '" + std::string(tok) + "'");
  }
  std::vector<Knot> knots;
  for (std::size_t i = 0; i < pts.size();) {
    if (i + 2 < pts.size() && pts[i + 2].first == pts[i].first && pts[i + 1].first == pts[i].first)
      throw std::invalid_argument("more than two values at one abscissa");
    if (i + 1 < pts.size() && pts[i + 1].first == pts[i].first) {
      knots.push_back({pts[i].first, pts[i].second, pts[i + 1].second});
      i += 2;
    } else {
      knots.push_back({pts[i].first, pts[i].second, pts[i].second});
      i += 1;
    }
  }
  if (down) return piecewise(*down ? Direction::NonIncreasing : Direction::NonDecreasing, std::move(knots), slope, at_inf);
  return piecewise(std::move(knots), slope, at_inf);
}

}  // namespace intcond
