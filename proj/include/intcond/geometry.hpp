#pragma once

// n-ball constants, scalar fields on R^n, spherical means, the Phi-mass
// integral and the field transforms (lower cut-off, inversion x -> x/|x|^2),
// plus the spherical (chordal) metric and its volume density.

#include "intcond/conditions.hpp"
#include "intcond/ext.hpp"
#include "intcond/monotone.hpp"
#include "intcond/quad.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace intcond {

struct BallConstants {
  int n = 0;
  double Omega_n = 0.0;    // volume of the unit ball
  double omega_nm1 = 0.0;  // area of the unit sphere, n * Omega_n
  double lambda_n = 0.0;   // e / Omega_n
};

/// Omega_n from Omega_n = 2 pi Omega_{n-2} / n with Omega_0 = 1, Omega_1 = 2.
inline BallConstants ball_constants(int n) {
  if (n < 1) throw std::invalid_argument("ball_constants: dimension must be >= 1");
  double even = 1.0;
  double odd = 2.0;
  for (int k = 2; k <= n; ++k) {
    double& slot = k % 2 == 0 ? even : odd;
    slot = 2.0 * std::numbers::pi * slot / k;
  }
  BallConstants c;
  c.n = n;
  c.Omega_n = n % 2 == 0 ? even : odd;
  c.omega_nm1 = n * c.Omega_n;
  c.lambda_n = std::numbers::e / c.Omega_n;
  return c;
}

inline double norm(std::span<const double> x) { return euclidean_norm(x); }

enum class DomainKind { Whole, Ball, Exterior };

struct FieldDomain {
  DomainKind kind = DomainKind::Whole;
  std::vector<double> center;  // Ball only; empty means the origin
  double radius = 1.0;         // Ball radius or exterior radius R0

  static FieldDomain whole() { return {}; }
  static FieldDomain ball(std::vector<double> c, double r) { return {DomainKind::Ball, std::move(c), r}; }
  static FieldDomain exterior(double R0) { return {DomainKind::Exterior, {}, R0}; }
};

/// A field Q: R^n -> [0, inf]. Evaluation throws std::domain_error on a
/// negative or NaN value.
class ScalarField {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  ScalarField(int n, Fn fn, std::string label, FieldDomain domain = {})
      : n_(n), fn_(std::move(fn)), label_(std::move(label)), domain_(std::move(domain)) {
    if (n < 1) throw std::invalid_argument("field dimension must be >= 1");
  }

  /// Q(x) = profile(|x|).
  static ScalarField radial(int n, std::function<double(double)> profile, std::string label,
                            FieldDomain domain = {}) {
    ScalarField f(n, [profile](std::span<const double> x) { return profile(norm(x)); }, std::move(label),
                  std::move(domain));
    f.profile_ = std::move(profile);
    return f;
  }

  static ScalarField constant(int n, double c) {
    return radial(n, [c](double) { return c; }, format_double(c));
  }

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] const std::string& label() const { return label_; }
  [[nodiscard]] const FieldDomain& domain() const { return domain_; }
  [[nodiscard]] bool is_radial() const { return static_cast<bool>(profile_); }
  [[nodiscard]] double at_infinity() const { return at_infinity_; }
  ScalarField& with_at_infinity(double v) {
    at_infinity_ = v;
    return *this;
  }

  double operator()(std::span<const double> x) const { return checked(fn_(x), x); }

  /// Q at radius r for a radial field.
  [[nodiscard]] double profile(double r) const {
    if (!profile_) throw std::logic_error("field '" + label_ + "' is not radial");
    const double v = profile_(r);
    if (std::isnan(v) || v < 0) throw std::domain_error("field '" + label_ + "' leaves [0, inf] at |x| = " + format_double(r));
    return v;
  }

  /// True iff the sphere S(c, r) lies in the declared domain.
  [[nodiscard]] bool contains_sphere(std::span<const double> c, double r) const {
    const double eps = 1e-12;
    switch (domain_.kind) {
      case DomainKind::Whole:
        return true;
      case DomainKind::Ball: {
        double d2 = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
          const double ci = i < domain_.center.size() ? domain_.center[i] : 0.0;
          d2 += (c[i] - ci) * (c[i] - ci);
        }
        return std::sqrt(d2) + r <= domain_.radius * (1 + eps);
      }
      case DomainKind::Exterior:
        return r - norm(c) >= domain_.radius * (1 - eps);
    }
    return false;
  }

 private:
  double checked(double v, std::span<const double> x) const {
    if (std::isnan(v) || v < 0) {
      std::string at;
      for (double xi : x) at += (at.empty() ? "" : ", ") + format_double(xi);
      throw std::domain_error("field '" + label_ + "' leaves [0, inf] at (" + at + ")");
    }
    return v;
  }

  int n_;
  Fn fn_;
  std::function<double(double)> profile_;
  std::string label_;
  FieldDomain domain_;
  double at_infinity_ = std::numeric_limits<double>::quiet_NaN();
};

/// Uniform directions on S^{n-1}: normalized standard normal vectors from a
/// seeded mt19937_64, in antithetic pairs (u, -u). The same directions are
/// reused for every radius, so q(r) is a smooth function of r.
class SphereSampler {
 public:
  SphereSampler(int n, std::size_t samples = std::size_t{1} << 14, std::uint64_t seed = 0)
      : n_(n), seed_(seed) {
    if (n < 1) throw std::invalid_argument("sampler dimension must be >= 1");
    const std::size_t pairs = std::max<std::size_t>(1, samples / 2);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    dirs_.reserve(pairs * static_cast<std::size_t>(n));
    for (std::size_t p = 0; p < pairs; ++p) {
      double s = 0.0;
      const std::size_t base = dirs_.size();
      do {
        s = 0.0;
        dirs_.resize(base);
        for (int i = 0; i < n; ++i) {
          const double g = normal(rng);
          dirs_.push_back(g);
          s += g * g;
        }
      } while (s == 0.0);
      const double inv = 1.0 / std::sqrt(s);
      for (int i = 0; i < n; ++i) dirs_[base + static_cast<std::size_t>(i)] *= inv;
    }
  }

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::size_t pairs() const { return dirs_.size() / static_cast<std::size_t>(n_); }
  [[nodiscard]] std::size_t samples() const { return 2 * pairs(); }
  [[nodiscard]] std::span<const double> direction(std::size_t p) const {
    return {dirs_.data() + p * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
  }

 private:
  int n_;
  std::uint64_t seed_;
  std::vector<double> dirs_;
};

struct MeanEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double inf_fraction = 0.0;
  std::size_t samples = 0;  // 0 for the exact radial shortcut
  [[nodiscard]] bool exact() const { return samples == 0; }
};

/// Means of Q and of Phi(Q) over the same sphere sample.
struct SphereStats {
  MeanEstimate q;
  MeanEstimate phi_q;
};

struct MeanOptions {
  double inf_threshold = 0.0;  // fraction of infinite samples above which the mean is inf
};

namespace detail {

inline bool at_origin(std::span<const double> c) {
  for (double v : c)
    if (v != 0.0) return false;
  return true;
}

struct Accumulator {
  double sum = 0.0, sum2 = 0.0;
  std::size_t pairs = 0, infinite = 0;

  void add_pair(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) {
      infinite += std::isinf(a) + std::isinf(b);
      if (std::isinf(a) && std::isinf(b)) return;
      a = std::isinf(a) ? b : a;
      b = std::isinf(b) ? a : b;
    }
    const double m = 0.5 * (a + b);
    sum += m;
    sum2 += m * m;
    ++pairs;
  }

  MeanEstimate finish(std::size_t total_pairs, const MeanOptions& opt) const {
    MeanEstimate e;
    e.samples = 2 * total_pairs;
    e.inf_fraction = static_cast<double>(infinite) / static_cast<double>(e.samples);
    if (e.inf_fraction > opt.inf_threshold || pairs == 0) {
      e.value = kInf;
      return e;
    }
    const double n = static_cast<double>(pairs);
    e.value = sum / n;
    const double var = pairs > 1 ? std::max(0.0, (sum2 - n * e.value * e.value) / (n - 1)) : 0.0;
    e.std_error = std::sqrt(var / n);
    return e;
  }
};

inline void require_sphere(const ScalarField& Q, std::span<const double> c, double r) {
  if (static_cast<int>(c.size()) != Q.n()) throw std::invalid_argument("center dimension does not match the field");
  if (!(r > 0)) throw std::invalid_argument("sphere radius must be positive");
  if (!Q.contains_sphere(c, r))
    throw std::domain_error("sphere of radius " + format_double(r) + " leaves the domain of '" + Q.label() + "'");
}

}  // namespace detail

/// Surface-measure averages of Q and Phi(Q) over |x - c| = r. Radial fields
/// centred at the origin use the exact profile value.
inline SphereStats sphere_stats(const ScalarField& Q, const MonotoneFn* phi, std::span<const double> c, double r,
                                const SphereSampler& sampler, const MeanOptions& opt = {}) {
  detail::require_sphere(Q, c, r);
  SphereStats s;
  if (Q.is_radial() && detail::at_origin(c)) {
    const double v = Q.profile(r);
    s.q.value = v;
    s.phi_q.value = phi ? (*phi)(v) : 0.0;
    return s;
  }
  if (sampler.n() != Q.n()) throw std::invalid_argument("sampler dimension does not match the field");
  detail::Accumulator aq, ap;
  std::vector<double> x(c.size()), y(c.size());
  for (std::size_t p = 0; p < sampler.pairs(); ++p) {
    const auto u = sampler.direction(p);
    for (std::size_t i = 0; i < c.size(); ++i) {
      x[i] = c[i] + r * u[i];
      y[i] = c[i] - r * u[i];
    }
    const double a = Q(x);
    const double b = Q(y);
    aq.add_pair(a, b);
    if (phi) ap.add_pair((*phi)(a), (*phi)(b));
  }
  s.q = aq.finish(sampler.pairs(), opt);
  if (phi) s.phi_q = ap.finish(sampler.pairs(), opt);
  return s;
}

inline MeanEstimate spherical_mean(const ScalarField& Q, std::span<const double> c, double r,
                                   const SphereSampler& sampler, const MeanOptions& opt = {}) {
  return sphere_stats(Q, nullptr, c, r, sampler, opt).q;
}

namespace detail {

/// Reruns a divergent classification over shorter ladders while Phi(q)
/// overflowed on a finite q and Phi has no genuinely infinite tail. The ladder
/// ceiling 1e300 otherwise reaches radii where a finite Phi(q) exceeds the
/// double range.
template <class Run>
IntegralVerdict with_overflow_backoff(Run&& run, const MonotoneFn& phi, bool& overflowed, const ClassifyOptions& opt) {
  overflowed = false;
  IntegralVerdict v = run(opt);
  if (infinite_tail(phi)) return v;
  ClassifyOptions o = opt;
  while (v.diverges() && overflowed && o.upper_limit > 1e20) {
    o.upper_limit = std::sqrt(o.upper_limit);
    overflowed = false;
    v = run(o);
    if (!v.diverges()) v.note += " (ladder ceiling lowered to " + format_double(o.upper_limit) + " after overflow)";
  }
  return v;
}

}  // namespace detail

enum class MassRegion { Ball, ExteriorWeighted, SphericalWeighted };

struct MassSpec {
  MassRegion region = MassRegion::Ball;
  std::vector<double> center;  // Ball: centre of the ball and of the spheres; empty = origin
  double radius = 1.0;         // Ball radius, or R0 for the exterior region
};

struct MassResult {
  double value = 0.0;  // inf when the radial integral diverges
  IntegralVerdict radial;
  std::string region;
};

/// M = omega_{n-1} int mean_{S(r)}(Phi o Q) w(r) r^{n-1} dr over the region:
///   Ball               |x - c| < rho, w = 1
///   ExteriorWeighted   |x| > R0,      w = r^{-2n}
///   SphericalWeighted  R^n,           w = (1 + r^2)^{-n}
inline MassResult phi_mass(const ScalarField& Q, const MonotoneFn& phi, const MassSpec& spec,
                           const SphereSampler& sampler, const ClassifyOptions& opt = {},
                           const MeanOptions& mopt = {}) {
  if (!phi.non_decreasing()) throw std::invalid_argument("phi_mass: Phi must be non-decreasing");
  const int n = Q.n();
  const auto bc = ball_constants(n);
  std::vector<double> c = spec.center.empty() ? std::vector<double>(static_cast<std::size_t>(n), 0.0) : spec.center;
  bool overflowed = false;
  auto mean_phi = [&](double r) {
    const auto st = sphere_stats(Q, &phi, c, r, sampler, mopt);
    if (std::isinf(st.phi_q.value) && std::isfinite(st.q.value)) overflowed = true;
    return st.phi_q.value;
  };
  // log_w(r) is the log of the full radial weight w(r) r^{n-1}
  auto shell = [&](double r, double log_w) {
    const double m = mean_phi(r);
    if (m == 0.0) return 0.0;
    if (std::isinf(m)) return m;
    return std::exp(std::log(m) + log_w);
  };
  MassResult res;
  auto run = [&](const ClassifyOptions& o) {
    IntegralVerdict v;
    switch (spec.region) {
      case MassRegion::Ball:
        res.region = "ball";
        v = classify_improper_at_zero([&](double r) { return shell(r, (n - 1) * std::log(r)); }, spec.radius, o);
        break;
      case MassRegion::ExteriorWeighted:
        res.region = "exterior";
        if (!spec.center.empty() && !detail::at_origin(spec.center))
          throw std::invalid_argument("exterior region is centred at the origin");
        v = classify_improper([&](double r) { return shell(r, -(n + 1.0) * std::log(r)); }, spec.radius, o);
        break;
      case MassRegion::SphericalWeighted: {
        res.region = "spherical";
        auto w = [n](double r) { return (n - 1) * std::log(r) - n * std::log1p(r * r); };
        auto inner = classify_improper_at_zero([&](double r) { return shell(r, w(r)); }, 1.0, o);
        auto outer = classify_improper([&](double r) { return shell(r, w(r)); }, 1.0, o);
        v = inner;
        if (inner.converges() && outer.converges()) {
          v.value = inner.value + outer.value;
          v.error_estimate += outer.error_estimate;
        } else if (inner.diverges() || outer.diverges()) {
          v = inner.diverges() ? inner : outer;
        } else {
          v.kind = VerdictKind::Inconclusive;
        }
        break;
      }
    }
    return v;
  };
  res.radial = detail::with_overflow_backoff(run, phi, overflowed, opt);
  res.radial = res.radial.scaled(bc.omega_nm1);
  res.value = res.radial.converges() ? res.radial.value
              : res.radial.diverges() ? kInf
                                      : std::numeric_limits<double>::quiet_NaN();
  return res;
}

/// Q*(x) = max(Q(x), 1).
inline ScalarField cutoff_lower(const ScalarField& Q) {
  const std::string label = "max(" + Q.label() + ", 1)";
  if (Q.is_radial())
    return ScalarField::radial(Q.n(), [Q](double r) { return std::max(Q.profile(r), 1.0); }, label, Q.domain());
  return ScalarField(Q.n(), [Q](std::span<const double> x) { return std::max(Q(x), 1.0); }, label, Q.domain());
}

/// Q'(x) = Q(x / |x|^2), Q'(0) = Q(inf). Exterior {|x| > R0} maps to the
/// ball of radius 1/R0 and back; the map is an involution.
inline ScalarField invert_field(const ScalarField& Q) {
  FieldDomain d;
  switch (Q.domain().kind) {
    case DomainKind::Whole:
      d = FieldDomain::whole();
      break;
    case DomainKind::Exterior:
      d = FieldDomain::ball({}, 1.0 / Q.domain().radius);
      break;
    case DomainKind::Ball:
      if (!Q.domain().center.empty() && !detail::at_origin(Q.domain().center))
        throw std::invalid_argument("invert_field: ball must be centred at the origin");
      d = FieldDomain::exterior(1.0 / Q.domain().radius);
      break;
  }
  const std::string label = Q.label() + " o inversion";
  const int n = Q.n();
  auto at_inf = [Q, n]() {
    if (!std::isnan(Q.at_infinity())) return Q.at_infinity();
    std::vector<double> far(static_cast<std::size_t>(n), 0.0);
    far[0] = 1e300;
    return Q(far);
  };
  ScalarField out = Q.is_radial()
                        ? ScalarField::radial(n, [Q, at_inf](double r) { return r == 0.0 ? at_inf() : Q.profile(1.0 / r); },
                                              label, d)
                        : ScalarField(n,
                                      [Q, at_inf](std::span<const double> x) {
                                        double s = 0.0;
                                        for (double v : x) s += v * v;
                                        if (s == 0.0) return at_inf();
                                        std::vector<double> y(x.begin(), x.end());
                                        for (double& v : y) v /= s;
                                        return Q(y);
                                      },
                                      label, d);
  if (Q.domain().kind != DomainKind::Exterior) {
    std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
    out.with_at_infinity(Q(origin));
  }
  return out;
}

/// A point of R^n or the point at infinity.
struct ExtPoint {
  std::vector<double> x;
  bool infinite = false;
  static ExtPoint at_infinity() { return {{}, true}; }
};

/// Chordal distance s(x, y) = |x - y| / (sqrt(1 + |x|^2) sqrt(1 + |y|^2)),
/// s(x, inf) = 1 / sqrt(1 + |x|^2).
inline double spherical_distance(const ExtPoint& a, const ExtPoint& b) {
  if (a.infinite && b.infinite) return 0.0;
  if (a.infinite || b.infinite) return 1.0 / std::hypot(1.0, norm((a.infinite ? b : a).x));
  if (a.x.size() != b.x.size()) throw std::invalid_argument("spherical_distance: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) d2 += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
  return std::sqrt(d2) / (std::hypot(1.0, norm(a.x)) * std::hypot(1.0, norm(b.x)));
}

/// Density (1 + |x|^2)^{-n} of the spherical volume element, n = dim x.
inline double spherical_density(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::pow(1.0 + s, -static_cast<double>(x.size()));
}

}  // namespace intcond
