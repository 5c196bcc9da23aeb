#pragma once

// Numerical verification of the spherical-mean lower bound
//   int_0^1 dr / (r q(r))  >=  (1/n) int_{lambda_n M}^inf dtau / (tau Phi^-1(tau)),
// its cut-off and exponent variants, the divergence theorem built on it, and
// the localized (interior, exterior, spherical-weight) forms.

#include "intcond/conditions.hpp"
#include "intcond/geometry.hpp"
#include "intcond/monotone.hpp"
#include "intcond/quad.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace intcond {

/// A hypothesis of the bound (monotone convex Phi) does not hold.
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BoundConfig {
  std::size_t samples = std::size_t{1} << 14;
  std::uint64_t seed = 0;
  double lambda = 1.0;             // exponent on q in the left-hand side
  std::optional<double> delta0;    // lower limit of the inverse tail; default e Phi(0) or 1
  int profile_points = 512;        // geometric radial grid on [finest_eps, 1]
  double finest_eps = 1e-6;
  int eps_ladder_depth = 20;       // eps = 2^-1 .. 2^-depth, plus finest_eps
  double growth_c = 0.05;          // LHS(eps) >= growth_c log(1/eps) across the ladder
  double rhs_slack = 1e-3;
  double jensen_sigmas = 3.0;
  double mass_rel_tol = 1e-6;      // exterior / inverted mass agreement
  double inf_threshold = 0.0;
  ClassifyOptions classify;
};

/// q, mean(Phi o Q) and h(r) = r^n Phi(q(r)) on a radial grid.
struct MeanProfile {
  std::vector<double> center;
  std::vector<double> radii;  // ascending
  std::vector<double> q;
  std::vector<double> q_stderr;
  std::vector<double> phi_mean;  // mean of Phi(Q) over the sphere
  std::vector<double> phi_mean_stderr;
  std::vector<double> h;
  std::size_t samples = 0;  // 0 when means are exact
  std::uint64_t seed = 0;
};

inline std::vector<double> geometric_radii(double eps, double hi, int points) {
  if (!(eps > 0 && eps < hi) || points < 2) throw std::invalid_argument("radial grid needs 0 < eps < hi and >= 2 points");
  std::vector<double> r(static_cast<std::size_t>(points));
  const double le = std::log(eps), lh = std::log(hi);
  for (int i = 0; i < points; ++i) r[static_cast<std::size_t>(i)] = std::exp(le + (lh - le) * i / (points - 1));
  r.back() = hi;
  return r;
}

inline MeanProfile build_profile(const ScalarField& Q, const MonotoneFn& phi, std::vector<double> center,
                                 const std::vector<double>& radii, const SphereSampler& sampler,
                                 const MeanOptions& mopt = {}) {
  MeanProfile p;
  p.center = center;
  p.radii = radii;
  p.seed = sampler.seed();
  const int n = Q.n();
  for (double r : radii) {
    auto s = sphere_stats(Q, &phi, center, r, sampler, mopt);
    p.q.push_back(s.q.value);
    p.q_stderr.push_back(s.q.std_error);
    p.phi_mean.push_back(s.phi_q.value);
    p.phi_mean_stderr.push_back(s.phi_q.std_error);
    p.h.push_back(std::pow(r, n) * phi(s.q.value));
    p.samples = std::max(p.samples, s.q.samples);
  }
  return p;
}

namespace detail {

inline double lhs_integrand(double q, double lambda) {
  if (q == 0.0) return kInf;
  if (std::isinf(q)) return 0.0;
  return std::pow(q, -lambda);
}

inline void require_lambda(double lambda) {
  if (!(lambda > 0 && lambda <= 1)) throw std::invalid_argument("exponent lambda must lie in (0, 1]");
}

}  // namespace detail

/// int_eps^1 dr / (r q^lambda(r)) by the trapezoid rule in s = log(1/r) on the
/// profile grid; eps must lie within the grid. Returns inf if q vanishes on
/// the range; throws std::domain_error if q is identically inf (degenerate).
inline double lhs_integral(const MeanProfile& p, double lambda, double eps) {
  detail::require_lambda(lambda);
  if (p.radii.empty() || eps < p.radii.front() * (1 - 1e-12) || eps >= p.radii.back())
    throw std::invalid_argument("lhs_integral: eps outside the profile grid");
  if (std::all_of(p.q.begin(), p.q.end(), [](double v) { return std::isinf(v); }))
    throw std::domain_error("lhs_integral: q is identically inf (degenerate profile)");
  double total = 0.0;
  for (std::size_t i = p.radii.size() - 1; i > 0; --i) {
    double r_lo = p.radii[i - 1];
    const double r_hi = p.radii[i];
    if (r_hi <= eps) break;
    const double f_hi = detail::lhs_integrand(p.q[i], lambda);
    double f_lo = detail::lhs_integrand(p.q[i - 1], lambda);
    if (r_lo < eps) {
      const double w = std::log(r_hi / eps) / std::log(r_hi / r_lo);
      f_lo = f_hi + w * (f_lo - f_hi);
      r_lo = eps;
    }
    total += 0.5 * (f_lo + f_hi) * std::log(r_hi / r_lo);
  }
  return total;
}

/// Same integral with q given as a function of r (adaptive quadrature in s).
inline double lhs_integral(const std::function<double(double)>& q, double lambda, double eps) {
  detail::require_lambda(lambda);
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("lhs_integral: eps must lie in (0, 1)");
  auto f = [&](double s) { return detail::lhs_integrand(q(std::exp(-s)), lambda); };
  return gauss_kronrod(f, 0.0, std::log(1.0 / eps), 1e-300, 1e-11).value;
}

/// Cumulative truncated LHS values at each eps (sorted descending).
inline std::vector<Truncation> lhs_ladder(const std::function<double(double)>& q, double lambda,
                                          std::vector<double> eps, double alpha = 1.0) {
  detail::require_lambda(std::min(lambda, 1.0));
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<Truncation> out;
  double s_prev = 0.0;
  double sum = 0.0;
  auto f = [&](double s) {
    const double r = std::exp(-s);
    const double v = detail::lhs_integrand(q(r), lambda);
    return alpha == 1.0 || v == 0.0 ? v : v * std::pow(r, 1.0 - alpha);
  };
  for (double e : eps) {
    const double s = std::log(1.0 / e);
    if (s > s_prev) sum += gauss_kronrod(f, s_prev, s, 1e-300, 1e-11).value;
    s_prev = s;
    out.push_back({e, sum});
  }
  return out;
}

/// Classification of int_0^r0 dr / (r^alpha q^beta(r)).
inline IntegralVerdict lhs_verdict(const std::function<double(double)>& q, double beta, double alpha = 1.0,
                                   double r0 = 1.0, const ClassifyOptions& opt = {}) {
  return classify_improper_at_zero(
      [&](double r) {
        const double v = detail::lhs_integrand(q(r), beta);
        return v == 0.0 ? 0.0 : v / std::pow(r, alpha);
      },
      r0, opt);
}

/// (1/n) int_{lambda_n M}^inf dtau / (tau Phi^-1(tau)). M = inf gives 0.
inline IntegralVerdict rhs_bound(const MonotoneFn& phi, double M, int n, const ClassifyOptions& opt = {}) {
  if (std::isnan(M) || M < 0) throw std::invalid_argument("rhs_bound: M must lie in [0, inf]");
  if (M == 0.0) throw std::invalid_argument("rhs_bound: M = 0 leaves the bound undefined");
  if (std::isinf(M)) return IntegralVerdict::converged(0.0, 0.0, "M = inf: empty tail");
  const auto bc = ball_constants(n);
  const double lower = bc.lambda_n * M;
  if (!(lower > value_at_plus0(phi)))
    return IntegralVerdict::diverged("lower limit lies on the plateau where Phi^-1 = 0");
  auto v = classify_improper(
      [&](double tau) {
        const double inv = phi.inverse_at(tau);
        return inv >= kSaturated ? 0.0 : 1.0 / tau / inv;
      },
      lower, opt);
  return v.scaled(1.0 / n);
}

enum class Outcome { Holds, Violated, Indeterminate };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Holds:
      return "holds";
    case Outcome::Violated:
      return "violated";
    case Outcome::Indeterminate:
      return "indeterminate";
  }
  return "?";
}

struct ProofDiagnostics {
  double h_integral = 0.0;  // int_0^1 h(r) dr / r
  double h_bound = 0.0;     // M / omega_{n-1}
  bool h_ok = true;
  double T_measure = 0.0;   // |{s : h(e^-s) > M_n}| on the profile grid
  double T_grid_step = 0.0;
  bool T_ok = true;
  bool jensen_ok = true;
  double jensen_worst = -kInf;  // max of Phi(q) - mean(Phi o Q) - k stderr over the grid
};

struct BoundReport {
  int n = 0;
  std::string field;
  std::string phi;
  double lambda_exponent = 1.0;
  double M = 0.0;
  double M_n = 0.0;
  double lambda_n = 0.0;
  MassResult mass;
  std::vector<Truncation> lhs_truncated;  // (eps, int_eps^1)
  double lhs_finest = 0.0;
  IntegralVerdict lhs_verdict;
  bool lhs_growth_ok = false;
  IntegralVerdict rhs;
  Outcome outcome = Outcome::Indeterminate;
  bool degenerate = false;
  std::string note;
  ProofDiagnostics diagnostics;
  bool cutoff_chain_ok = true;  // q^lambda <= q* on the grid (cut-off variant)
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  int profile_points = 0;
};

namespace detail {

inline std::vector<double> eps_values(const BoundConfig& cfg) {
  std::vector<double> e;
  for (int k = 1; k <= cfg.eps_ladder_depth; ++k) e.push_back(std::ldexp(1.0, -k));
  e.push_back(cfg.finest_eps);
  std::sort(e.begin(), e.end(), std::greater<>());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return e;
}

inline std::function<double(double)> mean_fn(const ScalarField& Q, std::vector<double> c, const SphereSampler& s,
                                             const MeanOptions& mopt) {
  return [&Q, c = std::move(c), &s, mopt](double r) { return spherical_mean(Q, c, r, s, mopt).value; };
}

inline void require_phi(const MonotoneFn& phi) {
  if (!phi.non_decreasing()) throw HypothesisError("Phi must be non-decreasing");
  if (!is_convex(phi).convex) throw HypothesisError("Phi must be convex");
}

inline Outcome decide(const BoundReport& r, double slack) {
  if (r.rhs.inconclusive()) return Outcome::Indeterminate;
  if (r.rhs.converges()) {
    if (r.lhs_finest >= r.rhs.value - slack) return Outcome::Holds;
    if (r.lhs_verdict.diverges()) return Outcome::Holds;
    if (r.lhs_verdict.converges()) return r.lhs_verdict.value >= r.rhs.value - slack ? Outcome::Holds : Outcome::Violated;
    return Outcome::Indeterminate;
  }
  if (r.lhs_verdict.diverges()) return Outcome::Holds;
  if (r.lhs_verdict.converges()) return Outcome::Violated;
  return Outcome::Indeterminate;
}

/// Lower bound with left-hand side computed from the means `q` of `lhs_field`
/// and mass / diagnostics from `mass_field`.
inline BoundReport bound_core(const ScalarField& lhs_field, const ScalarField& mass_field, const MonotoneFn& phi,
                              double lambda, const BoundConfig& cfg) {
  require_phi(phi);
  require_lambda(lambda);
  const int n = mass_field.n();
  const auto bc = ball_constants(n);
  const SphereSampler sampler(n, cfg.samples, cfg.seed);
  const MeanOptions mopt{cfg.inf_threshold};
  const std::vector<double> origin(static_cast<std::size_t>(n), 0.0);

  BoundReport r;
  r.n = n;
  r.field = lhs_field.label();
  r.phi = phi.to_string();
  r.lambda_exponent = lambda;
  r.lambda_n = bc.lambda_n;
  r.seed = cfg.seed;
  r.profile_points = cfg.profile_points;

  r.mass = phi_mass(mass_field, phi, {MassRegion::Ball, {}, 1.0}, sampler, cfg.classify, mopt);
  r.M = r.mass.value;
  r.M_n = r.M / bc.Omega_n;

  auto q = mean_fn(lhs_field, origin, sampler, mopt);
  const auto radii = geometric_radii(cfg.finest_eps, 1.0, cfg.profile_points);
  const auto prof = build_profile(mass_field, phi, origin, radii, sampler, mopt);
  r.samples = prof.samples;

  const bool q_all_inf = std::all_of(prof.q.begin(), prof.q.end(), [](double v) { return std::isinf(v); });
  if (q_all_inf && &lhs_field == &mass_field) {
    r.degenerate = true;
    r.note = "q is identically inf: left-hand side is 0";
  }
  r.lhs_truncated = lhs_ladder(q, lambda, eps_values(cfg));
  for (const auto& t : r.lhs_truncated)
    if (t.limit == cfg.finest_eps) r.lhs_finest = t.partial;
  r.lhs_growth_ok = std::all_of(r.lhs_truncated.begin(), r.lhs_truncated.end(), [&](const Truncation& t) {
    return t.partial >= cfg.growth_c * std::log(1.0 / t.limit);
  });
  r.lhs_verdict = lhs_verdict(q, lambda, 1.0, 1.0, cfg.classify);
  if (std::isinf(r.lhs_finest)) {
    r.degenerate = true;
    r.note = "q vanishes on a set of positive measure: left-hand side is inf";
    r.lhs_verdict = IntegralVerdict::diverged("q vanishes");
  }

  if (r.M == 0.0) {
    r.note = "M = 0: the bound is undefined for this input";
    r.rhs = IntegralVerdict{};
    r.rhs.note = r.note;
    r.outcome = Outcome::Indeterminate;
  } else if (std::isnan(r.M)) {
    r.note = "Phi-mass could not be classified";
    r.rhs.note = r.note;
    r.outcome = Outcome::Indeterminate;
  } else {
    r.rhs = rhs_bound(phi, r.M, n, cfg.classify);
    r.outcome = decide(r, cfg.rhs_slack);
  }

  // Diagnostics from the proof chain.
  auto& d = r.diagnostics;
  d.h_bound = r.M / bc.omega_nm1;
  bool h_overflow = false;
  auto h_int = detail::with_overflow_backoff(
      [&](const ClassifyOptions& o) {
        return classify_improper_at_zero(
            [&](double rr) {
              const double m = spherical_mean(mass_field, origin, rr, sampler, mopt).value;
              const double v = phi(m);
              if (std::isinf(v) && std::isfinite(m)) h_overflow = true;
              return v == 0.0 ? 0.0 : std::exp(std::log(v) + (n - 1) * std::log(rr));
            },
            1.0, o);
      },
      phi, h_overflow, cfg.classify);
  d.h_integral = h_int.converges() ? h_int.value : kInf;
  d.h_ok = std::isinf(d.h_bound) || d.h_integral <= d.h_bound * (1 + 1e-6) + h_int.error_estimate +
                                                     r.mass.radial.error_estimate / bc.omega_nm1;
  d.T_grid_step = std::log(radii[1] / radii[0]);
  if (std::isfinite(r.M_n)) {
    for (std::size_t i = 0; i < radii.size(); ++i)
      if (prof.h[i] > r.M_n) d.T_measure += d.T_grid_step;
  }
  d.T_ok = d.T_measure <= 1.0 / n + d.T_grid_step;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double lhs = phi(prof.q[i]);
    const double rhs = prof.phi_mean[i];
    if (std::isinf(rhs)) continue;
    const double excess = lhs - rhs - cfg.jensen_sigmas * prof.phi_mean_stderr[i] - 1e-12 * std::fabs(rhs);
    d.jensen_worst = std::max(d.jensen_worst, excess);
    if (excess > 0) d.jensen_ok = false;
  }
  return r;
}

}  // namespace detail

/// The lower bound for Q on the unit ball with exponent lambda = 1.
inline BoundReport verify_mass_bound(const ScalarField& Q, const MonotoneFn& phi, const BoundConfig& cfg = {}) {
  return detail::bound_core(Q, Q, phi, 1.0, cfg);
}

/// Cut-off variant: the right-hand side uses M* of Q* = max(Q, 1); the left
/// uses q^lambda of the original field, lambda in (0, 1].
inline BoundReport verify_cutoff_bound(const ScalarField& Q, const MonotoneFn& phi, double lambda,
                                       const BoundConfig& cfg = {}) {
  const ScalarField Qs = cutoff_lower(Q);
  BoundReport r = detail::bound_core(Q, Qs, phi, lambda, cfg);
  const SphereSampler sampler(Q.n(), cfg.samples, cfg.seed);
  const std::vector<double> origin(static_cast<std::size_t>(Q.n()), 0.0);
  for (double rr : geometric_radii(cfg.finest_eps, 1.0, std::min(cfg.profile_points, 64))) {
    const double q = spherical_mean(Q, origin, rr, sampler).value;
    const double qs = spherical_mean(Qs, origin, rr, sampler).value;
    if (!(q <= qs * (1 + 1e-12) && qs >= 1.0 - 1e-12 && std::pow(q, lambda) <= qs * (1 + 1e-12))) r.cutoff_chain_ok = false;
  }
  return r;
}

enum class FindingStatus { Confirmed, HypothesisFails, Violated, Inconclusive };

inline const char* to_string(FindingStatus s) {
  switch (s) {
    case FindingStatus::Confirmed:
      return "confirmed";
    case FindingStatus::HypothesisFails:
      return "hypothesis_fails";
    case FindingStatus::Violated:
      return "violated";
    case FindingStatus::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

struct ExponentCase {
  double alpha = 1.0;
  double beta = 1.0;
  IntegralVerdict verdict;
};

struct Finding {
  std::string claim;
  FindingStatus status = FindingStatus::Inconclusive;
  std::string message;
  std::string failed_hypothesis;  // "finite_phi_mass", "inverse_tail_divergence", "convex_phi", ...
  double M = 0.0;
  double delta0 = 0.0;
  bool vacuous_below_tau0 = false;  // tails starting below Phi(0) diverge trivially and are not evidence
  IntegralVerdict inverse_tail;
  IntegralVerdict lhs;
  std::vector<Truncation> lhs_ladder;
  bool lhs_growth_ok = false;
  std::vector<ExponentCase> exponents;
  std::optional<double> mass_rel_diff;     // exterior: weighted vs inverted mass
  std::optional<IntegralVerdict> direct;   // exterior: int_R0^inf dR / (R q^lambda) computed directly
  std::vector<Finding> parts;
};

inline double default_delta0(const MonotoneFn& phi) {
  const double tau0 = phi(0.0);
  return tau0 > 0 ? std::numbers::e * tau0 : 1.0;
}

namespace detail {

inline FindingStatus combine(FindingStatus a, FindingStatus b) {
  auto rank = [](FindingStatus s) {
    switch (s) {
      case FindingStatus::Violated:
        return 3;
      case FindingStatus::HypothesisFails:
        return 2;
      case FindingStatus::Inconclusive:
        return 1;
      default:
        return 0;
    }
  };
  return rank(a) >= rank(b) ? a : b;
}

/// Hypotheses of the divergence theorem; fills M, delta0, inverse_tail and
/// returns false (with status set) when one fails or is undecided.
inline bool check_hypotheses(Finding& f, const ScalarField& Q, const MonotoneFn& phi, const BoundConfig& cfg,
                             const SphereSampler& sampler) {
  const double tau0 = phi(0.0);
  f.delta0 = cfg.delta0.value_or(default_delta0(phi));
  if (!(f.delta0 > tau0))
    throw std::invalid_argument("delta0 = " + format_double(f.delta0) + " must exceed Phi(0) = " + format_double(tau0) +
                                ": below Phi(0) the inverse tail diverges trivially and says nothing about Q");
  f.vacuous_below_tau0 = tau0 > 0;
  if (!phi.non_decreasing() || !is_convex(phi).convex) {
    f.status = FindingStatus::HypothesisFails;
    f.failed_hypothesis = "convex_phi";
    f.message = "hypothesis convex_phi fails: Phi is not convex and non-decreasing";
    return false;
  }
  auto mass = phi_mass(Q, phi, {MassRegion::Ball, {}, 1.0}, sampler, cfg.classify, {cfg.inf_threshold});
  f.M = mass.value;
  f.inverse_tail = classify_improper(
      [&](double tau) {
        const double inv = phi.inverse_at(tau);
        return inv >= kSaturated ? 0.0 : 1.0 / tau / inv;
      },
      f.delta0, cfg.classify);
  if (std::isinf(f.M)) {
    f.status = FindingStatus::HypothesisFails;
    f.failed_hypothesis = "finite_phi_mass";
    f.message = "hypothesis finite_phi_mass fails: the Phi-mass of Q is infinite";
    return false;
  }
  if (std::isnan(f.M)) {
    f.status = FindingStatus::Inconclusive;
    f.message = "Phi-mass of Q could not be classified";
    return false;
  }
  if (f.inverse_tail.converges()) {
    f.status = FindingStatus::HypothesisFails;
    f.failed_hypothesis = "inverse_tail_divergence";
    f.message = "hypothesis inverse_tail_divergence fails: int dtau / (tau Phi^-1(tau)) converges from delta0";
    return false;
  }
  if (f.inverse_tail.inconclusive()) {
    f.status = FindingStatus::Inconclusive;
    f.message = "inverse tail undecided";
    return false;
  }
  return true;
}

/// Side condition for exponents below 1: Phi(1) < inf, or q >= 1 on a set of positive measure.
inline bool side_condition(const MonotoneFn& phi, const std::function<double(double)>& q, const BoundConfig& cfg) {
  if (std::isfinite(phi(1.0))) return true;
  for (double r : geometric_radii(cfg.finest_eps, 1.0, std::min(cfg.profile_points, 128)))
    if (q(r) >= 1.0) return true;
  return false;
}

inline ScalarField unit_ball_rescale(const ScalarField& Q, std::vector<double> x0, double r0) {
  const int n = Q.n();
  if (Q.is_radial() && detail::at_origin(x0))
    return ScalarField::radial(n, [Q, r0](double r) { return Q.profile(r0 * r); }, Q.label(), FieldDomain::ball({}, 1.0));
  return ScalarField(
      n,
      [Q, x0, r0](std::span<const double> y) {
        std::vector<double> x(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) x[i] = x0[i] + r0 * y[i];
        return Q(x);
      },
      Q.label() + " near x0", FieldDomain::ball({}, 1.0));
}

}  // namespace detail

/// Divergence theorem: finite Phi-mass plus a divergent inverse tail from
/// delta0 > Phi(0) force int_0^1 dr / (r q^lambda(r)) = inf.
inline Finding check_divergence_theorem(const ScalarField& Q, const MonotoneFn& phi, const BoundConfig& cfg = {}) {
  detail::require_lambda(cfg.lambda);
  Finding f;
  f.claim = "divergence";
  const SphereSampler sampler(Q.n(), cfg.samples, cfg.seed);
  if (!detail::check_hypotheses(f, Q, phi, cfg, sampler)) return f;
  const std::vector<double> origin(static_cast<std::size_t>(Q.n()), 0.0);
  auto q = detail::mean_fn(Q, origin, sampler, {cfg.inf_threshold});
  if (cfg.lambda < 1.0 && !detail::side_condition(phi, q, cfg)) {
    f.status = FindingStatus::HypothesisFails;
    f.failed_hypothesis = "phi_one_finite";
    f.message = "hypothesis phi_one_finite fails: Phi(1) = inf and q < 1 on the grid";
    return f;
  }
  f.lhs_ladder = lhs_ladder(q, cfg.lambda, detail::eps_values(cfg));
  f.lhs_growth_ok = std::all_of(f.lhs_ladder.begin(), f.lhs_ladder.end(), [&](const Truncation& t) {
    return t.partial >= cfg.growth_c * std::log(1.0 / t.limit);
  });
  f.lhs = lhs_verdict(q, cfg.lambda, 1.0, 1.0, cfg.classify);
  if (f.lhs.diverges()) {
    f.status = FindingStatus::Confirmed;
    f.message = "hypotheses hold and the left-hand side diverges";
  } else if (f.lhs.converges()) {
    f.status = FindingStatus::Violated;
    f.message = "hypotheses hold but the left-hand side converges";
  } else {
    f.status = FindingStatus::Inconclusive;
    f.message = "left-hand side undecided";
  }
  return f;
}

/// Exponent family: int_0^1 dr / (r^alpha q^beta(r)) = inf for alpha >= 1,
/// beta in (0, alpha], under the theorem's hypotheses plus the side condition.
inline Finding check_exponent_family(const ScalarField& Q, const MonotoneFn& phi,
                                     const std::vector<std::pair<double, double>>& exponents,
                                     const BoundConfig& cfg = {}) {
  if (exponents.empty()) throw std::invalid_argument("no (alpha, beta) pairs given");
  for (auto [a, b] : exponents)
    if (!(a >= 1.0) || !(b > 0.0) || !(b <= a))
      throw std::invalid_argument("exponent pair (" + format_double(a) + ", " + format_double(b) +
                                  ") outside alpha >= 1, 0 < beta <= alpha");
  Finding f;
  f.claim = "exponent_family";
  const SphereSampler sampler(Q.n(), cfg.samples, cfg.seed);
  if (!detail::check_hypotheses(f, Q, phi, cfg, sampler)) return f;
  const std::vector<double> origin(static_cast<std::size_t>(Q.n()), 0.0);
  auto q = detail::mean_fn(Q, origin, sampler, {cfg.inf_threshold});
  if (!detail::side_condition(phi, q, cfg)) {
    f.status = FindingStatus::HypothesisFails;
    f.failed_hypothesis = "phi_one_finite";
    f.message = "hypothesis phi_one_finite fails: Phi(1) = inf and q < 1 on the grid";
    return f;
  }
  f.status = FindingStatus::Confirmed;
  f.message = "every exponent pair diverges";
  for (auto [a, b] : exponents) {
    ExponentCase c{a, b, {}};
    c.verdict = classify_improper_at_zero(
        [&](double r) {
          const double qv = q(r);
          if (qv == 0.0) return kInf;
          if (std::isinf(qv)) return 0.0;
          return std::pow(r, -a) * std::pow(qv, -b);
        },
        1.0, cfg.classify);
    if (c.verdict.converges()) {
      f.status = FindingStatus::Violated;
      f.message = "a pair converges";
    } else if (c.verdict.inconclusive() && f.status == FindingStatus::Confirmed) {
      f.status = FindingStatus::Inconclusive;
      f.message = "some pair undecided";
    }
    f.exponents.push_back(std::move(c));
  }
  return f;
}

enum class SiteKind { Interior, Exterior, Spherical };

struct Site {
  SiteKind kind = SiteKind::Interior;
  std::vector<double> x0;  // interior centre
  double r0 = 1.0;         // interior radius
  double R0 = 1.0;         // exterior radius
};

/// Localized forms of the divergence theorem.
inline Finding check_localized(const ScalarField& Q, const MonotoneFn& phi, const Site& site, const BoundConfig& cfg = {}) {
  const int n = Q.n();
  Finding f;
  switch (site.kind) {
    case SiteKind::Interior: {
      f.claim = "interior";
      std::vector<double> x0 = site.x0.empty() ? std::vector<double>(static_cast<std::size_t>(n), 0.0) : site.x0;
      if (static_cast<int>(x0.size()) != n) throw std::invalid_argument("centre dimension does not match the field");
      if (!(site.r0 > 0) || !Q.contains_sphere(x0, site.r0))
        throw std::domain_error("ball B(x0, r0) is not inside the domain of the field");
      // x0 + r y loses y once r |y| falls below the spacing of doubles near x0
      BoundConfig local = cfg;
      double x0_max = 0.0;
      for (double v : x0) x0_max = std::max(x0_max, std::fabs(v));
      if (x0_max > 0)
        local.classify.upper_limit = std::min(
            local.classify.upper_limit, site.r0 / (64 * std::numeric_limits<double>::epsilon() * x0_max));
      Finding inner = check_divergence_theorem(detail::unit_ball_rescale(Q, x0, site.r0), phi, local);
      inner.claim = "interior";
      return inner;
    }
    case SiteKind::Exterior: {
      f.claim = "exterior";
      if (!(site.R0 > 0)) throw std::invalid_argument("exterior radius must be positive");
      if (Q.domain().kind == DomainKind::Ball)
        throw std::domain_error("exterior site needs a field defined near infinity");
      if (Q.domain().kind == DomainKind::Exterior && site.R0 < Q.domain().radius)
        throw std::domain_error("exterior site leaves the domain of the field");
      ScalarField Qe = Q;
      if (Q.domain().kind == DomainKind::Whole)
        Qe = Q.is_radial() ? ScalarField::radial(n, [Q](double r) { return Q.profile(r); }, Q.label(),
                                                 FieldDomain::exterior(site.R0))
                           : ScalarField(n, [Q](std::span<const double> x) { return Q(x); }, Q.label(),
                                         FieldDomain::exterior(site.R0));
      const ScalarField Qi = invert_field(Qe);
      const SphereSampler sampler(n, cfg.samples, cfg.seed);
      auto ext = phi_mass(Qe, phi, {MassRegion::ExteriorWeighted, {}, site.R0}, sampler, cfg.classify);
      auto inv = phi_mass(Qi, phi, {MassRegion::Ball, {}, 1.0 / site.R0}, sampler, cfg.classify);
      if (std::isfinite(ext.value) && std::isfinite(inv.value))
        f.mass_rel_diff = std::fabs(ext.value - inv.value) / std::max({std::fabs(ext.value), std::fabs(inv.value), 1e-300});
      else
        f.mass_rel_diff = (std::isinf(ext.value) && std::isinf(inv.value)) ? 0.0 : kInf;
      Finding inner = check_divergence_theorem(detail::unit_ball_rescale(Qi, std::vector<double>(static_cast<std::size_t>(n), 0.0),
                                                                         1.0 / site.R0),
                                               phi, cfg);
      inner.claim = "exterior";
      inner.mass_rel_diff = f.mass_rel_diff;
      std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
      auto q = detail::mean_fn(Qe, origin, sampler, {cfg.inf_threshold});
      inner.direct = classify_improper(
          [&](double R) {
            const double v = detail::lhs_integrand(q(R), cfg.lambda);
            return v == 0.0 ? 0.0 : v / R;
          },
          site.R0, cfg.classify);
      if (*f.mass_rel_diff > cfg.mass_rel_tol) {
        inner.status = FindingStatus::Violated;
        inner.message = "weighted exterior mass and inverted ball mass disagree";
      } else if (inner.status == FindingStatus::Confirmed && !inner.direct->diverges()) {
        inner.status = inner.direct->converges() ? FindingStatus::Violated : FindingStatus::Inconclusive;
        inner.message = "direct exterior integral does not confirm divergence";
      }
      return inner;
    }
    case SiteKind::Spherical: {
      f.claim = "spherical";
      if (Q.domain().kind != DomainKind::Whole) throw std::domain_error("spherical weight needs a field on all of R^n");
      // density lower bounds on a radial sweep
      bool density_ok = true;
      std::vector<double> x(static_cast<std::size_t>(n), 0.0);
      for (int i = 0; i <= 400; ++i) {
        const double r = std::pow(10.0, -3.0 + 6.0 * i / 400.0);
        x[0] = r;
        const double d = spherical_density(x);
        const double rho = r * 1.0000001;
        if (d < std::pow(1.0 + rho * rho, -static_cast<double>(n)) * (1 - 1e-12)) density_ok = false;
        if (r >= 1.0 && d < std::pow(2.0, -n) * std::pow(r, -2.0 * n) * (1 - 1e-12)) density_ok = false;
      }
      const SphereSampler sampler(n, cfg.samples, cfg.seed);
      auto ms = phi_mass(Q, phi, {MassRegion::SphericalWeighted, {}, 1.0}, sampler, cfg.classify);
      f.M = ms.value;
      if (!density_ok) {
        f.status = FindingStatus::Violated;
        f.message = "spherical density lower bounds fail";
        return f;
      }
      if (std::isinf(f.M)) {
        f.status = FindingStatus::HypothesisFails;
        f.failed_hypothesis = "finite_spherical_mass";
        f.message = "hypothesis finite_spherical_mass fails";
        return f;
      }
      Site in{SiteKind::Interior, site.x0, site.r0, site.R0};
      Site out{SiteKind::Exterior, {}, site.r0, site.R0};
      f.parts.push_back(check_localized(Q, phi, in, cfg));
      f.parts.push_back(check_localized(Q, phi, out, cfg));
      f.status = FindingStatus::Confirmed;
      for (const auto& p : f.parts) f.status = detail::combine(f.status, p.status);
      f.message = f.status == FindingStatus::Confirmed ? "finite spherical mass gives both localized conclusions"
                                                       : "a localized conclusion is not confirmed";
      return f;
    }
  }
  return f;
}

}  // namespace intcond
