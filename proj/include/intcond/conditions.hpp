#pragma once

// The six integral divergence conditions on a non-decreasing Phi, with
// H = log Phi:
//   C1  int_D^inf H'(t) dt / t          C4  int_0^d H(1/t) dt
//   C2  int_D^inf dH(t) / t             C5  int_D*^inf d eta / H^-1(eta)
//   C3  int_D^inf H(t) dt / t^2         C6  int_d*^inf d tau / (tau Phi^-1(tau))

#include "intcond/monotone.hpp"
#include "intcond/quad.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace intcond {

/// Inverse values at or beyond this lie outside the classifier's range and
/// are treated as infinite.
inline constexpr double kSaturated = 1e300;

/// H = log o Phi. On a zero plateau of Phi, H is -inf and its density is 0.
inline MonotoneFn h_from_phi(const MonotoneFn& phi) {
  if (!phi.non_decreasing()) throw std::invalid_argument("h_from_phi: Phi must be non-decreasing");
  return compose(MonotoneFn::log_affine(0.0, 1.0), phi);
}

/// Phi(+0), the right limit at the origin.
inline double value_at_plus0(const MonotoneFn& f) {
  if (std::holds_alternative<Callback>(f.rep()) || std::holds_alternative<Composite>(f.rep()))
    return f(std::numeric_limits<double>::denorm_min());
  return f(0.0);
}

/// t0 = sup{t : Phi(t) = 0}; 0 when Phi(0) > 0.
inline double zero_plateau_end(const MonotoneFn& phi) {
  if (phi(0.0) > 0.0) return 0.0;
  return phi.upper_inverse_at(0.0);
}

/// t* = right edge of the initial constancy plateau [0, t*] of Phi.
inline double initial_plateau_end(const MonotoneFn& phi) {
  return phi.upper_inverse_at(phi(0.0));
}

/// True iff Phi is infinite on a whole tail [T, inf) with T finite.
inline bool infinite_tail(const MonotoneFn& f) {
  if (std::holds_alternative<Family>(f.rep())) return false;
  if (const auto* pl = std::get_if<PiecewiseLinear>(&f.rep())) {
    for (const auto& k : pl->knots)
      if (std::isinf(k.right)) return true;
    return false;
  }
  if (std::holds_alternative<StepSeries>(f.rep())) return false;
  if (const auto* c = std::get_if<Composite>(&f.rep()))
    if (std::holds_alternative<Family>(c->outer->rep())) return infinite_tail(*c->inner);
  if (const auto* inv = std::get_if<Inverse>(&f.rep())) return std::isfinite(limit_at_infinity(*inv->of));
  return std::isinf(f(1e300));
}

/// Declared absolute continuity: closed-form families, jump-free
/// piecewise-linear functions and family-of-such compositions.
inline bool declared_absolutely_continuous(const MonotoneFn& f) {
  if (std::holds_alternative<Family>(f.rep())) return true;
  if (const auto* pl = std::get_if<PiecewiseLinear>(&f.rep())) {
    for (const auto& k : pl->knots)
      if (k.left != k.right) return false;
    return true;
  }
  if (const auto* c = std::get_if<Composite>(&f.rep()))
    return std::holds_alternative<Family>(c->outer->rep()) && declared_absolutely_continuous(*c->inner);
  return false;
}

/// Values taken on constancy intervals of positive length, where the
/// generalized inverse jumps. Empty when the representation does not expose them.
inline std::vector<double> plateau_values(const MonotoneFn& f) {
  std::vector<double> out;
  if (std::holds_alternative<PiecewiseLinear>(f.rep()) || std::holds_alternative<StepSeries>(f.rep())) {
    for (const auto& c : constancy_intervals(f))
      if (c.hi > c.lo && std::isfinite(c.value)) out.push_back(c.value);
  } else if (const auto* c = std::get_if<Composite>(&f.rep())) {
    if (const auto* fam = std::get_if<Family>(&c->outer->rep()))
      for (double v : plateau_values(*c->inner)) out.push_back(detail::family_eval(*fam, v));
  }
  return out;
}

/// Discontinuity locations of f, for quadrature breakpoints.
inline std::vector<double> jump_locations(const MonotoneFn& f) {
  std::vector<double> out;
  if (const auto* c = std::get_if<Composite>(&f.rep())) {
    if (std::holds_alternative<Family>(c->outer->rep())) return jump_locations(*c->inner);
    return out;
  }
  if (auto j = jumps_in(f, -1.0, 1e300))
    for (const auto& p : *j) out.push_back(p.at);
  return out;
}

struct ConditionLimits {
  std::optional<double> Delta;       // C1-C3 lower limit
  std::optional<double> delta;       // C4 upper limit
  std::optional<double> Delta_star;  // C5 lower limit
  std::optional<double> delta_star;  // C6 lower limit
};

struct ConditionEntry {
  IntegralVerdict verdict;
  double limit_used = 0.0;
};

struct ConditionReport {
  std::string phi;
  double t0 = 0.0;
  double tstar = 0.0;
  double tau0 = 0.0;    // Phi(0)
  double phi_plus0 = 0.0;
  double h_plus0 = 0.0;
  bool absolutely_continuous = false;
  bool convex = false;
  std::array<ConditionEntry, 6> c{};  // C1..C6 at index 0..5

  [[nodiscard]] const ConditionEntry& operator[](int k) const { return c.at(static_cast<std::size_t>(k - 1)); }
};

/// Evaluates C1..C6. Lower limits default to D = max(2 t0, t* + 1, 1),
/// d = 1/D, d* = max(e Phi(+0), Phi(D)), D* = log d*. Overrides must satisfy
/// D > t0, d < 1/t0, D* > H(+0), d* > Phi(+0); otherwise std::invalid_argument.
inline ConditionReport evaluate_conditions(const MonotoneFn& phi, const ConditionLimits& lim = {},
                                           const ClassifyOptions& opt = {}) {
  if (!phi.non_decreasing()) throw std::invalid_argument("conditions: Phi must be non-decreasing");
  ConditionReport r;
  r.phi = phi.to_string();
  r.tau0 = phi(0.0);
  r.phi_plus0 = value_at_plus0(phi);
  r.h_plus0 = std::log(r.phi_plus0);
  r.t0 = zero_plateau_end(phi);
  if (std::isinf(r.t0)) throw std::invalid_argument("conditions: Phi vanishes identically");
  r.tstar = initial_plateau_end(phi);
  r.absolutely_continuous = declared_absolutely_continuous(phi);
  r.convex = is_convex(phi).convex;

  const double Delta = lim.Delta.value_or(std::max({2.0 * r.t0, std::isinf(r.tstar) ? 1.0 : r.tstar + 1.0, 1.0}));
  if (!(Delta > r.t0) || !(Delta > 0) || !std::isfinite(Delta))
    throw std::invalid_argument("conditions: need t0 < Delta < inf (Delta = " + format_double(Delta) + ")");
  const double delta = lim.delta.value_or(1.0 / Delta);
  if (!(delta > 0) || !(r.t0 * delta < 1.0))
    throw std::invalid_argument("conditions: need 0 < delta < 1/t0 (delta = " + format_double(delta) + ")");
  const double delta_star = lim.delta_star.value_or(std::max(std::exp(1.0) * r.phi_plus0, phi(Delta)));
  if (!(delta_star > r.phi_plus0) || !std::isfinite(delta_star))
    throw std::invalid_argument("conditions: need delta* > Phi(+0) (delta* = " + format_double(delta_star) + ")");
  const double Delta_star = lim.Delta_star.value_or(std::log(delta_star));
  if (!(Delta_star > r.h_plus0) || !std::isfinite(Delta_star))
    throw std::invalid_argument("conditions: need Delta* > H(+0) (Delta* = " + format_double(Delta_star) + ")");

  const MonotoneFn H = h_from_phi(phi);
  const bool tail_inf = infinite_tail(phi);
  auto completed = [&](IntegralVerdict v) {
    if (!tail_inf) return v;
    return IntegralVerdict::diverged("integrand completed by inf on a tail where Phi = inf");
  };
  const auto dec = decompose(H);
  ClassifyOptions o = opt;
  if (const auto* pl = std::get_if<PiecewiseLinear>(&phi.rep()))
    for (const auto& k : pl->knots) o.breaks.push_back(k.at);
  for (double b : jump_locations(H)) o.breaks.push_back(b);

  // C1: density part only.
  r.c[0] = {completed(classify_improper([&](double t) {
              const double d = dec.density(t);
              return d == 0.0 ? 0.0 : d / t;
            }, Delta, o)),
            Delta};
  r.c[1] = {integrate_stieltjes([](double t) { return 1.0 / t; }, H, Delta, kInf, o), Delta};
  r.c[2] = {classify_improper([&](double t) { return H(t) / t / t; }, Delta, o), Delta};
  ClassifyOptions o4 = o;
  for (double& b : o4.breaks) b = 1.0 / b;
  r.c[3] = {classify_improper_at_zero([&](double t) { return H(1.0 / t); }, delta, o4), delta};

  // C5 uses H^-1 directly; H^-1(eta) = Phi^-1(e^eta) but e^eta overflows long before the ladder ends.
  ClassifyOptions o5 = opt;
  o5.breaks = plateau_values(H);
  ClassifyOptions o6 = opt;
  o6.breaks = plateau_values(phi);
  r.c[4] = {classify_improper([&](double eta) {
              const double inv = H.inverse_at(eta);
              return inv >= kSaturated ? 0.0 : 1.0 / inv;
            }, Delta_star, o5),
            Delta_star};
  r.c[5] = {classify_improper([&](double tau) {
              const double inv = phi.inverse_at(tau);
              return inv >= kSaturated ? 0.0 : 1.0 / tau / inv;
            }, delta_star, o6),
            delta_star};
  return r;
}

struct EquivalenceWitness {
  int a = 0;  // condition numbers 1..6
  int b = 0;
  std::string relation;  // "<=>", "=>"
};

struct EquivalenceReport {
  bool consistent = true;
  std::vector<EquivalenceWitness> witnesses;
  std::vector<int> inconclusive;  // conditions left undecided; flagged for review
  ConditionReport conditions;
};

/// C2..C6 must agree; C1 Diverges must imply C2 Diverges; C1 <=> C2 when Phi
/// is absolutely continuous. Inconclusive verdicts count as no evidence.
inline EquivalenceReport check_equivalence(const MonotoneFn& phi, const ConditionLimits& lim = {},
                                           const ClassifyOptions& opt = {}) {
  EquivalenceReport e;
  e.conditions = evaluate_conditions(phi, lim, opt);
  const auto& c = e.conditions;
  for (int k = 1; k <= 6; ++k)
    if (c[k].verdict.inconclusive()) e.inconclusive.push_back(k);
  auto decided = [&](int k) { return !c[k].verdict.inconclusive(); };
  for (int a = 2; a <= 6; ++a)
    for (int b = a + 1; b <= 6; ++b)
      if (decided(a) && decided(b) && c[a].verdict.kind != c[b].verdict.kind) {
        e.consistent = false;
        e.witnesses.push_back({a, b, "<=>"});
      }
  if (c[1].verdict.diverges() && c[2].verdict.converges()) {
    e.consistent = false;
    e.witnesses.push_back({1, 2, "=>"});
  }
  if (c.absolutely_continuous && decided(1) && decided(2) && c[1].verdict.kind != c[2].verdict.kind) {
    e.consistent = false;
    e.witnesses.push_back({1, 2, "<=>"});
  }
  return e;
}

}  // namespace intcond
