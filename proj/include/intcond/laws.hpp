#pragma once

// Composition laws for generalized inverses under a sense-reversing
// homeomorphism psi:
//   [psi o phi]^-1 = phi^-1 o psi^-1              (exact)
//   [phi o psi]^-1 <= psi^-1 o phi^-1             (strict only at plateau values of phi)

#include "intcond/monotone.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace intcond {

struct LawPoint {
  double tau = 0.0;
  double outer_lhs = 0.0;  // [psi o phi]^-1(tau)
  double outer_rhs = 0.0;  // phi^-1(psi^-1(tau))
  double inner_lhs = 0.0;  // [phi o psi]^-1(tau)
  double inner_rhs = 0.0;  // psi^-1(phi^-1(tau))
  bool outer_equal = true;
  bool inner_holds = true;
  bool inner_strict = false;
  bool strict_on_plateau = false;  // tau is the value of a constancy interval of phi
};

struct LawReport {
  std::vector<LawPoint> points;
  bool outer_exact = true;
  bool inner_holds = true;
  bool strict_confined = true;
  std::size_t strict_count = 0;
  std::size_t plateau_count = 0;  // constancy intervals of phi with positive length
  double max_outer_rel_error = 0.0;
};

/// Throws std::invalid_argument unless psi is a strictly decreasing map of
/// [0, inf] onto itself (psi(0) = inf, psi(inf) = 0, no plateaus on a probe grid).
inline void require_sense_reversing(const MonotoneFn& psi) {
  if (psi.non_decreasing()) throw std::invalid_argument("psi must be decreasing");
  if (psi(0.0) != kInf || psi(kInf) != 0.0) throw std::invalid_argument("psi must map [0, inf] onto itself");
  double prev = kInf;
  for (int i = -60; i <= 60; ++i) {
    const double v = psi(std::ldexp(1.0, i));
    if (!(v < prev) || v <= 0.0 || std::isinf(v)) throw std::invalid_argument("psi must be strictly decreasing");
    prev = v;
  }
}

namespace detail {

inline double law_rel_error(double a, double b) {
  if (a == b) return 0.0;
  if (std::isinf(a) || std::isinf(b)) return kInf;
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300});
}

}  // namespace detail

inline LawReport check_composition_laws(const MonotoneFn& psi, const MonotoneFn& phi, std::span<const double> grid,
                                        double rel_tol = 1e-12) {
  require_sense_reversing(psi);
  const MonotoneFn outer = compose(psi, phi);
  const MonotoneFn inner = compose(phi, psi);
  std::vector<double> plateau_values;
  for (const auto& c : constancy_intervals(phi))
    if (c.hi > c.lo) plateau_values.push_back(c.value);

  LawReport rep;
  rep.plateau_count = plateau_values.size();
  for (double tau : grid) {
    LawPoint p;
    p.tau = tau;
    p.outer_lhs = outer.inverse_at(tau);
    p.outer_rhs = phi.inverse_at(psi.inverse_at(tau));
    const double err = detail::law_rel_error(p.outer_lhs, p.outer_rhs);
    rep.max_outer_rel_error = std::max(rep.max_outer_rel_error, err);
    p.outer_equal = err <= rel_tol;

    p.inner_lhs = inner.inverse_at(tau);
    p.inner_rhs = psi.inverse_at(phi.inverse_at(tau));
    p.inner_holds = p.inner_lhs <= p.inner_rhs * (1 + rel_tol) || detail::law_rel_error(p.inner_lhs, p.inner_rhs) <= rel_tol;
    p.inner_strict = p.inner_holds && detail::law_rel_error(p.inner_lhs, p.inner_rhs) > rel_tol;
    if (p.inner_strict) {
      ++rep.strict_count;
      for (double v : plateau_values)
        if (v == tau) p.strict_on_plateau = true;
      if (!p.strict_on_plateau) rep.strict_confined = false;
    }
    rep.outer_exact = rep.outer_exact && p.outer_equal;
    rep.inner_holds = rep.inner_holds && p.inner_holds;
    rep.points.push_back(p);
  }
  return rep;
}

}  // namespace intcond
