#pragma once

// Text descriptors for Phi and Q.
//
//   Phi:  an expression in t ("exp(t^2)", "max(t, 1)^2"), or "pl: ..." / "fam: ..."
//   Q:    an expression in x1..xn and abs(x), followed by optional clauses
//         "; radial", "; ball(c1, ..., cn, r)" or "; ball(r)", "; exterior(R)"
//
// Recognized closed forms (t, c t^p, exp(t), exp(t^p), a t + b, constants)
// map onto the exact function families; anything else becomes a callback.

#include "intcond/expr.hpp"
#include "intcond/geometry.hpp"
#include "intcond/monotone.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace intcond {

struct PhiDescriptor {
  std::string source;
  expr::NodePtr ast;  // null for pl: / fam: descriptors
  MonotoneFn fn;
  std::string recognized;  // family name, "piecewise", "family" or "callback"
};

struct FieldDescriptor {
  std::string source;
  expr::NodePtr ast;
  bool radial = false;
  FieldDomain domain;
  ScalarField field;
};

namespace detail {

inline std::optional<double> constant_value(const expr::Node& n) {
  switch (n.kind) {
    case expr::Kind::VarT:
    case expr::Kind::VarX:
    case expr::Kind::Norm:
      return std::nullopt;
    default:
      break;
  }
  for (const auto& a : n.args)
    if (!constant_value(*a)) return std::nullopt;
  return expr::eval_t(n, 0.0);
}

inline bool is_t(const expr::Node& n) { return n.kind == expr::Kind::VarT; }

/// c * t^p with c > 0, p > 0; c defaults to 1.
inline std::optional<std::pair<double, double>> scaled_power(const expr::Node& n) {
  if (is_t(n)) return std::pair{1.0, 1.0};
  if (n.kind == expr::Kind::Pow && is_t(*n.args[0]))
    if (auto p = constant_value(*n.args[1]); p && *p > 0) return std::pair{1.0, *p};
  if (n.kind == expr::Kind::Mul) {
    for (int i = 0; i < 2; ++i) {
      auto c = constant_value(*n.args[static_cast<std::size_t>(i)]);
      auto rest = scaled_power(*n.args[static_cast<std::size_t>(1 - i)]);
      if (c && rest && *c > 0) return std::pair{*c * rest->first, rest->second};
    }
  }
  return std::nullopt;
}

inline std::optional<MonotoneFn> recognize_phi(const expr::Node& n, std::string& name) {
  if (auto c = constant_value(n)) {
    if (!(*c >= 0)) throw std::invalid_argument("Phi must take values in [0, inf]");
    name = "constant";
    return MonotoneFn::constant(*c);
  }
  if (auto sp = scaled_power(n)) {
    if (sp->first == 1.0 && sp->second == 1.0) {
      name = "identity";
      return MonotoneFn::identity();
    }
    if (sp->second == 1.0) {
      name = "affine";
      return MonotoneFn::affine(sp->first, 0.0);
    }
    name = "power";
    return MonotoneFn::power(sp->second, sp->first);
  }
  if (n.kind == expr::Kind::Call && n.name == "exp") {
    const auto& a = *n.args[0];
    if (is_t(a)) {
      name = "exp";
      return MonotoneFn::exp();
    }
    if (a.kind == expr::Kind::Pow && is_t(*a.args[0]))
      if (auto p = constant_value(*a.args[1]); p && *p > 0) {
        name = "exppow";
        return MonotoneFn::exppow(*p);
      }
  }
  if (n.kind == expr::Kind::Add || n.kind == expr::Kind::Sub) {
    const double sign = n.kind == expr::Kind::Sub ? -1.0 : 1.0;
    auto sp = scaled_power(*n.args[0]);
    auto b = constant_value(*n.args[1]);
    if (!sp && n.kind == expr::Kind::Add) {
      sp = scaled_power(*n.args[1]);
      b = constant_value(*n.args[0]);
      if (sp && b && sp->second == 1.0 && *b >= 0) {
        name = "affine";
        return MonotoneFn::affine(sp->first, *b);
      }
    } else if (sp && b && sp->second == 1.0 && sign * *b >= 0) {
      name = "affine";
      return MonotoneFn::affine(sp->first, sign * *b);
    }
  }
  return std::nullopt;
}

inline void require_monotone_probe(const std::function<double(double)>& f, const std::string& src) {
  double prev = f(0.0);
  if (!(prev >= 0)) throw std::invalid_argument("Phi(0) = " + format_double(prev) + " is outside [0, inf]: " + src);
  for (int k = -40; k <= 40; ++k) {
    for (double m : {1.0, 1.5}) {
      const double t = m * std::ldexp(1.0, k);
      const double v = f(t);
      if (std::isnan(v)) throw std::invalid_argument("Phi is not evaluable at t = " + format_double(t) + ": " + src);
      if (v < prev) throw std::invalid_argument("Phi must be non-decreasing (drops at t = " + format_double(t) + "): " + src);
      prev = v;
    }
  }
}

inline std::vector<std::string> split_clauses(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ';' && depth == 0) {
      out.push_back(std::string(trim(cur)));
      cur.clear();
      continue;
    }
    cur.push_back(ch);
  }
  out.push_back(std::string(trim(cur)));
  return out;
}

inline std::vector<double> clause_args(const std::string& clause, const std::string& head) {
  const auto open = clause.find('(');
  const auto close = clause.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open || trim(clause.substr(0, open)) != head ||
      !trim(clause.substr(close + 1)).empty())
    throw std::invalid_argument("malformed clause '" + clause + "'");
  std::vector<double> out;
  std::stringstream in(clause.substr(open + 1, close - open - 1));
  for (std::string tok; std::getline(in, tok, ',');) out.push_back(parse_number(trim(tok)));
  return out;
}

}  // namespace detail

inline PhiDescriptor parse_phi(std::string_view source) {
  const std::string src(detail::trim(source));
  if (src.starts_with("pl:") || src.starts_with("fam:"))
    return {src, nullptr, MonotoneFn::parse(src), src.starts_with("pl:") ? "piecewise" : "family"};
  auto ast = expr::parse(src, expr::Scope::phi());
  std::string name;
  if (auto f = detail::recognize_phi(*ast, name)) return {src, ast, *f, name};
  std::function<double(double)> fn = [ast](double t) { return expr::eval_t(*ast, t); };
  detail::require_monotone_probe(fn, src);
  return {src, ast, MonotoneFn::callback(fn, Direction::NonDecreasing, expr::to_string(*ast)), "callback"};
}

inline FieldDescriptor parse_field(std::string_view source, int n) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  struct {
    std::string source;
    expr::NodePtr ast;
    bool radial = false;
    FieldDomain domain;
  } d;
  d.source = std::string(detail::trim(source));
  const auto clauses = detail::split_clauses(d.source);
  d.ast = expr::parse(clauses[0], expr::Scope::field(n));
  d.radial = !expr::uses_coordinates(*d.ast);
  bool domain_set = false;
  for (std::size_t i = 1; i < clauses.size(); ++i) {
    const auto& c = clauses[i];
    if (c == "radial") {
      d.radial = true;
      continue;
    }
    if (domain_set) throw std::invalid_argument("more than one domain clause in '" + d.source + "'");
    if (c.starts_with("ball")) {
      auto a = detail::clause_args(c, "ball");
      if (a.size() == 1) {
        d.domain = FieldDomain::ball({}, a[0]);
      } else if (a.size() == static_cast<std::size_t>(n) + 1) {
        const double r = a.back();
        a.pop_back();
        d.domain = FieldDomain::ball(a, r);
      } else {
        throw std::invalid_argument("ball(...) takes r or n centre coordinates and r");
      }
      if (!(d.domain.radius > 0)) throw std::invalid_argument("ball radius must be positive");
    } else if (c.starts_with("exterior")) {
      auto a = detail::clause_args(c, "exterior");
      if (a.size() != 1 || !(a[0] > 0)) throw std::invalid_argument("exterior(R) takes one positive radius");
      d.domain = FieldDomain::exterior(a[0]);
    } else {
      throw std::invalid_argument("unknown clause '" + c + "'");
    }
    domain_set = true;
  }
  auto ast = d.ast;
  const std::string label = expr::to_string(*ast);
  auto make = [&]() {
    if (!d.radial)
      return ScalarField(n, [ast](std::span<const double> x) { return expr::eval_x(*ast, x); }, label, d.domain);
    return ScalarField::radial(
        n,
        [ast, n](double r) {
          std::vector<double> x(static_cast<std::size_t>(n), 0.0);
          x[0] = r;
          return expr::eval_x(*ast, x);
        },
        label, d.domain);
  };
  return FieldDescriptor{d.source, d.ast, d.radial, d.domain, make()};
}

}  // namespace intcond
