#pragma once

// JSON serialization of reports (schema 1). Non-finite numbers are written as
// the strings "inf", "-inf" and "nan"; keys keep insertion order so equal
// inputs give byte-identical output.

#include "intcond/bounds.hpp"
#include "intcond/conditions.hpp"
#include "intcond/quad.hpp"

#include "json.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace intcond::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSchema = 1;

inline Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline Json to_json(const ClassifyOptions& o) {
  return Json{{"ladder_steps", o.ladder},       {"ceiling", num(o.ceiling)},
              {"cauchy_rel", num(o.cauchy_rel)}, {"upper_limit", num(o.upper_limit)},
              {"window", o.window},              {"converge_rate", num(o.converge_rate)},
              {"diverge_rate", num(o.diverge_rate)}, {"quad_rel", num(o.quad_rel)}};
}

inline Json to_json(const std::vector<Truncation>& ts) {
  Json a = Json::array();
  for (const auto& t : ts) a.push_back(Json::array({num(t.limit), num(t.partial)}));
  return a;
}

inline Json to_json(const IntegralVerdict& v, bool with_truncations = false) {
  Json j{{"verdict", to_string(v.kind)}, {"value", num(v.value)}, {"error_estimate", num(v.error_estimate)}};
  j["tail_exponent"] = v.tail_exponent ? num(*v.tail_exponent) : Json(nullptr);
  if (with_truncations) j["truncations"] = to_json(v.truncations);
  j["note"] = v.note;
  return j;
}

inline Json to_json(const ConditionReport& r) {
  Json j{{"phi", r.phi},
         {"t0", num(r.t0)},
         {"tstar", num(r.tstar)},
         {"tau0", num(r.tau0)},
         {"phi_plus0", num(r.phi_plus0)},
         {"h_plus0", num(r.h_plus0)},
         {"absolutely_continuous", r.absolutely_continuous},
         {"convex", r.convex}};
  Json cs = Json::object();
  for (int k = 1; k <= 6; ++k) {
    Json e = to_json(r[k].verdict);
    e["lower_limit"] = num(r[k].limit_used);
    cs["C" + std::to_string(k)] = e;
  }
  j["conditions"] = cs;
  return j;
}

inline Json to_json(const EquivalenceReport& e) {
  Json j = to_json(e.conditions);
  j["consistent"] = e.consistent;
  Json w = Json::array();
  for (const auto& x : e.witnesses)
    w.push_back(Json{{"a", "C" + std::to_string(x.a)}, {"b", "C" + std::to_string(x.b)}, {"relation", x.relation}});
  j["violations"] = w;
  Json inc = Json::array();
  for (int k : e.inconclusive) inc.push_back("C" + std::to_string(k));
  j["inconclusive"] = inc;
  return j;
}

inline Json to_json(const MassResult& m) {
  return Json{{"region", m.region}, {"value", num(m.value)}, {"radial", to_json(m.radial)}};
}

inline Json to_json(const BoundReport& r) {
  Json j{{"n", r.n},
         {"field", r.field},
         {"phi", r.phi},
         {"lambda_exponent", num(r.lambda_exponent)},
         {"M", num(r.M)},
         {"M_n", num(r.M_n)},
         {"lambda_n", num(r.lambda_n)},
         {"mass", to_json(r.mass)},
         {"lhs_truncated", to_json(r.lhs_truncated)},
         {"lhs_finest", num(r.lhs_finest)},
         {"lhs_verdict", to_json(r.lhs_verdict)},
         {"lhs_growth_ok", r.lhs_growth_ok},
         {"rhs", to_json(r.rhs)},
         {"outcome", to_string(r.outcome)},
         {"degenerate", r.degenerate},
         {"note", r.note}};
  const auto& d = r.diagnostics;
  j["diagnostics"] = Json{{"h_integral", num(d.h_integral)}, {"h_bound", num(d.h_bound)},
                          {"h_ok", d.h_ok},                  {"T_measure", num(d.T_measure)},
                          {"T_grid_step", num(d.T_grid_step)}, {"T_ok", d.T_ok},
                          {"jensen_ok", d.jensen_ok},        {"jensen_worst", num(d.jensen_worst)}};
  if (r.lambda_exponent < 1.0) j["cutoff_chain_ok"] = r.cutoff_chain_ok;
  j["provenance"] = Json{{"samples", r.samples}, {"seed", r.seed}, {"profile_points", r.profile_points}};
  return j;
}

inline Json to_json(const Finding& f) {
  Json j{{"claim", f.claim},
         {"status", to_string(f.status)},
         {"message", f.message},
         {"failed_hypothesis", f.failed_hypothesis.empty() ? Json(nullptr) : Json(f.failed_hypothesis)},
         {"M", num(f.M)},
         {"delta0", num(f.delta0)},
         {"vacuous_below_tau0", f.vacuous_below_tau0},
         {"inverse_tail", to_json(f.inverse_tail)},
         {"lhs", to_json(f.lhs)},
         {"lhs_truncated", to_json(f.lhs_ladder)},
         {"lhs_growth_ok", f.lhs_growth_ok}};
  if (!f.exponents.empty()) {
    Json ex = Json::array();
    for (const auto& c : f.exponents)
      ex.push_back(Json{{"alpha", num(c.alpha)}, {"beta", num(c.beta)}, {"verdict", to_json(c.verdict)}});
    j["exponents"] = ex;
  }
  if (f.mass_rel_diff) j["mass_rel_diff"] = num(*f.mass_rel_diff);
  if (f.direct) j["direct"] = to_json(*f.direct);
  if (!f.parts.empty()) {
    Json ps = Json::array();
    for (const auto& p : f.parts) ps.push_back(to_json(p));
    j["parts"] = ps;
  }
  return j;
}

/// Flattens nested objects and arrays into (path, scalar text) rows.
inline void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

}  // namespace intcond::report
