#pragma once

// Command-line front end. Subcommands:
//   inverse     table of Phi^-1 on a tau grid
//   conditions  C1..C6 and their consistency
//   bound       spherical-mean lower bound (cut-off form when --lambda < 1)
//   theorem     divergence theorem, exponent family, localized forms
// Exit codes: 0 verified, 1 hypothesis failure or violation, 2 inconclusive,
// 3 usage error. A report is written only when it is complete.

#include "intcond/bounds.hpp"
#include "intcond/conditions.hpp"
#include "intcond/descriptors.hpp"
#include "intcond/expr.hpp"
#include "intcond/quad.hpp"
#include "intcond/report_json.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace intcond::cli {

enum class Format { Json, Csv, Text };

struct RunConfig {
  std::string command;
  int n = 2;
  std::string phi;
  std::string q;
  double lambda = 1.0;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> delta0;
  std::vector<double> center;
  std::optional<double> r0;
  std::optional<double> exterior;
  bool spherical = false;
  std::uint64_t seed = 0;
  std::size_t samples = std::size_t{1} << 14;
  int eps_depth = 20;
  double tau_from = 0.0;  // inverse table
  double tau_to = 10.0;
  int points = 11;
  ConditionLimits limits;
  Format format = Format::Json;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kVerified = 0;
inline constexpr int kFailed = 1;
inline constexpr int kInconclusive = 2;
inline constexpr int kUsage = 3;

inline void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
  };
  need(c.command == "inverse" || c.command == "conditions" || c.command == "bound" || c.command == "theorem",
       "unknown subcommand '" + c.command + "'");
  need(!c.phi.empty(), "--phi is required");
  need(c.n >= 1 && c.n <= 64, "--n must lie in [1, 64]");
  need(c.lambda > 0 && c.lambda <= 1, "--lambda must lie in (0, 1]");
  need(c.samples >= 2 && c.samples <= (std::size_t{1} << 24), "--samples must lie in [2, 2^24]");
  need(c.eps_depth >= 1 && c.eps_depth <= 60, "--eps-depth must lie in [1, 60]");
  if (c.command == "bound" || c.command == "theorem") need(!c.q.empty(), "--q is required");
  if (c.command == "inverse") {
    need(c.points >= 1 && c.points <= 100000, "--points must lie in [1, 100000]");
    need(std::isfinite(c.tau_from) && std::isfinite(c.tau_to) && c.tau_from <= c.tau_to, "need finite --from <= --to");
  }
  if (c.alpha) need(*c.alpha >= 1, "--alpha must be >= 1");
  if (c.beta) need(*c.beta > 0 && *c.beta <= c.alpha.value_or(1.0), "--beta must lie in (0, alpha]");
  if (c.delta0) need(std::isfinite(*c.delta0), "--delta0 must be finite");
  if (!c.center.empty()) need(static_cast<int>(c.center.size()) == c.n, "--center needs n coordinates");
  if (c.r0) need(*c.r0 > 0 && std::isfinite(*c.r0), "--r0 must be positive");
  if (c.exterior) need(*c.exterior > 0 && std::isfinite(*c.exterior), "--exterior must be positive");
  const bool site = c.exterior || c.spherical || c.r0 || !c.center.empty();
  if (c.command == "theorem") need(!(site && (c.alpha || c.beta)), "--alpha/--beta cannot be combined with a site");
}

namespace detail {

inline int finding_exit(FindingStatus s) {
  switch (s) {
    case FindingStatus::Confirmed:
      return kVerified;
    case FindingStatus::HypothesisFails:
    case FindingStatus::Violated:
      return kFailed;
    case FindingStatus::Inconclusive:
      return kInconclusive;
  }
  return kInconclusive;
}

inline int outcome_exit(Outcome o) {
  switch (o) {
    case Outcome::Holds:
      return kVerified;
    case Outcome::Violated:
      return kFailed;
    case Outcome::Indeterminate:
      return kInconclusive;
  }
  return kInconclusive;
}

inline BoundConfig bound_config(const RunConfig& c) {
  BoundConfig b;
  b.samples = c.samples;
  b.seed = c.seed;
  b.lambda = c.lambda;
  b.delta0 = c.delta0;
  b.eps_ladder_depth = c.eps_depth;
  return b;
}

inline report::Json input_json(const RunConfig& c, const PhiDescriptor& phi) {
  using report::num;
  report::Json in{{"n", c.n}, {"phi", c.phi}, {"phi_recognized", phi.recognized}, {"phi_canonical", phi.fn.to_string()}};
  if (!c.q.empty()) in["q"] = c.q;
  in["lambda"] = num(c.lambda);
  if (c.alpha) in["alpha"] = num(*c.alpha);
  if (c.beta) in["beta"] = num(*c.beta);
  if (c.delta0) in["delta0"] = num(*c.delta0);
  if (!c.center.empty()) {
    report::Json a = report::Json::array();
    for (double v : c.center) a.push_back(num(v));
    in["center"] = a;
  }
  if (c.r0) in["r0"] = num(*c.r0);
  if (c.exterior) in["exterior"] = num(*c.exterior);
  if (c.spherical) in["spherical_weight"] = true;
  in["seed"] = c.seed;
  in["samples"] = c.samples;
  in["eps_ladder"] = report::Json{{"from", "2^-1"}, {"to", "2^-" + std::to_string(c.eps_depth)}, {"finest", num(1e-6)}};
  in["classifier"] = report::to_json(ClassifyOptions{});
  return in;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string render(const report::Json& doc, Format f) {
  if (f == Format::Json) return doc.dump(2) + "\n";
  std::vector<std::pair<std::string, std::string>> rows;
  report::flatten(doc, "", rows);
  std::ostringstream os;
  if (f == Format::Csv) {
    os << "key,value\n";
    for (const auto& [k, v] : rows) os << csv_field(k) << ',' << csv_field(v) << '\n';
  } else {
    for (const auto& [k, v] : rows) os << k << " = " << v << '\n';
  }
  return os.str();
}

inline int dispatch(const RunConfig& c, report::Json& result) {
  const PhiDescriptor phi = parse_phi(c.phi);
  result["input"] = input_json(c, phi);

  if (c.command == "inverse") {
    report::Json rows = report::Json::array();
    for (int i = 0; i < c.points; ++i) {
      const double tau = c.points == 1 ? c.tau_from : c.tau_from + (c.tau_to - c.tau_from) * i / (c.points - 1);
      rows.push_back(report::Json::array({report::num(tau), report::num(phi.fn.inverse_at(tau))}));
    }
    result["result"] = report::Json{{"direction", phi.fn.non_decreasing() ? "non_decreasing" : "non_increasing"},
                                    {"table", rows}};
    return kVerified;
  }

  if (c.command == "conditions") {
    const auto e = check_equivalence(phi.fn, c.limits);
    result["result"] = report::to_json(e);
    if (!e.consistent) return kFailed;
    return e.inconclusive.empty() ? kVerified : kInconclusive;
  }

  const FieldDescriptor q = parse_field(c.q, c.n);
  result["input"]["q_canonical"] = expr::to_string(*q.ast);
  result["input"]["q_radial"] = q.radial;
  const BoundConfig cfg = bound_config(c);

  if (c.command == "bound") {
    try {
      const BoundReport r = c.lambda < 1.0 ? verify_cutoff_bound(q.field, phi.fn, c.lambda, cfg)
                                           : verify_mass_bound(q.field, phi.fn, cfg);
      result["result"] = report::to_json(r);
      return outcome_exit(r.outcome);
    } catch (const HypothesisError& e) {
      result["result"] = report::Json{{"outcome", "hypothesis_fails"}, {"message", e.what()}};
      return kFailed;
    }
  }

  Finding f;
  if (c.exterior && !c.spherical) {
    f = check_localized(q.field, phi.fn, {SiteKind::Exterior, {}, 1.0, *c.exterior}, cfg);
  } else if (c.spherical) {
    f = check_localized(q.field, phi.fn, {SiteKind::Spherical, c.center, c.r0.value_or(1.0), c.exterior.value_or(1.0)}, cfg);
  } else if (c.r0 || !c.center.empty()) {
    f = check_localized(q.field, phi.fn, {SiteKind::Interior, c.center, c.r0.value_or(1.0), 1.0}, cfg);
  } else if (c.alpha || c.beta) {
    f = check_exponent_family(q.field, phi.fn, {{c.alpha.value_or(1.0), c.beta.value_or(c.lambda)}}, cfg);
  } else {
    f = check_divergence_theorem(q.field, phi.fn, cfg);
  }
  result["result"] = report::to_json(f);
  return finding_exit(f.status);
}

}  // namespace detail

/// Runs one validated configuration; the report goes to `out` in full or not at all.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    validate(c);
    report::Json doc{{"schema", report::kSchema}, {"command", c.command}};
    const int code = detail::dispatch(c, doc);
    doc["exit_code"] = code;
    out << detail::render(doc, c.format);
    return code;
  } catch (const expr::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const QuadratureError& e) {
    err << "error: " << e.what() << '\n';
    return kInconclusive;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

/// Parses argv into a RunConfig and runs it.
inline int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized inverses, integral divergence conditions and spherical-mean bounds", "intcond"};
  app.require_subcommand(1);
  RunConfig c;
  std::string format = "json";

  auto common = [&](CLI::App* s) {
    s->add_option("--n", c.n, "dimension (default 2)");
    s->add_option("--phi", c.phi, "Phi: expression in t, or pl: / fam: descriptor");
    s->add_option("--lambda", c.lambda, "exponent on q, in (0, 1]");
    s->add_option("--seed", c.seed, "sphere sampling seed");
    s->add_option("--samples", c.samples, "directions per sphere");
    s->add_option("--eps-depth", c.eps_depth, "truncation ladder eps = 2^-1 .. 2^-depth");
    s->add_option("--format", format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
  };
  auto* inv = app.add_subcommand("inverse", "table of the generalized inverse");
  common(inv);
  inv->add_option("--from", c.tau_from, "first tau");
  inv->add_option("--to", c.tau_to, "last tau");
  inv->add_option("--points", c.points, "number of tau values");

  auto* cond = app.add_subcommand("conditions", "classify C1..C6");
  common(cond);
  cond->add_option("--Delta", c.limits.Delta, "lower limit for C1-C3");
  cond->add_option("--delta", c.limits.delta, "upper limit for C4");
  cond->add_option("--Delta-star", c.limits.Delta_star, "lower limit for C5");
  cond->add_option("--delta-star", c.limits.delta_star, "lower limit for C6");

  auto field_opts = [&](CLI::App* s) {
    common(s);
    s->add_option("--q", c.q, "Q: expression in x1..xn, abs(x); clauses '; radial', '; ball(...)', '; exterior(R)'");
  };
  auto* bound = app.add_subcommand("bound", "verify the spherical-mean lower bound");
  field_opts(bound);

  auto* thm = app.add_subcommand("theorem", "check the divergence theorem and its variants");
  field_opts(thm);
  thm->add_option("--alpha", c.alpha, "radial exponent alpha >= 1");
  thm->add_option("--beta", c.beta, "mean exponent beta in (0, alpha]");
  thm->add_option("--delta0", c.delta0, "lower limit of the inverse tail, > Phi(0)");
  thm->add_option("--center", c.center, "interior site centre x0")->delimiter(',');
  thm->add_option("--r0", c.r0, "interior site radius");
  thm->add_option("--exterior", c.exterior, "exterior site radius R0");
  thm->add_flag("--spherical-weight", c.spherical, "finite spherical-weight mass on all of R^n");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }
  for (auto* s : {inv, cond, bound, thm})
    if (s->parsed()) c.command = s->get_name();
  c.format = format == "csv" ? Format::Csv : format == "text" ? Format::Text : Format::Json;
  return run(c, out, err);
}

}  // namespace intcond::cli
