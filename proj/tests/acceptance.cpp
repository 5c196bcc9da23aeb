// Acceptance suite: one PASS/FAIL line per criterion.

#include "intcond/bounds.hpp"
#include "intcond/cli.hpp"
#include "intcond/conditions.hpp"
#include "intcond/descriptors.hpp"
#include "intcond/laws.hpp"
#include "support/cli_run.hpp"
#include "support/corpus.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace intcond;

namespace {

constexpr double kE = std::numbers::e;
constexpr double kPi = std::numbers::pi;

struct Check {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (failures.size() < 8) failures.push_back(what);
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) { return format_double(v); }

std::vector<oracle::PlSpec> pl_corpus() {
  std::mt19937_64 rng(20240601);
  std::vector<oracle::PlSpec> out;
  for (int k = 0; k < 500; ++k) out.push_back(oracle::random_pl(rng, k % 2 == 0));
  return out;
}

void criterion_inverse_oracle(Check& o) {
  const auto t0 = Clock::now();
  const auto specs = pl_corpus();
  std::mt19937_64 rng(99);
  std::size_t queries = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& s = specs[k];
    const auto f = s.fn();
    for (double tau : oracle::query_levels(s, rng, 1000)) {
      ++queries;
      const double want = oracle::grid_infimum(s, tau);
      const double got = f.inverse_at(tau);
      if (std::isinf(want) || std::isinf(got)) {
        o.require(std::isinf(want) && std::isinf(got),
                  "fn " + std::to_string(k) + " tau " + fmt(tau) + ": got " + fmt(got) + " want " + fmt(want));
        continue;
      }
      const double slack = 1e-9 * std::max(1.0, want);
      worst = std::max(worst, want - got);
      o.require(got <= want + slack && want <= got + 1e-4 + slack,
                "fn " + std::to_string(k) + " tau " + fmt(tau) + ": got " + fmt(got) + " want " + fmt(want));
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 30.0, "runtime " + fmt(secs) + " s");
  o.detail << specs.size() << " functions, " << queries << " queries, max gap " << worst << ", " << secs << " s";
}

void criterion_round_trip_bound(Check& o) {
  const auto specs = pl_corpus();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 12.0);
  std::size_t checked = 0, equal_checked = 0;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& s = specs[k];
    const auto f = s.fn();
    std::vector<double> ts = s.at;
    for (int i = 0; i < 1000; ++i) ts.push_back(U(rng));
    for (double t : ts) {
      ++checked;
      const double back = f.inverse_at(f(t));
      o.require(back <= t, "fn " + std::to_string(k) + " t " + fmt(t) + " back " + fmt(back));
      if (!s.in_plateau(t)) {
        ++equal_checked;
        o.require(std::fabs(back - t) <= 1e-9 * std::max(1.0, t),
                  "fn " + std::to_string(k) + " t " + fmt(t) + " off plateau, back " + fmt(back));
      }
    }
  }
  o.detail << checked << " points, " << equal_checked << " off plateaus";
}

std::vector<double> law_grid(const oracle::PlSpec& s, const MonotoneFn& psi, std::mt19937_64& rng) {
  std::set<double> plateau_values;
  for (const auto& [a, b] : s.plateaus()) plateau_values.insert(s.value(a));
  std::set<double> forbidden;
  for (double c : plateau_values) forbidden.insert(psi(c));
  std::set<double> g(plateau_values.begin(), plateau_values.end());
  g.insert(0.0);
  g.insert(oracle::kInf);
  for (std::size_t i = 0; i < s.at.size(); ++i) {
    g.insert(s.left[i]);
    g.insert(s.right[i]);
  }
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double hi = 0.0;
  for (double v : s.right) hi = std::max(hi, v);
  while (g.size() < 10000) {
    const double tau = U(rng) < 0.5 ? std::pow(10.0, -8.0 + 16.0 * U(rng)) : (hi + 5.0) * U(rng);
    if (!forbidden.count(tau)) g.insert(tau);
  }
  return {g.begin(), g.end()};
}

void criterion_composition_laws(Check& o) {
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_rel = 0.0;
  std::size_t strict = 0, plateaus = 0;
  for (int k = 0; k < 100; ++k) {
    const double p = 0.3 + 2.7 * U(rng);
    const double a = 0.1 + 9.9 * U(rng);
    const auto psi = MonotoneFn::power(-p, a);
    const auto spec = oracle::random_pl(rng, k % 2 == 0);
    const auto phi = spec.fn();
    const auto grid = law_grid(spec, psi, rng);
    const auto rep = check_composition_laws(psi, phi, grid);
    const std::string tag = "pair " + std::to_string(k);
    worst_rel = std::max(worst_rel, rep.max_outer_rel_error);
    strict += rep.strict_count;
    plateaus += rep.plateau_count;
    o.require(rep.outer_exact && rep.max_outer_rel_error <= 1e-12, tag + ": outer rel error " + fmt(rep.max_outer_rel_error));
    o.require(rep.inner_holds, tag + ": inner inequality fails");
    o.require(rep.strict_confined, tag + ": strict point off the plateau values");
    o.require(rep.strict_count <= rep.plateau_count, tag + ": more strict points than plateaus");
  }
  // step witness: phi = unit step, psi = 1/t, tau = 0
  const auto step = MonotoneFn::parse("pl: (0,0) (1,0) (1,1)");
  const std::vector<double> g{0.0};
  const auto w = check_composition_laws(MonotoneFn::reciprocal(), step, g);
  const auto& p0 = w.points.at(0);
  o.require(p0.inner_lhs == 1.0 && std::isinf(p0.inner_rhs) && p0.inner_strict,
            "step witness: lhs " + fmt(p0.inner_lhs) + " rhs " + fmt(p0.inner_rhs));
  o.detail << "100 pairs, max outer rel error " << worst_rel << ", strict points " << strict << " over " << plateaus
           << " plateaus; step witness lhs " << fmt(p0.inner_lhs) << " < rhs " << fmt(p0.inner_rhs);
}

MonotoneFn jump_h_phi() {
  auto H = MonotoneFn::steps(
      0.0,
      [](std::size_t k) -> std::optional<Jump> {
        const double p = std::ldexp(1.0, static_cast<int>(k) + 1);
        return Jump{p, p};
      },
      "2^k jumps of size 2^k");
  return compose(MonotoneFn::exp(), H);
}

void criterion_condition_classifier(Check& o) {
  const auto t0 = Clock::now();
  auto family = [&](double p, VerdictKind want) {
    const auto e = check_equivalence(MonotoneFn::exppow(p));
    std::string kinds;
    for (int c = 1; c <= 6; ++c) {
      kinds += to_string(e.conditions[c].verdict.kind)[0];
      o.require(e.conditions[c].verdict.kind == want, "p = " + fmt(p) + " C" + std::to_string(c) + " is " +
                                                          to_string(e.conditions[c].verdict.kind));
    }
    o.require(e.consistent && e.witnesses.empty(), "p = " + fmt(p) + " inconsistent");
    o.detail << "p=" << fmt(p) << ":" << kinds << " ";
  };
  for (double p : {0.25, 0.5, 0.75}) family(p, VerdictKind::Converges);
  for (double p : {1.0, 1.5, 2.0}) family(p, VerdictKind::Diverges);
  const auto j = check_equivalence(jump_h_phi());
  o.require(j.conditions[1].verdict.converges(), "jump H: C1 not Converges");
  o.require(j.conditions[2].verdict.diverges(), "jump H: C2 not Diverges");
  o.require(j.consistent, "jump H: implication C1 => C2 violated");
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "runtime " + fmt(secs) + " s");
  o.detail << "jump H: C1 " << to_string(j.conditions[1].verdict.kind) << ", C2 "
           << to_string(j.conditions[2].verdict.kind) << "; " << secs << " s";
}

void criterion_constants(Check& o) {
  const double closed[] = {kPi, 4 * kPi / 3, kPi * kPi / 2, 8 * kPi * kPi / 15, kPi * kPi * kPi / 6};
  double worst = 0.0;
  for (int n = 2; n <= 6; ++n) {
    const double got = ball_constants(n).Omega_n;
    const double rel = std::fabs(got - closed[n - 2]) / closed[n - 2];
    worst = std::max(worst, rel);
    o.require(rel <= 1e-12, "Omega_" + std::to_string(n) + " rel error " + fmt(rel));
  }
  const double l2 = ball_constants(2).lambda_n;
  o.require(std::fabs(l2 - kE / kPi) <= 1e-15 && l2 < 1.0, "lambda_2 = " + fmt(l2));
  o.detail << "max rel error " << worst << ", lambda_2 = " << fmt(l2);
}

void criterion_bound_instance(Check& o) {
  const auto t0 = Clock::now();
  const auto q = parse_field("1/abs(x)", 3);
  const auto phi = parse_phi("t^2");
  const auto r = verify_mass_bound(q.field, phi.fn);
  const double rhs_truth = 2.0 / (3.0 * std::sqrt(3.0 * kE));
  o.require(std::fabs(r.lhs_finest - 1.0) <= 1e-3, "LHS(1e-6) = " + fmt(r.lhs_finest));
  o.require(r.rhs.converges() && std::fabs(r.rhs.value - rhs_truth) <= 1e-3, "RHS = " + fmt(r.rhs.value));
  o.require(r.outcome == intcond::Outcome::Holds, std::string("outcome ") + to_string(r.outcome));
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "runtime " + fmt(secs) + " s");
  o.detail << "LHS(1e-6) = " << r.lhs_finest << ", RHS = " << r.rhs.value << " (closed form " << rhs_truth << "), "
           << to_string(r.outcome) << ", " << secs << " s";
}

void criterion_theorem_instance(Check& o) {
  const auto q = parse_field("log(e/abs(x))", 2);
  const auto phi = parse_phi("exp(t)");
  const auto f = check_divergence_theorem(q.field, phi.fn);
  const double M_truth = 2 * kPi * kE;
  const double rel = std::fabs(f.M - M_truth) / M_truth;
  o.require(rel <= 1e-3, "M = " + fmt(f.M));
  o.require(f.delta0 > phi.fn(0.0), "delta0 = " + fmt(f.delta0));
  o.require(f.inverse_tail.diverges(), "inverse tail not Diverges");
  o.require(!f.lhs_ladder.empty(), "empty ladder");
  double min_ratio = oracle::kInf;
  for (const auto& t : f.lhs_ladder) {
    const double floor = 0.05 * std::log(1.0 / t.limit);
    min_ratio = std::min(min_ratio, t.partial / floor);
    o.require(t.partial >= floor, "LHS(" + fmt(t.limit) + ") = " + fmt(t.partial) + " below growth floor");
  }
  o.require(f.status == FindingStatus::Confirmed, std::string("status ") + to_string(f.status));
  bool rejected = false;
  BoundConfig bad;
  bad.delta0 = 0.5;
  try {
    check_divergence_theorem(q.field, phi.fn, bad);
  } catch (const std::invalid_argument&) {
    rejected = true;
  }
  o.require(rejected, "delta0 = 0.5 below Phi(0) = 1 accepted");
  o.detail << "M = " << f.M << " (rel " << rel << "), C6 from delta0 = " << fmt(f.delta0) << " "
           << to_string(f.inverse_tail.kind) << ", min LHS/(0.05 log(1/eps)) = " << min_ratio
           << ", low delta0 rejected";
}

void criterion_corpus(Check& o) {
  std::size_t holds = 0;
  for (const auto& c : corpus::triples()) {
    const auto q = parse_field(c.q, c.n);
    const auto phi = parse_phi(c.phi);
    BoundConfig cfg;
    cfg.samples = c.radial ? 16384 : 4096;
    const auto r = verify_mass_bound(q.field, phi.fn, cfg);
    const std::string tag = std::string(c.q) + " | " + c.phi + " | n=" + std::to_string(c.n);
    const auto& d = r.diagnostics;
    o.require(d.jensen_ok, tag + ": Jensen excess " + fmt(d.jensen_worst));
    o.require(d.h_ok, tag + ": h integral " + fmt(d.h_integral) + " > " + fmt(d.h_bound));
    o.require(d.T_ok, tag + ": |T| " + fmt(d.T_measure));
    bool ok = r.outcome == intcond::Outcome::Holds;
    if (r.rhs.converges()) ok = ok && (r.lhs_finest >= r.rhs.value - 1e-3 || r.lhs_verdict.diverges());
    else ok = ok && r.rhs.diverges() && r.lhs_verdict.diverges();
    o.require(ok, tag + ": inequality " + to_string(r.outcome) + " LHS " + fmt(r.lhs_finest) + " RHS " +
                      to_string(r.rhs.kind) + " " + fmt(r.rhs.value));
    holds += ok;
  }
  o.detail << holds << "/" << corpus::triples().size() << " triples hold with all diagnostics";
}

void criterion_exterior(Check& o) {
  const auto q = parse_field("log(e*abs(x)); exterior(1)", 2);
  const auto phi = parse_phi("exp(t)");
  const auto f = check_localized(q.field, phi.fn, {SiteKind::Exterior, {}, 1.0, 1.0});
  o.require(f.mass_rel_diff && *f.mass_rel_diff <= 1e-6,
            "mass rel diff " + (f.mass_rel_diff ? fmt(*f.mass_rel_diff) : std::string("missing")));
  // e |x| / |x|^4 over |x| > 1 in the plane: 2 pi e
  const SphereSampler s(2, 64, 0);
  const auto ext = phi_mass(q.field, phi.fn, {MassRegion::ExteriorWeighted, {}, 1.0}, s);
  const double truth = 2 * kPi * kE;
  o.require(std::fabs(ext.value - truth) <= 1e-6 * truth, "exterior mass " + fmt(ext.value));
  o.require(f.status == FindingStatus::Confirmed, std::string("status ") + to_string(f.status));
  o.require(f.direct && f.direct->diverges(), "direct exterior integral not Diverges");
  o.detail << "weighted mass " << ext.value << " vs 2 pi e " << truth << ", rel diff to inverted "
           << (f.mass_rel_diff ? *f.mass_rel_diff : -1.0) << ", " << to_string(f.status);
}

void criterion_cli(Check& o) {
  using clirun::invoke;
  const std::vector<std::vector<std::string>> runs = {
      {"conditions", "--phi", "exp(t)"},
      {"bound", "--n", "3", "--phi", "t^2", "--q", "1/abs(x)"},
      {"theorem", "--n", "2", "--phi", "t", "--q", "1"},
      {"bound", "--n", "2", "--phi", "exp(t)", "--q", "3 + x1 + x2", "--samples", "512", "--seed", "7"},
      {"theorem", "--n", "2", "--phi", "exp(t)", "--q", "log(e/abs(x))"},
      {"inverse", "--phi", "pl: (0,0) (1,0) (1,2)", "--points", "7"},
  };
  std::size_t determinism = 0;
  for (const auto& args : runs)
    for (const char* fmt_name : {"json", "csv", "text"}) {
      auto a = args;
      a.insert(a.end(), {"--format", fmt_name});
      const auto x = invoke(a);
      const auto y = invoke(a);
      o.require(x.code == y.code && x.out == y.out && !x.out.empty(), "nondeterministic: " + args[0] + " " + fmt_name);
      ++determinism;
    }

  struct Expect {
    std::vector<std::string> args;
    int code;
  };
  std::vector<Expect> contract = {
      {{"conditions", "--phi", "exp(t)"}, cli::kVerified},
      {{"bound", "--n", "3", "--phi", "t^2", "--q", "1/abs(x)"}, cli::kVerified},
      {{"theorem", "--n", "2", "--phi", "t", "--q", "1"}, cli::kFailed},
      {{"bound", "--phi", "sqrt(t)", "--q", "1"}, cli::kFailed},
      {{"bound", "--phi", "t", "--q", "0", "--samples", "64"}, cli::kInconclusive},
      {{"conditions", "--phi", "exp(t^^)"}, cli::kUsage},
      {{"bound", "--phi", "t^2"}, cli::kUsage},
      {{"bound", "--phi", "t^2", "--q", "x3"}, cli::kUsage},
      {{"theorem", "--phi", "exp(t)", "--q", "1", "--delta0", "0.5"}, cli::kUsage},
      {{"frobnicate"}, cli::kUsage},
  };
  for (const auto& c : corpus::triples())
    if (c.radial) contract.push_back({{"bound", "--n", std::to_string(c.n), "--phi", c.phi, "--q", c.q}, cli::kVerified});
  for (const auto& e : contract) {
    const auto r = invoke(e.args);
    std::string joined;
    for (const auto& a : e.args) joined += a + " ";
    o.require(r.code == e.code, joined + "-> exit " + std::to_string(r.code) + ", want " + std::to_string(e.code));
    if (e.code == cli::kUsage) o.require(r.out.empty(), joined + "-> partial report on usage error");
  }

  const auto cases = fixtures::expressions();
  o.require(cases.size() == 50, "fixture has " + std::to_string(cases.size()) + " cases");
  std::size_t trips = 0;
  for (const auto& c : cases) {
    const auto err = fixtures::round_trip_error(c);
    o.require(err.empty(), err);
    trips += err.empty();
  }
  o.detail << determinism << " repeated reports identical, " << contract.size() << " exit codes checked, " << trips
           << "/" << cases.size() << " expressions round-trip";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
      {"generalized inverse vs grid-scan oracle", criterion_inverse_oracle},
      {"inverse of the value never exceeds t", criterion_round_trip_bound},
      {"composition laws for the generalized inverse", criterion_composition_laws},
      {"six divergence conditions on exp(t^p) and jump H", criterion_condition_classifier},
      {"ball volumes and lambda_2", criterion_constants},
      {"bound instance 1/abs(x), t^2, n = 3", criterion_bound_instance},
      {"divergence theorem instance log(e/abs(x)), exp, n = 2", criterion_theorem_instance},
      {"proof diagnostics and bound on the corpus", criterion_corpus},
      {"exterior mass equivalence", criterion_exterior},
      {"command line determinism, exit codes, round-trip", criterion_cli},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.str().c_str());
    for (const auto& f : o.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
