#include "catch_amalgamated.hpp"

#include "intcond/conditions.hpp"

#include <cmath>
#include <map>
#include <numbers>

using namespace intcond;
using Catch::Approx;

namespace {

MonotoneFn jump_h_phi() {
  // H = log Phi has jumps of size 2^k at t = 2^k and H' = 0 elsewhere
  auto H = MonotoneFn::steps(
      0.0,
      [](std::size_t k) -> std::optional<Jump> {
        const double p = std::ldexp(1.0, static_cast<int>(k) + 1);
        return Jump{p, p};
      },
      "2^k jumps of size 2^k");
  return compose(MonotoneFn::exp(), H);
}

void require_all(const ConditionReport& r, VerdictKind k) {
  for (int c = 1; c <= 6; ++c) {
    INFO("C" << c << " " << r[c].verdict.note);
    CHECK(r[c].verdict.kind == k);
  }
}

}  // namespace

TEST_CASE("H = log Phi", "[conditions]") {
  const auto H = h_from_phi(MonotoneFn::exp());
  for (double t : {0.0, 0.5, 3.0}) CHECK(H(t) == Approx(t).margin(1e-15));
  const auto H2 = h_from_phi(MonotoneFn::power(2.0));
  for (double t : {0.5, 1.0, 7.0}) CHECK(H2(t) == Approx(2.0 * std::log(t)).margin(1e-14));
  const auto Hs = h_from_phi(MonotoneFn::parse("pl: (0,0) (1,0) (1,2)"));
  CHECK(Hs(0.5) == -kInf);
  CHECK(Hs(1.0) == Approx(std::log(2.0)));
  CHECK(Hs(10.0) == Approx(std::log(2.0)));
  CHECK(decompose(Hs).density(0.5) == 0.0);
  CHECK_THROWS_AS(h_from_phi(MonotoneFn::reciprocal()), std::invalid_argument);
}

TEST_CASE("closed-form families", "[conditions]") {
  require_all(evaluate_conditions(MonotoneFn::exp()), VerdictKind::Diverges);
  require_all(evaluate_conditions(MonotoneFn::identity()), VerdictKind::Converges);
  require_all(evaluate_conditions(MonotoneFn::exppow(0.5)), VerdictKind::Converges);
  require_all(evaluate_conditions(MonotoneFn::exppow(2.0)), VerdictKind::Diverges);
}

TEST_CASE("constant Phi", "[conditions]") {
  const auto r = evaluate_conditions(MonotoneFn::constant(3.0));
  for (int c : {1, 2, 5, 6}) {
    INFO("C" << c);
    REQUIRE(r[c].verdict.converges());
    CHECK(r[c].verdict.value == 0.0);
  }
  // H = log 3 everywhere
  REQUIRE(r[3].verdict.converges());
  CHECK(r[3].verdict.value == Approx(std::log(3.0) / r[3].limit_used).epsilon(1e-8));
  REQUIRE(r[4].verdict.converges());
  CHECK(r[4].verdict.value == Approx(std::log(3.0) * r[4].limit_used).epsilon(1e-8));
}

TEST_CASE("jump H separates C1 from C2", "[conditions]") {
  const auto e = check_equivalence(jump_h_phi());
  CHECK(e.conditions[1].verdict.converges());
  CHECK(e.conditions[2].verdict.diverges());
  CHECK(e.consistent);
  CHECK_FALSE(e.conditions.absolutely_continuous);
}

TEST_CASE("equivalence across the exp(t^p) family", "[conditions]") {
  for (double p : {0.5, 1.0, 2.0}) {
    const auto e = check_equivalence(MonotoneFn::exppow(p));
    INFO("p = " << p);
    CHECK(e.consistent);
    CHECK(e.inconclusive.empty());
    CHECK(e.witnesses.empty());
  }
}

TEST_CASE("verdicts do not depend on admissible lower limits", "[conditions]") {
  for (double p : {0.5, 2.0}) {
    const auto phi = MonotoneFn::exppow(p);
    const auto base = evaluate_conditions(phi);
    for (double D : {1.5, 4.0, 8.0}) {
      ConditionLimits lim;
      lim.Delta = D;
      lim.delta = 1.0 / D;
      lim.delta_star = std::exp(std::pow(D, p));
      lim.Delta_star = std::pow(D, p);
      const auto r = evaluate_conditions(phi, lim);
      for (int c = 1; c <= 6; ++c) CHECK(r[c].verdict.kind == base[c].verdict.kind);
      CHECK(r[1].limit_used == D);
    }
  }
}

TEST_CASE("inadmissible lower limits are rejected", "[conditions]") {
  const auto phi = MonotoneFn::parse("pl: (0,0) (1,0) (2,1) slope=1");
  const auto r = evaluate_conditions(phi);
  CHECK(r.t0 == 1.0);
  CHECK(r[1].limit_used > r.t0);
  ConditionLimits bad;
  bad.Delta = 0.5;
  CHECK_THROWS_AS(evaluate_conditions(phi, bad), std::invalid_argument);
  ConditionLimits bad_delta;
  bad_delta.delta = 2.0;
  CHECK_THROWS_AS(evaluate_conditions(phi, bad_delta), std::invalid_argument);
  ConditionLimits bad_star;
  bad_star.delta_star = 0.0;
  CHECK_THROWS_AS(evaluate_conditions(phi, bad_star), std::invalid_argument);
  ConditionLimits bad_h;
  bad_h.Delta_star = -kInf;
  CHECK_THROWS_AS(evaluate_conditions(phi, bad_h), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_conditions(MonotoneFn::constant(0.0)), std::invalid_argument);
}

TEST_CASE("C3 and C4 agree under t -> 1/t", "[conditions]") {
  const auto phi = MonotoneFn::exppow(0.5);
  const auto H = h_from_phi(phi);
  const double D = 2.0;
  for (double T : {10.0, 1e3, 1e6}) {
    const auto c3 = integrate([&](double t) { return H(t) / (t * t); }, D, T);
    const auto c4 = integrate([&](double t) { return H(1.0 / t); }, 1.0 / T, 1.0 / D);
    CHECK(c3.value == Approx(c4.value).epsilon(1e-9));
    // int sqrt(t) / t^2 = 2 (D^-1/2 - T^-1/2)
    CHECK(c3.value == Approx(2.0 * (1.0 / std::sqrt(D) - 1.0 / std::sqrt(T))).epsilon(1e-9));
  }
}

TEST_CASE("C5 and C6 agree under tau = e^eta", "[conditions]") {
  const auto phi = MonotoneFn::exppow(0.5);
  const auto H = h_from_phi(phi);
  const double Ds = 2.0;
  for (double eta : {5.0, 20.0, 80.0}) {
    const auto c5 = integrate([&](double y) { return 1.0 / H.inverse_at(y); }, Ds, eta);
    const auto c6 = integrate([&](double tau) { return 1.0 / (tau * phi.inverse_at(tau)); }, std::exp(Ds), std::exp(eta));
    CHECK(c5.value == Approx(c6.value).epsilon(1e-8));
    // H^-1(y) = y^2
    CHECK(c5.value == Approx(1.0 / Ds - 1.0 / eta).epsilon(1e-9));
  }
}

TEST_CASE("area identity for Psi(t) = H(1/t)", "[conditions]") {
  const double delta = 0.5;
  for (double p : {0.25, 0.5, 0.75}) {
    const auto Psi = compose(h_from_phi(MonotoneFn::exppow(p)), MonotoneFn::reciprocal());
    REQUIRE_FALSE(Psi.non_decreasing());
    const auto left = classify_improper_at_zero([&](double t) { return Psi(t); }, delta);
    const auto right = classify_improper([&](double y) { return Psi.inverse_at(y); }, Psi(delta));
    REQUIRE(left.converges());
    REQUIRE(right.converges());
    INFO("p = " << p);
    CHECK(left.value == Approx(right.value + delta * Psi(delta)).epsilon(1e-6));
    CHECK(left.value == Approx(std::pow(delta, 1 - p) / (1 - p)).epsilon(1e-6));
  }
}
