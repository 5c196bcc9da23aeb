#include "catch_amalgamated.hpp"

#include "intcond/monotone.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace intcond;
using Catch::Approx;

namespace {

MonotoneFn step02() { return MonotoneFn::parse("pl: (0,0) (1,0) (1,2)"); }

std::vector<double> tau_grid() {
  std::vector<double> g{0.0};
  for (int i = -40; i <= 40; ++i) g.push_back(std::pow(10.0, i / 4.0));
  for (int i = 1; i <= 200; ++i) g.push_back(0.05 * i);
  g.push_back(kInf);
  return g;
}

}  // namespace

TEST_CASE("eval examples", "[monotone]") {
  CHECK(MonotoneFn::identity()(3.0) == 3.0);
  CHECK(MonotoneFn::exp()(0.0) == 1.0);
  const auto s = step02();
  CHECK(s(1.0) == 2.0);
  CHECK(s.left_limit(1.0) == 0.0);
  CHECK(s(0.999) == 0.0);
  CHECK(s(kInf) == 2.0);
}

TEST_CASE("inverse examples", "[monotone]") {
  CHECK(MonotoneFn::identity().inverse_at(2.5) == 2.5);

  const auto s = step02();
  CHECK(s.inverse_at(0.0) == 0.0);
  for (double tau : {1e-9, 0.5, 1.999, 2.0}) CHECK(s.inverse_at(tau) == 1.0);
  CHECK(std::isinf(s.inverse_at(2.0 + 1e-12)));
  CHECK(std::isinf(s.inverse_at(kInf)));

  const auto e = MonotoneFn::exp();
  for (double tau : {0.0, 0.5, 1.0}) CHECK(e.inverse_at(tau) == 0.0);
  for (double tau : {1.5, 10.0, 1e100}) CHECK(e.inverse_at(tau) == Approx(std::log(tau)).epsilon(1e-14));
}

TEST_CASE("inverse of the step agrees with the grid scan", "[monotone]") {
  oracle::PlSpec s;
  s.at = {0.0, 1.0};
  s.left = {0.0, 0.0};
  s.right = {0.0, 2.0};
  const auto f = s.fn();
  for (double tau : {0.0, 0.3, 1.0, 2.0, 2.5}) {
    const double want = oracle::grid_infimum(s, tau);
    const double got = f.inverse_at(tau);
    if (std::isinf(want)) {
      CHECK(std::isinf(got));
    } else {
      CHECK(want - got <= 1e-4 + 1e-12);
      CHECK(want >= got);
    }
  }
}

TEST_CASE("inverse preserves direction", "[monotone]") {
  CHECK(MonotoneFn::exp().inverse().non_decreasing());
  CHECK_FALSE(MonotoneFn::reciprocal().inverse().non_decreasing());
  const auto down = MonotoneFn::parse("pl: (0,5) (2,1) (2,0.5) (3,0)");
  CHECK_FALSE(down.non_decreasing());
  CHECK_FALSE(down.inverse().non_decreasing());
  // inverse of a non-increasing function: inf{t : f(t) <= tau}
  CHECK(down.inverse_at(5.0) == 0.0);
  CHECK(down.inverse_at(3.0) == Approx(1.0));
  CHECK(down.inverse_at(0.7) == 2.0);
  CHECK(down.inverse_at(0.0) == 3.0);
}

TEST_CASE("double inverse recovers strictly monotone continuous functions", "[monotone]") {
  const std::vector<MonotoneFn> fs = {MonotoneFn::power(2.0), MonotoneFn::exppow(0.5), MonotoneFn::reciprocal(),
                                      MonotoneFn::parse("pl: (0,1) (1,3) (4,4) slope=2")};
  for (const auto& f : fs) {
    const auto g = f.inverse().inverse();
    CHECK(g.direction() == f.direction());
    for (double t : {0.1, 0.5, 1.0, 2.0, 3.5, 7.0}) CHECK(g(t) == Approx(f(t)).epsilon(1e-9));
  }
}

TEST_CASE("reciprocal conjugation of inverses", "[monotone]") {
  // Phi = 1/phi for non-increasing phi: phi^-1(tau) = Phi^-1(1/tau)
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    auto spec = oracle::random_pl(rng, false);
    for (auto& v : spec.left) v += 0.5;
    for (auto& v : spec.right) v += 0.5;
    const auto phi = spec.fn();
    const auto Phi = compose(MonotoneFn::reciprocal(), phi);
    REQUIRE(Phi.non_decreasing());
    for (double tau : tau_grid()) {
      if (tau == 0.0 || std::isinf(tau)) continue;
      const double a = phi.inverse_at(tau);
      const double b = Phi.inverse_at(1.0 / tau);
      CHECK(near(a, b, 1e-9, 1e-12));
    }
  }
}

TEST_CASE("composition with j", "[monotone]") {
  const auto j = MonotoneFn::reciprocal();
  const auto f = compose(j, MonotoneFn::power(2.0));
  CHECK_FALSE(f.non_decreasing());
  for (double t : {0.25, 1.0, 3.0}) CHECK(f(t) == Approx(1.0 / (t * t)).epsilon(1e-15));
  CHECK(std::isinf(f(0.0)));
  CHECK(f(kInf) == 0.0);

  // strictly monotone phi: [phi o j]^-1 = j o phi^-1
  const auto phi = MonotoneFn::parse("pl: (0,0) (1,2) (3,3) slope=1");
  const auto pj = compose(phi, j);
  for (double tau : tau_grid()) {
    const double lhs = pj.inverse_at(tau);
    const double rhs = j(phi.inverse_at(tau));
    CHECK(near(lhs, rhs, 1e-12, 1e-300));
  }
  // plateau in phi: only <= survives
  const auto flat = MonotoneFn::parse("pl: (0,0) (1,1) (2,1) (3,4)");
  const auto fj = compose(flat, j);
  for (double tau : tau_grid()) CHECK(fj.inverse_at(tau) <= j(flat.inverse_at(tau)) * (1 + 1e-12));
  CHECK(fj.inverse_at(1.0) == Approx(0.5));
  CHECK(j(flat.inverse_at(1.0)) == 1.0);
}

TEST_CASE("compose examples", "[monotone]") {
  const auto f = MonotoneFn::parse("pl: (0,0) (1,1) (1,2) slope=1");
  CHECK(compose(MonotoneFn::identity(), f).to_string() == f.to_string());
  const auto H = compose(MonotoneFn::log_affine(0.0, 1.0), MonotoneFn::exp());
  for (double t : {0.0, 0.5, 2.0, 30.0}) CHECK(H(t) == t);

  // piecewise-linear pairs compose exactly
  const auto g = MonotoneFn::parse("pl: (0,1) (2,0)");
  const auto fg = compose(f, g);
  CHECK_FALSE(fg.non_decreasing());
  for (double t : {0.5, 0.999, 1.0, 1.5, 2.0, 5.0}) CHECK(fg(t) == Approx(f(g(t))).margin(1e-15));
  // g(0) = 1 hits the jump of f; the stored composite is the right-continuous one
  CHECK(f(g(0.0)) == 2.0);
  CHECK(fg(0.0) == 1.0);
  CHECK(fg.inverse_at(0.75) == Approx(0.5));
}

TEST_CASE("constancy intervals", "[monotone]") {
  CHECK(constancy_intervals(MonotoneFn::identity()).empty());
  CHECK(constancy_intervals(MonotoneFn::exp()).empty());
  const auto c = constancy_intervals(step02());
  REQUIRE(c.size() == 2);
  CHECK(c[0].lo == 0.0);
  CHECK(c[0].hi == 1.0);
  CHECK(c[0].lo_closed);
  CHECK_FALSE(c[0].hi_closed);
  CHECK(c[0].value == 0.0);
  CHECK(c[1].lo == 1.0);
  CHECK(c[1].lo_closed);
  CHECK(std::isinf(c[1].hi));
  CHECK(c[1].value == 2.0);
}

TEST_CASE("Phi^-1(Phi(t)) <= t with equality off plateaus", "[monotone]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 12.0);
  for (int k = 0; k < 50; ++k) {
    const auto spec = oracle::random_pl(rng, k % 2 == 0);
    const auto f = spec.fn();
    std::vector<double> ts = spec.at;
    for (int i = 0; i < 100; ++i) ts.push_back(U(rng));
    for (double t : ts) {
      const double back = f.inverse_at(f(t));
      CHECK(back <= t);
      if (!spec.in_plateau(t)) CHECK(back == Approx(t).margin(1e-9));
    }
  }
}

TEST_CASE("convexity", "[monotone]") {
  CHECK(is_convex(MonotoneFn::exp()).convex);
  const auto sq = is_convex(MonotoneFn::power(0.5));
  CHECK_FALSE(sq.convex);
  REQUIRE(sq.witness);
  CHECK(sq.witness->lhs > sq.witness->rhs);
  const auto aff = is_convex(MonotoneFn::affine(2.0, 1.0));
  CHECK(aff.convex);
  CHECK(aff.all_tight);
  CHECK(is_convex(MonotoneFn::parse("pl: (0,0) (1,1) slope=3")).convex);
  CHECK_FALSE(is_convex(MonotoneFn::parse("pl: (0,0) (1,3) slope=1")).convex);
}

TEST_CASE("text form round-trips", "[monotone]") {
  for (const char* s : {"pl: (0,0) (1,1) (1,2) slope=0.5", "pl: (0,5) (2,1) (2,0.5) (3,0)", "fam:exp", "fam:pow 2",
                        "fam:pow 1.5 3", "fam:exppow 0.25", "fam:affine 2 1", "fam:const 4", "pl: (0,0) (1,1) inf=7",
                        "pl: (0,2) (3,2) dir=down"}) {
    const auto f = MonotoneFn::parse(s);
    CHECK(MonotoneFn::parse(f.to_string()).to_string() == f.to_string());
  }
  CHECK(MonotoneFn::parse("pl: (0,0) (1,1) (1,2) slope=0.5").to_string() == "pl: (0,0) (1,1) (1,2) slope=0.5");
}

TEST_CASE("malformed piecewise input is rejected", "[monotone]") {
  CHECK_THROWS_AS(MonotoneFn::parse("pl: (1,0) (2,1)"), std::invalid_argument);
  CHECK_THROWS_AS(MonotoneFn::parse("pl: (0,0) (1,2) (2,1)"), std::invalid_argument);
  CHECK_THROWS_AS(MonotoneFn::parse("pl: (0,0) (1,2) (1,1) (2,3)"), std::invalid_argument);
  CHECK_THROWS_AS(MonotoneFn::parse("pl: (0,2) (1,1) slope=1"), std::invalid_argument);
  CHECK_THROWS_AS(MonotoneFn::parse("fam:nope"), std::invalid_argument);
  CHECK_THROWS_AS(MonotoneFn::parse("pl: (0,0) (1,1) (1,2) (1,3)"), std::invalid_argument);
}

TEST_CASE("values respect the direction on a grid", "[monotone]") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 40; ++k) {
    const auto spec = oracle::random_pl(rng, k % 2 == 0);
    const auto f = spec.fn();
    double prev = f(0.0);
    for (int i = 1; i <= 2000; ++i) {
      const double v = f(0.01 * i);
      CHECK((f.non_decreasing() ? v >= prev : v <= prev));
      prev = v;
    }
  }
}

TEST_CASE("direction decides the inverse of a constant piece", "[monotone]") {
  const std::vector<Knot> k{{0.0, 2.0, 2.0}, {3.0, 2.0, 2.0}};
  const auto up = MonotoneFn::piecewise(Direction::NonDecreasing, k);
  const auto down = MonotoneFn::piecewise(Direction::NonIncreasing, k);
  CHECK(up.inverse_at(1.0) == 0.0);
  CHECK(std::isinf(up.inverse_at(3.0)));
  CHECK(std::isinf(down.inverse_at(1.0)));
  CHECK(down.inverse_at(3.0) == 0.0);
  CHECK(down.to_string() == "pl: (0,2) (3,2) dir=down");
  CHECK_FALSE(MonotoneFn::parse(down.to_string()).non_decreasing());
  CHECK_THROWS_AS(MonotoneFn::piecewise(Direction::NonIncreasing, {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}), std::invalid_argument);
}
