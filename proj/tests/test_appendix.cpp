#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cubicwave/appendix.hpp"
#include "cubicwave/error.hpp"

using namespace cubicwave;

namespace {
constexpr double pi = std::numbers::pi;
constexpr double sqrt2 = std::numbers::sqrt2;
}  // namespace

TEST_CASE("polar maps on the constant solution") {
  const PolarPoint p = center_map(sqrt2);
  CHECK(std::abs(p.angle) < 1e-12);
  CHECK(p.radius == doctest::Approx(sqrt2).epsilon(1e-12));
  const PolarPoint q = cone_map(sqrt2, 0);
  CHECK(std::abs(q.angle) < 1e-12);
  CHECK(q.radius == doctest::Approx(sqrt2).epsilon(1e-12));
  CHECK(cone_map(sqrt2, 2).angle == doctest::Approx(-4 * pi));
}

TEST_CASE("angle windows for small and large parameters") {
  CHECK(std::abs(center_map(1.0).angle) < pi / 2);
  CHECK(std::abs(cone_map(1.0, 0).angle) < pi / 2);
  const double t10 = center_map(10.0).angle, t100 = center_map(100.0).angle;
  CHECK(t10 < -pi / 2);
  CHECK(t100 < t10);
  CHECK(cone_map(20.0, 0).angle > pi / 2);
}

TEST_CASE("small parameters follow the linearized solutions") {
  const double c = 1e-4;
  for (const PolarSample& s : center_trace(c, 0.9)) {
    if (s.rho < 0.02) continue;
    CHECK(s.U == doctest::Approx(c * std::atanh(s.rho) / s.rho).epsilon(1e-6));
  }
  for (const PolarSample& s : cone_trace(c, 0.1)) CHECK(s.U == doctest::Approx(c / s.rho).epsilon(1e-6));
}

TEST_CASE("integrated angle agrees with arctan(U'/U) modulo pi") {
  for (double c : {1.0, 30.0, 130.0}) {
    for (const PolarSample& s : center_trace(c)) {
      const double d = std::remainder(s.angle - std::atan(s.dU / s.U), pi);
      CHECK(std::abs(d) < 1e-8);
    }
  }
  for (double b : {0.5, 6.3, -9.5}) {
    for (const PolarSample& s : cone_trace(b)) {
      const double d = std::remainder(s.angle - std::atan(s.dU / s.U), pi);
      CHECK(std::abs(d) < 1e-8);
    }
  }
}

TEST_CASE("intersection route reproduces the shooting route") {
  SpectrumOptions so;
  for (int n = 0; n <= 4; ++n) {
    CAPTURE(n);
    const NodalIntersection x = find_intersection(n / 2, n % 2 == 0 ? Branch::even : Branch::odd);
    const SelfSimilarSolution s = find_c_n(n, so);
    CHECK(x.n == n);
    CHECK(x.zeros == n);
    CHECK(std::abs(x.c / s.c - 1.0) < 1e-3);
    CHECK(std::abs(x.b / s.b - 1.0) < 1e-3);
    CHECK(x.glue_residual < 1e-6);
    CHECK(x.residual < 1e-8 * (1.0 + x.radius));
  }
  const NodalIntersection g = find_intersection(0, Branch::even);
  CHECK(g.c == doctest::Approx(sqrt2).epsilon(1e-10));
  CHECK(g.b == doctest::Approx(sqrt2).epsilon(1e-10));
}

TEST_CASE("lemma monitors") {
  const LemmaReport r = lemma_monitors();
  CHECK(r.passed);
  CHECK(r.r_monotone);
  CHECK(r.R_monotone);
  CHECK(r.r_small == doctest::Approx(r.r_linear).epsilon(1e-3));
  CHECK(r.theta_max < pi / 2);
  CHECK(r.beta_min > -pi / 2);
  CHECK(r.beta_min_negative > pi / 2);
  CHECK(r.theta_rho0_abs_max < pi / 2);
  CHECK(r.H_center_margin < 0.0);
  CHECK(r.H_flip);
  REQUIRE(r.windows.size() == 2);
  for (const WindowReading& t : r.windows) {
    CHECK(t.c_L < t.c_R);
    CHECK(t.b_L < t.b_R);
    CHECK(t.violations_c_interval == 0);
  }
  // c_L and b_L do not depend on k.
  CHECK(r.windows[0].c_L == doctest::Approx(r.windows[1].c_L));
}

TEST_CASE("appendix input errors") {
  CHECK_THROWS_AS((void)center_map(-1.0), Error);
  CHECK_THROWS_AS((void)cone_map(0.0, 0), Error);
  CHECK_THROWS_AS((void)find_intersection(-1, Branch::even), Error);
  CHECK_THROWS_AS((void)lemma_monitors(60.0, 10.0), Error);
  CHECK_THROWS_AS((void)center_trace(1.0, 1.0), Error);
}
