#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cubicwave/asymptotics.hpp"
#include "cubicwave/error.hpp"
#include "cubicwave/interior.hpp"

using namespace cubicwave;

TEST_CASE("interval length and period along two routes") {
  const double T1 = interval_length_closed_form();
  const double T2 = interval_length_quadrature();
  CHECK(std::abs(T1 - 4.20654632) < 1e-7);
  CHECK(std::abs(T1 - T2) < 1e-9);
  const double p1 = oscillator_period_closed_form();
  const double p2 = oscillator_period_quadrature();
  CHECK(std::abs(p1 - 7.41629871) < 1e-7);
  CHECK(std::abs(p1 - p2) < 1e-9);
}

TEST_CASE("modulation frame identities") {
  for (double x : {0.01, 0.5, 2.0, 7.0}) {
    // sinh(x) t'(x) = a(x), with t' from a central difference of t.
    const double h = 1e-5 * std::max(1.0, x);
    const double dt = (modulation_t(x + h) - modulation_t(x - h)) / (2 * h);
    CHECK(std::sinh(x) * dt == doctest::Approx(modulation_a(x)).epsilon(1e-7));
  }
  // t -> 3 x^{1/3}, h -> -2/t^2 near the origin.
  const double x = 1e-6;
  CHECK(modulation_t(x) == doctest::Approx(3 * std::cbrt(x)).epsilon(1e-6));
  CHECK(modulation_h(x) * std::pow(modulation_t(x), 2) == doctest::Approx(-2.0).epsilon(1e-5));
  // h -> 1/(4 tbar^2) at large x.
  const double T = interval_length_closed_form();
  const double xl = 12.0;
  const double tbar = T - modulation_t(xl);
  CHECK(modulation_h(xl) * 4 * tbar * tbar == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(modulation_h(30.0) > 0);
}

TEST_CASE("oscillator amplitudes and phases") {
  const auto& k = default_constants();
  CHECK(std::abs(k.A0 - 0.90247851) < 1e-6);
  CHECK(std::abs(k.A1 - 0.82273965) < 1e-6);
  CHECK(std::abs(k.theta0 - -1.6225533) < 1e-5);
  CHECK(std::abs(k.theta1 - 0.8623512) < 1e-5);
  // Energy route agrees with the zero-fit slope.
  CHECK(std::abs(k.A0_energy - k.A0) < 1e-6);
  CHECK(std::abs(k.A1_energy - k.A1) < 1e-6);
  CHECK(k.A0_drift < 1e-7);
}

TEST_CASE("phase is invariant under shifting the fit window by a period") {
  const auto base = fit_limit_problem(LimitProblem::outer, 1e-7, 3000.0, 100.0);
  const double period = oscillator_period_closed_form() / base.amplitude;
  const auto shifted = fit_limit_problem(LimitProblem::outer, 1e-7, 3000.0, 100.0 + period);
  CHECK(std::abs(base.phase - shifted.phase) < 1e-6);
}

TEST_CASE("amplitude drift beyond tolerance is reported") {
  CHECK_THROWS_AS((void)fit_limit_problem(LimitProblem::inner, 1e-7, 200.0, 20.0), Error);
}

TEST_CASE("large-n predictions") {
  const auto& k = default_constants();
  const auto p0 = predict(0, k);
  CHECK(p0.c == doctest::Approx(1.630626).epsilon(1e-5));
  CHECK(p0.b == doctest::Approx(1.467029).epsilon(1e-5));
  const auto p1 = predict(1, k);
  CHECK(p1.c == doctest::Approx(9.991135).epsilon(1e-5));
  CHECK(p1.b == doctest::Approx(-3.631358).epsilon(1e-5));
  const auto p4 = predict(4, k);
  CHECK(p4.c == doctest::Approx(131.41603).epsilon(1e-5));
  CHECK(p4.b == doctest::Approx(13.170001).epsilon(1e-5));

  const auto law = law_coefficients(k);
  CHECK(std::abs(law.half_tau - 3.70814935) < 1e-6);
  CHECK(std::abs(law.minus_theta_sum - 0.7602022) < 1e-6);
  CHECK(std::abs(law.A0T - 3.7963177) < 1e-6);
  CHECK(std::abs(law.b2_over_c - 1.3198462) < 1e-6);

  double prev_c = 0, prev_b = 0;
  for (int n = 0; n < 12; ++n) {
    const auto p = predict(n, k);
    CHECK(p.c > prev_c);
    CHECK(std::abs(p.b) > prev_b);
    prev_c = p.c;
    prev_b = std::abs(p.b);
  }
  CHECK_THROWS_AS((void)predict(-1, k), Error);
}

TEST_CASE("modulation decomposition") {
  const auto& k = default_constants();
  const auto ground = evolve_c_orbit(std::numbers::sqrt2);
  const auto r0 = modulation_decompose(ground, k);
  CHECK(r0.residual < 1e-6);

  const auto n6 = evolve_c_orbit(347.353194);
  const auto r6 = modulation_decompose(n6, k);
  CHECK(std::abs(r6.amplitude_inner / r6.predicted_inner - 1) < 0.03);
  CHECK(std::abs(r6.amplitude_outer / r6.predicted_outer - 1) < 0.03);
  CHECK(std::abs(r6.predicted_inner / r6.predicted_outer - 1) < 0.02);
  CHECK(r6.relative_residual < 1e-6);
}
