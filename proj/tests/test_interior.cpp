#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cubicwave/error.hpp"
#include "cubicwave/interior.hpp"
#include "cubicwave/quadrature.hpp"
#include "series_oracle.hpp"

using namespace cubicwave;

namespace {
const double pi = std::numbers::pi;
const double sqrt2 = std::numbers::sqrt2;

// Energy through the virial form 1/4 int f^4 / sinh^2, valid when D = 0.
double virial_energy(const COrbitSummary& s) {
  auto g = [&s](double x) {
    const double f = s.f(x);
    const double q = x > 0 ? f * f / std::sinh(x) : 0.0;
    return q * q;
  };
  double sum = 0.0;
  for (double a = 0.0; a < 40.0; a += 0.05 / std::max(1.0, s.c / 20)) {
    const double b = std::min(40.0, a + 0.05 / std::max(1.0, s.c / 20));
    sum += quadrature_smooth(g, a, b, 1e-13);
  }
  return 0.25 * sum;
}
}  // namespace

TEST_CASE("origin series coefficients match coefficient matching") {
  for (double c : {0.3, 1.0, 2.0, 17.0}) {
    const auto ref = oracle::origin_profile(c, 9);
    const auto s = origin_series(c);
    CHECK(s.a1 == doctest::Approx(ref[1]).epsilon(1e-15));
    CHECK(s.a3 == doctest::Approx(ref[3]).epsilon(1e-14));
    CHECK(s.a5 == doctest::Approx(ref[5]).epsilon(1e-14));
    CHECK(s.a7 == doctest::Approx(ref[7]).epsilon(1e-13));
  }
}

TEST_CASE("series start values") {
  const auto s = series_start(1.0, 1e-3);
  CHECK(std::abs(s.d - (1.0 - 5e-7)) < 1e-12);
  CHECK(std::abs(s.b - 1e-9 / 3) < 1e-13);
  CHECK(s.phi == doctest::Approx(s.b / s.d).epsilon(1e-9));

  const auto s2 = series_start(2.0, 1e-3);
  CHECK(std::abs(s2.f() - (2e-3 - 4.0 / 3 * 1e-9)) < 1e-15);
  const auto ref = oracle::origin_profile(2.0, 13);
  CHECK(std::abs(s2.f() - oracle::eval(ref, 1e-3)) < 1e-18);
  CHECK(std::abs(s2.d - oracle::eval(oracle::derivative(ref), 1e-3)) < 1e-15);

  const auto tiny = series_start(3.0, 1e-9);
  CHECK(std::abs(tiny.b) < 1e-20);
  CHECK(std::abs(tiny.d - 3.0) < 1e-15);

  CHECK_THROWS_AS((void)series_start(10.0, 2e-3), Error);
  try {
    (void)series_start(10.0, 2e-3);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::series_domain_error);
  }
  CHECK_THROWS_AS((void)series_start(1.0, 0.0), Error);
}

TEST_CASE("series start is consistent with integration from a smaller radius") {
  for (double c : {2.0, 40.0}) {
    InteriorOptions a, b;
    a.x0 = 1e-3 / std::max(1.0, c);
    b.x0 = a.x0 / 10;
    const auto s1 = evolve_c_orbit(c, 1e-12, a);
    const auto s2 = evolve_c_orbit(c, 1e-12, b);
    for (double x : {0.01, 0.5, 2.0}) {
      CHECK(std::abs(s1.f(x) - s2.f(x)) < 1e-10 * std::max(1.0, c));
    }
    CHECK(std::abs(s1.Phi - s2.Phi) < 1e-9);
  }
}

TEST_CASE("ground state orbit") {
  const auto s = evolve_c_orbit(sqrt2);
  CHECK(std::abs(s.D) < 1e-10);
  CHECK(std::abs(s.B - sqrt2) < 1e-10);
  CHECK(std::abs(s.Phi - pi / 2) < 1e-10);
  for (double x : {0.0, 1e-4, 0.3, 1.0, 4.0, 12.0, 30.0})
    CHECK(std::abs(s.f(x) - sqrt2 * std::tanh(x)) < 1e-10);
  CHECK(s.x_max > 10);
  CHECK(s.x_max < 30);
  CHECK(static_energy(s) == doctest::Approx(1.0 / 3).epsilon(1e-10));
}

TEST_CASE("first excited orbit") {
  const auto s = evolve_c_orbit(9.616283);
  CHECK(std::abs(s.D) < 1e-5);
  CHECK(s.B == doctest::Approx(-3.578348).epsilon(1e-6));
  CHECK(s.Phi == doctest::Approx(1.5 * pi).epsilon(1e-6));
}

TEST_CASE("small-c phase law") {
  const double coeff = std::pow(pi, 4) / 30;
  for (double c : {1e-2, 1e-3}) {
    const auto s = evolve_c_orbit(c);
    CHECK(std::abs(s.Phi / (c * c) / coeff - 1) < 1e-3);
  }
}

TEST_CASE("negative c mirrors the orbit") {
  const auto p = evolve_c_orbit(3.0);
  const auto m = evolve_c_orbit(-3.0);
  CHECK(m.B == doctest::Approx(-p.B).epsilon(1e-12));
  CHECK(m.D == doctest::Approx(-p.D).epsilon(1e-12));
  CHECK(m.Phi == doctest::Approx(p.Phi).epsilon(1e-12));
  CHECK(m.f(1.3) == doctest::Approx(-p.f(1.3)).epsilon(1e-12));
}

TEST_CASE("static energy of the first regular solutions") {
  // c values converged by the spectrum solver; energies checked against the virial form.
  const auto s1 = evolve_c_orbit(9.61628310);
  const double e1 = static_energy(s1, 1e-5);
  CHECK(e1 == doctest::Approx(4.62810).epsilon(1e-5));
  CHECK(e1 == doctest::Approx(virial_energy(s1)).epsilon(1e-6));
  const auto s2 = evolve_c_orbit(30.1392762);
  const double e2 = static_energy(s2, 1e-5);
  CHECK(e2 == doctest::Approx(21.5429).epsilon(1e-4));
  CHECK(e2 == doctest::Approx(virial_energy(s2)).epsilon(1e-6));
  CHECK_THROWS_AS((void)static_energy(evolve_c_orbit(5.0)), Error);
}

TEST_CASE("Lyapunov and phase monotonicity, profile consistency") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.1, 50.0);
  for (int k = 0; k < 10; ++k) {
    const double c = dist(rng);
    const auto s = evolve_c_orbit(c);
    const double tol = 10 * s.options.abs_tol * std::max(1.0, c * c);
    for (std::size_t i = 1; i < s.profile.size(); ++i) {
      CHECK(s.profile[i].G <= s.profile[i - 1].G + tol);
      CHECK(s.profile[i].phi >= s.profile[i - 1].phi - 10 * s.options.abs_tol);
      CHECK(s.profile[i].f == doctest::Approx(s.profile[i].b + s.profile[i].x * s.profile[i].d));
    }
    // d/dx (b + x d) = d on the dense output.
    for (double x : {0.05, 0.7, 3.0}) {
      const double h = 1e-4;
      const double fd = (s.f(x + h) - s.f(x - h)) / (2 * h);
      CHECK(std::abs(fd - s.df(x)) < 1e-6 * std::max(1.0, c * c));
    }
  }
}

TEST_CASE("B, D and Phi are continuous in c") {
  const auto a = evolve_c_orbit(7.0);
  double prev = 1e9;
  for (double delta : {1e-2, 1e-4, 1e-6}) {
    const auto b = evolve_c_orbit(7.0 + delta);
    const double diff = std::abs(b.Phi - a.Phi);
    CHECK(diff < prev);
    prev = diff;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("rescaled limiting profile") {
  const auto lim = rescaled_limit_profile(limit_c, 120.0, 12001);
  CHECK(std::abs(lim[10].y - 0.1) < 1e-12);
  CHECK(std::abs(lim[10].F - (0.1 - 1.667e-4)) < 1e-6);
  // Zeros from an independent integration: 6.89684862, 35.96194003, 102.60284997.
  std::vector<double> zeros;
  for (std::size_t i = 1; i < lim.size(); ++i)
    if ((lim[i].F < 0) != (lim[i - 1].F < 0))
      zeros.push_back(lim[i - 1].y -
                      lim[i - 1].F * (lim[i].y - lim[i - 1].y) / (lim[i].F - lim[i - 1].F));
  REQUIRE(zeros.size() >= 3);
  CHECK(std::abs(zeros[0] - 6.89684862) < 1e-3);
  CHECK(std::abs(zeros[1] - 35.96194003) < 1e-3);
  CHECK(std::abs(zeros[2] - 102.60284997) < 1e-3);

  const auto finite = rescaled_limit_profile(100.0, 2.0, 201);
  CHECK(std::abs(finite[100].y - 1.0) < 1e-12);
  CHECK(std::abs(finite[100].F - lim[100].F) < 1e-3);
}
