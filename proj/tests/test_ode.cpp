#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cubicwave/error.hpp"
#include "cubicwave/ode.hpp"
#include "cubicwave/quadrature.hpp"
#include "cubicwave/roots.hpp"

using namespace cubicwave;
using namespace cubicwave::ode;

namespace {

Problem exponential() {
  return {[](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; }, 0.0,
          1.0, {1.0}};
}

Problem oscillator(double end) {
  return {[](double, std::span<const double> y, std::span<double> dy) {
            dy[0] = y[1];
            dy[1] = -y[0];
          },
          0.0, end, {0.0, 1.0}};
}

}  // namespace

TEST_CASE("exponential growth reaches e") {
  const auto traj = integrate(exponential());
  CHECK(traj.termination == Termination::reached_end);
  CHECK(traj.back() == 1.0);
  CHECK(std::abs(traj.back_state()[0] - std::numbers::e) < 1e-10);
}

TEST_CASE("dense output tracks the exact solution") {
  const auto traj = integrate(exponential(), 1e-10, 1e-12);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    worst = std::max(worst, std::abs(traj.component(x, 0) - std::exp(x)) / std::exp(x));
  }
  CHECK(worst < 1e-9);
  CHECK_THROWS_AS((void)traj(1.5), Error);
}

TEST_CASE("backward integration") {
  Problem p = exponential();
  p.start = 1.0;
  p.end = 0.0;
  p.initial_state = {std::numbers::e};
  const auto traj = integrate(p);
  CHECK(std::abs(traj.back_state()[0] - 1.0) < 1e-10);
  CHECK(std::abs(traj.component(0.5, 0) - std::exp(0.5)) < 1e-9);
}

TEST_CASE("downward zero of the harmonic oscillator is at pi") {
  const std::vector<EventSpec> events = {
      {EventKind::sign_change, [](double, std::span<const double> y) { return y[0]; },
       Crossing::down, 0.0}};
  const auto traj = integrate(oscillator(10.0), Options{}, events);
  REQUIRE(traj.termination == Termination::event);
  CHECK(traj.event_index == 0);
  CHECK(std::abs(traj.termination_location - std::numbers::pi) < 1e-9);
  CHECK(std::abs(traj.back() - std::numbers::pi) < 1e-9);
}

TEST_CASE("upward crossing skips the first downward zero") {
  const std::vector<EventSpec> events = {
      {EventKind::sign_change, [](double, std::span<const double> y) { return y[0]; },
       Crossing::up, 0.0}};
  const auto traj = integrate(oscillator(10.0), Options{}, events);
  CHECK(std::abs(traj.termination_location - 2 * std::numbers::pi) < 1e-9);
}

TEST_CASE("event location is invariant under restart from a node") {
  const std::vector<EventSpec> events = {
      {EventKind::sign_change, [](double, std::span<const double> y) { return y[1]; },
       Crossing::any, 0.0}};
  const auto full = integrate(oscillator(10.0), Options{}, events);
  const std::size_t mid = full.size() / 2;
  Problem p = oscillator(10.0);
  p.start = full.nodes()[mid];
  p.initial_state = State(full.state_at(mid).begin(), full.state_at(mid).end());
  const auto restarted = integrate(p, Options{}, events);
  CHECK(std::abs(full.termination_location - restarted.termination_location) < 1e-9);
}

TEST_CASE("quadratic blowup is detected near x = 1") {
  Problem p{[](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; },
            0.0, 2.0, {1.0}};
  const auto traj = integrate(p);
  CHECK(traj.termination == Termination::blowup);
  CHECK(std::abs(traj.termination_location - 1.0) < 1e-6);
}

TEST_CASE("norm threshold event") {
  const std::vector<EventSpec> events = {{EventKind::norm_threshold, {}, Crossing::up, 10.0}};
  Problem p = exponential();
  p.end = 5.0;
  const auto traj = integrate(p, Options{}, events);
  CHECK(traj.termination == Termination::event);
  CHECK(std::abs(traj.termination_location - std::log(10.0)) < 1e-9);
}

TEST_CASE("tolerance halving changes the terminal state by less than ten tolerances") {
  Options o;
  o.rel_tol = 1e-8;
  o.abs_tol = 1e-10;
  const double coarse = integrate(oscillator(20.0), o).back_state()[0];
  o.rel_tol /= 2;
  o.abs_tol /= 2;
  const double fine = integrate(oscillator(20.0), o).back_state()[0];
  CHECK(std::abs(coarse - fine) < 10 * 1e-8);
}

TEST_CASE("integration input errors") {
  Problem p = exponential();
  p.end = p.start;
  CHECK_THROWS_AS((void)integrate(p), Error);
  Options bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS((void)integrate(exponential(), bad), Error);

  Problem nan_rhs{[](double x, std::span<const double>, std::span<double> dy) {
                    dy[0] = x > 0.5 ? std::nan("") : 1.0;
                  },
                  0.0, 1.0, {0.0}};
  try {
    (void)integrate(nan_rhs);
    FAIL("expected IntegrationFailure");
  } catch (const IntegrationFailure& e) {
    CHECK(e.kind() == ErrorKind::integration_failure);
    CHECK(e.last_x() <= 0.5);
    CHECK(std::abs(e.last_state()[0] - e.last_x()) < 1e-12);
  }
}

TEST_CASE("quadrature with endpoint singularities") {
  CHECK(std::abs(quadrature([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10) - 2.0) <
        1e-10);
  const double inf = std::numeric_limits<double>::infinity();
  const double pt = quadrature(
      [](double x) {
        const double s = std::sinh(x);
        if (x < 1e-8) return x * x;
        if (x > 300) return 4 * std::exp(4 * std::log(x) - 2 * x);
        return std::pow(x, 4) / (s * s);
      },
      0.0, inf, 1e-10);
  CHECK(std::abs(pt - std::pow(std::numbers::pi, 4) / 30) < 1e-9);
  const double t = quadrature([](double x) { return std::pow(std::sinh(x), -2.0 / 3.0); }, 0.0,
                              inf, 1e-10);
  CHECK(std::abs(t - 4.20654632) < 1e-7);
  CHECK(std::abs(quadrature_smooth([](double x) { return std::cos(x); }, 0.0, 1.0) -
                 std::sin(1.0)) < 1e-13);
}

TEST_CASE("quadrature reports non-convergence") {
  CHECK_THROWS_AS(
      (void)quadrature([](double x) { return 1.0 / x; }, 0.0, 1.0, 1e-10), Error);
}

TEST_CASE("bracketing root finders agree") {
  auto f = [](double x) { return std::cos(x) - x; };
  const auto a = find_root(f, 0.0, 1.0, f(0.0), f(1.0), 1e-14);
  const auto b = bisect(f, 0.0, 1.0, f(0.0), f(1.0), 1e-14);
  CHECK(std::abs(a.root - 0.7390851332151607) < 1e-13);
  CHECK(std::abs(a.root - b.root) < 1e-13);
  CHECK(a.evaluations < b.evaluations);
  CHECK_THROWS_AS((void)find_root(f, 0.0, 0.5, f(0.0), f(0.5), 1e-12), Error);
}

TEST_CASE("all crossings along a trajectory") {
  const auto traj = integrate(oscillator(20.0));
  const auto down = find_crossings(traj, [](double, std::span<const double> y) { return y[0]; },
                                   Crossing::down);
  REQUIRE(down.size() == 3);
  for (std::size_t k = 0; k < down.size(); ++k)
    CHECK(std::abs(down[k] - (2 * k + 1) * std::numbers::pi) < 1e-9);
  const auto any = find_crossings(traj, [](double, std::span<const double> y) { return y[0]; });
  CHECK(any.size() == 6);
}
