#include <doctest.h>

#include <cmath>

#include "cubicwave/error.hpp"
#include "cubicwave/stability.hpp"

using namespace cubicwave;

namespace {

/// -l(l+1) / cosh^2 x on the half line with xi(0) = 0 keeps the odd bound
/// states of the full-line problem: k^2 = -(l - j)^2 for odd j < l.
PotentialProfile poschl_teller(int l) {
  return make_potential(
      [l](double x) {
        const double ch = std::cosh(x);
        return -static_cast<double>(l * (l + 1)) / (ch * ch);
      },
      30.0);
}

const SelfSimilarSolution& solution(int n) {
  static std::vector<SelfSimilarSolution> cache;
  while (static_cast<int>(cache.size()) <= n)
    cache.push_back(find_c_n(static_cast<int>(cache.size())));
  return cache[static_cast<std::size_t>(n)];
}

}  // namespace

TEST_CASE("Poschl-Teller half-line spectrum is reproduced exactly") {
  const auto r4 = eigenvalues(poschl_teller(4), -30.0);
  REQUIRE(r4.eigenvalues.size() == 2);
  CHECK(r4.eigenvalues[0] == doctest::Approx(-9.0).epsilon(1e-10));
  CHECK(r4.eigenvalues[1] == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(r4.node_counts == std::vector<int>{0, 1});
  CHECK(r4.method_agreement < 1e-8);

  const auto r5 = eigenvalues(poschl_teller(5), -45.0);
  REQUIRE(r5.eigenvalues.size() == 2);
  CHECK(r5.eigenvalues[0] == doctest::Approx(-16.0).epsilon(1e-10));
  CHECK(r5.eigenvalues[1] == doctest::Approx(-4.0).epsilon(1e-10));
}

TEST_CASE("Pruefer count is a nondecreasing step function of E") {
  const auto p = poschl_teller(4);
  CHECK(prufer_shot(p, -9.5).count == 0);
  CHECK(prufer_shot(p, -8.5).count == 1);
  CHECK(prufer_shot(p, -0.5).count == 2);
}

TEST_CASE("ground-state potential is -6 / cosh^2 x") {
  const auto p = build_potential(solution(0));
  for (double x : {0.0, 0.3, 1.0, 2.5, 7.0}) {
    const double ch = std::cosh(x);
    CHECK(p(x) == doctest::Approx(-6.0 / (ch * ch)).epsilon(1e-9));
  }
  CHECK(p.truncation >= 30.0);
  CHECK(p.min_V == doctest::Approx(-6.0).epsilon(1e-9));
}

TEST_CASE("n = 0 has the single bound state k^2 = -1") {
  const auto r = analyze_stability(solution(0));
  REQUIRE(r.eigenvalues.size() == 1);
  CHECK(std::abs(r.eigenvalues[0] + 1.0) < 1e-8);
  CHECK(r.count_below_minus_one == 0);
  CHECK(r.gauge_residual < 1e-5);
  CHECK(r.gauge_nodes == 0);
}

TEST_CASE("n = 1 and n = 2 spectra: n + 1 negative eigenvalues, n below -1") {
  for (int n : {1, 2}) {
    CAPTURE(n);
    const auto r = analyze_stability(solution(n));
    CHECK(r.negative_count == n + 1);
    CHECK(r.count_below_minus_one == n);
    CHECK(r.gauge_offset < 1e-6);
    CHECK(r.eigenvalues.back() == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(r.window_eigenvalues.empty());
    CHECK(r.method_agreement < 1e-5);
    CHECK(r.gauge_residual < 1e-5);
    CHECK(r.gauge_nodes == n);
    for (std::size_t k = 0; k < r.node_counts.size(); ++k)
      CHECK(r.node_counts[k] == static_cast<int>(k));
    for (std::size_t k = 1; k < r.eigenvalues.size(); ++k)
      CHECK(r.eigenvalues[k - 1] < r.eigenvalues[k]);
  }
}

TEST_CASE("eigenvalues do not move when the truncation point doubles") {
  const auto& s = solution(2);
  const auto p1 = build_potential(s);
  const auto p2 = build_potential(s, 2.0 * p1.truncation);
  EigenOptions o;
  o.matrix_oracle = false;
  const auto r1 = eigenvalues(p1, 1.5 * p1.min_V, o);
  const auto r2 = eigenvalues(p2, 1.5 * p2.min_V, o);
  REQUIRE(r1.eigenvalues.size() == r2.eigenvalues.size());
  for (std::size_t k = 0; k < r1.eigenvalues.size(); ++k)
    CHECK(std::abs(r1.eigenvalues[k] - r2.eigenvalues[k]) < 1e-6);
}

TEST_CASE("matrix oracle is accurate on coarse and fine base grids") {
  const auto p = poschl_teller(4);
  const auto coarse = matrix_eigenvalues(p, -1e-4, 0.02);
  const auto fine = matrix_eigenvalues(p, -1e-4, 0.005);
  REQUIRE(coarse.size() == 2);
  REQUIRE(fine.size() == 2);
  CHECK(std::abs(coarse[0] + 9.0) < 1e-8);
  CHECK(std::abs(coarse[1] + 1.0) < 1e-8);
  CHECK(std::abs(fine[0] + 9.0) < 1e-8);
}

TEST_CASE("stability input errors") {
  const auto p = poschl_teller(2);
  CHECK_THROWS_AS((void)eigenvalues(p, 1.0), Error);
  CHECK_THROWS_AS((void)prufer_shot(p, 0.5), Error);
  // A floor above the lowest eigenvalue is detected.
  try {
    (void)eigenvalues(poschl_teller(4), -5.0);
    FAIL("expected spectral_failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::spectral_failure);
  }
  CHECK_THROWS_AS((void)make_potential([](double) { return 0.0; }, -1.0), Error);
}
