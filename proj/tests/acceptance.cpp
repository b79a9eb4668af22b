/**
 * @file acceptance.cpp
 * @brief End-to-end acceptance checks; prints one PASS/FAIL line per criterion
 *        and exits non-zero when any criterion fails.
 */
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cubicwave/appendix.hpp"
#include "cubicwave/asymptotics.hpp"
#include "cubicwave/exterior.hpp"
#include "cubicwave/spectrum.hpp"
#include "cubicwave/stability.hpp"

using namespace cubicwave;

namespace {

struct Reference {
  double c, b, E, c_theory, b_theory;
};

/// Reference values of the regular solutions and the large-n predictions.
const Reference reference_rows[] = {
    {std::numbers::sqrt2, std::numbers::sqrt2, 1.0 / 3.0, 1.630626, 1.467029},
    {9.616283, -3.578348, 4.62810, 9.991135, -3.631358},
    {30.13927, 6.315947, 21.5429, 30.681145, 6.363520},
    {68.58242, -9.519976, 64.8053, 69.292246, -9.563216},
    {130.5379, 13.13018, 153.071, 131.41603, 13.170001},
    {221.5967, -17.10516, 309.116, 222.64408, -17.142226},
    {347.3277, 21.41418, 556.682, 348.56798, 21.448919},
};

double rel(double a, double b) { return std::abs(a / b - 1.0); }

/// Collects failed checks of one criterion.
struct Checks {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

int failed_count = 0;

void report(int id, const std::string& title, const std::function<void(Checks&)>& body) {
  Checks checks;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(checks);
  } catch (const std::exception& e) {
    checks.failures.push_back(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = checks.failures.empty();
  if (!pass) ++failed_count;
  std::printf("%s criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, title.c_str(), secs);
  for (const auto& f : checks.failures) std::printf("    - %s\n", f.c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  std::vector<TableRow> rows;

  report(1, "table regression n = 0..6 within 1e-4 in under 60 s", [&](Checks& ch) {
    const auto t0 = std::chrono::steady_clock::now();
    rows = table(6);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ch.expect(secs < 60.0, fmt("runtime %.1f s", secs));
    for (const TableRow& r : rows) {
      const auto& s = r.solution;
      const Reference& p = reference_rows[s.n];
      const std::string tag = "n = " + std::to_string(s.n) + ": ";
      ch.expect(rel(s.c, p.c) < 1e-4, tag + fmt("c %.9g vs %.9g (rel %.2e)", s.c, p.c, rel(s.c, p.c)));
      ch.expect(rel(s.b, p.b) < 1e-4, tag + fmt("b %.9g vs %.9g (rel %.2e)", s.b, p.b, rel(s.b, p.b)));
      ch.expect(rel(s.E, p.E) < 1e-4, tag + fmt("E %.9g vs %.9g (rel %.2e)", s.E, p.E, rel(s.E, p.E)));
    }
  });

  report(2, "ground state anchors c0 = b0 = sqrt 2, E0 = 1/3", [&](Checks& ch) {
    const SelfSimilarSolution s = rows.empty() ? find_c_n(0) : rows[0].solution;
    ch.expect(std::abs(s.c - std::numbers::sqrt2) < 1e-9, fmt("c0 - sqrt2 = %.3e", s.c - std::numbers::sqrt2));
    ch.expect(std::abs(s.b - std::numbers::sqrt2) < 1e-9, fmt("b0 - sqrt2 = %.3e", s.b - std::numbers::sqrt2));
    ch.expect(std::abs(s.E - 1.0 / 3.0) < 1e-9, fmt("E0 - 1/3 = %.3e", s.E - 1.0 / 3.0));
  });

  report(3, "asymptotic constants", [&](Checks& ch) {
    const AsymptoticConstants& k = default_constants();
    ch.expect(std::abs(k.T - 4.20654632) < 1e-7, fmt("T = %.10f", k.T));
    ch.expect(std::abs(k.tau - 7.41629871) < 1e-7, fmt("tau = %.10f", k.tau));
    ch.expect(std::abs(k.T_closed - k.T_quadrature) < 1e-9,
              fmt("T routes differ by %.2e", k.T_closed - k.T_quadrature));
    ch.expect(std::abs(k.tau_closed - k.tau_quadrature) < 1e-9,
              fmt("tau routes differ by %.2e", k.tau_closed - k.tau_quadrature));
    ch.expect(std::abs(k.A0 - 0.90247851) < 1e-6, fmt("A0 = %.9f", k.A0));
    ch.expect(std::abs(k.A1 - 0.82273965) < 1e-6, fmt("A1 = %.9f", k.A1));
    ch.expect(std::abs(k.theta0 - -1.6225533) < 1e-5, fmt("theta0 = %.9f", k.theta0));
    ch.expect(std::abs(k.theta1 - 0.8623512) < 1e-5, fmt("theta1 = %.9f", k.theta1));
  });

  report(4, "prediction formulas and law coefficients", [&](Checks& ch) {
    const AsymptoticConstants& k = default_constants();
    for (int n = 0; n <= 6; ++n) {
      const Prediction p = predict(n, k);
      const std::string tag = "n = " + std::to_string(n) + ": ";
      ch.expect(rel(p.c, reference_rows[n].c_theory) < 1e-5, tag + fmt("c_pred %.9g vs %.9g", p.c, reference_rows[n].c_theory));
      ch.expect(rel(p.b, reference_rows[n].b_theory) < 1e-5, tag + fmt("b_pred %.9g vs %.9g", p.b, reference_rows[n].b_theory));
    }
    const LawCoefficients law = law_coefficients(k);
    ch.expect(std::abs(law.half_tau - 3.70814935) < 1e-6, fmt("tau/2 = %.10f", law.half_tau));
    ch.expect(std::abs(law.minus_theta_sum - 0.7602022) < 1e-6, fmt("-(theta0 + theta1) = %.10f", law.minus_theta_sum));
    ch.expect(std::abs(law.A0T - 3.7963177) < 1e-6, fmt("A0 T = %.10f", law.A0T));
    ch.expect(std::abs(law.b2_over_c - 1.3198462) < 1e-6, fmt("(A0/A1)^3 = %.10f", law.b2_over_c));
  });

  report(5, "small-c phase law Phi/c^2 -> pi^4/30", [&](Checks& ch) {
    const double c = 1e-2;
    const COrbitSummary s = evolve_c_orbit(c);
    const double ratio = s.Phi / (c * c) / (std::pow(std::numbers::pi, 4) / 30.0);
    ch.expect(std::abs(ratio - 1.0) < 1e-3, fmt("Phi/c^2 over pi^4/30 = %.9f", ratio));
  });

  report(6, "linear stability spectrum n = 0..4", [&](Checks& ch) {
    for (int n = 0; n <= 4; ++n) {
      const SelfSimilarSolution s = n < static_cast<int>(rows.size()) ? rows[n].solution : find_c_n(n);
      const EigenReport r = analyze_stability(s);
      const std::string tag = "n = " + std::to_string(n) + ": ";
      ch.expect(r.negative_count == n + 1, tag + fmt("%g negative eigenvalues", r.negative_count));
      ch.expect(r.gauge_offset < 1e-6, tag + fmt("eigenvalue nearest -1 off by %.2e", r.gauge_offset));
      ch.expect(r.gauge_residual < 1e-5, tag + fmt("gauge residual %.2e", r.gauge_residual));
      ch.expect(r.method_agreement >= 0.0 && r.method_agreement < 1e-5,
                tag + fmt("shooting vs oracle %.2e", r.method_agreement));
      ch.expect(r.window_eigenvalues.empty(),
                tag + fmt("%g eigenvalues in (-1, 0)", static_cast<double>(r.window_eigenvalues.size())));
      if (n == 0)
        ch.expect(r.eigenvalues.size() == 1 && std::abs(r.eigenvalues[0] + 1.0) < 1e-6,
                  "n = 0: not the single bound state -1");
    }
  });

  report(7, "exterior singularities n = 1..4 and the constant orbit", [&](Checks& ch) {
    for (int n = 1; n <= 4; ++n) {
      const SelfSimilarSolution s = n < static_cast<int>(rows.size()) ? rows[n].solution : find_c_n(n);
      const SingularityEstimate e = exterior_singularity(s);
      const std::string tag = "n = " + std::to_string(n) + ": ";
      ch.expect(std::isfinite(e.rho) && e.rho > 1.0, tag + fmt("rho_sing = %.9g", e.rho));
      ch.expect(e.drift < 1e-3, tag + fmt("drift %.2e", e.drift));
    }
    const ExteriorReport r = b_orbit(std::numbers::sqrt2, Direction::outward, 100.0);
    double dev = 0.0;
    for (const MonitorSample& m : r.monitors) dev = std::max(dev, std::abs(m.U - std::numbers::sqrt2));
    ch.expect(r.outcome == Outcome::regular && r.rho_end >= 100.0 - 1e-9,
              fmt("b = sqrt2 orbit stopped at rho = %.6g", r.rho_end));
    ch.expect(dev < 1e-8, fmt("b = sqrt2 orbit deviates by %.2e", dev));
  });

  report(8, "inequality certificates on a 1000 x 1000 grid", [&](Checks& ch) {
    const CertificateReport c = certify_inequalities(1000);
    ch.expect(c.N_min.value >= -1e-12, fmt("N_min = %.3e", c.N_min.value));
    ch.expect(c.outward_g_min > 0.0 && c.outward_monotone, fmt("outward g_min = %.3e", c.outward_g_min));
    ch.expect(c.inward_h_slope_max < 0.0, fmt("inward max h' = %.3e", c.inward_h_slope_max));
    ch.expect(c.integrated_margin >= 0.0, fmt("integrated bound margin %.3e", c.integrated_margin));
    ch.expect(c.passed, "certificate not passed");
  });

  report(9, "polar intersection reproduces c_n for n = 0..4", [&](Checks& ch) {
    for (int n = 0; n <= 4; ++n) {
      const NodalIntersection x = find_intersection(n / 2, n % 2 ? Branch::odd : Branch::even);
      const double c_n = n < static_cast<int>(rows.size()) ? rows[n].solution.c : find_c_n(n).c;
      const std::string tag = "n = " + std::to_string(n) + ": ";
      ch.expect(x.n == n && rel(x.c, c_n) < 1e-3, tag + fmt("c %.9g vs %.9g", x.c, c_n));
      ch.expect(x.glue_residual < 1e-6, tag + fmt("glue residual %.2e", x.glue_residual));
    }
  });

  report(10, "Lyapunov and phase monotonicity, increasing energies", [&](Checks& ch) {
    std::mt19937_64 rng(20241016);
    std::uniform_real_distribution<double> dist(0.1, 50.0);
    int bad = 0;
    for (int i = 0; i < 50; ++i) {
      const double c = dist(rng);
      const COrbitSummary s = evolve_c_orbit(c);
      const double rt = s.options.rel_tol, at = s.options.abs_tol;
      for (std::size_t j = 1; j < s.profile.size(); ++j) {
        const auto& a = s.profile[j - 1];
        const auto& b = s.profile[j];
        const bool g_ok = b.G <= a.G + 10.0 * (at + rt * std::abs(a.G));
        const bool phi_ok = b.phi >= a.phi - 10.0 * (at + rt * std::abs(a.phi));
        if (!(g_ok && phi_ok) && bad++ < 5)
          ch.expect(false, fmt("c = %.6g: monotonicity broken at x = %.6g", c, b.x));
      }
    }
    ch.expect(bad == 0, fmt("%g monotonicity violations", bad));
    if (rows.empty()) rows = table(6);
    for (std::size_t n = 1; n < rows.size(); ++n)
      ch.expect(rows[n].solution.E > rows[n - 1].solution.E,
                fmt("E_%g <= E_%g", static_cast<double>(n), static_cast<double>(n - 1)));
  });

  std::printf("%d of 10 criteria failed\n", failed_count);
  return failed_count == 0 ? 0 : 1;
}
