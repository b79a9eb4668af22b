/**
 * @file exterior.hpp
 * @brief Self-similar profiles in the similarity variable rho = r / (T - t),
 *        inside and outside the light cone rho = 1.
 *
 * With u = U(rho) / (T - t) the profile equation reads
 *
 *   (1 - rho^2) U'' + (2 / rho - 4 rho) U' - 2 U + U^3 = 0,
 *
 * which is singular at rho = 0 and rho = 1; both points are left through
 * local power series.
 */
#pragma once

#include <array>
#include <vector>

#include "cubicwave/spectrum.hpp"

namespace cubicwave {

struct RhoState {
  double rho = 0.0;
  double U = 0.0;
  double dU = 0.0;
};

/// Coefficients of U = c + a2 rho^2 + a4 rho^4 + a6 rho^6 near the center.
struct CenterSeries {
  double a0, a2, a4, a6;
};
[[nodiscard]] CenterSeries center_series(double c);

/// Coefficients of U = b + p1 s + p2 s^2 + p3 s^3 + p4 s^4, s = rho - 1.
struct ConeSeries {
  double p0, p1, p2, p3, p4;
};
[[nodiscard]] ConeSeries cone_series(double b);

/// State at rho = delta from the center series; delta in (0, 0.05].
[[nodiscard]] RhoState rho_series_center(double c, double delta);

enum class ConeSide { inner, outer };

/// State at rho = 1 -+ delta from the cone series; delta in (0, 1e-2].
[[nodiscard]] RhoState rho_series_cone(double b, double delta, ConeSide side);

/// Residual of the rho equation at a state with a given second derivative.
[[nodiscard]] double rho_equation_residual(const RhoState& s, double d2U);

/// Monitor functions.
[[nodiscard]] double monitor_h(const RhoState& s);  ///< -U'/U
[[nodiscard]] double monitor_g(const RhoState& s);  ///< rho^4 U U' - rho^3 (U^2 - 2) / 6
/// Numerator (rho - rho^3) U'^2 + (2 - 4 rho^2) U U' - rho U^2 (2 - U^2) of h'.
[[nodiscard]] double monitor_n(const RhoState& s);
/// h' = n / (rho (1 - rho^2) U^2).
[[nodiscard]] double monitor_h_slope(const RhoState& s);

enum class Direction { inward, outward };
enum class Outcome { regular, singular };

[[nodiscard]] const char* to_string(Direction d);
[[nodiscard]] const char* to_string(Outcome o);

struct MonitorSample {
  double rho = 0.0;
  double U = 0.0;
  double dU = 0.0;
  double h = 0.0;
  double g = 0.0;
  double n = 0.0;
};

struct ExteriorOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  /// |U| beyond this marks the singularity.
  double blowup_threshold = 1e8;
  /// Distance from rho = 1 where the cone series hands over to integration.
  double delta = 1e-4;
};

struct ExteriorReport {
  double b = 0.0;  ///< value at rho = 1 (after the U -> -U reduction to b >= 0)
  Direction direction = Direction::outward;
  Outcome outcome = Outcome::regular;
  /// Last regular point reached.
  double rho_end = 0.0;
  /// Extrapolated blowup location (singular outcome only).
  double rho_sing = 0.0;
  /// Monitors at every integrator node.
  std::vector<MonitorSample> monitors;
  /// True when regularity was not expected (b > sqrt2 outward reaching rho_limit).
  bool flagged = false;
};

/// Integrates the rho equation from `start` towards rho_limit with blowup
/// detection. Throws Error(invalid_input) when start sits at rho = 0 or 1 or
/// rho_limit lies on the wrong side.
[[nodiscard]] ExteriorReport continue_orbit(const RhoState& start, Direction direction,
                                            double rho_limit, const ExteriorOptions& options = {});

/// b-orbit: cone series at 1 -+ delta, then continue_orbit. Negative b use U -> -U.
[[nodiscard]] ExteriorReport b_orbit(double b, Direction direction, double rho_limit,
                                     const ExteriorOptions& options = {});

/// Interior profile in rho: U = f(x) coth x, rho = tanh x (rho in [0, 1)).
[[nodiscard]] RhoState bridge_state(const SelfSimilarSolution& solution, double rho);

struct SingularityEstimate {
  double rho = 0.0;
  /// Max relative change under tolerance halving and delta halving.
  double drift = 0.0;
  double rho_half_tol = 0.0;
  double rho_half_delta = 0.0;
  ExteriorReport report;
};

/// Outward blowup point of the solution with n >= 1 zeros.
///
/// Throws Error(precondition_violation) when |b_n| <= sqrt2 and
/// Error(integration_failure) when no singularity occurs before rho_limit.
[[nodiscard]] SingularityEstimate exterior_singularity(const SelfSimilarSolution& solution,
                                                       const ExteriorOptions& options = {},
                                                       double rho_limit = 1e3);

/// Step-1 discriminant 1 - R^2 (1 - R^2)(2 + U^2).
[[nodiscard]] double step1_discriminant(double U, double R);
/// N(U, R) = (D + R^2)(1 - 2R^2 + sqrt D) + (1 - R^2) R^4 (U^2 - 2), D the discriminant.
[[nodiscard]] double step1_N(double U, double R);
/// g' at a zero of g, from the rho equation.
[[nodiscard]] double g_slope_at_zero(double U, double rho);
/// Alternate closed form rho^2 (U^2-2) ((17U - 9) rho^2 + U + 3) / (18 (rho^2 - 1)),
/// reported next to the derived one for comparison.
[[nodiscard]] double g_slope_at_zero_alternate(double U, double rho);

struct GridPoint {
  double U = 0.0;
  double R = 0.0;
  double value = 0.0;
};

struct CertificateReport {
  int grid = 0;
  GridPoint N_min;  ///< over [0, sqrt2] x [0, 1]
  /// Minima over the sides U = 0, U = sqrt2, R = 0, R = 1.
  std::array<GridPoint, 4> N_edges;
  /// Minima of g' at g = 0 over rho in (1, 10], U in (sqrt2, 10].
  GridPoint g_slope_min;
  GridPoint g_slope_alternate_min;
  /// Outward orbits with b > sqrt2: minimum g, monotonicity, and the
  /// integrated bound with both exponents (1 / (3 sqrt2) and sqrt2 / 3).
  std::vector<double> outward_b;
  double outward_g_min = 0.0;
  bool outward_monotone = true;
  double integrated_margin = 0.0;
  double integrated_margin_sharp = 0.0;
  /// Inward orbits with 0 < b < sqrt2: maximum h' and n.
  std::vector<double> inward_b;
  double inward_h_slope_max = 0.0;
  double inward_n_max = 0.0;
  bool passed = false;
};

/// Grid certificate of the Step-1 and Step-2 inequalities. `grid` >= 100.
/// Throws Error(certificate_failure) naming the first offending point.
[[nodiscard]] CertificateReport certify_inequalities(int grid = 1000);

}  // namespace cubicwave
