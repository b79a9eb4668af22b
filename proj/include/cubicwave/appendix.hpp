/**
 * @file appendix.hpp
 * @brief Topological shooting in polar coordinates: orbits from the center
 *        and from the light cone meet at rho0 = sqrt(2/3), where their
 *        (angle, radius) curves are intersected.
 *
 * Angles are arctan(U'/U), made continuous by integrating
 * theta' = (U'' U - U'^2) / (U^2 + U'^2) along each orbit. Center orbits
 * start from theta(0, c) = 0; cone orbits from beta(1, b) = arctan((b^2 - 2)/2)
 * for b > 0 and pi + arctan((b^2 - 2)/2) for b < 0.
 */
#pragma once

#include <cmath>
#include <vector>

#include "cubicwave/exterior.hpp"

namespace cubicwave {

inline const double rho0 = std::sqrt(2.0 / 3.0);

struct AppendixOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  /// Largest angle change between neighbouring curve samples.
  double max_angle_step = 0.1;
};

struct PolarPoint {
  double angle = 0.0;
  double radius = 0.0;
  double parameter = 0.0;  ///< c or b
  double U = 0.0;          ///< at rho0
  double dU = 0.0;
  int zeros = 0;  ///< sign changes of U along the integrated piece
};

/// (theta(rho0, c), r(rho0, c)); c > 0.
[[nodiscard]] PolarPoint center_map(double c, const AppendixOptions& options = {});

/// (beta(rho0, b) - 2 k pi, R(rho0, b)); b != 0.
[[nodiscard]] PolarPoint cone_map(double b, int k, const AppendixOptions& options = {});

/// Orbit samples (integrator nodes) with the continuous angle and H.
struct PolarSample {
  double rho = 0.0;
  double U = 0.0;
  double dU = 0.0;
  double angle = 0.0;
  double H = 0.0;  ///< (1 - rho^2) U'^2 / 2 - U^2 + U^4 / 4
};

/// Center orbit from the series start up to rho_end in (0, 1).
[[nodiscard]] std::vector<PolarSample> center_trace(double c, double rho_end = rho0,
                                                    const AppendixOptions& options = {});
/// Cone orbit from 1 - delta down to rho_end in (0, 1).
[[nodiscard]] std::vector<PolarSample> cone_trace(double b, double rho_end = rho0,
                                                  const AppendixOptions& options = {});

enum class Branch { even, odd };

[[nodiscard]] const char* to_string(Branch b);

/// Cone offset index: Psi uses beta - 2 offset pi, offset = k (even) or k + 1 (odd).
[[nodiscard]] int cone_offset(int k, Branch branch);

/// Traced curve, parameters increasing in magnitude from the start value.
[[nodiscard]] std::vector<PolarPoint> trace_center_curve(double c_start, double angle_stop,
                                                         const AppendixOptions& options = {});
[[nodiscard]] std::vector<PolarPoint> trace_cone_curve(double b_start, int offset,
                                                       double angle_stop,
                                                       const AppendixOptions& options = {});

struct NodalIntersection {
  int k = 0;
  Branch branch = Branch::even;
  int n = 0;  ///< 2k or 2k + 1
  double c = 0.0;
  double b = 0.0;
  /// |(U, U')_center - (U, U')_cone| at rho0 after refinement.
  double residual = 0.0;
  double angle = 0.0;
  double radius = 0.0;
  int zeros = 0;  ///< zeros of the glued profile on (0, 1)
  /// max |rho-equation residual| on a grid straddling rho0 (U'' by differences).
  double glue_residual = 0.0;
  std::size_t center_samples = 0;
  std::size_t cone_samples = 0;
  int crossings = 0;  ///< polyline crossings examined
};

/// Intersects Phi and Psi in the (angle, radius) plane and refines the
/// crossing with Newton's method on the (U, U') matching at rho0.
///
/// Throws Error(scan_failure) when no crossing yields a solution with n zeros.
[[nodiscard]] NodalIntersection find_intersection(int k, Branch branch,
                                                  const AppendixOptions& options = {});

/// Nodal angle window -pi/2 > theta(rho0, c) > -(2k + 1) pi checked on two
/// parameter ranges: c_L < c < c_R, and b_L < c < b_R (the b-interval bounds
/// applied to the center parameter).
struct WindowReading {
  int k = 0;
  double c_L = 0.0, c_R = 0.0, b_L = 0.0, b_R = 0.0;
  int samples = 0;
  int violations_c_interval = 0;
  int violations_b_interval = 0;
};

struct LemmaReport {
  // Small-parameter radii
  double r_small = 0.0;  ///< r(rho0, 0.01)
  double R_small = 0.0;  ///< R(rho0, 0.01)
  /// Linearized predictions 0.01 |(U, U')| for U = artanh(rho)/rho and U = 1/rho.
  double r_linear = 0.0;
  double R_linear = 0.0;
  bool r_monotone = true;
  bool R_monotone = true;
  // Unbounded rotation
  std::vector<PolarPoint> center_growth;  ///< c = 2, 5, 10, 20, 50
  std::vector<PolarPoint> cone_growth;    ///< b = 2, 5, 10, 20, 50
  // Angle bounds along orbits
  double theta_max = 0.0;  ///< max theta along sampled center orbits
  double beta_min = 0.0;   ///< min beta along sampled cone orbits (b > 0)
  double beta_min_negative = 0.0;  ///< min beta along sampled cone orbits (b < 0)
  // Small-parameter angle window and H monotonicity
  double theta_rho0_abs_max = 0.0;  ///< max |theta(rho0, c)| for c in (0, 2)
  double beta_rho0_abs_max = 0.0;   ///< max |beta(rho0, b)| for b in (0, 2)
  double H_center_margin = 0.0;     ///< max (H(rho) - H(0)) on (0, rho0]
  double H_cone_margin = 0.0;       ///< max (H(rho) - H(1)) on [rho0, 1)
  bool H_flip = true;               ///< H' changes sign exactly at rho0 on the c = 1 orbit
  std::vector<WindowReading> windows;
  bool passed = false;
};

/// Grid checks of the small-parameter, rotation, angle-bound and H monitors,
/// plus the nodal angle window on both parameter ranges.
/// Throws Error(lemma_violation) with the offending sample; ranges in (0, 50].
[[nodiscard]] LemmaReport lemma_monitors(double c_max = 50.0, double b_max = 50.0,
                                         const AppendixOptions& options = {});

}  // namespace cubicwave
