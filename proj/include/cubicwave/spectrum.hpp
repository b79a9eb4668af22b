/**
 * @file spectrum.hpp
 * @brief Regular solutions: the discrete shooting parameters c_n with
 *        Phi(c_n) = (n + 1/2) pi, their records, and the comparison table.
 */
#pragma once

#include <vector>

#include "cubicwave/asymptotics.hpp"
#include "cubicwave/interior.hpp"

namespace cubicwave {

/// One globally regular solution with n interior zeros.
struct SelfSimilarSolution {
  int n = 0;
  double c = 0.0;
  double b = 0.0;  ///< B(c_n), sign (-1)^n
  double E = 0.0;
  double x_max = 0.0;
  /// Phi(c_n) - (n + 1/2) pi
  double phase_residual = 0.0;
  /// Interior zeros of f_n.
  std::vector<double> zeros;
  /// Root of the same bracket found by plain bisection.
  double c_bisection = 0.0;
  /// Every sign change of Phi(c) - (n + 1/2) pi seen while bracketing (bracket midpoints).
  std::vector<double> scan_sign_changes;
  COrbitSummary orbit;
};

struct SpectrumOptions {
  /// Relative tolerance on c_n.
  double tol = 1e-13;
  /// Tolerance on the truncated tail of each c-orbit.
  double tail_tol = 1e-13;
  /// |D| above this means the orbit is not regular.
  double regularity_tol = 1e-6;
  /// Samples of the seeded bracket used to detect further sign changes.
  int bracket_samples = 12;
  InteriorOptions interior;
};

/// Solves Phi(c) = (n + 1/2) pi near the large-n prediction.
///
/// Throws Error(bracket_failure) when no sign change is found (seeded bracket
/// [0.7, 1.3] c_pred, then a geometric scan of [0.1, 2 c_pred]) and
/// Error(wrong_branch) when the converged profile does not have n zeros.
[[nodiscard]] SelfSimilarSolution find_c_n(int n, const SpectrumOptions& options = {},
                                           const AsymptoticConstants& k = default_constants());

struct TableRow {
  SelfSimilarSolution solution;
  Prediction predicted;
  double c_deviation = 0.0;  ///< |c_pred / c_n - 1|
  double b_deviation = 0.0;  ///< |b_pred / b_n - 1|
};

[[nodiscard]] std::vector<TableRow> table(int n_max, const SpectrumOptions& options = {},
                                          const AsymptoticConstants& k = default_constants());

/// Zeros of f along a c-orbit (excluding x = 0).
[[nodiscard]] std::vector<double> profile_zeros(const COrbitSummary& orbit);

/// Point of the (B, D) curve in the sigma-normalized chart.
struct Figure1Point {
  double c = 0.0;
  double B = 0.0;
  double D = 0.0;
  double b_bar = 0.0;  ///< (B + 8 D) / sigma
  double d_bar = 0.0;  ///< D / sigma, sigma = ((B + 8 D)^2 + D^2)^{1/6}
};

/// Curve samples for c in +-[c_min, c_max], geometrically spaced; negative c
/// follow from the odd symmetry of the equation.
[[nodiscard]] std::vector<Figure1Point> figure1_curve(double c_min = 0.05, double c_max = 400.0,
                                                      int samples = 400);

}  // namespace cubicwave
