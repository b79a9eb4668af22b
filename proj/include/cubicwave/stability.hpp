/**
 * @file stability.hpp
 * @brief Point spectrum of L = -d^2/dx^2 + V_n on (0, inf) with xi(0) = 0,
 *        where V_n = -3 f_n^2 / sinh^2 x, and the gauge mode sinh(x) f_n'(x).
 */
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cubicwave/spectrum.hpp"

namespace cubicwave {

struct PotentialSample {
  double x = 0.0;
  double V = 0.0;
};

/// Potential on [0, truncation]; V(x) is available at any point.
struct PotentialProfile {
  int n = -1;  ///< -1 for potentials not built from a solution
  double truncation = 0.0;
  double min_V = 0.0;
  double argmin_V = 0.0;
  /// V ~ decay_coefficient * e^{-2x} at large x (= -12 b_n^2).
  double decay_coefficient = 0.0;
  std::vector<PotentialSample> samples;
  std::function<double(double)> V;

  double operator()(double x) const { return V(x); }
};

/// V_n from a solution record; truncation 0 selects max(30, x_max + 10).
[[nodiscard]] PotentialProfile build_potential(const SelfSimilarSolution& solution,
                                               double truncation = 0.0,
                                               std::size_t samples = 2001);

/// Wraps an arbitrary bounded, decaying potential (used for exactly solvable checks).
[[nodiscard]] PotentialProfile make_potential(std::function<double(double)> V, double truncation,
                                              std::size_t samples = 2001);

struct PruferShot {
  double theta_left = 0.0;   ///< at the matching point, from xi(0) = 0
  double theta_right = 0.0;  ///< at the matching point, from the decaying end condition
  double mismatch = 0.0;     ///< theta_left - theta_right
  int count = 0;             ///< eigenvalues strictly below E
  int nodes = 0;             ///< interior nodes of the glued solution
};

/// Double-ended Pruefer shot at energy E < 0.
[[nodiscard]] PruferShot prufer_shot(const PotentialProfile& V, double E, double rel_tol = 1e-12);

struct EigenReport {
  int n = -1;
  std::vector<double> eigenvalues;  ///< ascending, all in [search_floor, -guard)
  std::vector<int> node_counts;
  int negative_count = 0;
  int count_below_minus_one = 0;
  /// Eigenvalue nearest -1 and its distance from -1.
  double gauge_eigenvalue = 0.0;
  double gauge_offset = 0.0;
  double gauge_residual = 0.0;
  int gauge_nodes = -1;
  /// Eigenvalues found in (-1 + guard, -guard).
  std::vector<double> window_eigenvalues;
  std::vector<double> oracle_eigenvalues;
  /// max |shooting - oracle|; negative when the oracle was skipped.
  double method_agreement = -1.0;
  double search_floor = 0.0;
  double guard = 1e-4;
  double truncation = 0.0;
};

struct EigenOptions {
  double tol = 1e-12;
  /// Continuum guard: eigenvalues are sought below -guard.
  double guard = 1e-4;
  bool matrix_oracle = true;
};

/// All eigenvalues in [search_floor, -guard) by shooting, refined on the
/// matching determinant and cross-checked against the matrix oracle.
///
/// Throws Error(spectral_failure) when node counts break the Sturm ordering,
/// and Error(invalid_input) unless search_floor < -guard.
[[nodiscard]] EigenReport eigenvalues(const PotentialProfile& potential, double search_floor,
                                      const EigenOptions& options = {});

/// Finite-difference oracle: second-order Dirichlet matrix on uniform grids
/// h, h/2, h/4 (h = min(L/4000, 0.02/sqrt|min V|) unless given), eigenvalues
/// below `upper` by LAPACK bisection, combined by Richardson extrapolation.
[[nodiscard]] std::vector<double> matrix_eigenvalues(const PotentialProfile& potential,
                                                     double upper, double h = 0.0);

struct GaugeReport {
  double residual = 0.0;  ///< sup |L xi + xi| / sup |xi|
  int nodes = 0;
  double x_checked = 0.0;  ///< upper end of the verified range
};

/// Checks that xi = sinh(x) f'(x) satisfies L xi = -xi (second derivative by
/// central differences of the exact xi') and counts its interior nodes.
[[nodiscard]] GaugeReport gauge_mode_check(const SelfSimilarSolution& solution);

/// build_potential + eigenvalues (floor 1.5 min V) + gauge_mode_check.
[[nodiscard]] EigenReport analyze_stability(const SelfSimilarSolution& solution,
                                            const EigenOptions& options = {});

}  // namespace cubicwave
