/**
 * @file interior.hpp
 * @brief Orbits of the (b, d, phi) system inside the light cone, in the
 *        hyperbolic radius x, together with their limits and static energy.
 *
 * The profile f(x) solves f'' + f^3 / sinh^2(x) = 0 with f(0) = 0, f'(0) = c.
 * In first-order form b = f - x f', d = f', f = b + x d and
 *
 *   b'   =  x f^3 / sinh^2 x,
 *   d'   = -f^3 / sinh^2 x,
 *   phi' =  f^4 / (sinh^2 x (b^2 + d^2)),
 *
 * where phi is the unwrapped polar angle of (d, b) with phi(0) = 0.
 */
#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include "cubicwave/ode.hpp"

namespace cubicwave {

/// Point on a c-orbit.
struct OrbitState {
  double x = 0.0;
  double b = 0.0;
  double d = 0.0;
  double phi = 0.0;

  [[nodiscard]] double f() const noexcept { return b + x * d; }
  /// Lyapunov function 2 d^2 + f^4 / sinh^2 x (limit 2 d^2 at x = 0).
  [[nodiscard]] double lyapunov() const;
};

struct ProfileSample {
  double x = 0.0;
  double f = 0.0;
  double b = 0.0;
  double d = 0.0;
  double phi = 0.0;
  double G = 0.0;
};

struct InteriorOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  /// Series start radius; zero selects 1e-3 / max(1, |c|).
  double x0 = 0.0;
  /// The tail bound is only trusted beyond this radius.
  double x_min = 8.0;
  /// Hard cap on the truncation point.
  double x_cap = 60.0;
};

/// Result of integrating one c-orbit to its adaptive truncation point.
struct COrbitSummary {
  double c = 0.0;
  double B = 0.0;    ///< limit of b (tail corrected)
  double D = 0.0;    ///< limit of d (tail corrected)
  double Phi = 0.0;  ///< total phase (tail corrected)
  double x0 = 0.0;
  double x_max = 0.0;
  /// Estimated magnitude of the neglected tail (after correction).
  double tail_bound = 0.0;
  InteriorOptions options;
  /// Integrator nodes, preceded by the origin.
  std::vector<ProfileSample> profile;

  /// State at any x >= 0: origin series below x0, dense output up to x_max,
  /// leading-order exponential tail beyond.
  [[nodiscard]] OrbitState state(double x) const;
  [[nodiscard]] double f(double x) const { return state(x).f(); }
  /// f'(x) = d(x).
  [[nodiscard]] double df(double x) const { return state(x).d; }

  /// +1 or -1; negative c are evaluated on the mirrored orbit.
  double sign = 1.0;
  std::shared_ptr<const ode::Trajectory> trajectory;
};

/// (b, d, phi) at x0 from the origin expansion through O(x^7).
///
/// Requires c != 0 and 0 < x0 <= 0.01 / max(1, |c|); also throws
/// Error(series_domain_error) when the estimated truncation error of the
/// series exceeds abs_tol.
[[nodiscard]] OrbitState series_start(double c, double x0, double abs_tol = 1e-14);

/// Coefficients of the odd series f = c x + a3 x^3 + a5 x^5 + a7 x^7.
struct OriginSeries {
  double a1, a3, a5, a7;
};
[[nodiscard]] OriginSeries origin_series(double c);

/// Integrates the c-orbit until the remaining tail of b, d and phi is below
/// `tol`, then applies the leading e^{-2x} correction.
[[nodiscard]] COrbitSummary evolve_c_orbit(double c, double tol = 1e-12,
                                           const InteriorOptions& options = {});

/// E = 1/2 int_0^inf (f'^2 - f^4 / (2 sinh^2 x)) dx.
///
/// Throws Error(infinite_energy) when |D| exceeds `regularity_tol`.
[[nodiscard]] double static_energy(const COrbitSummary& summary, double regularity_tol = 1e-6);

struct LimitSample {
  double y = 0.0;
  double F = 0.0;
};

/// Sentinel for the c -> infinity limiting problem F'' + F^3 / y^2 = 0.
inline constexpr double limit_c = std::numeric_limits<double>::infinity();

/// F(y) = f(y / c) on `samples` uniform points of [0, y_max].
[[nodiscard]] std::vector<LimitSample> rescaled_limit_profile(double c, double y_max,
                                                              std::size_t samples = 601,
                                                              double rel_tol = 1e-12);

}  // namespace cubicwave
