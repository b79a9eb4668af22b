/**
 * @file quadrature.hpp
 * @brief Adaptive quadrature with endpoint-singularity-aware rules.
 */
#pragma once

#include <functional>

namespace cubicwave {

using ScalarFn = std::function<double(double)>;

/// Integral of f over (a, b); b may be +infinity.
///
/// Finite intervals use double-exponential (tanh-sinh) subdivision, which
/// tolerates integrable power-law singularities at either end. Half-infinite
/// intervals are split at a + 1 and the tail handled by an exp-sinh rule.
/// Throws Error(quadrature_failure) when the error estimate exceeds `tol`.
[[nodiscard]] double quadrature(const ScalarFn& f, double a, double b, double tol = 1e-10);

/// Smooth integrand on a finite interval: adaptive Gauss-Kronrod (7-15).
/// `tol` is relative to max(1, |result|) and clamped below at 1e-13.
[[nodiscard]] double quadrature_smooth(const ScalarFn& f, double a, double b, double tol = 1e-12);

}  // namespace cubicwave
