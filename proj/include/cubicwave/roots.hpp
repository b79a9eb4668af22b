/**
 * @file roots.hpp
 * @brief Bracketing scalar root finders.
 */
#pragma once

#include <cstddef>
#include <functional>

namespace cubicwave {

struct RootResult {
  double root = 0.0;
  double lower = 0.0;  ///< final bracket
  double upper = 0.0;
  std::size_t evaluations = 0;
};

/// Root of f in [a, b] with f(a), f(b) of opposite sign (TOMS 748).
/// `fa`, `fb` are the already known endpoint values.
/// Stops when the bracket width is below rel_tol * |x| + abs_tol.
/// Throws Error(bracket_failure) when the endpoint values share a sign.
[[nodiscard]] RootResult find_root(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fb, double rel_tol, double abs_tol = 0.0,
                                   std::size_t max_evaluations = 200);

/// Plain bisection with the same contract; used as an independent check.
[[nodiscard]] RootResult bisect(const std::function<double(double)>& f, double a, double b,
                                double fa, double fb, double rel_tol, double abs_tol = 0.0,
                                std::size_t max_evaluations = 400);

}  // namespace cubicwave
