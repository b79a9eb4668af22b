/**
 * @file ode.hpp
 * @brief Adaptive explicit Runge-Kutta integration (Dormand-Prince 8(5,3)) with
 *        dense output, event location and blowup detection.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace cubicwave::ode {

using State = std::vector<double>;

/// dydx = rhs(x, y). Must be deterministic and free of side effects.
using RhsFn = std::function<void(double x, std::span<const double> y, std::span<double> dydx)>;

/// Scalar functional of (x, y) used for event location.
using Functional = std::function<double(double x, std::span<const double> y)>;

struct Problem {
  RhsFn rhs;
  double start = 0.0;
  /// May lie beyond a blowup point; integration stops there.
  double end = 0.0;
  State initial_state;
};

enum class EventKind {
  sign_change,     ///< zero of `functional`
  norm_threshold,  ///< max-norm of the state crosses `threshold`
  step_underflow,  ///< accepted step below `threshold` * max(1, |x|)
};

enum class Crossing { any, up, down };

struct EventSpec {
  EventKind kind = EventKind::sign_change;
  Functional functional;
  Crossing direction = Crossing::any;
  double threshold = 0.0;
};

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// Zero selects an automatic initial step.
  double initial_step = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
  /// Blowup is declared when the max-norm of an accepted state exceeds this.
  double blowup_norm = 1e8;
  /// Blowup is declared when |h| < min_step_factor * max(1, |x|).
  double min_step_factor = 1e-14;
  std::size_t max_steps = 5'000'000;
  /// Event localization width, relative to max(1, |x|).
  double event_tol = 1e-12;
};

enum class Termination { reached_end, event, blowup };

[[nodiscard]] const char* to_string(Termination t);

/// Accepted nodes plus the piecewise degree-7 interpolant between them.
class Trajectory {
 public:
  [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return xs_.size(); }
  [[nodiscard]] std::span<const double> nodes() const noexcept { return xs_; }
  [[nodiscard]] std::span<const double> state_at(std::size_t node) const {
    return {ys_.data() + node * dim_, dim_};
  }
  [[nodiscard]] double front() const { return xs_.front(); }
  [[nodiscard]] double back() const { return xs_.back(); }
  [[nodiscard]] State back_state() const;

  /// True when x lies within the covered interval.
  [[nodiscard]] bool covers(double x) const noexcept;
  /// Dense evaluation; throws invalid_input outside the covered range.
  [[nodiscard]] State operator()(double x) const;
  void evaluate(double x, std::span<double> out) const;
  [[nodiscard]] double component(double x, std::size_t i) const;

  Termination termination = Termination::reached_end;
  /// Event location, blowup node, or the end point.
  double termination_location = 0.0;
  /// Index into the event list for Termination::event, -1 otherwise.
  int event_index = -1;

  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;

 private:
  friend class Integrator;
  std::size_t segment_for(double x) const;

  std::size_t dim_ = 0;
  double direction_ = 1.0;
  std::vector<double> xs_;
  std::vector<double> ys_;
  // Per step: start point, step size and 8 * dim interpolation coefficients.
  std::vector<double> seg_x_;
  std::vector<double> seg_h_;
  std::vector<double> coeffs_;
};

/// Integrates `problem` until its end, the first triggered event, or blowup.
///
/// Throws Error(invalid_input) for non-positive tolerances or a zero-length
/// domain, and IntegrationFailure when the right-hand side returns a
/// non-finite value at a finite, sub-threshold state.
[[nodiscard]] Trajectory integrate(const Problem& problem, const Options& options = {},
                                   std::span<const EventSpec> events = {});

/// Every zero of `functional` in the requested direction along the covered
/// range, located by bisection on the dense output to `tol` * max(1, |x|).
[[nodiscard]] std::vector<double> find_crossings(const Trajectory& trajectory,
                                                 const Functional& functional,
                                                 Crossing direction = Crossing::any,
                                                 double tol = 1e-12);

/// Convenience overload with explicit tolerances.
[[nodiscard]] Trajectory integrate(const Problem& problem, double rel_tol, double abs_tol,
                                   std::span<const EventSpec> events = {});

}  // namespace cubicwave::ode
