/**
 * @file asymptotics.hpp
 * @brief Matched-asymptotics constants and the large-n laws for c_n and b_n.
 *
 * Writing f(x) = a(x) v(t(x)) with a = sinh^{1/3} x and t' = sinh^{-2/3} x
 * turns the profile equation into v'' + v^3 + h v = 0 on 0 < t < T. The
 * inner (t -> 0) and outer (t -> T) limits of that equation approach the
 * cubic oscillator v'' + v^3 = 0 with amplitudes A0, A1 and phases theta0,
 * theta1 relative to the reference solution F1 (F1(0) = 0, F1'(0) > 0,
 * unit amplitude, period tau).
 */
#pragma once

#include "cubicwave/interior.hpp"

namespace cubicwave {

struct AsymptoticConstants {
  double T = 0.0;    ///< length of the t interval, 1/2 B(1/6, 1/3)
  double tau = 0.0;  ///< period of the unit-amplitude cubic oscillator, sqrt2 B(1/4, 1/2)
  double A0 = 0.0;
  double theta0 = 0.0;
  double A1 = 0.0;
  double theta1 = 0.0;

  // Independent routes, kept for the audit trail.
  double T_closed = 0.0;
  double T_quadrature = 0.0;
  double tau_closed = 0.0;
  double tau_quadrature = 0.0;
  double A0_energy = 0.0;  ///< (4e)^{1/4} at the end of the inner run
  double A1_energy = 0.0;
  double A0_drift = 0.0;  ///< relative change of (4e)^{1/4} over the last period
  double A1_drift = 0.0;
  double t_end = 0.0;
  int zeros_fitted0 = 0;
  int zeros_fitted1 = 0;
};

/// 1/2 Gamma(1/6) Gamma(1/3) / Gamma(1/2).
[[nodiscard]] double interval_length_closed_form();
/// int_0^inf sinh^{-2/3}.
[[nodiscard]] double interval_length_quadrature(double tol = 1e-12);
/// sqrt2 Gamma(1/4) Gamma(1/2) / Gamma(3/4).
[[nodiscard]] double oscillator_period_closed_form();
/// 4 sqrt2 int_0^1 (1 - z^4)^{-1/2} dz, evaluated as 2 sqrt2 int_0^{pi/2} sin^{-1/2}.
[[nodiscard]] double oscillator_period_quadrature(double tol = 1e-12);

struct OscillatorFit {
  double amplitude = 0.0;  ///< slope of the zero-phase fit
  double phase = 0.0;      ///< reduced into (-tau/2, tau/2]
  double amplitude_energy = 0.0;
  double drift = 0.0;
  int zeros = 0;
};

enum class LimitProblem {
  inner,  ///< v'' + v^3 - 2 v / t^2 = 0, v ~ t^2 / 9
  outer,  ///< v'' + v^3 + v / (4 t^2) = 0, v ~ sqrt(2/3) t^{1/2}
};

/// Integrates one limiting problem to t_end and extracts amplitude and phase
/// by fitting A t_z + theta + C / t_z + D / t_z^2 = m tau over the upward
/// zeros t_z > t_fit. Throws Error(nonconvergence) when the energy amplitude
/// drifts by more than `tol` over the final period.
[[nodiscard]] OscillatorFit fit_limit_problem(LimitProblem which, double tol = 1e-7,
                                              double t_end = 3000.0, double t_fit = 100.0);

/// All six constants; each quantity computed along two routes.
[[nodiscard]] AsymptoticConstants compute_constants(double tol = 1e-7);

/// Process-wide cached constants at default settings (thread-safe initialization).
[[nodiscard]] const AsymptoticConstants& default_constants();

struct Prediction {
  double c = 0.0;
  double b = 0.0;  ///< signed, (-1)^n
};

/// Large-n laws: c = (((n+1) tau/2 - (theta0 + theta1)) / (A0 T))^3, b^2 = (A0/A1)^3 c.
[[nodiscard]] Prediction predict(int n, const AsymptoticConstants& k);

/// The literal numbers of the c_n law: tau/2, -(theta0 + theta1), A0 T and (A0/A1)^3.
struct LawCoefficients {
  double half_tau = 0.0;
  double minus_theta_sum = 0.0;
  double A0T = 0.0;
  double b2_over_c = 0.0;
};
[[nodiscard]] LawCoefficients law_coefficients(const AsymptoticConstants& k);

/// Modulation frame a(x) = sinh^{1/3} x.
[[nodiscard]] double modulation_a(double x);
/// t(x) = int_0^x sinh^{-2/3}.
[[nodiscard]] double modulation_t(double x);
/// h(x) = (3 sinh^2 x - 2 cosh^2 x) / (9 sinh^{2/3} x).
[[nodiscard]] double modulation_h(double x);

struct ModulationReport {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double step = 0.0;
  /// sup |v'' + v^3 + h v| over [t_lo, t_hi]
  double residual = 0.0;
  /// residual relative to sup |v|^3
  double relative_residual = 0.0;
  /// mean of (4e)^{1/4}, e = v'^2/2 + v^4/4, over [T/4, T/2] and [T/2, 3T/4]
  double amplitude_inner = 0.0;
  double amplitude_outer = 0.0;
  double predicted_inner = 0.0;  ///< c^{1/3} A0
  double predicted_outer = 0.0;  ///< |b|^{2/3} A1
};

/// Decomposes a profile as f = a v(t) and measures how well v satisfies
/// v'' + v^3 + h v = 0 (second derivative by 6th-order central differences).
[[nodiscard]] ModulationReport modulation_decompose(const COrbitSummary& orbit,
                                                    const AsymptoticConstants& k,
                                                    double edge = 0.5, double step = 5e-3);

}  // namespace cubicwave
