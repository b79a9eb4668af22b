#include "cubicwave/asymptotics.hpp"

#include <lapacke.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "cubicwave/error.hpp"
#include "cubicwave/quadrature.hpp"

namespace cubicwave {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// sinh(x)^p for large x without overflow.
double sinh_pow(double x, double p) {
  if (x > 20.0) return std::exp(p * (x - std::numbers::ln2)) * std::pow(1.0 - std::exp(-2 * x), p);
  return std::pow(std::sinh(x), p);
}

struct SeriesStart {
  double v = 0.0;
  double dv = 0.0;
};

/// v = sum_k a_k t^{p0 + step k} with a0 = lead; the linear operator acting on
/// t^p contributes `diag(k)` and the cubic term drives the recursion.
template <class Diag>
SeriesStart power_series_start(double lead, double p0, double step, Diag diag, double t0,
                               int terms = 6) {
  std::vector<double> a{lead};
  for (int k = 1; k < terms; ++k) {
    double s = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; i + j <= k - 1; ++j) s += a[i] * a[j] * a[k - 1 - i - j];
    a.push_back(-s / diag(k));
  }
  SeriesStart out;
  for (int k = 0; k < terms; ++k) {
    const double p = p0 + step * k;
    out.v += a[k] * std::pow(t0, p);
    out.dv += a[k] * p * std::pow(t0, p - 1);
  }
  return out;
}

/// Least-squares solution of M x = rhs (column-major M, rows x cols).
std::vector<double> least_squares(std::vector<double> m, std::vector<double> rhs, int rows,
                                  int cols) {
  const lapack_int info = LAPACKE_dgels(LAPACK_COL_MAJOR, 'N', rows, cols, 1, m.data(), rows,
                                        rhs.data(), rows);
  if (info != 0)
    throw Error(ErrorKind::nonconvergence, "least-squares phase fit failed (dgels info " +
                                               std::to_string(info) + ")");
  rhs.resize(static_cast<std::size_t>(cols));
  return rhs;
}

}  // namespace

double interval_length_closed_form() {
  return 0.5 * std::tgamma(1.0 / 6) * std::tgamma(1.0 / 3) / std::tgamma(0.5);
}

double interval_length_quadrature(double tol) {
  return quadrature([](double x) { return sinh_pow(x, -2.0 / 3.0); }, 0.0, inf, tol);
}

double oscillator_period_closed_form() {
  return std::numbers::sqrt2 * std::tgamma(0.25) * std::tgamma(0.5) / std::tgamma(0.75);
}

double oscillator_period_quadrature(double tol) {
  // z^2 = sin(s) moves the singularity to s = 0, where it is well resolved.
  const double integral =
      quadrature([](double s) { return 1.0 / std::sqrt(std::sin(s)); }, 0.0, std::numbers::pi / 2,
                 tol / 4);
  return 2.0 * std::numbers::sqrt2 * integral;
}

OscillatorFit fit_limit_problem(LimitProblem which, double tol, double t_end, double t_fit) {
  const double t0 = 1e-4;
  SeriesStart s0;
  double lin_coeff = 0.0;  // linear term lin_coeff / t^2
  if (which == LimitProblem::inner) {
    lin_coeff = -2.0;
    s0 = power_series_start(1.0 / 9.0, 2.0, 6.0,
                            [](int k) {
                              const double m = 2.0 + 6.0 * k;
                              return m * (m - 1.0) - 2.0;
                            },
                            t0);
  } else {
    lin_coeff = 0.25;
    s0 = power_series_start(std::sqrt(2.0 / 3.0), 0.5, 3.0,
                            [](int k) { return 9.0 * k * k; }, t0);
  }
  ode::Problem p{[lin_coeff](double t, std::span<const double> y, std::span<double> dy) {
                   dy[0] = y[1];
                   dy[1] = -y[0] * y[0] * y[0] - lin_coeff * y[0] / (t * t);
                 },
                 t0, t_end, {s0.v, s0.dv}};
  ode::Options o;
  o.rel_tol = 1e-13;
  o.abs_tol = 1e-15;
  o.initial_step = 1e-6;
  const auto traj = ode::integrate(p, o);
  if (traj.termination != ode::Termination::reached_end)
    throw Error(ErrorKind::integration_failure, "limiting oscillator did not reach t_end");

  const double tau = oscillator_period_closed_form();
  auto amplitude_at = [&](double t) {
    const auto y = traj(t);
    const double e = 0.5 * y[1] * y[1] + 0.25 * y[0] * y[0] * y[0] * y[0] +
                     0.5 * lin_coeff * y[0] * y[0] / (t * t);
    return std::pow(4.0 * e, 0.25);
  };
  OscillatorFit fit;
  fit.amplitude_energy = amplitude_at(t_end);
  const double earlier = amplitude_at(t_end - tau / fit.amplitude_energy);
  fit.drift = std::abs(fit.amplitude_energy - earlier) / fit.amplitude_energy;
  if (!(fit.drift <= tol)) {
    std::ostringstream msg;
    msg << "oscillator amplitude drifts by " << fit.drift << " over the last period (tolerance "
        << tol << ")";
    throw Error(ErrorKind::nonconvergence, msg.str());
  }

  std::vector<double> zeros = ode::find_crossings(
      traj, [](double, std::span<const double> y) { return y[0]; }, ode::Crossing::up, 1e-14);
  std::erase_if(zeros, [t_fit](double t) { return t <= t_fit; });
  const int rows = static_cast<int>(zeros.size());
  if (rows < 8) throw Error(ErrorKind::nonconvergence, "too few zeros for the phase fit");
  std::vector<double> m(static_cast<std::size_t>(rows) * 4), rhs(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    const double t = zeros[static_cast<std::size_t>(i)];
    m[static_cast<std::size_t>(i)] = t;
    m[static_cast<std::size_t>(rows + i)] = 1.0;
    m[static_cast<std::size_t>(2 * rows + i)] = 1.0 / t;
    m[static_cast<std::size_t>(3 * rows + i)] = 1.0 / (t * t);
    rhs[static_cast<std::size_t>(i)] = i * tau;
  }
  const auto x = least_squares(std::move(m), std::move(rhs), rows, 4);
  fit.amplitude = x[0];
  // Upward zeros of F1 sit at multiples of tau, so theta is defined modulo tau.
  double theta = std::fmod(x[1] + 0.5 * tau, tau);
  if (theta <= 0) theta += tau;
  fit.phase = theta - 0.5 * tau;
  fit.zeros = rows;
  return fit;
}

AsymptoticConstants compute_constants(double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::invalid_input, "tolerance must be positive");
  AsymptoticConstants k;
  k.T_closed = interval_length_closed_form();
  k.T_quadrature = interval_length_quadrature(1e-12);
  k.tau_closed = oscillator_period_closed_form();
  k.tau_quadrature = oscillator_period_quadrature(1e-12);
  k.T = k.T_closed;
  k.tau = k.tau_closed;
  const auto inner = fit_limit_problem(LimitProblem::inner, tol);
  const auto outer = fit_limit_problem(LimitProblem::outer, tol);
  k.A0 = inner.amplitude;
  k.theta0 = inner.phase;
  k.A0_energy = inner.amplitude_energy;
  k.A0_drift = inner.drift;
  k.zeros_fitted0 = inner.zeros;
  k.A1 = outer.amplitude;
  k.theta1 = outer.phase;
  k.A1_energy = outer.amplitude_energy;
  k.A1_drift = outer.drift;
  k.zeros_fitted1 = outer.zeros;
  k.t_end = 3000.0;
  return k;
}

const AsymptoticConstants& default_constants() {
  static const AsymptoticConstants k = compute_constants();
  return k;
}

Prediction predict(int n, const AsymptoticConstants& k) {
  if (n < 0) throw Error(ErrorKind::invalid_input, "n must be non-negative");
  const double base = ((n + 1) * k.tau / 2 - (k.theta0 + k.theta1)) / (k.A0 * k.T);
  Prediction p;
  p.c = base * base * base;
  const double ratio = k.A0 / k.A1;
  p.b = (n % 2 == 0 ? 1.0 : -1.0) * std::sqrt(ratio * ratio * ratio * p.c);
  return p;
}

LawCoefficients law_coefficients(const AsymptoticConstants& k) {
  const double r = k.A0 / k.A1;
  return {k.tau / 2, -(k.theta0 + k.theta1), k.A0 * k.T, r * r * r};
}

double modulation_a(double x) { return sinh_pow(x, 1.0 / 3.0); }

double modulation_t(double x) {
  if (x < 0) throw Error(ErrorKind::invalid_input, "t(x) needs x >= 0");
  // Series through x^{13/3} on [0, 1e-3], smooth quadrature beyond.
  const double xs = std::min(x, 1e-3);
  const double r = std::cbrt(xs);
  const double head = 3 * r - std::pow(r, 7) / 21 + 4 * std::pow(r, 13) / 1755;
  if (x <= xs) return head;
  return head + quadrature_smooth([](double s) { return sinh_pow(s, -2.0 / 3.0); }, xs, x, 1e-13);
}

double modulation_h(double x) {
  if (x > 20.0) {
    // (3 sinh^2 - 2 cosh^2) / sinh^2 -> 1 - 2/sinh^2
    const double w = 1.0 / (sinh_pow(x, 1.0) * sinh_pow(x, 1.0));
    return (1.0 - 2.0 * w) * sinh_pow(x, 4.0 / 3.0) / 9.0;
  }
  const double s = std::sinh(x), c = std::cosh(x);
  return (3 * s * s - 2 * c * c) / (9 * std::pow(s, 2.0 / 3.0));
}

ModulationReport modulation_decompose(const COrbitSummary& orbit, const AsymptoticConstants& k,
                                      double edge, double step) {
  const double T = k.T;
  if (!(edge > 3 * step) || 2 * edge >= T)
    throw Error(ErrorKind::invalid_input, "modulation window must be non-empty");
  // x(t) from dx/dt = sinh^{2/3} x, started on t = 3 x^{1/3} near the origin.
  const double t0 = 1e-3;
  const double x0 = std::pow(t0 / 3.0, 3);
  const double t_stop = T - edge + 4 * step;
  ode::Problem p{[](double, std::span<const double> y, std::span<double> dy) {
                   dy[0] = sinh_pow(y[0], 2.0 / 3.0);
                 },
                 t0, t_stop, {x0}};
  const auto map = ode::integrate(p, 1e-12, 1e-15);
  if (map.termination != ode::Termination::reached_end)
    throw Error(ErrorKind::integration_failure, "t -> x map did not reach the window end");

  auto v_at = [&](double t) {
    const double x = map.component(t, 0);
    return orbit.f(x) / modulation_a(x);
  };
  auto vdot_at = [&](double t) {
    const double x = map.component(t, 0);
    const OrbitState st = orbit.state(x);
    const double a = modulation_a(x);
    const double dadx = std::cosh(x) * sinh_pow(x, -2.0 / 3.0) / 3.0;
    const double dvdx = (st.d * a - st.f() * dadx) / (a * a);
    return dvdx * sinh_pow(x, 2.0 / 3.0);
  };

  ModulationReport r;
  r.t_lo = edge;
  r.t_hi = T - edge;
  r.step = step;
  const double w1 = 3.0 / 2, w2 = -3.0 / 20, w3 = 1.0 / 90, w0 = -49.0 / 18;
  double vmax = 0.0;
  for (double t = r.t_lo; t <= r.t_hi + 1e-12; t += step) {
    const double v = v_at(t);
    const double vdd = (w0 * v + w1 * (v_at(t + step) + v_at(t - step)) +
                        w2 * (v_at(t + 2 * step) + v_at(t - 2 * step)) +
                        w3 * (v_at(t + 3 * step) + v_at(t - 3 * step))) /
                       (step * step);
    const double h = modulation_h(map.component(t, 0));
    r.residual = std::max(r.residual, std::abs(vdd + v * v * v + h * v));
    vmax = std::max(vmax, std::abs(v));
  }
  r.relative_residual = vmax > 0 ? r.residual / (vmax * vmax * vmax) : r.residual;

  auto mean_amplitude = [&](double a, double b) {
    double sum = 0.0;
    int count = 0;
    for (double t = a; t <= b; t += step) {
      const double v = v_at(t), vd = vdot_at(t);
      sum += std::pow(2.0 * vd * vd + v * v * v * v, 0.25);
      ++count;
    }
    return sum / count;
  };
  r.amplitude_inner = mean_amplitude(T / 4, T / 2);
  r.amplitude_outer = mean_amplitude(T / 2, std::min(3 * T / 4, r.t_hi));
  r.predicted_inner = std::cbrt(std::abs(orbit.c)) * k.A0;
  r.predicted_outer = std::pow(std::abs(orbit.B), 2.0 / 3.0) * k.A1;
  return r;
}

}  // namespace cubicwave
