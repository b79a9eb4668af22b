#include "cubicwave/interior.hpp"

#include <cmath>
#include <sstream>

#include "cubicwave/error.hpp"
#include "cubicwave/quadrature.hpp"

namespace cubicwave {

namespace {

/// 1 / sinh^2 x without overflow for large x.
double inv_sinh2(double x) {
  if (x > 1.0) {
    const double e = std::exp(-2.0 * x);
    return 4.0 * e / ((1.0 - e) * (1.0 - e));
  }
  const double s = std::sinh(x);
  return 1.0 / (s * s);
}

void interior_rhs(double x, std::span<const double> y, std::span<double> dy) {
  const double b = y[0], d = y[1];
  const double f = b + x * d;
  const double w = inv_sinh2(x);
  const double q = f * f * f * w;
  dy[0] = x * q;
  dy[1] = -q;
  const double r2 = b * b + d * d;
  dy[2] = r2 > 0.0 ? f * q / r2 : 0.0;
}

/// Remaining variation of b, d, phi beyond x, from the exponential decay of
/// the forcing (|f| can grow at most linearly through d).
double tail_bound(double x, std::span<const double> y) {
  const double b = y[0], d = y[1];
  const double m = std::abs(b + x * d) + std::abs(d);
  const double e = std::exp(-2.0 * x);
  const double r2 = b * b + d * d;
  const double bd = (2.0 * x + 2.0) * m * m * m * e;
  const double ph = r2 > 0.0 ? 2.0 * m * m * m * m * e / r2 : 0.0;
  return std::max(bd, ph);
}

OrbitState series_state(double c, double x) {
  const OriginSeries s = origin_series(std::abs(c));
  const double x2 = x * x;
  const double f = x * (s.a1 + x2 * (s.a3 + x2 * (s.a5 + x2 * s.a7)));
  const double d = s.a1 + x2 * (3 * s.a3 + x2 * (5 * s.a5 + x2 * 7 * s.a7));
  const double b = f - x * d;
  const double sg = c < 0 ? -1.0 : 1.0;
  return {x, sg * b, sg * d, std::atan2(b, d)};
}

}  // namespace

double OrbitState::lyapunov() const {
  const double fv = f();
  if (x < 1e-6) {
    // f^2 / sinh x -> 0 like c^2 x.
    const double r = x > 0 ? fv / std::sinh(x) : d;
    return 2 * d * d + r * r * fv * fv;
  }
  return 2 * d * d + fv * fv * fv * fv * inv_sinh2(x);
}

OriginSeries origin_series(double c) {
  const double c3 = c * c * c, c5 = c3 * c * c, c7 = c5 * c * c;
  return {c, -c3 / 6.0, c5 / 40.0 + c3 / 60.0,
          -(19.0 * c7 / 5040.0 + 13.0 * c5 / 2520.0 + c3 / 630.0)};
}

OrbitState series_start(double c, double x0, double abs_tol) {
  if (c == 0.0 || !std::isfinite(c))
    throw Error(ErrorKind::invalid_input, "series start needs a finite, nonzero c");
  const double ac = std::abs(c);
  const double limit = 0.01 / std::max(1.0, ac);
  if (!(x0 > 0.0) || x0 > limit) {
    std::ostringstream msg;
    msg << "x0=" << x0 << " outside (0, " << limit << "] for c=" << c;
    throw Error(ErrorKind::series_domain_error, msg.str());
  }
  // First omitted term is O(x^9): bounded by (c x)^9 for large c, c^3 x^9 for small c.
  const double est = 10.0 * std::pow(ac * x0, 9) + ac * ac * ac * std::pow(x0, 9);
  if (est > abs_tol) {
    std::ostringstream msg;
    msg << "series truncation error " << est << " exceeds " << abs_tol << " at x0=" << x0;
    throw Error(ErrorKind::series_domain_error, msg.str());
  }
  return series_state(c, x0);
}

OrbitState COrbitSummary::state(double x) const {
  if (x < 0) throw Error(ErrorKind::invalid_input, "orbit state requested at negative x");
  if (x <= x0) return series_state(c, x);
  if (x <= x_max) {
    const auto y = (*trajectory)(x);
    return {x, sign * y[0], sign * y[1], y[2]};
  }
  const OrbitState end = state(x_max);
  const double F = end.f();
  const double e = std::exp(-2.0 * x);
  const double b = B - F * F * F * (2.0 * x + 1.0) * e;
  const double d = D + 2.0 * F * F * F * e;
  const double r2 = B * B + D * D;
  const double phi = r2 > 0 ? Phi - 2.0 * F * F * F * F * e / r2 : Phi;
  return {x, b, d, phi};
}

COrbitSummary evolve_c_orbit(double c, double tol, const InteriorOptions& options) {
  if (c == 0.0 || !std::isfinite(c))
    throw Error(ErrorKind::invalid_input, "c-orbit needs a finite, nonzero c");
  if (!(tol > 0.0)) throw Error(ErrorKind::invalid_input, "tolerance must be positive");
  const double ac = std::abs(c);
  COrbitSummary out;
  out.c = c;
  out.sign = c < 0 ? -1.0 : 1.0;
  out.options = options;
  out.x0 = options.x0 > 0 ? options.x0 : 1e-3 / std::max(1.0, ac);

  const OrbitState s0 = series_start(ac, out.x0, options.abs_tol);
  ode::Problem problem{interior_rhs, out.x0, options.x_cap, {s0.b, s0.d, s0.phi}};
  ode::Options o;
  o.rel_tol = options.rel_tol;
  o.abs_tol = options.abs_tol;
  o.initial_step = 0.1 * out.x0;
  const double x_min = options.x_min;
  const std::vector<ode::EventSpec> events = {
      {ode::EventKind::sign_change,
       [x_min, tol](double x, std::span<const double> y) {
         if (x < x_min) return 1.0;
         return std::log(tail_bound(x, y)) - std::log(tol);
       },
       ode::Crossing::down, 0.0}};
  auto traj = std::make_shared<ode::Trajectory>(ode::integrate(problem, o, events));
  if (traj->termination == ode::Termination::blowup) {
    std::ostringstream msg;
    msg << "c-orbit with c=" << c << " blew up at x=" << traj->termination_location;
    throw Error(ErrorKind::integration_failure, msg.str());
  }

  const double X = traj->back();
  const ode::State yX = traj->back_state();
  const double F = yX[0] + X * yX[1];
  const double e = std::exp(-2.0 * X);
  const double dB = F * F * F * (2.0 * X + 1.0) * e;
  const double dD = -2.0 * F * F * F * e;
  const double r2 = yX[0] * yX[0] + yX[1] * yX[1];
  const double dPhi = r2 > 0 ? 2.0 * F * F * F * F * e / r2 : 0.0;
  out.x_max = X;
  out.B = out.sign * (yX[0] + dB);
  out.D = out.sign * (yX[1] + dD);
  out.Phi = yX[2] + dPhi;
  out.tail_bound =
      std::max({std::abs(dB), std::abs(dD), dPhi}) * (3.0 * F * F + 4.0) * e +
      (traj->termination == ode::Termination::event ? 0.0 : tail_bound(X, yX));

  out.profile.reserve(traj->size() + 1);
  out.profile.push_back({0.0, 0.0, 0.0, c, 0.0, 2 * c * c});
  for (std::size_t i = 0; i < traj->size(); ++i) {
    const auto y = traj->state_at(i);
    const OrbitState st{traj->nodes()[i], out.sign * y[0], out.sign * y[1], y[2]};
    out.profile.push_back({st.x, st.f(), st.b, st.d, st.phi, st.lyapunov()});
  }
  out.trajectory = std::move(traj);
  return out;
}

double static_energy(const COrbitSummary& s, double regularity_tol) {
  if (!(std::abs(s.D) <= regularity_tol)) {
    std::ostringstream msg;
    msg << "orbit with c=" << s.c << " has D=" << s.D << " (tolerance " << regularity_tol
        << "); the energy diverges";
    throw Error(ErrorKind::infinite_energy, msg.str());
  }
  auto density = [&s](double x) {
    const OrbitState st = s.state(x);
    const double f = st.f();
    if (x < 1.0) {
      const double q = x > 0 ? f * f / std::sinh(x) : 0.0;
      return st.d * st.d - 0.5 * q * q;
    }
    return st.d * st.d - 0.5 * f * f * f * f * inv_sinh2(x);
  };
  double sum = quadrature_smooth(density, 0.0, s.x0, 1e-12);
  const auto nodes = s.trajectory->nodes();
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    sum += quadrature_smooth(density, nodes[i], nodes[i + 1], 1e-12);
  const double F = s.f(s.x_max);
  const double e = std::exp(-2.0 * s.x_max);
  const double tail = 0.5 * std::pow(F, 6) * e * e - 0.5 * std::pow(F, 4) * e;
  return 0.5 * sum + tail;
}

std::vector<LimitSample> rescaled_limit_profile(double c, double y_max, std::size_t samples,
                                                double rel_tol) {
  if (!(y_max > 0.0) || samples < 2)
    throw Error(ErrorKind::invalid_input, "rescaled profile needs y_max > 0 and >= 2 samples");
  std::vector<LimitSample> out(samples);
  const double dy = y_max / static_cast<double>(samples - 1);
  if (std::isinf(c)) {
    // F'' + F^3 / y^2 = 0, F = y - y^3/6 + y^5/40 - 19 y^7/5040 + ...
    const double y0 = 1e-3;
    const double y2 = y0 * y0;
    const double F0 = y0 * (1 + y2 * (-1.0 / 6 + y2 * (1.0 / 40 - y2 * 19.0 / 5040)));
    const double dF0 = 1 + y2 * (-0.5 + y2 * (1.0 / 8 - y2 * 19.0 / 720));
    ode::Problem p{[](double y, std::span<const double> u, std::span<double> du) {
                     du[0] = u[1];
                     du[1] = -u[0] * u[0] * u[0] / (y * y);
                   },
                   y0, y_max, {F0, dF0}};
    const auto traj = ode::integrate(p, rel_tol, rel_tol * 1e-2);
    for (std::size_t i = 0; i < samples; ++i) {
      const double y = static_cast<double>(i) * dy;
      const double yy = std::min(y, y_max);
      if (yy < y0) {
        const double q = yy * yy;
        out[i] = {yy, yy * (1 + q * (-1.0 / 6 + q * (1.0 / 40 - q * 19.0 / 5040)))};
      } else {
        out[i] = {yy, traj.component(yy, 0)};
      }
    }
    return out;
  }
  if (!(c > 0.0)) throw Error(ErrorKind::invalid_input, "rescaled profile needs c > 0");
  InteriorOptions o;
  o.rel_tol = rel_tol;
  o.abs_tol = rel_tol * 1e-2;
  const COrbitSummary s = evolve_c_orbit(c, 1e-12, o);
  for (std::size_t i = 0; i < samples; ++i) {
    const double y = std::min(static_cast<double>(i) * dy, y_max);
    out[i] = {y, s.f(y / c)};
  }
  return out;
}

}  // namespace cubicwave
