#include "cubicwave/exterior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cubicwave/error.hpp"

namespace cubicwave {

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;

void rho_rhs(double rho, std::span<const double> y, std::span<double> dy) {
  const double U = y[0], V = y[1];
  dy[0] = V;
  dy[1] = -((2.0 / rho - 4.0 * rho) * V - 2.0 * U + U * U * U) / (1.0 - rho * rho);
}

MonitorSample sample(const RhoState& s) {
  return {s.rho, s.U, s.dU, monitor_h(s), monitor_g(s), monitor_n(s)};
}

[[noreturn]] void certificate_violation(const char* what, double a, double b, double value) {
  std::ostringstream msg;
  msg << what << " violated at (" << a << ", " << b << "): " << value;
  throw Error(ErrorKind::certificate_failure, msg.str());
}

}  // namespace

const char* to_string(Direction d) { return d == Direction::inward ? "inward" : "outward"; }
const char* to_string(Outcome o) { return o == Outcome::regular ? "regular" : "singular"; }

CenterSeries center_series(double c) {
  const double c2 = c * c;
  const double k = c * (c2 - 2.0);
  return {c, -k / 6.0, k * (c2 - 4.0) / 40.0, -k * (19.0 * c2 * c2 - 146.0 * c2 + 360.0) / 5040.0};
}

ConeSeries cone_series(double b) {
  const double b2 = b * b;
  const double k = b * (b2 - 2.0);
  return {b, k / 2.0, k * (3.0 * b2 - 8.0) / 16.0, k * (7.0 * b2 * b2 - 32.0 * b2 + 48.0) / 96.0,
          k * (87.0 * b2 * b2 * b2 - 578.0 * b2 * b2 + 1384.0 * b2 - 1536.0) / 3072.0};
}

RhoState rho_series_center(double c, double delta) {
  if (!(delta > 0.0 && delta <= 0.05))
    throw Error(ErrorKind::invalid_input, "center series needs delta in (0, 0.05]");
  const CenterSeries a = center_series(c);
  const double r2 = delta * delta;
  const double U = a.a0 + r2 * (a.a2 + r2 * (a.a4 + r2 * a.a6));
  const double dU = delta * (2.0 * a.a2 + r2 * (4.0 * a.a4 + r2 * 6.0 * a.a6));
  return {delta, U, dU};
}

RhoState rho_series_cone(double b, double delta, ConeSide side) {
  if (!(delta > 0.0 && delta <= 1e-2))
    throw Error(ErrorKind::invalid_input, "cone series needs delta in (0, 1e-2]");
  const ConeSeries p = cone_series(b);
  const double s = side == ConeSide::inner ? -delta : delta;
  const double U = p.p0 + s * (p.p1 + s * (p.p2 + s * (p.p3 + s * p.p4)));
  const double dU = p.p1 + s * (2.0 * p.p2 + s * (3.0 * p.p3 + s * 4.0 * p.p4));
  return {1.0 + s, U, dU};
}

double rho_equation_residual(const RhoState& s, double d2U) {
  const double r = s.rho;
  return (1.0 - r * r) * d2U + (2.0 / r - 4.0 * r) * s.dU - 2.0 * s.U + s.U * s.U * s.U;
}

double monitor_h(const RhoState& s) { return -s.dU / s.U; }

double monitor_g(const RhoState& s) {
  const double r = s.rho;
  return r * r * r * r * s.U * s.dU - r * r * r / 6.0 * (s.U * s.U - 2.0);
}

double monitor_n(const RhoState& s) {
  const double r = s.rho, U = s.U, V = s.dU;
  return (r - r * r * r) * V * V + (2.0 - 4.0 * r * r) * U * V - r * U * U * (2.0 - U * U);
}

double monitor_h_slope(const RhoState& s) {
  return monitor_n(s) / (s.rho * (1.0 - s.rho * s.rho) * s.U * s.U);
}

ExteriorReport continue_orbit(const RhoState& start, Direction direction, double rho_limit,
                              const ExteriorOptions& options) {
  if (!(start.rho > 0.0) || start.rho == 1.0)
    throw Error(ErrorKind::invalid_input, "orbit cannot start at a singular point of the equation");
  const bool outward = direction == Direction::outward;
  if (outward ? !(rho_limit > start.rho) : !(rho_limit < start.rho && rho_limit > 0.0))
    throw Error(ErrorKind::invalid_input, "rho_limit lies on the wrong side of the start");
  if ((start.rho < 1.0) != (rho_limit < 1.0))
    throw Error(ErrorKind::invalid_input, "an orbit cannot be continued through rho = 1");

  ode::Problem problem{rho_rhs, start.rho, rho_limit, {start.U, start.dU}};
  ode::Options o;
  o.rel_tol = options.rel_tol;
  o.abs_tol = options.abs_tol;
  o.blowup_norm = std::numeric_limits<double>::infinity();
  const double threshold = options.blowup_threshold;
  const std::vector<ode::EventSpec> events = {
      {ode::EventKind::sign_change,
       [threshold](double, std::span<const double> y) { return threshold - std::abs(y[0]); },
       ode::Crossing::down, 0.0}};
  const auto traj = ode::integrate(problem, o, events);

  ExteriorReport r;
  r.b = start.U;
  r.direction = direction;
  r.rho_end = traj.back();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto y = traj.state_at(i);
    r.monitors.push_back(sample({traj.nodes()[i], y[0], y[1]}));
  }
  if (traj.termination == ode::Termination::reached_end) {
    r.outcome = Outcome::regular;
    return r;
  }
  r.outcome = Outcome::singular;
  // Near the singularity U'' ~ U^3 / (rho^2 - 1), so U ~ sqrt(2 (rho^2 - 1)) / (rho_s - rho).
  const auto y = traj.back_state();
  const double rho = traj.back();
  r.rho_sing = rho + (outward ? 1.0 : -1.0) * std::sqrt(2.0 * std::abs(rho * rho - 1.0)) /
                         std::abs(y[0]);
  return r;
}

ExteriorReport b_orbit(double b, Direction direction, double rho_limit,
                       const ExteriorOptions& options) {
  const double ab = std::abs(b);
  const RhoState s = rho_series_cone(
      ab, options.delta, direction == Direction::outward ? ConeSide::outer : ConeSide::inner);
  ExteriorReport r = continue_orbit(s, direction, rho_limit, options);
  r.b = ab;
  r.flagged = direction == Direction::outward && ab > sqrt2 && r.outcome == Outcome::regular;
  return r;
}

RhoState bridge_state(const SelfSimilarSolution& solution, double rho) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw Error(ErrorKind::invalid_input, "bridge needs rho in [0, 1)");
  const COrbitSummary& orbit = solution.orbit;
  if (rho == 0.0) return {0.0, orbit.c, 0.0};
  const double x = std::atanh(rho);
  const OrbitState st = orbit.state(x);
  const double f = st.f();
  const double sh = std::sinh(x), ch = std::cosh(x);
  // dU/dx = f' coth x - f / sinh^2 x and drho/dx = 1 / cosh^2 x.
  const double dUdx = st.d * ch / sh - f / (sh * sh);
  return {rho, f * ch / sh, dUdx * ch * ch};
}

SingularityEstimate exterior_singularity(const SelfSimilarSolution& solution,
                                         const ExteriorOptions& options, double rho_limit) {
  const double b = std::abs(solution.b);
  if (solution.n < 1 || !(b > sqrt2)) {
    std::ostringstream msg;
    msg << "exterior singularity needs n >= 1 and |b| > sqrt2 (n=" << solution.n
        << ", b=" << solution.b << ")";
    throw Error(ErrorKind::precondition_violation, msg.str());
  }
  auto locate = [&](const ExteriorOptions& o) {
    ExteriorReport r = b_orbit(b, Direction::outward, rho_limit, o);
    if (r.outcome != Outcome::singular) {
      std::ostringstream msg;
      msg << "b-orbit with b=" << b << " stayed regular up to rho=" << r.rho_end;
      throw Error(ErrorKind::integration_failure, msg.str());
    }
    return r;
  };
  SingularityEstimate e;
  e.report = locate(options);
  e.rho = e.report.rho_sing;
  ExteriorOptions half_tol = options;
  half_tol.rel_tol *= 0.5;
  half_tol.abs_tol *= 0.5;
  e.rho_half_tol = locate(half_tol).rho_sing;
  ExteriorOptions half_delta = options;
  half_delta.delta *= 0.5;
  e.rho_half_delta = locate(half_delta).rho_sing;
  e.drift = std::max(std::abs(e.rho_half_tol / e.rho - 1.0), std::abs(e.rho_half_delta / e.rho - 1.0));
  return e;
}

double step1_discriminant(double U, double R) {
  return 1.0 - R * R * (1.0 - R * R) * (2.0 + U * U);
}

double step1_N(double U, double R) {
  const double D = step1_discriminant(U, R);
  const double R2 = R * R;
  return (D + R2) * (1.0 - 2.0 * R2 + std::sqrt(std::max(D, 0.0))) +
         (1.0 - R2) * R2 * R2 * (U * U - 2.0);
}

double g_slope_at_zero(double U, double rho) {
  const double U2 = U * U, r2 = rho * rho;
  return r2 * (U2 - 2.0) * (36.0 * U2 * U2 * r2 - 19.0 * U2 * r2 + 7.0 * U2 - 2.0 * r2 + 2.0) /
         (36.0 * U2 * (r2 - 1.0));
}

double g_slope_at_zero_alternate(double U, double rho) {
  const double r2 = rho * rho;
  return r2 * (U * U - 2.0) / (18.0 * (r2 - 1.0)) * ((17.0 * U - 9.0) * r2 + U + 3.0);
}

CertificateReport certify_inequalities(int grid) {
  if (grid < 100) throw Error(ErrorKind::invalid_input, "certificate grid must be at least 100");
  CertificateReport c;
  c.grid = grid;
  const double inf = std::numeric_limits<double>::infinity();
  c.N_min = {0, 0, inf};
  c.N_edges.fill({0, 0, inf});
  auto keep_min = [](GridPoint& p, double U, double R, double v) {
    if (v < p.value) p = {U, R, v};
  };

  // (a), (b): N(U, R) on the closed rectangle, edges tracked separately.
  for (int i = 0; i <= grid; ++i) {
    const double U = sqrt2 * i / grid;
    for (int j = 0; j <= grid; ++j) {
      const double R = static_cast<double>(j) / grid;
      const double v = step1_N(U, R);
      keep_min(c.N_min, U, R, v);
      if (i == 0) keep_min(c.N_edges[0], U, R, v);
      if (i == grid) keep_min(c.N_edges[1], U, R, v);
      if (j == 0) keep_min(c.N_edges[2], U, R, v);
      if (j == grid) keep_min(c.N_edges[3], U, R, v);
    }
  }
  if (c.N_min.value < -1e-12) certificate_violation("N(U,R) >= 0", c.N_min.U, c.N_min.R, c.N_min.value);

  // (c): g' at g = 0 for rho > 1, U > sqrt2.
  c.g_slope_min = {0, 0, inf};
  c.g_slope_alternate_min = {0, 0, inf};
  for (int i = 1; i <= grid; ++i) {
    const double U = sqrt2 + (10.0 - sqrt2) * i / grid;
    for (int j = 1; j <= grid; ++j) {
      const double rho = 1.0 + 9.0 * j / grid;
      keep_min(c.g_slope_min, U, rho, g_slope_at_zero(U, rho));
      keep_min(c.g_slope_alternate_min, U, rho, g_slope_at_zero_alternate(U, rho));
    }
  }
  if (!(c.g_slope_min.value > 0.0))
    certificate_violation("g' > 0 at g = 0", c.g_slope_min.U, c.g_slope_min.R, c.g_slope_min.value);

  // (d) and the Step-2 monitors along outward orbits.
  c.outward_g_min = inf;
  c.integrated_margin = inf;
  c.integrated_margin_sharp = inf;
  for (double b : {1.5, 1.75, 2.0, 2.5, 3.0, 3.578, 5.0, 6.316, 9.52, 13.13, 20.0}) {
    c.outward_b.push_back(b);
    const ExteriorReport r = b_orbit(b, Direction::outward, 1e3);
    const double k = (b - sqrt2) / (b + sqrt2);
    double prev = -inf;
    for (const MonitorSample& m : r.monitors) {
      c.outward_g_min = std::min(c.outward_g_min, m.g);
      if (!(m.U > prev) || !(m.dU > 0.0)) c.outward_monotone = false;
      prev = m.U;
      const double lhs = (m.U - sqrt2) / (m.U + sqrt2);
      const double margin = lhs - k * std::pow(m.rho, 1.0 / (3.0 * sqrt2));
      const double sharp = lhs - k * std::pow(m.rho, sqrt2 / 3.0);
      c.integrated_margin = std::min(c.integrated_margin, margin);
      c.integrated_margin_sharp = std::min(c.integrated_margin_sharp, sharp);
      if (margin < -1e-12) certificate_violation("integrated bound", b, m.rho, margin);
      if (!(m.g > 0.0)) certificate_violation("g > 0 along outward orbit", b, m.rho, m.g);
    }
  }
  if (!c.outward_monotone)
    throw Error(ErrorKind::certificate_failure, "U not increasing along an outward orbit");

  // Step-1 monitors along inward orbits.
  c.inward_h_slope_max = -inf;
  c.inward_n_max = -inf;
  for (double b : {0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.4}) {
    c.inward_b.push_back(b);
    const ExteriorReport r = b_orbit(b, Direction::inward, 1e-3);
    for (const MonitorSample& m : r.monitors) {
      const RhoState s{m.rho, m.U, m.dU};
      const double slope = monitor_h_slope(s);
      c.inward_h_slope_max = std::max(c.inward_h_slope_max, slope);
      c.inward_n_max = std::max(c.inward_n_max, m.n);
      if (!(slope < 0.0)) certificate_violation("h' < 0 along inward orbit", b, m.rho, slope);
    }
  }
  c.passed = true;
  return c;
}

}  // namespace cubicwave
