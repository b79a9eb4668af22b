#include "cubicwave/appendix.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <sstream>

#include "cubicwave/error.hpp"
#include "cubicwave/roots.hpp"

namespace cubicwave {

namespace {

constexpr double pi = std::numbers::pi;

/// y = (U, U', angle).
void polar_rhs(double rho, std::span<const double> y, std::span<double> dy) {
  const double U = y[0], V = y[1];
  const double W = -((2.0 / rho - 4.0 * rho) * V - 2.0 * U + U * U * U) / (1.0 - rho * rho);
  dy[0] = V;
  dy[1] = W;
  dy[2] = (W * U - V * V) / (U * U + V * V);
}

double center_delta(double c) { return std::min(0.05, 0.01 / std::max(1.0, std::abs(c))); }
double cone_delta(double b) { return std::min(1e-4, 0.01 / std::max(1.0, b * b)); }

double cone_angle_at_one(double b) {
  const double a = std::atan((b * b - 2.0) / 2.0);
  return b > 0 ? a : pi + a;
}

double wrap(double a) { return std::remainder(a, 2.0 * pi); }

ode::Trajectory polar_orbit(const RhoState& s, double angle, double rho_end,
                            const AppendixOptions& o) {
  ode::Problem p{polar_rhs, s.rho, rho_end, {s.U, s.dU, angle}};
  ode::Options opt;
  opt.rel_tol = o.rel_tol;
  opt.abs_tol = o.abs_tol;
  auto t = ode::integrate(p, opt);
  if (t.termination != ode::Termination::reached_end) {
    std::ostringstream msg;
    msg << "polar orbit from rho=" << s.rho << " stopped at " << t.termination_location;
    throw Error(ErrorKind::integration_failure, msg.str());
  }
  return t;
}

ode::Trajectory center_orbit(double c, double rho_end, const AppendixOptions& o) {
  if (!(c > 0.0)) throw Error(ErrorKind::invalid_input, "center orbits need c > 0");
  if (!(rho_end > 0.0 && rho_end < 1.0))
    throw Error(ErrorKind::invalid_input, "center orbit end must lie in (0, 1)");
  const RhoState s = rho_series_center(c, center_delta(c));
  return polar_orbit(s, std::atan(s.dU / s.U), rho_end, o);
}

ode::Trajectory cone_orbit(double b, double rho_end, const AppendixOptions& o) {
  if (b == 0.0 || !std::isfinite(b)) throw Error(ErrorKind::invalid_input, "cone orbits need b != 0");
  if (!(rho_end > 0.0 && rho_end < 1.0))
    throw Error(ErrorKind::invalid_input, "cone orbit end must lie in (0, 1)");
  const RhoState s = rho_series_cone(b, cone_delta(b), ConeSide::inner);
  const double a1 = cone_angle_at_one(b);
  const double angle = a1 + wrap(std::atan2(s.dU, s.U) - a1);
  return polar_orbit(s, angle, rho_end, o);
}

int count_zeros(const ode::Trajectory& t) {
  return static_cast<int>(
      ode::find_crossings(t, [](double, std::span<const double> y) { return y[0]; }).size());
}

PolarPoint endpoint(const ode::Trajectory& t, double parameter, double shift) {
  const auto y = t.back_state();
  return {y[2] - shift, std::hypot(y[0], y[1]), parameter, y[0], y[1], count_zeros(t)};
}

std::vector<PolarSample> samples_of(const ode::Trajectory& t) {
  std::vector<PolarSample> out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = t.nodes()[i];
    const auto y = t.state_at(i);
    const double H = 0.5 * (1 - r * r) * y[1] * y[1] - y[0] * y[0] + 0.25 * std::pow(y[0], 4);
    out.push_back({r, y[0], y[1], y[2], H});
  }
  return out;
}

/// Adaptive curve: multiplicative parameter steps with bounded angle increments.
template <class Map>
std::vector<PolarPoint> trace(double start, Map map, double angle_stop, bool decreasing,
                              const AppendixOptions& o) {
  std::vector<PolarPoint> out{map(start)};
  double step = 0.05;
  auto done = [&](const PolarPoint& p) {
    return decreasing ? p.angle < angle_stop : p.angle > angle_stop;
  };
  while (!done(out.back())) {
    const double p = out.back().parameter;
    if (std::abs(p) > 1e4) {
      std::ostringstream msg;
      msg << "curve did not reach angle " << angle_stop << " (last " << out.back().angle
          << " at parameter " << p << ")";
      throw Error(ErrorKind::scan_failure, msg.str());
    }
    const PolarPoint next = map(p * (1.0 + step));
    const double da = std::abs(next.angle - out.back().angle);
    if (da > o.max_angle_step && step > 1e-9) {
      step *= 0.5;
      continue;
    }
    out.push_back(next);
    if (da < 0.3 * o.max_angle_step) step = std::min(2.0 * step, 0.1);
  }
  return out;
}

/// Matching defect (U_c - U_b, U'_c - U'_b) at rho0.
std::array<double, 2> defect(double c, double b, int offset, const AppendixOptions& o) {
  const PolarPoint p = center_map(c, o);
  const PolarPoint q = cone_map(b, offset, o);
  return {p.U - q.U, p.dU - q.dU};
}

struct Refined {
  double c, b, residual;
  bool converged;
};

Refined newton(double c, double b, int offset, const AppendixOptions& o) {
  auto F = defect(c, b, offset, o);
  double norm = std::hypot(F[0], F[1]);
  for (int it = 0; it < 60; ++it) {
    const double hc = 1e-7 * c, hb = 1e-7 * std::abs(b);
    const auto Fc = defect(c + hc, b, offset, o);
    const auto Fb = defect(c, b + hb, offset, o);
    const double J00 = (Fc[0] - F[0]) / hc, J10 = (Fc[1] - F[1]) / hc;
    const double J01 = (Fb[0] - F[0]) / hb, J11 = (Fb[1] - F[1]) / hb;
    const double det = J00 * J11 - J01 * J10;
    if (det == 0.0 || !std::isfinite(det)) break;
    const double dc = -(J11 * F[0] - J01 * F[1]) / det;
    const double db = -(-J10 * F[0] + J00 * F[1]) / det;
    double lambda = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const double cn = c + lambda * dc, bn = b + lambda * db;
      if (cn > 0 && bn * b > 0) {
        const auto Fn = defect(cn, bn, offset, o);
        const double nn = std::hypot(Fn[0], Fn[1]);
        if (nn < norm || nn < 1e-13 * (1 + std::abs(cn))) {
          c = cn;
          b = bn;
          F = Fn;
          norm = nn;
          improved = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    const double scale = 1.0 + std::hypot(c, b);
    if (norm < 1e-10 * scale &&
        std::abs(lambda * dc) < 1e-12 * c && std::abs(lambda * db) < 1e-12 * std::abs(b))
      return {c, b, norm, true};
    if (!improved) return {c, b, norm, norm < 1e-9 * scale};
  }
  return {c, b, norm, norm < 1e-9 * (1.0 + std::hypot(c, b))};
}

/// Max rho-equation residual on a grid straddling rho0, U'' by 6th-order
/// differences of the glued U'.
double glue_residual(double c, double b, const AppendixOptions& o) {
  const auto left = center_orbit(c, rho0, o);
  const auto right = cone_orbit(b, rho0, o);
  auto at = [&](double r) {
    const auto y = r <= rho0 ? left(r) : right(r);
    return RhoState{r, y[0], y[1]};
  };
  const double h = 2e-3;
  double worst = 0.0;
  for (int j = -10; j <= 10; ++j) {
    const double r = rho0 + j * h;
    const double d2 = (-at(r - 3 * h).dU + 9 * at(r - 2 * h).dU - 45 * at(r - h).dU +
                       45 * at(r + h).dU - 9 * at(r + 2 * h).dU + at(r + 3 * h).dU) /
                      (60.0 * h);
    worst = std::max(worst, std::abs(rho_equation_residual(at(r), d2)));
  }
  return worst;
}

[[noreturn]] void lemma_violation(const std::string& what, double parameter, double rho,
                                  double value) {
  std::ostringstream msg;
  msg << what << " fails for parameter " << parameter << " at rho=" << rho << ": " << value;
  throw Error(ErrorKind::lemma_violation, msg.str());
}

}  // namespace

const char* to_string(Branch b) { return b == Branch::even ? "even" : "odd"; }

int cone_offset(int k, Branch branch) { return branch == Branch::even ? k : k + 1; }

PolarPoint center_map(double c, const AppendixOptions& options) {
  return endpoint(center_orbit(c, rho0, options), c, 0.0);
}

PolarPoint cone_map(double b, int k, const AppendixOptions& options) {
  return endpoint(cone_orbit(b, rho0, options), b, 2.0 * pi * k);
}

std::vector<PolarSample> center_trace(double c, double rho_end, const AppendixOptions& options) {
  return samples_of(center_orbit(c, rho_end, options));
}

std::vector<PolarSample> cone_trace(double b, double rho_end, const AppendixOptions& options) {
  return samples_of(cone_orbit(b, rho_end, options));
}

std::vector<PolarPoint> trace_center_curve(double c_start, double angle_stop,
                                           const AppendixOptions& options) {
  if (!(c_start > 0.0)) throw Error(ErrorKind::invalid_input, "center curve needs c_start > 0");
  return trace(c_start, [&](double c) { return center_map(c, options); }, angle_stop, true,
               options);
}

std::vector<PolarPoint> trace_cone_curve(double b_start, int offset, double angle_stop,
                                         const AppendixOptions& options) {
  if (b_start == 0.0) throw Error(ErrorKind::invalid_input, "cone curve needs b_start != 0");
  return trace(b_start, [&](double b) { return cone_map(b, offset, options); }, angle_stop,
               false, options);
}

NodalIntersection find_intersection(int k, Branch branch, const AppendixOptions& options) {
  if (k < 0) throw Error(ErrorKind::invalid_input, "nodal index k must be non-negative");
  const int n = branch == Branch::even ? 2 * k : 2 * k + 1;
  const int offset = cone_offset(k, branch);
  // Phi runs from angle ~0 down past -(n + 1) pi; Psi from its small-b end up past pi.
  const double center_stop = -(n + 1.5) * pi;
  const double cone_stop = 1.5 * pi;
  const auto phi = trace_center_curve(0.05, center_stop, options);
  const auto psi = trace_cone_curve(branch == Branch::even ? 0.05 : -0.05, offset, cone_stop,
                                    options);

  NodalIntersection out;
  out.k = k;
  out.branch = branch;
  out.n = n;
  out.center_samples = phi.size();
  out.cone_samples = psi.size();
  std::ostringstream tried;
  for (std::size_t i = 0; i + 1 < phi.size(); ++i) {
    const PolarPoint &p0 = phi[i], &p1 = phi[i + 1];
    for (std::size_t j = 0; j + 1 < psi.size(); ++j) {
      const PolarPoint &q0 = psi[j], &q1 = psi[j + 1];
      // Segment intersection p0 + t (p1 - p0) = q0 + u (q1 - q0).
      const double ax = p1.angle - p0.angle, ay = p1.radius - p0.radius;
      const double bx = q1.angle - q0.angle, by = q1.radius - q0.radius;
      const double det = ax * (-by) + bx * ay;
      if (det == 0.0) continue;
      const double rx = q0.angle - p0.angle, ry = q0.radius - p0.radius;
      const double t = (rx * (-by) + bx * ry) / det;
      const double u = (ax * ry - ay * rx) / det;
      if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) continue;
      ++out.crossings;
      const double c0 = p0.parameter + t * (p1.parameter - p0.parameter);
      const double b0 = q0.parameter + u * (q1.parameter - q0.parameter);
      const Refined r = newton(c0, b0, offset, options);
      const PolarPoint pc = center_map(r.c, options);
      const PolarPoint pb = cone_map(r.b, offset, options);
      const int zeros = pc.zeros + pb.zeros;
      tried << " (c=" << r.c << ", b=" << r.b << ", residual=" << r.residual
            << ", zeros=" << zeros << ")";
      if (!r.converged || zeros != n || std::abs(pc.angle - pb.angle) > 0.5) continue;
      out.c = r.c;
      out.b = r.b;
      out.residual = r.residual;
      out.angle = pc.angle;
      out.radius = pc.radius;
      out.zeros = zeros;
      out.glue_residual = glue_residual(r.c, r.b, options);
      return out;
    }
  }
  std::ostringstream msg;
  msg << "no intersection with " << n << " zeros; Phi samples c in [" << phi.front().parameter
      << ", " << phi.back().parameter << "], Psi samples b in [" << psi.front().parameter << ", "
      << psi.back().parameter << "]; crossings:" << tried.str();
  throw Error(ErrorKind::scan_failure, msg.str());
}

LemmaReport lemma_monitors(double c_max, double b_max, const AppendixOptions& o) {
  if (!(c_max > 0.0 && c_max <= 50.0 && b_max > 0.0 && b_max <= 50.0))
    throw Error(ErrorKind::invalid_input, "lemma ranges must lie in (0, 50]");
  LemmaReport r;

  // Radii shrink to zero with the parameter.
  double prev_r = -1.0, prev_R = -1.0;
  for (double p = 1e-3; p <= 0.5; p *= 1.5) {
    const double rc = center_map(p, o).radius;
    const double rb = cone_map(p, 0, o).radius;
    if (!(rc > prev_r)) r.r_monotone = false;
    if (!(rb > prev_R)) r.R_monotone = false;
    prev_r = rc;
    prev_R = rb;
  }
  // Small parameters follow the linearized equation, solved by artanh(rho)/rho
  // (center) and 1/rho (cone).
  const double at = std::atanh(rho0);
  r.r_linear = 0.01 * std::hypot(at / rho0, (rho0 / (1 - rho0 * rho0) - at) / (rho0 * rho0));
  r.R_linear = 0.01 * std::hypot(1 / rho0, 1 / (rho0 * rho0));
  r.r_small = center_map(0.01, o).radius;
  r.R_small = cone_map(0.01, 0, o).radius;
  if (!r.r_monotone || !(std::abs(r.r_small / r.r_linear - 1) < 1e-3))
    lemma_violation("small-parameter radius (center)", 0.01, rho0, r.r_small);
  if (!r.R_monotone || !(std::abs(r.R_small / r.R_linear - 1) < 1e-3))
    lemma_violation("small-parameter radius (cone)", 0.01, rho0, r.R_small);

  // Unbounded rotation.
  for (double p : {2.0, 5.0, 10.0, 20.0, 50.0}) {
    if (p <= c_max) r.center_growth.push_back(center_map(p, o));
    if (p <= b_max) r.cone_growth.push_back(cone_map(p, 0, o));
  }
  for (std::size_t i = 1; i < r.center_growth.size(); ++i)
    if (!(r.center_growth[i].angle < r.center_growth[i - 1].angle))
      lemma_violation("rotation (theta decreasing)", r.center_growth[i].parameter, rho0,
                      r.center_growth[i].angle);
  for (std::size_t i = 1; i < r.cone_growth.size(); ++i)
    if (!(r.cone_growth[i].angle > r.cone_growth[i - 1].angle))
      lemma_violation("rotation (beta increasing)", r.cone_growth[i].parameter, rho0,
                      r.cone_growth[i].angle);

  // Angle bounds along sampled orbits.
  r.theta_max = -1e300;
  r.beta_min = 1e300;
  r.beta_min_negative = 1e300;
  for (int i = 1; i <= 30; ++i) {
    const double c = c_max * i / 30.0, b = b_max * i / 30.0;
    for (const auto& s : center_trace(c, rho0, o)) {
      r.theta_max = std::max(r.theta_max, s.angle);
      if (!(s.angle < pi / 2)) lemma_violation("angle bound (theta < pi/2)", c, s.rho, s.angle);
    }
    for (const auto& s : cone_trace(b, rho0, o)) {
      r.beta_min = std::min(r.beta_min, s.angle);
      if (!(s.angle > -pi / 2)) lemma_violation("angle bound (beta > -pi/2)", b, s.rho, s.angle);
    }
    for (const auto& s : cone_trace(-b, rho0, o)) {
      r.beta_min_negative = std::min(r.beta_min_negative, s.angle);
      if (!(s.angle > pi / 2)) lemma_violation("angle bound (beta > pi/2, b < 0)", -b, s.rho, s.angle);
    }
  }

  // Angle window and H monotonicity for parameters in (0, 2).
  r.H_center_margin = -1e300;
  r.H_cone_margin = -1e300;
  for (int i = 1; i < 20; ++i) {
    const double p = 0.1 * i;
    const auto ct = center_trace(p, rho0, o);
    const double H0 = -p * p + 0.25 * p * p * p * p;
    for (const auto& s : ct) r.H_center_margin = std::max(r.H_center_margin, s.H - H0);
    const double th = ct.back().angle;
    r.theta_rho0_abs_max = std::max(r.theta_rho0_abs_max, std::abs(th));
    if (!(std::abs(th) < pi / 2)) lemma_violation("small-parameter window (theta window)", p, rho0, th);
    if (!(r.H_center_margin < 0.0)) lemma_violation("small-parameter window (H center)", p, rho0, r.H_center_margin);

    const auto bt = cone_trace(p, rho0, o);
    const double H1 = -p * p + 0.25 * p * p * p * p;
    for (const auto& s : bt) r.H_cone_margin = std::max(r.H_cone_margin, s.H - H1);
    const double be = bt.back().angle;
    r.beta_rho0_abs_max = std::max(r.beta_rho0_abs_max, std::abs(be));
    if (!(std::abs(be) < pi / 2)) lemma_violation("small-parameter window (beta window)", p, rho0, be);
    if (!(r.H_cone_margin < 1e-12)) lemma_violation("small-parameter window (H cone)", p, rho0, r.H_cone_margin);

    const double bn = cone_trace(-p, rho0, o).back().angle;
    if (!(bn > pi / 2 && bn < 1.5 * pi)) lemma_violation("small-parameter window (beta window, b < 0)", -p, rho0, bn);
  }

  // H' = (3 rho - 2 / rho) U'^2 flips sign at rho0.
  {
    const auto t = center_trace(1.0, 0.99, o);
    for (std::size_t i = 1; i < t.size(); ++i) {
      const double dH = t[i].H - t[i - 1].H;
      const double tol = 1e-12 * (1.0 + std::abs(t[i].H));
      if (t[i].rho <= rho0 && dH > tol) r.H_flip = false;
      if (t[i - 1].rho >= rho0 && dH < -tol) r.H_flip = false;
    }
    if (!r.H_flip) lemma_violation("H monotonicity split at rho0", 1.0, rho0, 0.0);
  }

  // Nodal angle window on both parameter ranges.
  for (int k = 1; k <= 2; ++k) {
    WindowReading tr;
    tr.k = k;
    const double lo = -(2 * k + 1) * pi;
    const auto phi = trace_center_curve(0.05, lo - 0.2, o);
    const auto psi = trace_cone_curve(0.05, 0, -lo + 0.2, o);
    auto first_crossing = [&](const std::vector<PolarPoint>& curve, double level, auto map) {
      for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const double f0 = curve[i].angle - level, f1 = curve[i + 1].angle - level;
        if (f0 == 0.0) return curve[i].parameter;
        if ((f0 < 0) != (f1 < 0))
          return find_root([&](double p) { return map(p).angle - level; }, curve[i].parameter,
                           curve[i + 1].parameter, f0, f1, 1e-12)
              .root;
      }
      throw Error(ErrorKind::scan_failure, "angle level not reached while tracing");
    };
    auto cmap = [&](double c) { return center_map(c, o); };
    auto bmap = [&](double b) { return cone_map(b, 0, o); };
    tr.c_L = first_crossing(phi, -pi / 2, cmap);
    tr.c_R = first_crossing(phi, lo, cmap);
    tr.b_L = first_crossing(psi, pi / 2, bmap);
    tr.b_R = first_crossing(psi, -lo, bmap);
    tr.samples = 100;
    for (int i = 1; i <= tr.samples; ++i) {
      const double s = static_cast<double>(i) / (tr.samples + 1);
      const double tc = center_map(tr.c_L + s * (tr.c_R - tr.c_L), o).angle;
      if (!(tc < -pi / 2 && tc > lo)) ++tr.violations_c_interval;
      const double tb = center_map(tr.b_L + s * (tr.b_R - tr.b_L), o).angle;
      if (!(tb < -pi / 2 && tb > lo)) ++tr.violations_b_interval;
    }
    r.windows.push_back(tr);
  }
  r.passed = true;
  return r;
}

}  // namespace cubicwave
