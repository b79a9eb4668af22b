#include "cubicwave/stability.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cubicwave/error.hpp"
#include "cubicwave/roots.hpp"

namespace cubicwave {

namespace {

constexpr double pi = std::numbers::pi;

double inv_sinh2(double x) {
  if (x > 1.0) {
    const double e = std::exp(-2.0 * x);
    return 4.0 * e / ((1.0 - e) * (1.0 - e));
  }
  const double s = std::sinh(x);
  return 1.0 / (s * s);
}

void fill_samples(PotentialProfile& p, std::size_t samples) {
  if (samples < 2) throw Error(ErrorKind::invalid_input, "potential needs >= 2 samples");
  p.samples.resize(samples);
  p.min_V = std::numeric_limits<double>::infinity();
  const double dx = p.truncation / static_cast<double>(samples - 1);
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = static_cast<double>(i) * dx;
    const double v = p.V(x);
    p.samples[i] = {x, v};
    if (v < p.min_V) {
      p.min_V = v;
      p.argmin_V = x;
    }
  }
}

/// Integrates the Pruefer angle theta' = cos^2 + (E - V) sin^2 from `from` to `to`.
double prufer_angle(const PotentialProfile& p, double E, double from, double to, double theta0,
                    double rel_tol) {
  if (from == to) return theta0;
  ode::Problem problem{[&p, E](double x, std::span<const double> y, std::span<double> dy) {
                         const double s = std::sin(y[0]), c = std::cos(y[0]);
                         dy[0] = c * c + (E - p.V(x)) * s * s;
                       },
                       from, to, {theta0}};
  ode::Options o;
  o.rel_tol = rel_tol;
  o.abs_tol = rel_tol;
  o.blowup_norm = 1e12;
  const auto traj = ode::integrate(problem, o);
  if (traj.termination != ode::Termination::reached_end) {
    std::ostringstream msg;
    msg << "Pruefer integration at E=" << E << " stopped at x=" << traj.termination_location;
    throw Error(ErrorKind::spectral_failure, msg.str());
  }
  return traj.back_state()[0];
}

double matching_point(const PotentialProfile& p) {
  return std::clamp(p.argmin_V, std::min(0.5, 0.5 * p.truncation), p.truncation);
}

}  // namespace

PotentialProfile build_potential(const SelfSimilarSolution& solution, double truncation,
                                 std::size_t samples) {
  if (solution.orbit.trajectory == nullptr)
    throw Error(ErrorKind::invalid_input, "solution record carries no orbit");
  PotentialProfile p;
  p.n = solution.n;
  p.truncation = truncation > 0 ? truncation : std::max(30.0, solution.x_max + 10.0);
  p.decay_coefficient = -12.0 * solution.b * solution.b;
  auto orbit = std::make_shared<const COrbitSummary>(solution.orbit);
  p.V = [orbit](double x) {
    if (x <= 0.0) return -3.0 * orbit->c * orbit->c;
    const double f = orbit->f(x);
    if (x < 1.0) {
      const double r = f / std::sinh(x);
      return -3.0 * r * r;
    }
    return -3.0 * f * f * inv_sinh2(x);
  };
  fill_samples(p, samples);
  return p;
}

PotentialProfile make_potential(std::function<double(double)> V, double truncation,
                                std::size_t samples) {
  if (!(truncation > 0.0)) throw Error(ErrorKind::invalid_input, "truncation must be positive");
  PotentialProfile p;
  p.truncation = truncation;
  p.V = std::move(V);
  fill_samples(p, samples);
  return p;
}

PruferShot prufer_shot(const PotentialProfile& p, double E, double rel_tol) {
  if (!(E < 0.0)) throw Error(ErrorKind::invalid_input, "Pruefer shot needs E < 0");
  const double L = p.truncation;
  const double xm = matching_point(p);
  // Decaying solution e^{-kappa x}: xi'/xi = cot(theta) = -kappa at x = L.
  const double kappa = std::sqrt(std::max(p.V(L) - E, 1e-300));
  PruferShot s;
  s.theta_left = prufer_angle(p, E, 0.0, xm, 0.0, rel_tol);
  s.theta_right = prufer_angle(p, E, L, xm, pi - std::atan(1.0 / kappa), rel_tol);
  s.mismatch = s.theta_left - s.theta_right;
  s.count = s.mismatch < 0 ? 0 : static_cast<int>(std::floor(s.mismatch / pi)) + 1;
  const int nodes_left = s.theta_left > 0 ? static_cast<int>(std::ceil(s.theta_left / pi)) - 1 : 0;
  const int nodes_right = -static_cast<int>(std::floor(s.theta_right / pi));
  s.nodes = nodes_left + std::max(nodes_right, 0);
  return s;
}

std::vector<double> matrix_eigenvalues(const PotentialProfile& p, double upper, double h) {
  const double L = p.truncation;
  if (!(h > 0.0)) h = std::min(L / 4000.0, 0.02 / std::sqrt(std::max(std::abs(p.min_V), 1.0)));
  const double lower = std::min(p.min_V, 0.0) - 1.0;
  std::vector<std::vector<double>> levels;
  for (int level = 0; level < 3; ++level) {
    const double hl = std::ldexp(h, -level);  // h, h/2, h/4
    const auto m = static_cast<lapack_int>(std::ceil(L / hl));
    const double step = L / static_cast<double>(m);
    const lapack_int dim = m - 1;
    std::vector<double> diag(dim), off(std::max<lapack_int>(dim - 1, 1), -1.0 / (step * step));
    for (lapack_int i = 0; i < dim; ++i)
      diag[i] = 2.0 / (step * step) + p.V(static_cast<double>(i + 1) * step);
    std::vector<double> w(dim);
    std::vector<lapack_int> iblock(dim), isplit(dim);
    lapack_int found = 0, nsplit = 0;
    const lapack_int info = LAPACKE_dstebz('V', 'E', dim, lower, upper, 0, 0, 0.0, diag.data(),
                                           off.data(), &found, &nsplit, w.data(), iblock.data(),
                                           isplit.data());
    if (info != 0) {
      std::ostringstream msg;
      msg << "dstebz failed with info=" << info;
      throw Error(ErrorKind::spectral_failure, msg.str());
    }
    w.resize(found);
    std::sort(w.begin(), w.end());
    levels.push_back(std::move(w));
  }
  std::size_t count = levels[0].size();
  for (const auto& l : levels) count = std::min(count, l.size());
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = (64.0 * levels[2][k] - 20.0 * levels[1][k] + levels[0][k]) / 45.0;
  return out;
}

EigenReport eigenvalues(const PotentialProfile& p, double search_floor,
                        const EigenOptions& options) {
  if (!(options.guard > 0.0) || !(search_floor < -options.guard))
    throw Error(ErrorKind::invalid_input, "eigenvalue search needs search_floor < -guard < 0");
  EigenReport r;
  r.n = p.n;
  r.search_floor = search_floor;
  r.guard = options.guard;
  r.truncation = p.truncation;

  const double rel = std::max(options.tol, 1e-13);
  const PruferShot low = prufer_shot(p, search_floor, rel);
  const PruferShot high = prufer_shot(p, -options.guard, rel);
  if (low.count != 0) {
    std::ostringstream msg;
    msg << "search floor " << search_floor << " already has " << low.count
        << " eigenvalues below it";
    throw Error(ErrorKind::spectral_failure, msg.str());
  }
  r.negative_count = high.count;

  double a = search_floor;
  std::ostringstream trace;
  for (int k = 0; k < high.count; ++k) {
    const double shift = k * pi;
    auto g = [&](double E) { return prufer_shot(p, E, rel).mismatch - shift; };
    const double ga = g(a);
    const double gb = high.mismatch - shift;
    const RootResult root = find_root(g, a, -options.guard, ga, gb, 1e-13, options.tol);
    const PruferShot at = prufer_shot(p, root.root, rel);
    r.eigenvalues.push_back(root.root);
    r.node_counts.push_back(at.nodes);
    trace << " [" << root.lower << ", " << root.upper << "] nodes=" << at.nodes;
    if (at.nodes != k) {
      std::ostringstream msg;
      msg << "eigenvalue " << k << " has " << at.nodes << " nodes; brackets:" << trace.str();
      throw Error(ErrorKind::spectral_failure, msg.str());
    }
    a = root.root;
  }

  // Sturm count just below -1, so the gauge eigenvalue itself is not counted.
  r.count_below_minus_one = prufer_shot(p, -1.0 - options.guard, rel).count;
  const PruferShot edge = prufer_shot(p, -1.0 + options.guard, rel);
  for (double e : r.eigenvalues) {
    if (e > -1.0 + options.guard) r.window_eigenvalues.push_back(e);
  }
  if (static_cast<int>(r.window_eigenvalues.size()) != high.count - edge.count)
    throw Error(ErrorKind::spectral_failure, "window count disagrees with the Sturm count");
  if (!r.eigenvalues.empty()) {
    auto nearest = std::min_element(r.eigenvalues.begin(), r.eigenvalues.end(),
                                    [](double u, double v) {
                                      return std::abs(u + 1.0) < std::abs(v + 1.0);
                                    });
    r.gauge_eigenvalue = *nearest;
    r.gauge_offset = std::abs(*nearest + 1.0);
  }

  if (options.matrix_oracle) {
    r.oracle_eigenvalues = matrix_eigenvalues(p, -options.guard);
    if (r.oracle_eigenvalues.size() != r.eigenvalues.size()) {
      std::ostringstream msg;
      msg << "matrix oracle found " << r.oracle_eigenvalues.size() << " eigenvalues, shooting "
          << r.eigenvalues.size();
      throw Error(ErrorKind::spectral_failure, msg.str());
    }
    r.method_agreement = 0.0;
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k)
      r.method_agreement =
          std::max(r.method_agreement, std::abs(r.eigenvalues[k] - r.oracle_eigenvalues[k]));
  }
  return r;
}

GaugeReport gauge_mode_check(const SelfSimilarSolution& solution) {
  const COrbitSummary& orbit = solution.orbit;
  if (orbit.trajectory == nullptr)
    throw Error(ErrorKind::invalid_input, "solution record carries no orbit");
  const double c = std::abs(orbit.c);
  const double b = std::abs(orbit.B);
  // Beyond this radius the D sinh x admixture would exceed 1e-3 of the mode.
  const double D = std::max(std::abs(orbit.D), 1e-300);
  const double x_c = std::min(orbit.x_max, 0.5 * std::log(1e-3 * b * b * b / D));
  if (!(x_c > 1.0)) throw Error(ErrorKind::precondition_violation, "gauge mode range is empty");

  const double h = 0.0125 / std::max(1.0, c);
  const auto m = static_cast<std::size_t>(std::floor(x_c / h));
  std::vector<double> xi(m + 1), dxi(m + 1), V(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    const double x = static_cast<double>(i) * h;
    if (i == 0) {
      xi[i] = 0.0;
      dxi[i] = c;
      V[i] = -3.0 * c * c;
      continue;
    }
    const OrbitState st = orbit.state(x);
    const double f = st.f();
    const double r = x < 1.0 ? f / std::sinh(x) : f * std::sqrt(inv_sinh2(x));
    const double dd = -f * r * r;
    xi[i] = std::sinh(x) * st.d;
    dxi[i] = std::cosh(x) * st.d + std::sinh(x) * dd;
    V[i] = -3.0 * r * r;
  }
  // xi is odd, so xi' is even: mirror across the origin for the stencil.
  auto dxi_at = [&](std::ptrdiff_t i) { return dxi[static_cast<std::size_t>(std::abs(i))]; };
  GaugeReport g;
  g.x_checked = static_cast<double>(m - 3) * h;
  double sup_xi = 0.0, sup_res = 0.0;
  for (std::size_t i = 1; i + 3 <= m; ++i) {
    const auto j = static_cast<std::ptrdiff_t>(i);
    const double d2 = (-dxi_at(j - 3) + 9 * dxi_at(j - 2) - 45 * dxi_at(j - 1) +
                       45 * dxi_at(j + 1) - 9 * dxi_at(j + 2) + dxi_at(j + 3)) /
                      (60.0 * h);
    sup_res = std::max(sup_res, std::abs(-d2 + V[i] * xi[i] + xi[i]));
    sup_xi = std::max(sup_xi, std::abs(xi[i]));
  }
  g.residual = sup_res / sup_xi;
  const auto zeros = ode::find_crossings(
      *orbit.trajectory, [](double, std::span<const double> y) { return y[1]; });
  g.nodes = static_cast<int>(
      std::count_if(zeros.begin(), zeros.end(), [x_c](double z) { return z < x_c; }));
  return g;
}

EigenReport analyze_stability(const SelfSimilarSolution& solution, const EigenOptions& options) {
  const PotentialProfile p = build_potential(solution);
  EigenReport r = eigenvalues(p, 1.5 * p.min_V, options);
  const GaugeReport g = gauge_mode_check(solution);
  r.gauge_residual = g.residual;
  r.gauge_nodes = g.nodes;
  return r;
}

}  // namespace cubicwave
