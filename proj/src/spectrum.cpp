#include "cubicwave/spectrum.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cubicwave/error.hpp"
#include "cubicwave/roots.hpp"

namespace cubicwave {

namespace {

struct Bracket {
  double lo, hi, glo, ghi;
};

std::vector<Bracket> sign_changes(const std::function<double(double)>& g,
                                  const std::vector<double>& grid, std::ostringstream& trace) {
  std::vector<Bracket> out;
  double prev = g(grid.front());
  trace << "c=" << grid.front() << " g=" << prev << "; ";
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = g(grid[i]);
    trace << "c=" << grid[i] << " g=" << cur << "; ";
    if ((prev < 0) != (cur < 0)) out.push_back({grid[i - 1], grid[i], prev, cur});
    prev = cur;
  }
  return out;
}

std::vector<double> geometric(double a, double b, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] = a * std::pow(b / a, static_cast<double>(i) / (count - 1));
  return g;
}

}  // namespace

std::vector<double> profile_zeros(const COrbitSummary& orbit) {
  return ode::find_crossings(
      *orbit.trajectory, [](double x, std::span<const double> y) { return y[0] + x * y[1]; },
      ode::Crossing::any, 1e-13);
}

SelfSimilarSolution find_c_n(int n, const SpectrumOptions& options,
                             const AsymptoticConstants& k) {
  if (n < 0) throw Error(ErrorKind::invalid_input, "n must be non-negative");
  const double target = (n + 0.5) * std::numbers::pi;
  auto g = [&](double c) {
    return evolve_c_orbit(c, options.tail_tol, options.interior).Phi - target;
  };
  const double c_pred = predict(n, k).c;

  std::ostringstream trace;
  std::vector<Bracket> found =
      sign_changes(g, geometric(0.7 * c_pred, 1.3 * c_pred, options.bracket_samples), trace);
  if (found.empty())
    found = sign_changes(g, geometric(0.1, 2.0 * c_pred, 200), trace);
  if (found.empty()) {
    throw Error(ErrorKind::bracket_failure, "no sign change of Phi(c) - (n+1/2)pi for n=" +
                                                std::to_string(n) + "; scan: " + trace.str());
  }
  // Prefer the bracket nearest the prediction; report the others.
  std::size_t best = 0;
  for (std::size_t i = 1; i < found.size(); ++i) {
    const double di = std::abs(std::log(0.5 * (found[i].lo + found[i].hi) / c_pred));
    const double db = std::abs(std::log(0.5 * (found[best].lo + found[best].hi) / c_pred));
    if (di < db) best = i;
  }
  const Bracket br = found[best];
  const auto root = find_root(g, br.lo, br.hi, br.glo, br.ghi, options.tol, 0.0, 300);
  const auto check = bisect(g, br.lo, br.hi, br.glo, br.ghi, options.tol, 0.0, 300);

  SelfSimilarSolution s;
  s.n = n;
  s.c = root.root;
  s.c_bisection = check.root;
  for (const auto& b : found) s.scan_sign_changes.push_back(0.5 * (b.lo + b.hi));
  s.orbit = evolve_c_orbit(s.c, options.tail_tol, options.interior);
  s.b = s.orbit.B;
  s.x_max = s.orbit.x_max;
  s.phase_residual = s.orbit.Phi - target;
  s.zeros = profile_zeros(s.orbit);
  if (static_cast<int>(s.zeros.size()) != n) {
    std::ostringstream msg;
    msg << "root c=" << s.c << " of Phi(c) = (" << n << "+1/2)pi has " << s.zeros.size()
        << " zeros, expected " << n;
    throw Error(ErrorKind::wrong_branch, msg.str());
  }
  s.E = static_energy(s.orbit, options.regularity_tol * std::max(1.0, std::abs(s.b)));
  return s;
}

std::vector<TableRow> table(int n_max, const SpectrumOptions& options,
                            const AsymptoticConstants& k) {
  if (n_max < 0) throw Error(ErrorKind::invalid_input, "n_max must be non-negative");
  std::vector<TableRow> rows;
  for (int n = 0; n <= n_max; ++n) {
    TableRow r;
    r.solution = find_c_n(n, options, k);
    r.predicted = predict(n, k);
    r.c_deviation = std::abs(r.predicted.c / r.solution.c - 1.0);
    r.b_deviation = std::abs(r.predicted.b / r.solution.b - 1.0);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<Figure1Point> figure1_curve(double c_min, double c_max, int samples) {
  if (!(c_min > 0) || !(c_max > c_min) || samples < 2)
    throw Error(ErrorKind::invalid_input, "figure curve needs 0 < c_min < c_max, samples >= 2");
  std::vector<Figure1Point> out;
  out.reserve(2 * static_cast<std::size_t>(samples));
  for (double c : geometric(c_min, c_max, samples)) {
    const auto s = evolve_c_orbit(c);
    for (double sign : {1.0, -1.0}) {
      Figure1Point p;
      p.c = sign * c;
      p.B = sign * s.B;
      p.D = sign * s.D;
      const double shifted = p.B + 8 * p.D;
      const double sigma = std::pow(shifted * shifted + p.D * p.D, 1.0 / 6.0);
      p.b_bar = shifted / sigma;
      p.d_bar = p.D / sigma;
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace cubicwave
