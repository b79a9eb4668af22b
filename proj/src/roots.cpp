#include "cubicwave/roots.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <sstream>

#include "cubicwave/error.hpp"

namespace cubicwave {

namespace {

void require_bracket(double a, double b, double fa, double fb) {
  if (std::isfinite(fa) && std::isfinite(fb) && (fa == 0.0 || fb == 0.0 || (fa < 0) != (fb < 0)))
    return;
  std::ostringstream msg;
  msg << "no sign change on [" << a << ", " << b << "]: f = " << fa << ", " << fb;
  throw Error(ErrorKind::bracket_failure, msg.str());
}

}  // namespace

RootResult find_root(const std::function<double(double)>& f, double a, double b, double fa,
                     double fb, double rel_tol, double abs_tol, std::size_t max_evaluations) {
  require_bracket(a, b, fa, fb);
  if (fa == 0.0) return {a, a, a, 0};
  if (fb == 0.0) return {b, b, b, 0};
  if (a > b) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  std::uintmax_t iters = max_evaluations;
  auto tol = [rel_tol, abs_tol](double lo, double hi) {
    return std::abs(hi - lo) <= rel_tol * std::min(std::abs(lo), std::abs(hi)) + abs_tol;
  };
  auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  if (!tol(lo, hi)) {
    std::ostringstream msg;
    msg << "root bracket [" << lo << ", " << hi << "] not converged after " << iters
        << " evaluations";
    throw Error(ErrorKind::nonconvergence, msg.str());
  }
  return {0.5 * (lo + hi), lo, hi, static_cast<std::size_t>(iters)};
}

RootResult bisect(const std::function<double(double)>& f, double a, double b, double fa,
                  double fb, double rel_tol, double abs_tol, std::size_t max_evaluations) {
  require_bracket(a, b, fa, fb);
  if (fa == 0.0) return {a, a, a, 0};
  if (fb == 0.0) return {b, b, b, 0};
  std::size_t n = 0;
  while (std::abs(b - a) > rel_tol * std::min(std::abs(a), std::abs(b)) + abs_tol) {
    if (n >= max_evaluations)
      throw Error(ErrorKind::nonconvergence, "bisection budget exhausted");
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double fm = f(m);
    ++n;
    if (fm == 0.0) return {m, m, m, n};
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return {0.5 * (a + b), std::min(a, b), std::max(a, b), n};
}

}  // namespace cubicwave
