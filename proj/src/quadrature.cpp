#include "cubicwave/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "cubicwave/error.hpp"

namespace cubicwave {

namespace {

void check(double value, double err, double tol, const char* rule, double a, double b) {
  if (std::isfinite(value) && std::isfinite(err) && err <= tol) return;
  std::ostringstream msg;
  msg << rule << " on [" << a << ", " << b << "] did not converge: estimate " << value
      << ", error " << err << " > " << tol;
  throw Error(ErrorKind::quadrature_failure, msg.str());
}

}  // namespace

static double quadrature_impl(const ScalarFn& f, double a, double b, double tol);

double quadrature(const ScalarFn& f, double a, double b, double tol) {
  try {
    return quadrature_impl(f, a, b, tol);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::quadrature_failure, e.what());
  }
}

static double quadrature_impl(const ScalarFn& f, double a, double b, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::invalid_input, "quadrature tolerance must be positive");
  if (std::isnan(a) || std::isnan(b) || std::isinf(a))
    throw Error(ErrorKind::invalid_input, "quadrature limits must be finite (upper may be +inf)");
  if (a == b) return 0.0;
  if (b < a) return -quadrature_impl(f, b, a, tol);

  const double rel = std::max(tol * 1e-2, 4 * std::numeric_limits<double>::epsilon());
  double err = 0.0;
  if (std::isinf(b)) {
    const double mid = a + 1.0;
    const double head = quadrature_impl(f, a, mid, 0.5 * tol);
    boost::math::quadrature::exp_sinh<double> rule(12);
    const double tail = rule.integrate([&](double x) { return f(x); }, mid,
                                       std::numeric_limits<double>::infinity(), rel, &err);
    check(tail, err, 0.5 * tol, "exp-sinh", mid, b);
    return head + tail;
  }
  boost::math::quadrature::tanh_sinh<double> rule(15);
  // Two-argument form: the complement distance keeps precision near the ends.
  const double value = rule.integrate(
      [&](double x, double) { return f(x); }, a, b, rel, &err);
  check(value, err, tol, "tanh-sinh", a, b);
  return value;
}

namespace {

// Bisection driven by the embedded 7-point Gauss error of each 15-point panel.
double gk_adaptive(const ScalarFn& f, double a, double b, double tol, int depth, double& err) {
  auto g = [&](double x) { return f(x); };
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, a, b, 0);
  const double coarse = boost::math::quadrature::gauss<double, 7>::integrate(g, a, b);
  const double panel_err = std::abs(value - coarse);
  const double roundoff = 64 * std::numeric_limits<double>::epsilon() * std::abs(value);
  const double target = std::max(tol * std::max(1.0, std::abs(value)), roundoff);
  if (panel_err <= target || depth == 0) {
    err += std::max(0.0, panel_err - roundoff);
    return value;
  }
  const double m = 0.5 * (a + b);
  return gk_adaptive(f, a, m, 0.5 * tol, depth - 1, err) +
         gk_adaptive(f, m, b, 0.5 * tol, depth - 1, err);
}

}  // namespace

double quadrature_smooth(const ScalarFn& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  tol = std::max(tol, 1e-13);
  double err = 0.0;
  double value = 0.0;
  try {
    value = gk_adaptive(f, a, b, tol, 20, err);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::quadrature_failure, e.what());
  }
  const double scale = std::max(1.0, std::abs(value));
  check(value, err, tol * scale, "Gauss-Kronrod", a, b);
  return value;
}

}  // namespace cubicwave
