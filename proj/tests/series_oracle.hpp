#pragma once

#include <cstddef>
#include <vector>

namespace oracle {

/// Truncated power series arithmetic, independent of the library code.
using Series = std::vector<double>;

inline Series mul(const Series& a, const Series& b) {
  Series out(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < a.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

/// Taylor coefficients of sinh(x)^2 up to x^(n-1).
inline Series sinh_squared(std::size_t n) {
  Series s(n, 0.0);
  double fact = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    fact *= static_cast<double>(k);
    if (k % 2 == 1) s[k] = 1.0 / fact;
  }
  return mul(s, s);
}

/// Odd solution of sinh^2(x) f'' + f^3 = 0 with f'(0) = c, by coefficient matching.
inline Series origin_profile(double c, std::size_t n) {
  const Series s2 = sinh_squared(n + 2);
  Series f(n, 0.0);
  f[1] = c;
  for (std::size_t m = 3; m < n; m += 2) {
    // x^m coefficient: sum_j s2[j] (m-j+2)(m-j+1) f[m-j+2] + [f^3]_m = 0; the j = 2 term holds f[m].
    double rest = 0.0;
    for (std::size_t j = 4; j <= m + 1; ++j) {
      const std::size_t k = m + 2 - j;
      rest += s2[j] * static_cast<double>(k * (k - 1)) * f[k];
    }
    const Series f3 = mul(mul(f, f), f);
    f[m] = -(rest + f3[m]) / static_cast<double>(m * (m - 1));
  }
  return f;
}

inline double eval(const Series& s, double x) {
  double v = 0.0;
  for (std::size_t k = s.size(); k-- > 0;) v = v * x + s[k];
  return v;
}

inline Series derivative(const Series& s) {
  Series d(s.size(), 0.0);
  for (std::size_t k = 1; k < s.size(); ++k) d[k - 1] = static_cast<double>(k) * s[k];
  return d;
}

}  // namespace oracle
