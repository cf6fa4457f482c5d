#pragma once

// Slow, independent reference computations used only by the tests.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

/// Law of the pure-birth chain with rates 1/(n+1), M(0) = 0, at time t, by
/// classical RK4 on the forward equations truncated at n_max (mass beyond the
/// truncation collects in the last state).
inline std::vector<long double> birth_law_rk4(double t, std::size_t n_max, int steps) {
  std::vector<long double> p(n_max + 1, 0.0L);
  p[0] = 1.0L;
  auto rate = [n_max](std::size_t n) { return n == n_max ? 0.0L : 1.0L / (n + 1.0L); };
  auto deriv = [&](const std::vector<long double>& q) {
    std::vector<long double> d(q.size());
    for (std::size_t n = 0; n <= n_max; ++n) {
      d[n] = -rate(n) * q[n];
      if (n > 0) d[n] += rate(n - 1) * q[n - 1];
    }
    return d;
  };
  const long double h = static_cast<long double>(t) / steps;
  for (int s = 0; s < steps; ++s) {
    auto k1 = deriv(p);
    std::vector<long double> tmp(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) tmp[i] = p[i] + h / 2 * k1[i];
    auto k2 = deriv(tmp);
    for (std::size_t i = 0; i < p.size(); ++i) tmp[i] = p[i] + h / 2 * k2[i];
    auto k3 = deriv(tmp);
    for (std::size_t i = 0; i < p.size(); ++i) tmp[i] = p[i] + h * k3[i];
    auto k4 = deriv(tmp);
    for (std::size_t i = 0; i < p.size(); ++i)
      p[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return p;
}

/// P(M(t) >= n) from the RK4 law.
inline double birth_upper_tail(double t, int n, std::size_t n_max = 200, int steps = 20000) {
  const auto p = birth_law_rk4(t, n_max, steps);
  long double below = 0.0L;
  for (int k = 0; k < n; ++k) below += p[k];
  return static_cast<double>(1.0L - below);
}

/// Composite Simpson rule on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Longest strictly increasing subsequence by the quadratic dynamic program.
inline std::size_t lis_quadratic(const std::vector<double>& v) {
  std::vector<std::size_t> best(v.size(), 1);
  std::size_t out = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (v[j] < v[i]) best[i] = std::max(best[i], best[j] + 1);
    out = std::max(out, best[i]);
  }
  return out;
}

}  // namespace oracle
