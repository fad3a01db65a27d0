#pragma once

// Independent reference values for the suites. Nothing here calls the
// library's own estimators.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace oracle {

/// CDF of the symmetric 1D stable law with E e^{i xi X} = exp(-|xi|^alpha),
/// by Fourier inversion: 1/2 + (1/pi) int_0^inf exp(-u^alpha) sin(x u) / u du.
inline double stable_cdf(double x, double alpha) {
  if (x == 0.0) return 0.5;
  static thread_local boost::math::quadrature::ooura_fourier_sin<double> integrator(1e-10);
  const double w = std::abs(x);
  auto f = [alpha](double u) { return std::exp(-std::pow(u, alpha)) / u; };
  const double v = integrator.integrate(f, w).first;
  const double half = v / std::numbers::pi;
  return x > 0 ? 0.5 + half : 0.5 - half;
}

/// P(S_1 <= s) for the one-sided 1/2-stable law with E e^{-lambda S} = exp(-sqrt(lambda)).
inline double levy_half_cdf(double s) { return s <= 0.0 ? 0.0 : std::erfc(1.0 / (2.0 * std::sqrt(s))); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic two-sample critical value at level 1e-3.
inline double ks_two_sample_critical(std::size_t na, std::size_t nb) {
  const double a = static_cast<double>(na), b = static_cast<double>(nb);
  return 1.949 * std::sqrt((a + b) / (a * b));
}

/// Dirichlet eigenvalues of (1/2)d^2/dx^2 on (0, L): (k pi / L)^2 / 2.
inline double half_laplacian_eigenvalue(int k, double length) {
  const double q = k * std::numbers::pi / length;
  return 0.5 * q * q;
}

/// Eigenvalues of the standard tridiagonal second difference (1/2)D2/delta^2 on n nodes.
inline double discrete_half_laplacian_eigenvalue(int k, std::size_t n, double delta) {
  const double s = std::sin(k * std::numbers::pi / (2.0 * static_cast<double>(n + 1)));
  return 2.0 * s * s / (delta * delta);
}

}  // namespace oracle
