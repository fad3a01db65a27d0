#pragma once

// Gamma function, stable Green function, the J_{gamma1,gamma2} integral and
// the R_0^mu bound used for time-changed processes.
//
// Green constant: c(d,alpha) = 2^{1-alpha} pi^{-d/2} Gamma((d-alpha)/2) / Gamma(alpha/2).
// For alpha = 2 this is the Green function constant of Brownian motion with
// generator (1/2)Laplacian (1/(2 pi) in d = 3). For alpha < 2 it is the
// constant for exponent |xi|^alpha / 2; under this library's |xi|^alpha
// convention the Green function is c(d,alpha)/2 |x-y|^{alpha-d}
// (see green_constant_for).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "compactlab/errors.hpp"
#include "compactlab/functionals.hpp"
#include "compactlab/process.hpp"

namespace compactlab {

inline double gamma_fn(double s) {
  detail::require(s > 0.0, "Gamma(s) requires s > 0");
  return std::tgamma(s);
}

inline double green_constant(int d, double alpha) {
  detail::require(alpha > 0.0 && alpha <= 2.0, "alpha ∈ (0,2] required");
  detail::require(static_cast<double>(d) > alpha, "d > α required for transience");
  return std::pow(2.0, 1.0 - alpha) * std::pow(std::numbers::pi, -0.5 * d) * gamma_fn(0.5 * (d - alpha)) /
         gamma_fn(0.5 * alpha);
}

/// Green constant of the process described by `spec`.
inline double green_constant_for(const ProcessSpec& spec) {
  const double c = green_constant(spec.dim(), spec.alpha());
  return spec.is_brownian() ? c : 0.5 * c;
}

inline double green_function(std::span<const double> x, std::span<const double> y, int d, double alpha) {
  detail::require(x.size() == static_cast<std::size_t>(d) && y.size() == x.size(), "point dimension mismatch");
  const double r = Domain::distance(x, y);
  if (r == 0.0) throw ArgumentError("Green function is singular at x = y");
  return green_constant(d, alpha) * std::pow(r, alpha - d);
}

/// E_x[tau] for the ball B(0, r) (|x| < r): (r^2 - |x|^2)/d for Brownian motion
/// with generator (1/2)Laplacian; for alpha < 2 and exponent |xi|^alpha,
/// Gamma(d/2) (r^2 - |x|^2)^{alpha/2} / (2^alpha Gamma(1 + alpha/2) Gamma((d + alpha)/2)).
inline double mean_exit_time_ball(const ProcessSpec& spec, double r, double x_norm) {
  detail::require(r > 0.0 && x_norm >= 0.0 && x_norm < r, "mean exit time needs |x| < r");
  const double q = r * r - x_norm * x_norm;
  const double d = spec.dim();
  if (spec.is_brownian()) return q / d;
  const double a = spec.alpha();
  return gamma_fn(0.5 * d) * std::pow(q, 0.5 * a) / (std::pow(2.0, a) * gamma_fn(1.0 + 0.5 * a) * gamma_fn(0.5 * (d + a)));
}

struct JParams {
  double gamma1 = 0.5;
  double gamma2 = 2.0;
  int dim = 1;

  void validate() const {
    detail::require(dim >= 1 && dim <= 3, "J integral is implemented for d ∈ {1,2,3}");
    detail::require(gamma1 >= 0.0 && gamma1 < dim, "J needs 0 ≤ γ1 < d");
    detail::require(gamma2 > 0.0, "J needs γ2 > 0");
    detail::require(gamma1 + gamma2 > dim, "J needs γ1 + γ2 > d for finiteness");
  }
};

struct QuadratureValue {
  double value = 0.0;
  double error = 0.0;  ///< absolute error estimate
};

namespace detail {

inline void accumulate(QuadratureValue& acc, double v, double err) {
  acc.value += v;
  acc.error += std::abs(err);
}

/// int_a^b f, finite interval, endpoint singularities allowed.
inline void finite_piece(QuadratureValue& acc, const std::function<double(double)>& f, double a, double b,
                         double tol) {
  if (!(b > a)) return;
  boost::math::quadrature::tanh_sinh<double> q;
  double err = 0.0;
  const double v = q.integrate(f, a, b, tol, &err);
  accumulate(acc, v, err * std::max(1.0, std::abs(v)));
}

/// int_a^inf f.
inline void tail_piece(QuadratureValue& acc, const std::function<double(double)>& f, double a, double tol) {
  boost::math::quadrature::exp_sinh<double> q;
  double err = 0.0;
  const double v = q.integrate([&](double u) { return f(a + u); }, 0.0, std::numeric_limits<double>::infinity(),
                               tol, &err);
  accumulate(acc, v, err * std::max(1.0, std::abs(v)));
}

/// (r+rho)^p - |r-rho|^p without cancellation when rho >> r (or r >> rho).
inline double power_difference(double r, double rho, double p) {
  const double big = std::max(r, rho), small = std::min(r, rho);
  const double u = small / big;
  if (u == 1.0) return std::pow(2.0 * big, p);
  const double lo = std::log1p(-u), hi = std::log1p(u);
  return std::pow(big, p) * std::exp(p * lo) * std::expm1(p * (hi - lo));
}

/// Bracket ((r+rho)^{2-g} - |r-rho|^{2-g}) / (2-g), with the g = 2 limit log.
inline double radial_bracket(double r, double rho, double g) {
  const double p = 2.0 - g;
  if (std::abs(p) < 1e-12) return std::log((r + rho) / std::abs(r - rho));
  return power_difference(r, rho, p) / p;
}

}  // namespace detail

/// int_{R^d} |x-y|^{-gamma1} g(|y|) dy for a radial profile g.
inline QuadratureValue radial_singular_integral(double gamma1, int d, const std::function<double(double)>& g,
                                                std::span<const double> x, double tol = 1e-10) {
  detail::require(x.size() == static_cast<std::size_t>(d), "point dimension mismatch");
  detail::require(gamma1 >= 0.0 && gamma1 < d, "singular exponent must satisfy 0 ≤ γ1 < d");
  const double r = Domain::norm(x);
  QuadratureValue acc;

  if (d == 1) {
    // y = x ± u; u^{-gamma1} removed by u = v^k, k = 1/(1-gamma1).
    const double k = 1.0 / (1.0 - gamma1);
    auto along = [&](double u) { return g(std::abs(r + u)) + g(std::abs(r - u)); };
    auto smooth = [&](double v) { return k * along(std::pow(v, k)) * std::pow(v, k - 1.0 - k * gamma1); };
    const double split = r > 0.0 ? r : 1.0;
    detail::finite_piece(acc, smooth, 0.0, std::pow(split, 1.0 / k), tol);
    detail::finite_piece(acc, [&](double u) { return std::pow(u, -gamma1) * along(u); }, split, split + 1.0, tol);
    detail::tail_piece(acc, [&](double u) { return std::pow(u, -gamma1) * along(u); }, split + 1.0, tol);
    return acc;
  }

  if (d == 2) {
    // Polar coordinates about the origin; angular integral by tanh-sinh.
    auto angular = [&](double rho) {
      if (r == 0.0) return 2.0 * std::numbers::pi * std::pow(rho, -gamma1);
      QuadratureValue in;
      detail::finite_piece(
          in,
          [&](double th) {
            const double s = 2.0 * std::sin(0.5 * th);
            const double dist2 = (r - rho) * (r - rho) + r * rho * s * s;
            return std::pow(dist2, -0.5 * gamma1);
          },
          0.0, std::numbers::pi, tol);
      return 2.0 * in.value;
    };
    auto f = [&](double rho) { return rho * g(rho) * angular(rho); };
    const double split = r > 0.0 ? r : 1.0;
    detail::finite_piece(acc, f, 0.0, split, tol);
    detail::finite_piece(acc, f, split, split + 1.0, tol);
    detail::tail_piece(acc, f, split + 1.0, tol);
    return acc;
  }

  // d = 3: the angular integral is closed form.
  std::function<double(double)> f;
  if (r == 0.0)
    f = [&](double rho) { return 4.0 * std::numbers::pi * std::pow(rho, 2.0 - gamma1) * g(rho); };
  else
    f = [&](double rho) {
      if (rho == 0.0) return 0.0;
      return 2.0 * std::numbers::pi * rho * g(rho) * detail::radial_bracket(r, rho, gamma1) / r;
    };
  const double split = r > 0.0 ? r : 1.0;
  detail::finite_piece(acc, f, 0.0, split, tol);
  detail::finite_piece(acc, f, split, split + 1.0, tol);
  detail::tail_piece(acc, f, split + 1.0, tol);
  return acc;
}

/// J_{gamma1,gamma2}(x) = int dy / (|x-y|^{gamma1} (1 + |y|^{gamma2})).
inline QuadratureValue j_integral_with_error(const JParams& p, std::span<const double> x, double tol = 1e-10) {
  p.validate();
  const double g2 = p.gamma2;
  return radial_singular_integral(p.gamma1, p.dim, [g2](double rho) { return 1.0 / (1.0 + std::pow(rho, g2)); }, x,
                                  tol);
}

inline double j_integral(const JParams& p, std::span<const double> x, double tol = 1e-10) {
  return j_integral_with_error(p, x, tol).value;
}

enum class JBoundCase { SubCritical, Critical, SuperCritical };  ///< gamma2 <, =, > d

inline JBoundCase j_bound_case(const JParams& p) {
  if (p.gamma2 < p.dim) return JBoundCase::SubCritical;
  if (p.gamma2 == p.dim) return JBoundCase::Critical;
  return JBoundCase::SuperCritical;
}

/// Shape of the large-|x| bound: |x|^{d-(g1+g2)}, (1+|x|)^{-g1} log|x|, (1+|x|)^{-g1}.
inline double j_bound_shape(const JParams& p, double r) {
  switch (j_bound_case(p)) {
    case JBoundCase::SubCritical: return std::pow(r, p.dim - (p.gamma1 + p.gamma2));
    case JBoundCase::Critical: return std::pow(1.0 + r, -p.gamma1) * std::log(r);
    case JBoundCase::SuperCritical: return std::pow(1.0 + r, -p.gamma1);
  }
  return 0.0;
}

struct JBoundFit {
  JBoundCase bound_case = JBoundCase::SuperCritical;
  double constant = 0.0;          ///< fitted c_i (max training ratio times the margin)
  double max_train_ratio = 0.0;
  double max_holdout_ratio = 0.0;
  bool holdout_pass = false;
  std::vector<std::pair<double, double>> train, holdout;  ///< (|x|, J/shape)
};

/// Fits c_i on `train` radii and verifies J <= c_i * shape on `holdout` radii.
/// Probes are placed on the first axis. The critical case needs radii > 1.
inline JBoundFit fit_j_bound(const JParams& p, std::span<const double> train, std::span<const double> holdout,
                             double margin = 1.1) {
  p.validate();
  detail::require(!train.empty() && !holdout.empty(), "bound fit needs training and held-out probes");
  JBoundFit fit;
  fit.bound_case = j_bound_case(p);
  auto ratio = [&](double r) {
    detail::require(r > (fit.bound_case == JBoundCase::Critical ? 1.0 : 0.0), "probe radius outside the bound's range");
    Point x(static_cast<std::size_t>(p.dim), 0.0);
    x[0] = r;
    return j_integral(p, x) / j_bound_shape(p, r);
  };
  for (double r : train) {
    const double q = ratio(r);
    fit.train.emplace_back(r, q);
    fit.max_train_ratio = std::max(fit.max_train_ratio, q);
  }
  fit.constant = margin * fit.max_train_ratio;
  for (double r : holdout) {
    const double q = ratio(r);
    fit.holdout.emplace_back(r, q);
    fit.max_holdout_ratio = std::max(fit.max_holdout_ratio, q);
  }
  fit.holdout_pass = std::isfinite(fit.constant) && fit.max_holdout_ratio <= fit.constant;
  return fit;
}

struct R0MuRow {
  Point x;
  double quadrature = 0.0;  ///< c(d,alpha) int |x-y|^{alpha-d} W(y)^{-1} dy
  double bound = 0.0;       ///< c(d,alpha) J_{d-alpha,beta}(x)
  double tolerance = 0.0;
  bool pass = false;
};

struct R0MuCheck {
  std::vector<R0MuRow> rows;
  bool all_pass = false;
  bool decay_checked = false;
  bool quadrature_decreasing = false;
  bool bound_decreasing = false;
  std::string warning;
};

/// Compares R_0^mu 1(x) with its bound c(d,alpha) J_{d-alpha,beta}(x) on
/// probes (ordered by increasing |x| for the decay assertion). Both columns use
/// the constant c(d,alpha) as written; the inequality does not depend on the
/// normalization.
inline R0MuCheck r0_mu_bound_check(const TimeChangeWeight& w, int d, double alpha, std::span<const Point> probes,
                                   double tol = 1e-10) {
  detail::require(static_cast<double>(d) > alpha, "d > α required for transience of the stable process");
  detail::require(!probes.empty(), "r0_mu_bound_check needs probes");
  R0MuCheck out;
  const double c = green_constant(d, alpha);
  const double beta = w.beta();
  const bool finite = beta > alpha;
  if (!finite) out.warning = "beta <= alpha: R_0^mu 1 is infinite and the decay hypothesis beta > alpha is unmet; decay assertion skipped";
  out.all_pass = true;
  for (const auto& x : probes) {
    detail::require(x.size() == static_cast<std::size_t>(d), "probe dimension mismatch");
    R0MuRow row;
    row.x = x;
    if (finite) {
      const auto q = radial_singular_integral(d - alpha, d, [&](double rho) { return 1.0 / w.at_radius(rho); }, x, tol);
      const auto b = j_integral_with_error(JParams{d - alpha, beta, d}, x, tol);
      row.quadrature = c * q.value;
      row.bound = c * b.value;
      row.tolerance = c * (q.error + b.error) + 1e-9 * std::abs(row.bound);
    } else {
      row.quadrature = row.bound = std::numeric_limits<double>::infinity();
    }
    row.pass = !finite || row.quadrature <= row.bound + row.tolerance;
    out.all_pass = out.all_pass && row.pass;
    out.rows.push_back(std::move(row));
  }
  if (finite) {
    out.decay_checked = true;
    out.quadrature_decreasing = out.bound_decreasing = true;
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
      out.quadrature_decreasing = out.quadrature_decreasing && out.rows[i].quadrature < out.rows[i - 1].quadrature;
      out.bound_decreasing = out.bound_decreasing && out.rows[i].bound < out.rows[i - 1].bound;
    }
  }
  return out;
}

}  // namespace compactlab
