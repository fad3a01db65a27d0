#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "compactlab/analytics.hpp"

using namespace compactlab;

namespace {

constexpr double kPi = std::numbers::pi;

/// d = 1 J in the distance u = |x - y|, split at the kink u = |x|.
double oracle_j_1d(double g1, double g2, double x) {
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  auto prof = [g2](double y) { return 1.0 / (1.0 + std::pow(std::abs(y), g2)); };
  auto f = [&](double u) { return std::pow(u, -g1) * (prof(x + u) + prof(x - u)); };
  const double k = std::abs(x);
  return ts.integrate(f, 0.0, k) + ts.integrate(f, k, k + 1.0) + es.integrate(f, k + 1.0, std::numeric_limits<double>::infinity());
}

/// lim |x|^{g1+g2-1} J(x) in d = 1 for g2 < 1: int |1-z|^{-g1} |z|^{-g2} dz as three Beta integrals.
double subcritical_limit_1d(double g1, double g2) {
  const double s = g1 + g2 - 1.0;
  return std::beta(1.0 - g2, 1.0 - g1) + std::beta(s, 1.0 - g1) + std::beta(1.0 - g2, s);
}

/// d = 3, gamma1 = 1 via the shell average 1/max(|x|, rho).
double oracle_j_3d_newton(double g2, double r) {
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  auto prof = [g2](double rho) { return 1.0 / (1.0 + std::pow(rho, g2)); };
  const double inner = ts.integrate([&](double rho) { return rho * rho * prof(rho) / r; }, 0.0, r);
  const double outer = es.integrate([&](double rho) { return rho * prof(rho); }, r, std::numeric_limits<double>::infinity());
  return 4.0 * kPi * (inner + outer);
}

std::vector<Point> axis_probes(int d, std::initializer_list<double> rs) {
  std::vector<Point> out;
  for (double r : rs) {
    Point x(static_cast<std::size_t>(d), 0.0);
    x[0] = r;
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST(Gamma, KnownValues) {
  EXPECT_NEAR(gamma_fn(0.5), std::sqrt(kPi), 1e-14);
  EXPECT_NEAR(gamma_fn(5.0), 24.0, 1e-12);
  EXPECT_NEAR(gamma_fn(1.5), 0.5 * std::sqrt(kPi), 1e-14);
  EXPECT_THROW(gamma_fn(0.0), ArgumentError);
}

TEST(GreenConstant, BrownianThreeDimensions) {
  EXPECT_NEAR(green_constant(3, 2.0), 1.0 / (2.0 * kPi), 1e-15);
  EXPECT_NEAR(green_constant_for(ProcessSpec(2.0, 3)), 1.0 / (2.0 * kPi), 1e-15);
  // Riesz constant Gamma((d-a)/2) / (2^a pi^{d/2} Gamma(a/2)), halved by the library for |xi|^a / 2 exponents.
  const double riesz = gamma_fn(1.25) / (std::pow(2.0, 0.5) * std::pow(kPi, 1.5) * gamma_fn(0.25));
  EXPECT_NEAR(green_constant_for(ProcessSpec(0.5, 3)), riesz, 1e-14);
  EXPECT_NEAR(green_constant(3, 0.5), 2.0 * riesz, 1e-14);
}

TEST(GreenConstant, PositiveAndRequiresTransience) {
  for (int d = 1; d <= 3; ++d)
    for (double a : {0.3, 0.7, 0.99}) EXPECT_GT(green_constant(d, a), 0.0);
  EXPECT_THROW(green_constant(1, 1.0), ArgumentError);
  EXPECT_THROW(green_constant(2, 2.0), ArgumentError);
  EXPECT_THROW(green_constant(1, 1.5), ArgumentError);
  EXPECT_THROW(green_constant(3, 2.5), ArgumentError);
}

TEST(GreenFunction, SymmetryAndScaling) {
  const std::vector<double> x{0.3, -1.0, 2.0}, y{1.5, 0.2, -0.7};
  for (double a : {0.5, 1.2, 2.0}) {
    EXPECT_DOUBLE_EQ(green_function(x, y, 3, a), green_function(y, x, 3, a));
    std::vector<double> lx, ly;
    for (int i = 0; i < 3; ++i) {
      lx.push_back(2.5 * x[i]);
      ly.push_back(2.5 * y[i]);
    }
    EXPECT_NEAR(green_function(lx, ly, 3, a), std::pow(2.5, a - 3.0) * green_function(x, y, 3, a), 1e-14);
  }
  EXPECT_THROW(green_function(x, x, 3, 1.0), ArgumentError);
}

TEST(JIntegral, ClosedFormsAtTheOrigin) {
  const std::vector<double> o1{0.0}, o2{0.0, 0.0}, o3{0.0, 0.0, 0.0};
  EXPECT_NEAR(j_integral({0.5, 2.0, 1}, o1), kPi * std::numbers::sqrt2, 1e-5);
  EXPECT_NEAR(j_integral({1.0, 4.0, 3}, o3), kPi * kPi, 1e-8);
  EXPECT_NEAR(j_integral({1.0, 3.0, 2}, o2), 4.0 * kPi * kPi / (3.0 * std::sqrt(3.0)), 1e-8);
}

TEST(JIntegral, IsEven) {
  for (double r : {0.3, 2.0, 7.0}) {
    const std::vector<double> a{r}, b{-r};
    EXPECT_NEAR(j_integral({0.5, 2.0, 1}, a), j_integral({0.5, 2.0, 1}, b), 1e-10);
  }
}

TEST(JIntegral, OneDimensionalAgainstDirectQuadrature) {
  for (double x : {0.5, 1.0, 3.0, 10.0}) {
    const std::vector<double> p{x};
    EXPECT_NEAR(j_integral({0.5, 2.0, 1}, p), oracle_j_1d(0.5, 2.0, x), 1e-7) << x;
    EXPECT_NEAR(j_integral({0.3, 1.5, 1}, p), oracle_j_1d(0.3, 1.5, x), 1e-7) << x;
  }
}

TEST(JIntegral, ThreeDimensionalShellTheorem) {
  for (double r : {0.5, 2.0, 8.0}) {
    const std::vector<double> x{0.0, r, 0.0};
    EXPECT_NEAR(j_integral({1.0, 3.0, 3}, x), oracle_j_3d_newton(3.0, r), 1e-7) << r;
  }
}

TEST(JIntegral, NoSingularityIsTranslationInvariant) {
  const double want = 4.0 * kPi * kPi / (3.0 * std::sqrt(3.0));
  for (double r : {0.0, 1.0, 5.0}) {
    const std::vector<double> x{r, 0.0};
    EXPECT_NEAR(j_integral({0.0, 3.0, 2}, x), want, 1e-7) << r;
  }
}

TEST(JIntegral, ErrorEstimateIsHonest) {
  for (double x : {0.5, 4.0}) {
    const std::vector<double> p{x};
    const auto q = j_integral_with_error({0.5, 2.0, 1}, p);
    EXPECT_LT(q.error, 1e-6);
    EXPECT_LE(std::abs(q.value - oracle_j_1d(0.5, 2.0, x)), q.error + 1e-9);
  }
}

TEST(JIntegral, RejectsDivergentParameters) {
  const std::vector<double> o{0.0};
  EXPECT_THROW(j_integral({0.5, 0.4, 1}, o), ArgumentError);
  EXPECT_THROW(j_integral({1.0, 2.0, 1}, o), ArgumentError);
  EXPECT_THROW(j_integral({0.5, 2.0, 4}, std::vector<double>(4, 0.0)), ArgumentError);
}

TEST(JBound, SuperCriticalDecayIsBounded) {
  const JParams p{0.5, 3.0, 1};
  double lo = 1e300, hi = 0.0;
  for (double r = 1.0; r <= 100.0; r *= 1.25) {
    const std::vector<double> x{r};
    const double q = j_integral(p, x) * std::pow(1.0 + r, p.gamma1);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  EXPECT_LT(hi / lo, 3.0);
  const std::vector<double> train{1.0, 2.0, 4.0, 8.0}, hold{16.0, 32.0, 64.0};
  const auto fit = fit_j_bound(p, train, hold);
  EXPECT_EQ(fit.bound_case, JBoundCase::SuperCritical);
  EXPECT_TRUE(fit.holdout_pass);
}

TEST(JBound, SubCriticalAndCriticalShapes) {
  const std::vector<double> train{2.0, 4.0, 8.0}, hold{16.0, 32.0, 64.0};
  // Sub-critical ratios rise slowly towards the far-field constant.
  const auto sub = fit_j_bound({0.5, 0.8, 1}, train, hold);
  EXPECT_EQ(sub.bound_case, JBoundCase::SubCritical);
  const double limit = subcritical_limit_1d(0.5, 0.8);
  double prev = 0.0;
  for (const auto& rows : {sub.train, sub.holdout})
    for (auto [r, q] : rows) {
      EXPECT_GT(q, prev) << r;
      EXPECT_LT(q, limit) << r;
      prev = q;
    }
  EXPECT_TRUE(fit_j_bound({0.5, 0.8, 1}, train, hold, limit / sub.max_train_ratio).holdout_pass);
  // Relative gap decays like |x|^{-0.2}: 0.038 at 1e6.
  const std::vector<double> far{1e6};
  EXPECT_NEAR(fit_j_bound({0.5, 0.8, 1}, far, far).max_train_ratio / limit, 1.0 - 0.0377, 1e-3);
  const auto crit = fit_j_bound({0.5, 1.0, 1}, train, hold);
  EXPECT_EQ(crit.bound_case, JBoundCase::Critical);
  EXPECT_TRUE(crit.holdout_pass);
  const std::vector<double> bad{1.0};
  EXPECT_THROW(fit_j_bound({0.5, 1.0, 1}, bad, hold), ArgumentError);
}

TEST(R0Mu, ExtremalWeightMeetsTheBound) {
  const auto w = TimeChangeWeight::extremal(1.0);
  const auto probes = axis_probes(1, {1.0, 2.0, 4.0, 8.0, 16.0});
  const auto c = r0_mu_bound_check(w, 1, 0.5, probes);
  EXPECT_TRUE(c.all_pass);
  EXPECT_TRUE(c.decay_checked);
  EXPECT_TRUE(c.quadrature_decreasing);
  EXPECT_TRUE(c.bound_decreasing);
  for (const auto& row : c.rows) EXPECT_NEAR(row.quadrature, row.bound, 1e-8 * row.bound);
}

TEST(R0Mu, HeavierWeightSitsBelow) {
  const std::vector<double> radii{0.0, 1.0, 4.0, 16.0};
  const auto w = TimeChangeWeight::radial(2.0, [](double r) { return 2.0 + 2.0 * r * r; }, radii);
  const auto probes = axis_probes(3, {1.0, 3.0, 9.0});
  const auto c = r0_mu_bound_check(w, 3, 1.5, probes);
  EXPECT_TRUE(c.all_pass);
  for (const auto& row : c.rows) EXPECT_LT(row.quadrature, row.bound);
}

TEST(R0Mu, BetaBelowAlphaWarnsAndSkips) {
  const auto w = TimeChangeWeight::extremal(0.3);
  const auto c = r0_mu_bound_check(w, 1, 0.5, axis_probes(1, {1.0, 2.0}));
  EXPECT_FALSE(c.warning.empty());
  EXPECT_FALSE(c.decay_checked);
  EXPECT_TRUE(std::isinf(c.rows[0].quadrature));
  EXPECT_THROW(r0_mu_bound_check(w, 1, 1.0, axis_probes(1, {1.0})), ArgumentError);
}

TEST(MeanExitTimeBall, GetoorFormula) {
  EXPECT_NEAR(mean_exit_time_ball(ProcessSpec(2.0, 2), 1.0, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(mean_exit_time_ball(ProcessSpec(2.0, 3), 2.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(mean_exit_time_ball(ProcessSpec(1.0, 1), 1.0, 0.0), 1.0, 1e-14);
  // Cauchy in d = 3: Gamma(3/2) / (2 Gamma(3/2) Gamma(2)) = 1/2 at r = 1.
  EXPECT_NEAR(mean_exit_time_ball(ProcessSpec(1.0, 3), 1.0, 0.0), 0.5, 1e-14);
  // alpha -> 2 under the |xi|^alpha exponent is Brownian motion at twice the speed.
  EXPECT_NEAR(mean_exit_time_ball(ProcessSpec(1.999999, 2), 1.0, 0.3), 0.91 / 4.0, 1e-6);
  EXPECT_THROW(mean_exit_time_ball(ProcessSpec(1.0, 1), 1.0, 1.0), ArgumentError);
}
