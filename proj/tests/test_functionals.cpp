#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "compactlab/analytics.hpp"
#include "compactlab/functionals.hpp"

using namespace compactlab;

namespace {

const std::vector<double> kOrigin1{0.0};

PathSample frozen_path(std::vector<double> coords, double h) {
  return PathSample{h, 1, 0, std::move(coords)};
}

PathSample subsample(const PathSample& p, std::size_t every) {
  PathSample s{p.step_h * static_cast<double>(every), p.dim, p.seed, {}};
  for (std::size_t k = 0; k < p.size(); k += every)
    for (double v : p.position(k)) s.coords.push_back(v);
  return s;
}

}  // namespace

TEST(ExitTime, GridExamples) {
  const auto iv = Domain::interval(-1.0, 1.0);
  EXPECT_EQ(exit_time(frozen_path({0.0, 0.5, 1.5}, 1.0), iv), 2.0);
  EXPECT_EQ(exit_time(frozen_path({3.0, 0.0}, 1.0), iv), 0.0);
  EXPECT_FALSE(exit_time(sample_path(ProcessSpec(1.0, 1), kOrigin1, 5.0, 0.01, 1), Domain::full_space(1)).has_value());
}

TEST(MeanExitTime, BrownianIntervalAndBall) {
  const auto r = estimate_mean_exit_time(ProcessSpec(2.0, 1), kOrigin1, Domain::interval(-1.0, 1.0), 30.0, 1e-3, 20'000, 3);
  EXPECT_NEAR(r.mean, 1.0, std::max(3.0 * r.std_error, 0.01));
  const std::vector<double> c{0.1, 0.0};
  const auto b = estimate_mean_exit_time(ProcessSpec(2.0, 2), c, Domain::ball({0.0, 0.0}, 0.5), 10.0, 1e-4, 20'000, 4);
  const double want = (0.25 - 0.01) / 2.0;
  EXPECT_NEAR(b.mean, want, std::max(3.0 * b.std_error, 0.01 * want));
  EXPECT_EQ(b.status, EstimatorStatus::Ok);
}

TEST(MeanExitTime, CauchyIntervalMatchesGetoor) {
  const ProcessSpec spec(1.0, 1);
  // Closed form at x = 0, r = 1 is exactly 1 for alpha = 1, d = 1.
  EXPECT_NEAR(mean_exit_time_ball(spec, 1.0, 0.0), 1.0, 1e-14);
  const auto r = estimate_mean_exit_time(spec, kOrigin1, Domain::interval(-1.0, 1.0), 50.0, 1e-3, 20'000, 3);
  EXPECT_NEAR(r.mean, 1.0, std::max(3.0 * r.std_error, 0.02));
}

TEST(MeanExitTime, StepRefinementDriftWithinNoise) {
  const ProcessSpec spec(2.0, 1);
  const auto iv = Domain::interval(-1.0, 1.0);
  const std::vector<double> x0{0.3};
  const auto a = estimate_mean_exit_time(spec, x0, iv, 30.0, 2e-3, 20'000, 8);
  const auto b = estimate_mean_exit_time(spec, x0, iv, 30.0, 1e-3, 20'000, 9);
  EXPECT_LT(std::abs(a.mean - b.mean), 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST(MeanExitTime, CensoringRaisesSurvivorWarning) {
  const auto r = estimate_mean_exit_time(ProcessSpec(2.0, 1), kOrigin1, Domain::interval(-5.0, 5.0), 0.5, 1e-2, 1000, 1);
  EXPECT_EQ(r.status, EstimatorStatus::SurvivorWarning);
  EXPECT_GT(r.censored_fraction, 0.9);
}

TEST(Survival, TrivialCasesAndMonotonicity) {
  const ProcessSpec spec(2.0, 2);
  const auto ball = Domain::ball({0.0, 0.0}, 1.0);
  const std::vector<double> out{2.0, 0.0}, in{0.0, 0.0};
  EXPECT_EQ(estimate_survival(spec, out, ball, 1.0, 1e-3, 100, 1).mean, 0.0);
  EXPECT_EQ(estimate_survival(spec, in, Domain::full_space(2), 1.0, 1e-3, 100, 1).mean, 1.0);
  double prev = 1.0;
  for (double t : {0.05, 0.2, 0.5, 1.0, 3.0}) {
    const double s = estimate_survival(spec, in, ball, t, 1e-3, 4000, 6).mean;
    EXPECT_LE(s, prev) << t;
    prev = s;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(ResolventR1, ConservativeFullSpaceIsOne) {
  const auto r = estimate_resolvent_r1(ProcessSpec(1.5, 1), kOrigin1, Lifetime{}, 1e-2, 10, 1);
  EXPECT_NEAR(r.mean, 1.0, 1e-12);
  EXPECT_EQ(r.std_error, 0.0);
}

TEST(ResolventR1, SmallBallFirstOrderExpansion) {
  const ProcessSpec spec(2.0, 1);
  const Lifetime life{Domain::interval(-0.1, 0.1), KillingPotential::none()};
  const auto r = estimate_resolvent_r1(spec, kOrigin1, life, 1e-5, 20'000, 5);
  const auto tau = estimate_mean_exit_time(spec, kOrigin1, *life.domain, 1.0, 1e-5, 20'000, 5);
  EXPECT_LE(r.mean, tau.mean);
  EXPECT_GT(r.mean / tau.mean, 0.98);
  EXPECT_NEAR(tau.mean, 0.01, std::max(3.0 * tau.std_error, 2e-4));
}

TEST(ResolventR1, BoundedByOne) {
  const Lifetime life{Domain::interval(-3.0, 3.0), KillingPotential::constant(0.2)};
  const auto r = estimate_resolvent_r1(ProcessSpec(0.8, 1), kOrigin1, life, 1e-2, 2000, 2);
  EXPECT_GT(r.mean, 0.0);
  EXPECT_LE(r.mean, 1.0);
}

TEST(FeynmanKac, ConstantPotentials) {
  const auto p = sample_path(ProcessSpec(2.0, 1), kOrigin1, 2.0, 1e-3, 3);
  EXPECT_EQ(feynman_kac_weight(p, KillingPotential::none(), 2.0), 1.0);
  EXPECT_NEAR(feynman_kac_weight(p, KillingPotential::constant(1.5), 2.0), std::exp(-3.0), 1e-14);
  const double w = feynman_kac_weight(p, KillingPotential::power(0.0, 1.0, 2.0), 2.0);
  EXPECT_GT(w, 0.0);
  EXPECT_LE(w, 1.0);
}

TEST(FeynmanKac, LogWeightSurvivesUnderflow) {
  // Frozen at x = 40 for t = 1: A = 1600, beyond the double range of exp(-A).
  const auto p = frozen_path(std::vector<double>(101, 40.0), 0.01);
  const auto v = KillingPotential::power(0.0, 1.0, 2.0);
  EXPECT_NEAR(feynman_kac_log_weight(p, v, 1.0), -1600.0, 1e-9);
  EXPECT_EQ(feynman_kac_weight(p, v, 1.0), 0.0);
  EXPECT_EQ(feynman_kac_log_weight(p, KillingPotential::none(), 1.0), 0.0);
}

TEST(FeynmanKac, FirstOrderInStep) {
  // Mean |w_h - w_fine| over fixed Brownian paths halves with h.
  const auto v = KillingPotential::power(0.0, 1.0, 2.0);
  double err[3] = {0.0, 0.0, 0.0};
  const std::size_t every[3] = {64, 32, 16};
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto path = sample_path(ProcessSpec(2.0, 1), kOrigin1, 1.0, 1.0 / 4096.0, 100 + i);
    const double fine = feynman_kac_weight(path, v, 1.0);
    for (int j = 0; j < 3; ++j) err[j] += std::abs(feynman_kac_weight(subsample(path, every[j]), v, 1.0) - fine);
  }
  EXPECT_GT(err[0] / err[1], 1.6);
  EXPECT_LT(err[0] / err[1], 2.6);
  EXPECT_GT(err[1] / err[2], 1.6);
  EXPECT_LT(err[1] / err[2], 2.6);
}

TEST(FeynmanKac, NegativeCustomPotentialIsAContractViolation) {
  const auto v = KillingPotential::custom([](std::span<const double> x) { return x[0]; });
  const auto p = frozen_path({-1.0, -1.0}, 0.5);
  EXPECT_THROW(feynman_kac_weight(p, v, 0.5), ContractViolation);
}

TEST(KilledLifetime, ConstantPotential) {
  for (double c : {0.5, 2.0}) {
    const auto r = estimate_killed_lifetime_mean(ProcessSpec(2.0, 1), kOrigin1, KillingPotential::constant(c), 1e-2, 200, 1);
    EXPECT_NEAR(r.lifetime.mean, 1.0 / c, 1e-9) << c;
    EXPECT_NEAR(r.p_hat, std::exp(-c), 1e-12) << c;
    EXPECT_GT(r.geometric_bound, 1.0 / c) << c;
    EXPECT_NEAR(r.geometric_bound, 1.0 / (1.0 - std::exp(-c)), 1e-9);
  }
}

TEST(KilledLifetime, QuadraticPotentialDecreasesAwayFromOrigin) {
  const auto v = KillingPotential::power(0.0, 1.0, 2.0);
  double prev = 1e9;
  for (double x : {0.0, 2.0, 4.0, 8.0}) {
    const std::vector<double> x0{x};
    const auto r = estimate_killed_lifetime_mean(ProcessSpec(2.0, 1), x0, v, 1e-3, 2000, 7);
    EXPECT_LT(r.lifetime.mean, prev) << x;
    EXPECT_LE(r.lifetime.mean, r.upper_estimate);
    prev = r.lifetime.mean;
  }
}

TEST(KilledLifetime, DomainWithoutKillingIsMeanExitTime) {
  const Lifetime life{Domain::interval(-1.0, 1.0), KillingPotential::none()};
  const auto r = estimate_killed_lifetime_mean(ProcessSpec(2.0, 1), kOrigin1, life, 1e-3, 10'000, 2);
  EXPECT_NEAR(r.lifetime.mean, 1.0, std::max(3.0 * r.lifetime.std_error, 0.01));
}

TEST(TimeChange, UnitWeightIsIdentity) {
  const auto one = TimeChangeWeight::radial(0.0, [](double) { return 1.0; }, {});
  const auto p = sample_path(ProcessSpec(1.5, 1), kOrigin1, 1.0, 0.01, 2);
  const auto tc = time_change_clock(p, one);
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(tc.clock()[k], p.time(k), 1e-12);
  EXPECT_NEAR(*tc.inverse(0.37), 0.37, 1e-12);
}

TEST(TimeChange, ClockBelowRealTime) {
  const auto w = TimeChangeWeight::extremal(2.0);
  const auto p = sample_path(ProcessSpec(0.7, 1), kOrigin1, 3.0, 0.01, 5);
  const auto tc = time_change_clock(p, w);
  for (std::size_t k = 0; k < p.size(); ++k) {
    ASSERT_LE(tc.clock()[k], p.time(k) + 1e-12);
    if (k > 0) {
      ASSERT_GE(tc.clock()[k], tc.clock()[k - 1]);
    }
  }
  EXPECT_FALSE(tc.inverse(tc.clock_end() + 1.0).has_value());
  EXPECT_TRUE(tc.position_at(0.5 * tc.clock_end()).has_value());
}

TEST(TimeChange, FrozenPathRate) {
  const auto w = TimeChangeWeight::extremal(2.0);
  const auto tc = time_change_clock(frozen_path(std::vector<double>(101, 10.0), 0.1), w);
  EXPECT_NEAR(tc.clock_end(), 10.0 / 101.0, 1e-12);
  EXPECT_NEAR(*tc.inverse(1.0 / 101.0), 1.0, 1e-9);
}

TEST(TimeChange, WeightValidation) {
  EXPECT_THROW(TimeChangeWeight::extremal(1.0, 0.5), ArgumentError);
  const std::vector<double> radii{0.0, 1.0, 5.0};
  EXPECT_THROW(TimeChangeWeight::radial(2.0, [](double r) { return 1.0 + r; }, radii), ArgumentError);
  EXPECT_NO_THROW(TimeChangeWeight::radial(2.0, [](double r) { return 2.0 + r * r; }, radii));
}
