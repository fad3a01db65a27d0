#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "compactlab/process.hpp"
#include "compactlab/rng.hpp"
#include "compactlab/stats.hpp"
#include "oracles.hpp"

using namespace compactlab;

namespace {

std::vector<double> draws(double alpha, double h, std::size_t n, std::uint64_t seed) {
  const ProcessSpec spec(alpha, 1);
  const IncrementSampler s(spec, h);
  RandomStream rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) s.draw(rng, {&v, 1});
  return out;
}

}  // namespace

TEST(ProcessSpec, RejectsOutOfRangeAlpha) {
  EXPECT_THROW(ProcessSpec(2.5, 1), ArgumentError);
  EXPECT_THROW(ProcessSpec(0.0, 1), ArgumentError);
  EXPECT_THROW(ProcessSpec(1.0, 0), ArgumentError);
  EXPECT_EQ(ProcessSpec(2.0, 3).convention(), Convention::BrownianHalfLaplacian);
  EXPECT_EQ(ProcessSpec(1.5, 3).convention(), Convention::StableUnitExponent);
}

TEST(SampleIncrement, BrownianUnitVariance) {
  RunningStats st;
  for (double x : draws(2.0, 1.0, 1'000'000, 1)) st.add(x * x);
  EXPECT_GE(st.mean(), 0.99);
  EXPECT_LE(st.mean(), 1.01);
}

TEST(SampleIncrement, CauchyHalfMassInUnitInterval) {
  const auto xs = draws(1.0, 1.0, 400'000, 2);
  const double frac = static_cast<double>(std::count_if(xs.begin(), xs.end(), [](double x) { return std::abs(x) <= 1.0; })) /
                      static_cast<double>(xs.size());
  EXPECT_NEAR(frac, 0.5, 4.0 * std::sqrt(0.25 / static_cast<double>(xs.size())));
}

TEST(SampleIncrement, FourierOracleMatchesCauchy) {
  for (double x : {-3.0, -0.5, 0.2, 1.0, 7.0})
    EXPECT_NEAR(oracle::stable_cdf(x, 1.0), 0.5 + std::atan(x) / std::numbers::pi, 1e-8);
}

TEST(SampleIncrement, MatchesStableLawByKolmogorovSmirnov) {
  // h = 1 law has characteristic function exp(-|xi|^alpha).
  for (double alpha : {0.5, 1.0, 1.5, 1.9}) {
    const auto xs = draws(alpha, 1.0, 20'000, 30 + static_cast<std::uint64_t>(10 * alpha));
    const double d = oracle::ks_statistic(xs, [alpha](double x) { return oracle::stable_cdf(x, alpha); });
    EXPECT_LT(d, 1.949 / std::sqrt(20'000.0)) << "alpha " << alpha;
  }
}

TEST(SampleIncrement, ScalingLawTwoSample) {
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    const double h = 0.3;
    auto a = draws(alpha, 2.0 * h, 100'000, 41);
    for (auto& v : a) v *= std::pow(2.0, -1.0 / alpha);
    const auto b = draws(alpha, h, 100'000, 42);
    EXPECT_LT(oracle::ks_two_sample(a, b), oracle::ks_two_sample_critical(a.size(), b.size())) << "alpha " << alpha;
  }
}

TEST(SampleIncrement, BrownianTakesNoSubordinationPath) {
  // alpha = 2 consumes exactly one normal per coordinate.
  const ProcessSpec spec(2.0, 1);
  const IncrementSampler s(spec, 0.25);
  RandomStream a(9), b(9);
  double x = 0.0;
  s.draw(a, {&x, 1});
  EXPECT_DOUBLE_EQ(x, 0.5 * b.normal());
}

TEST(Subordinator, LevyHalfKolmogorovSmirnov) {
  RandomStream rng(5);
  std::vector<double> xs(1'000'000);
  for (auto& v : xs) v = sample_subordinator_increment(0.5, 1.0, rng);
  EXPECT_TRUE(std::all_of(xs.begin(), xs.end(), [](double v) { return v >= 0.0; }));
  EXPECT_LT(oracle::ks_statistic(xs, oracle::levy_half_cdf), 0.005);
}

TEST(Subordinator, IndependentIncrementsTwoSample) {
  for (double index : {0.25, 0.5, 0.75}) {
    RandomStream r1(11), r2(12);
    std::vector<double> sum(100'000), two(100'000);
    for (auto& v : sum) v = sample_subordinator_increment(index, 0.7, r1) + sample_subordinator_increment(index, 0.7, r1);
    for (auto& v : two) v = sample_subordinator_increment(index, 1.4, r2);
    EXPECT_LT(oracle::ks_two_sample(sum, two), oracle::ks_two_sample_critical(sum.size(), two.size())) << index;
  }
}

TEST(SamplePath, DeterministicGivenSeed) {
  const ProcessSpec spec(1.3, 2);
  const std::vector<double> x0{0.5, -1.0};
  const auto a = sample_path(spec, x0, 2.0, 0.01, 77);
  const auto b = sample_path(spec, x0, 2.0, 0.01, 77);
  ASSERT_EQ(a.coords.size(), b.coords.size());
  EXPECT_EQ(a.coords, b.coords);
  EXPECT_NE(a.coords, sample_path(spec, x0, 2.0, 0.01, 78).coords);
  EXPECT_EQ(a.steps(), 200u);
  EXPECT_DOUBLE_EQ(a.position(0)[1], -1.0);
}

TEST(SamplePath, BrownianSecondMomentIsDimTimesT) {
  const ProcessSpec spec(2.0, 3);
  const std::vector<double> x0{1.0, 2.0, 3.0};
  const double t = 1.5;
  RunningStats st;
  for (std::uint64_t i = 0; i < 100'000; ++i) {
    const auto p = sample_path(spec, x0, t, 0.5, derive_seed(3, i));
    auto end = p.position(p.steps());
    double r2 = 0.0;
    for (int k = 0; k < 3; ++k) r2 += (end[k] - x0[k]) * (end[k] - x0[k]);
    st.add(r2);
  }
  EXPECT_NEAR(st.mean(), 3.0 * t, 3.0 * st.stderr_of_mean());
}

TEST(SamplePath, HeavyTailsForSmallAlpha) {
  // P(|X_1| > M) for alpha = 0.5 from the Fourier CDF oracle.
  const double m = 50.0;
  const double tail = 2.0 * (1.0 - oracle::stable_cdf(m, 0.5));
  ASSERT_GT(tail, 0.0);
  const ProcessSpec spec(0.5, 1);
  const std::vector<double> x0{0.0};
  std::size_t hits = 0;
  const std::size_t n = 40'000;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto p = sample_path(spec, x0, 1.0, 0.25, derive_seed(4, i));
    if (std::abs(p.position(p.steps())[0]) > m) ++hits;
  }
  const double freq = static_cast<double>(hits) / static_cast<double>(n);
  EXPECT_GT(hits, 0u);
  EXPECT_NEAR(freq, tail, 4.0 * std::sqrt(tail * (1.0 - tail) / static_cast<double>(n)));
}

TEST(SamplePath, CsvHasTimeAndCoordinates) {
  std::ostringstream os;
  const std::vector<double> x0{0.0, 0.0};
  write_csv(os, sample_path(ProcessSpec(2.0, 2), x0, 0.02, 0.01, 1));
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,x_1,x_2");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
}

TEST(Rng, StreamsDependOnlyOnSeedAndIndex) {
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
  RandomStream rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
