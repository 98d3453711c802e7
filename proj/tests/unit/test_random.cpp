#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qerisk/random.hpp"
#include "qerisk/stats.hpp"

using namespace qerisk;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerZero) {
  const Philox4x32 gen(Philox4x32::Key{0u, 0u});
  const auto out = gen({0u, 0u, 0u, 0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const Philox4x32 gen(Philox4x32::Key{0xffffffffu, 0xffffffffu});
  const auto out = gen({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const Philox4x32 gen(Philox4x32::Key{0xa4093822u, 0x299f31d0u});
  const auto out = gen({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, SeedSplitsIntoKeyWords) {
  const Philox4x32 gen(0x0123456789abcdefULL);
  EXPECT_EQ(gen.key()[0], 0x89abcdefu);
  EXPECT_EQ(gen.key()[1], 0x01234567u);
}

TEST(OpenUniform, StaysInsideOpenInterval) {
  EXPECT_GT(open_uniform(0u, 0u), 0.0);
  EXPECT_LT(open_uniform(0xffffffffu, 0xffffffffu), 1.0);
}

TEST(CounterStream, ReproducibleAndStreamSeparated) {
  CounterStream a(9, 1), b(9, 1), c(9, 2);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs = differs || x != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(CounterStream, NormalMoments) {
  CounterStream s(4, 0);
  std::vector<double> v(200000);
  for (auto& x : v) x = s.normal();
  const auto m = mean_estimate(v);
  EXPECT_LT(std::abs(m.value), 4.0 * m.std_error);
  EXPECT_NEAR(sample_variance(v), 1.0, 0.01);
}

TEST(PoissonInverse, MatchesMeanAndEdges) {
  EXPECT_EQ(poisson_inverse(0.0, 0.5), 0);
  CounterStream s(3, 5);
  std::vector<double> v(200000);
  for (auto& x : v) x = poisson_inverse(0.7, s.uniform());
  const auto m = mean_estimate(v);
  EXPECT_LT(std::abs(m.value - 0.7), 4.0 * m.std_error);
  EXPECT_NEAR(sample_variance(v), 0.7, 0.01);
}

TEST(Stats, CompensatedMeanOfConstantIsExact) {
  const std::vector<double> v(100001, 0.1);
  EXPECT_EQ(mean(v), 0.1);
}

TEST(Stats, WeightedMeanWithUnitWeightsIsPlainMean) {
  const std::vector<double> x{0.3, -1.2, 2.5, 0.7};
  const std::vector<double> w(4, 1.0);
  EXPECT_EQ(weighted_mean_estimate(w, x).value, mean(x));
}

TEST(Stats, GaussLegendreIntegratesPolynomialsExactly) {
  const auto q = gauss_legendre_unit(4);
  double s0 = 0.0, s7 = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_GT(q.nodes[j], 0.0);
    EXPECT_LT(q.nodes[j], 1.0);
    s0 += q.weights[j];
    s7 += q.weights[j] * std::pow(q.nodes[j], 7);
  }
  EXPECT_NEAR(s0, 1.0, 1e-14);
  EXPECT_NEAR(s7, 1.0 / 8.0, 1e-14);
}

TEST(Stats, LogMeanExpSurvivesLargeExponents) {
  const std::vector<double> v{1000.0, 1000.0};
  EXPECT_DOUBLE_EQ(log_mean_exp(v), 1000.0);
}
