#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "coral/dcov.hpp"
#include "support/oracles.hpp"

using namespace coral::dcov;

namespace {

const std::vector<double> kThroughput{15.2, 16.1, 15.8, 14.9, 15.5};
const std::vector<double> kPower{9800, 10100, 10050, 9500, 9750};
const std::vector<double> kCpuFreq{1200, 1400, 1400, 1000, 1200};

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 10.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST(PairwiseDistance, TwoPoints) {
  const std::vector<double> v{1, 3};
  auto m = pairwise_distance_matrix(v);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(0, 1), 2.0);
  EXPECT_EQ(m(1, 0), 2.0);
  EXPECT_EQ(m(1, 1), 0.0);
}

TEST(PairwiseDistance, ConstantVectorIsAllZero) {
  const std::vector<double> v{5, 5, 5};
  auto m = pairwise_distance_matrix(v);
  for (double x : m.values()) EXPECT_EQ(x, 0.0);
}

TEST(PairwiseDistance, ThroughputWindowEntries) {
  auto m = pairwise_distance_matrix(kThroughput);
  EXPECT_NEAR(m(0, 1), 0.9, 1e-12);
  EXPECT_NEAR(m(0, 3), 0.3, 1e-12);
}

TEST(PairwiseDistance, RejectsShortAndNonFinite) {
  EXPECT_THROW(pairwise_distance_matrix(std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(pairwise_distance_matrix(std::vector<double>{1.0, NAN}), std::invalid_argument);
  EXPECT_THROW(pairwise_distance_matrix(std::vector<double>{1.0, INFINITY}), std::invalid_argument);
}

TEST(DoubleCenter, TwoByTwo) {
  auto c = double_center(SquareMatrix::from_rows({{0, 2}, {2, 0}}));
  EXPECT_DOUBLE_EQ(c(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(c(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(c(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(c(1, 1), -1.0);
}

TEST(DoubleCenter, ZeroMatrixStaysZero) {
  auto c = double_center(SquareMatrix::from_rows({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}));
  for (double x : c.values()) EXPECT_EQ(x, 0.0);
}

TEST(DoubleCenter, RowAndColumnSumsVanish) {
  auto c = double_center(pairwise_distance_matrix(kThroughput));
  for (std::size_t i = 0; i < c.size(); ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      row += c(i, j);
      col += c(j, i);
    }
    EXPECT_NEAR(row, 0.0, 1e-12);
    EXPECT_NEAR(col, 0.0, 1e-12);
  }
}

TEST(DoubleCenter, RejectsBadShapes) {
  EXPECT_THROW(SquareMatrix::from_rows({{0, 1}, {1}}), std::invalid_argument);
  EXPECT_THROW(double_center(SquareMatrix::from_rows({{0}})), std::invalid_argument);
}

TEST(DistanceCovariance, ConstantVectorsGiveZero) {
  const std::vector<double> v{5, 5, 5};
  EXPECT_EQ(distance_covariance_sq(v, v), 0.0);
}

TEST(DistanceCovariance, TwoPointValue) {
  // A = B = [[-0.5, 0.5], [0.5, -0.5]], so (1/4) * 4 * 0.25.
  const std::vector<double> v{1, 2};
  EXPECT_DOUBLE_EQ(distance_covariance_sq(v, v), 0.25);
  EXPECT_DOUBLE_EQ(coral::testing::direct_dcov_sq(v, v), 0.25);
}

TEST(DistanceCovariance, ThroughputAgainstCpuIsPositive) {
  const double v = distance_covariance_sq(kThroughput, kCpuFreq);
  EXPECT_GT(v, 0.0);
  const double r = std::sqrt(v / std::sqrt(distance_covariance_sq(kThroughput, kThroughput) *
                                           distance_covariance_sq(kCpuFreq, kCpuFreq)));
  EXPECT_NEAR(r, 0.94, 0.01);
}

TEST(DistanceCovariance, LengthMismatchThrows) {
  EXPECT_THROW(distance_covariance_sq(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}),
               std::invalid_argument);
}

TEST(DistanceCovariance, MatchesDirectFormula) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(2, 30)(rng);
    const auto x = random_vector(rng, n);
    const auto y = random_vector(rng, n);
    const double expected = coral::testing::direct_dcov_sq(x, y);
    EXPECT_NEAR(distance_covariance_sq(x, y), expected, 1e-9 * std::max(1.0, std::fabs(expected)));
  }
}

TEST(DistanceCorrelation, WindowExampleValues) {
  EXPECT_NEAR(distance_correlation(kThroughput, kCpuFreq), 0.94, 0.01);
  EXPECT_NEAR(distance_correlation(kPower, kCpuFreq), 0.99, 0.01);
}

TEST(DistanceCorrelation, SelfCorrelationIsOne) {
  EXPECT_NEAR(distance_correlation(kThroughput, kThroughput), 1.0, 1e-12);
}

TEST(DistanceCorrelation, ConstantSideGivesZero) {
  EXPECT_EQ(distance_correlation(kThroughput, std::vector<double>{7, 7, 7, 7, 7}), 0.0);
  EXPECT_EQ(distance_correlation(std::vector<double>{7, 7, 7, 7, 7}, kThroughput), 0.0);
}

TEST(DistanceCorrelation, TwoSamplesAlwaysOne) {
  EXPECT_NEAR(distance_correlation(std::vector<double>{1, 4}, std::vector<double>{9, -3}), 1.0, 1e-12);
}

TEST(DistanceCorrelation, ExactlySymmetric) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_vector(rng, 8);
    const auto y = random_vector(rng, 8);
    EXPECT_EQ(distance_correlation(x, y), distance_correlation(y, x));
  }
}

TEST(DistanceCorrelation, PropertiesOnRandomInputs) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> scale(0.1, 100.0);
  std::uniform_real_distribution<double> shift(-1000.0, 1000.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(2, 20)(rng);
    const auto x = random_vector(rng, n);
    auto y = random_vector(rng, n);
    const double r = distance_correlation(x, y);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    EXPECT_NEAR(r, coral::testing::direct_dcor(x, y), 1e-9);

    std::vector<double> xt(n);
    const double a = scale(rng) * (trial % 2 ? -1.0 : 1.0);
    const double b = shift(rng);
    for (std::size_t i = 0; i < n; ++i) xt[i] = a * x[i] + b;
    EXPECT_NEAR(distance_correlation(xt, y), r, 1e-9);
  }
}

TEST(DistanceCorrelation, NonLinearDependenceIsDetected) {
  std::vector<double> x, y;
  for (int i = -10; i <= 10; ++i) {
    x.push_back(i);
    y.push_back(i * i);
  }
  EXPECT_GT(distance_correlation(x, y), 0.4);
}
