#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pfp/analytic.hpp"

namespace a = pfp::analytic;

TEST(Borel, SmallValues) {
  EXPECT_NEAR(a::borel_pmf(1), std::exp(-1.0), 1e-14);
  EXPECT_NEAR(a::borel_pmf(3), 1.5 * std::exp(-3.0), 1e-14);
  // 10^10 e^-10 / 10!
  EXPECT_NEAR(a::borel_pmf(10), 1e9 * std::exp(-10.0) / 3628800.0, 1e-14);
}

TEST(Borel, LargeArgumentsStayFinite) {
  const double p = a::borel_pmf(1000);
  EXPECT_GT(p, 0.0);
  // Stirling: j * p(j) -> 1 / sqrt(2 pi j)
  EXPECT_NEAR(1000 * p * std::sqrt(2 * M_PI * 1000), 1.0, 1e-3);
}

TEST(Borel, PartialSumsIncreaseTowardOne) {
  double sum = 0.0;
  double last = 0.0;
  for (std::int64_t j = 1; j <= 1000000; ++j) {
    sum += a::borel_pmf(j);
    if (j % 100000 == 0) {
      EXPECT_GT(sum, last);
      EXPECT_LT(sum, 1.0);
      // tail ~ sqrt(2 / (pi j))
      EXPECT_NEAR(1.0 - sum, std::sqrt(2.0 / (M_PI * j)), 2e-3 / std::sqrt(j) + 1e-9);
      last = sum;
    }
  }
}

TEST(Borel, WeightIdentityInLogSpace) {
  for (std::int64_t j : {1, 2, 7, 50, 171, 1000, 123456}) {
    EXPECT_NEAR(std::log(static_cast<double>(j)) + a::log_borel_pmf(j), a::log_series_weight(j),
                1e-12 * (1 + std::abs(a::log_series_weight(j))));
    const double direct = -j + j * std::log(double(j)) - std::lgamma(j + 1.0);
    EXPECT_NEAR(a::log_series_weight(j), direct, 1e-9);
  }
}

TEST(Borel, DomainErrors) {
  EXPECT_THROW(a::borel_pmf(0), a::DomainError);
  EXPECT_THROW(a::borel_pmf(-3), a::DomainError);
}

TEST(MeanExitCount, Zero) {
  const auto v = a::mean_exit_count(0.0);
  EXPECT_EQ(v.value, 0.0);
  EXPECT_GE(v.terms_used, 1u);
}

TEST(MeanExitCount, TwoInsideBounds) {
  const double v = a::mean_exit_count(2.0).value;
  EXPECT_GT(v, std::sqrt(5.0) - 1.0);
  EXPECT_LT(v, 2.0);
}

TEST(MeanExitCount, MatchesOracleLaw) {
  // nu(t) = sum_n P(M(t) >= n) = E M(t) from the RK4 forward equations.
  for (double t : {0.5, 3.0, 12.0, 30.0}) {
    const auto p = oracle::birth_law_rk4(t, 250, 30000);
    long double mean = 0.0L;
    for (std::size_t n = 0; n < p.size(); ++n) mean += n * p[n];
    const auto v = a::mean_exit_count(t);
    EXPECT_NEAR(v.value, static_cast<double>(mean), 1e-9) << "t=" << t;
    EXPECT_GE(v.tail_bound, 0.0);
    EXPECT_LE(v.tail_bound, 1e-10);
  }
}

TEST(MeanExitCount, EqualsSumOfEntranceCdf) {
  for (double t : {1.0, 10.0, 30.0}) {
    double sum = 0.0;
    for (int n = 1; n <= 400; ++n) sum += a::entrance_cdf(n, t);
    EXPECT_NEAR(a::mean_exit_count(t).value, sum, 1e-9) << "t=" << t;
  }
}

TEST(MeanExitCount, GapNearTwoThirds) {
  const double g4 = a::mean_gap(1e4).value;
  const double g6 = a::mean_gap(1e6).value;
  EXPECT_NEAR(g4, 2.0 / 3.0, 0.02);
  EXPECT_NEAR(g6, 2.0 / 3.0, 0.01);
  // Independent route: mean of the uniformized law.
  const auto table = a::birth_distribution(1e6, a::suggested_state_limit(1e6));
  EXPECT_LT(table.deficit, 1e-12);
  EXPECT_NEAR(std::sqrt(2e6) - table.mean(), g6, 1e-7);
}

TEST(MeanExitCount, BoundsOnLogGrid) {
  for (int i = 0; i < 30; ++i) {
    const double t = 0.1 * std::pow(1e7, i / 29.0);
    const auto v = a::mean_exit_count(t);
    const auto b = a::mean_bounds(t);
    EXPECT_GT(v.value - v.tail_bound, b.lower) << "t=" << t;
    EXPECT_LT(v.value + v.tail_bound, b.upper) << "t=" << t;
  }
}

TEST(MeanExitCount, RejectsBadArguments) {
  EXPECT_THROW(a::mean_exit_count(-1.0), a::DomainError);
  EXPECT_THROW(a::mean_exit_count(1.0, 0.0), a::DomainError);
  EXPECT_THROW(a::mean_exit_count(1e9, 1e-30), a::ConvergenceError);
}

TEST(MeanBounds, Values) {
  const auto b = a::mean_bounds(2.0);
  EXPECT_NEAR(b.lower, 1.2360679774997896, 1e-15);
  EXPECT_NEAR(b.upper, 2.0, 1e-15);
  for (double t : {1e-8, 1e-3, 0.5, 7.0, 1e3, 1e8}) {
    const auto c = a::mean_bounds(t);
    EXPECT_LT(c.upper - c.lower, 1.0);
    EXPECT_GT(c.upper, c.lower);
  }
  const auto tiny = a::mean_bounds(1e-12);
  EXPECT_LT(tiny.upper, 2e-6);
  EXPECT_GT(tiny.lower, 0.0);
  EXPECT_THROW(a::mean_bounds(0.0), a::DomainError);
}

TEST(EntranceCdf, ClosedForms) {
  for (double t : {0.0, 0.3, 2.0, 17.0})
    EXPECT_NEAR(a::entrance_cdf(1, t), 1.0 - std::exp(-t), 1e-15);
  EXPECT_NEAR(a::entrance_cdf(2, 2.0), 1 - 2 * std::exp(-1.0) + std::exp(-2.0), 1e-14);
  EXPECT_NEAR(a::entrance_cdf(2, 2.0), 0.399576400893728, 1e-12);
  EXPECT_EQ(a::entrance_cdf(5, 0.0), 0.0);
}

TEST(EntranceCdf, MatchesOracle) {
  for (double t : {1.0, 8.0, 25.0})
    for (int n : {2, 5, 9, 12, 20})
      EXPECT_NEAR(a::entrance_cdf(n, t), oracle::birth_upper_tail(t, n), 1e-10)
          << "n=" << n << " t=" << t;
}

TEST(EntranceCdf, RoutesAgreeOnOverlaps) {
  for (double t : {0.5, 5.0, 30.0, 120.0}) {
    for (int n = 1; n <= 12; ++n) {
      const double d = a::entrance_cdf(n, t, a::CdfRoute::Double);
      EXPECT_NEAR(d, a::entrance_cdf(n, t, a::CdfRoute::Extended), 1e-10);
      EXPECT_NEAR(d, a::entrance_cdf(n, t, a::CdfRoute::Uniformized), 1e-10);
    }
    for (int n : {13, 30, 60}) {
      EXPECT_NEAR(a::entrance_cdf(n, t, a::CdfRoute::Extended),
                  a::entrance_cdf(n, t, a::CdfRoute::Uniformized), 1e-10)
          << "n=" << n << " t=" << t;
    }
  }
  EXPECT_THROW(a::entrance_cdf(13, 1.0, a::CdfRoute::Double), a::DomainError);
}

TEST(EntranceCdf, Monotone) {
  for (int n = 1; n <= 80; ++n) {
    double prev = -1.0;
    for (double t = 0.0; t <= 200.0; t += 10.0) {
      const double c = a::entrance_cdf(n, t);
      EXPECT_GE(c, prev - 1e-13);
      EXPECT_GE(c, a::entrance_cdf(n + 1, t) - 1e-13);
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
      prev = c;
    }
  }
}

TEST(EntranceCdf, DomainErrors) {
  EXPECT_THROW(a::entrance_cdf(0, 1.0), a::DomainError);
  EXPECT_THROW(a::entrance_cdf(3, -1.0), a::DomainError);
}

TEST(BirthDistribution, Basics) {
  const auto zero = a::birth_distribution(0.0, 10);
  EXPECT_EQ(zero.probs[0], 1.0);
  for (std::size_t n = 1; n < zero.probs.size(); ++n) EXPECT_EQ(zero.probs[n], 0.0);
  for (double t : {0.1, 3.0, 40.0, 1000.0}) {
    const auto table = a::birth_distribution(t, a::suggested_state_limit(t));
    EXPECT_NEAR(table.probs[0], std::exp(-t), 1e-14 + 1e-12 * std::exp(-t));
    double s = table.deficit;
    for (double p : table.probs) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      s += p;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_GE(table.deficit, 0.0);
  }
}

TEST(BirthDistribution, TailsMatchEntranceCdf) {
  for (double t : {0.5, 5.0, 15.0, 30.0}) {
    const auto table = a::birth_distribution(t, 60);
    for (int n = 1; n <= 12; ++n)
      EXPECT_NEAR(table.upper_tail(n), a::entrance_cdf(n, t, a::CdfRoute::Double), 1e-9);
    for (int n = 1; n < 12; ++n)
      EXPECT_NEAR(table.probs[n], a::entrance_cdf(n, t) - a::entrance_cdf(n + 1, t), 1e-9);
  }
}

TEST(BirthDistribution, DerivativeOfMean) {
  // nu'(t) = E 1/(M(t)+1)
  const double h = 1e-3;
  for (double t : {2.0, 20.0, 50.0}) {
    const double fd = (a::mean_exit_count(t + h).value - a::mean_exit_count(t - h).value) / (2 * h);
    const auto table = a::birth_distribution(t, a::suggested_state_limit(t));
    const double e = table.expect([](std::size_t n) { return 1.0 / (n + 1.0); });
    EXPECT_NEAR(fd, e, 1e-6) << "t=" << t;
  }
}

TEST(BirthDistribution, SecondMomentIdentity) {
  for (double t : {1.0, 25.0, 400.0}) {
    const auto table = a::birth_distribution(t, a::suggested_state_limit(t));
    EXPECT_NEAR(table.second_moment(), 2 * t - table.mean(), 1e-9 * (1 + 2 * t));
  }
}

TEST(BirthDistribution, GeneralRatesPoissonCase) {
  // Constant unit rates give a Poisson(t) law.
  const std::vector<double> rates(81, 1.0);
  const auto table = a::birth_distribution(7.0, 80, rates);
  double pk = std::exp(-7.0);
  for (int k = 0; k <= 30; ++k) {
    EXPECT_NEAR(table.probs[k], pk, 1e-14);
    pk *= 7.0 / (k + 1);
  }
}

TEST(BirthDistribution, TruncationError) {
  EXPECT_THROW(a::birth_distribution(100.0, 3, 1e-6), a::TruncationError);
  try {
    a::birth_distribution(100.0, 3, 1e-6);
  } catch (const a::TruncationError& e) {
    EXPECT_GT(e.table().deficit, 1e-6);
  }
}

TEST(ExitVariance, Values) {
  EXPECT_EQ(a::exit_variance(0.0), 0.0);
  for (double t : {0.5, 10.0, 1e3}) {
    const double v = a::exit_variance(t);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 2 * t);
  }
  // Cross-route: variance of the uniformized law.
  const auto table = a::birth_distribution(1e4, a::suggested_state_limit(1e4));
  const double m = table.mean();
  const double v = a::exit_variance(1e4);
  EXPECT_NEAR(v, table.second_moment() - m * m, 1e-6);
  EXPECT_NEAR(v, 47.196, 0.01);
  // Leading terms: sqrt(2t)/3 + 2/9 minus the O(t^-1/2) correction.
  EXPECT_NEAR(v / (std::sqrt(2e4) / 3), 1.0, 0.02);
}

TEST(ZetaMoments, Values) {
  const auto one = a::zeta_moments(1);
  EXPECT_EQ(one.mean, 1.0);
  EXPECT_EQ(one.variance, 1.0);
  EXPECT_EQ(a::zeta_moments(2).mean, 3.0);
  EXPECT_EQ(a::zeta_moments(2).variance, 5.0);
  EXPECT_EQ(a::zeta_moments(3).mean, 6.0);
  EXPECT_EQ(a::zeta_moments(3).variance, 14.0);
  EXPECT_EQ(a::zeta_moments(10).mean, 55.0);
  EXPECT_EQ(a::zeta_moments(10).variance, 385.0);
  EXPECT_THROW(a::zeta_moments(0), a::DomainError);
}

TEST(WaitingTimeMgf, CampbellOracle) {
  // log E e^{zT(x)} = int_0^x (e^{zu} - 1) du
  for (double x : {0.5, 2.0, 5.0})
    for (double z : {-3.0, -0.4, 1e-3, 0.7}) {
      const double log_oracle =
          oracle::simpson([z](double u) { return std::expm1(z * u); }, 0.0, x, 2000);
      EXPECT_NEAR(a::log_waiting_time_mgf(x, z), log_oracle, 1e-10 * (1 + std::abs(log_oracle)));
      EXPECT_NEAR(a::waiting_time_mgf(x, z), std::exp(log_oracle),
                  1e-10 * std::exp(log_oracle));
    }
}

TEST(WaitingTimeMgf, SmallZAndDerivative) {
  EXPECT_NEAR(a::waiting_time_mgf(3.0, 1e-12), 1.0, 1e-11);
  EXPECT_NEAR(a::waiting_time_mgf(3.0, 1e-9), 1.0 + 4.5e-9, 1e-14);
  const double h = 1e-5;
  for (double x : {1.0, 4.0, 10.0}) {
    const double d = (a::waiting_time_mgf(x, h) - a::waiting_time_mgf(x, -h)) / (2 * h);
    EXPECT_NEAR(d, x * x / 2, 1e-5 * x * x);
  }
}

TEST(WaitingTimeMgf, MassAtZero) {
  // As z -> -inf the MGF tends to P(T(x) = 0) = e^{-x}.
  for (double x : {0.5, 3.0})
    EXPECT_NEAR(a::waiting_time_mgf(x, -1e8), std::exp(-x), 1e-7);
}

TEST(WaitingTimeMgf, Errors) {
  EXPECT_THROW(a::waiting_time_mgf(-1.0, 1.0), a::DomainError);
  EXPECT_THROW(a::waiting_time_mgf(100.0, 10.0), a::RangeError);
  try {
    a::waiting_time_mgf(100.0, 10.0);
  } catch (const a::RangeError& e) {
    EXPECT_GT(e.log_value(), 700.0);
  }
}

TEST(CenteredExponentialMoment, Values) {
  EXPECT_EQ(a::centered_exponential_moment(0), 1.0);
  EXPECT_EQ(a::centered_exponential_moment(1), 0.0);
  EXPECT_EQ(a::centered_exponential_moment(2), 1.0);
  EXPECT_EQ(a::centered_exponential_moment(3), 2.0);
  EXPECT_EQ(a::centered_exponential_moment(4), 9.0);
  EXPECT_EQ(a::centered_exponential_moment(5), 44.0);
  for (int m = 0; m <= 8; ++m) {
    const double integral = oracle::simpson(
        [m](double x) { return std::pow(x - 1.0, m) * std::exp(-x); }, 0.0, 80.0, 40000);
    EXPECT_NEAR(a::centered_exponential_moment(m), integral, 1e-8 * (1 + integral)) << m;
  }
  EXPECT_THROW(a::centered_exponential_moment(-1), a::DomainError);
}
