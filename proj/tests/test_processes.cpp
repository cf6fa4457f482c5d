#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pfp/analytic.hpp"
#include "pfp/processes.hpp"
#include "pfp/stats.hpp"

namespace p = pfp::processes;
namespace s = pfp::stats;
using pfp::RngStream;

namespace {

p::ArrivalSequence make(double horizon, std::vector<double> times) {
  p::ArrivalSequence a;
  a.horizon = horizon;
  a.times = std::move(times);
  return a;
}

template <class F>
std::vector<double> draws(F f, std::size_t reps, std::uint64_t stream) {
  auto v = s::mc_collect([&](RngStream& r) { return static_cast<double>(f(r)); }, reps,
                         RngStream(11, stream), 1);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(Arrivals, EmptyAndDeterministic) {
  RngStream r(3, 0);
  EXPECT_TRUE(p::sample_arrivals(0.0, r).times.empty());
  RngStream a(3, 1);
  RngStream b(3, 1);
  const auto x = p::sample_arrivals(40.0, a);
  const auto y = p::sample_arrivals(40.0, b);
  EXPECT_EQ(x.times, y.times);
  EXPECT_NO_THROW(p::validate(x));
  for (double t : x.times) EXPECT_LE(t, 40.0);
}

TEST(Arrivals, MeanCount) {
  const auto st = s::mc_estimate(
      [](RngStream& r) { return static_cast<double>(p::sample_arrivals(50.0, r).size()); },
      100000, RngStream(4, 0), 1);
  EXPECT_NEAR(st.mean, 50.0, 3 * std::sqrt(50.0 / 1e5));
}

TEST(Arrivals, ValidateRejectsBrokenSequences) {
  EXPECT_THROW(p::validate(make(2.0, {0.5, 0.5})), p::InvariantError);
  EXPECT_THROW(p::validate(make(2.0, {0.7, 0.5})), p::InvariantError);
  EXPECT_THROW(p::validate(make(1.0, {0.5, 1.5})), p::InvariantError);
}

TEST(ExitCount, HandExample) {
  const auto a = make(2.0, {0.5, 0.7, 1.2});
  EXPECT_EQ(p::exit_count(a, 1.5), 2u);
  EXPECT_EQ(p::exit_count(a, 0.3), 0u);
  EXPECT_EQ(p::exit_count(a, 0.5), 1u);
}

TEST(ExitCount, HorizonTooShort) {
  EXPECT_THROW(p::exit_count(make(1.3, {0.5, 0.7, 1.2}), 5.0), p::HorizonError);
}

TEST(ExitCount, LazySamplerMatchesMean) {
  const double t = 100.0;
  const auto st = s::mc_estimate(
      [t](RngStream& r) { return static_cast<double>(p::sample_exit_count(t, r)); }, 200000,
      RngStream(5, 0), 1);
  EXPECT_NEAR(st.mean, pfp::analytic::mean_exit_count(t).value, 3.5 * st.se);
  EXPECT_NEAR(st.variance, pfp::analytic::exit_variance(t), 3.5 * st.variance_se());
}

TEST(EntranceCount, ZeroAndFirstStep) {
  RngStream r(6, 0);
  EXPECT_EQ(p::entrance_count(0.0, r), 0u);
  const auto st = s::mc_estimate(
      [](RngStream& q) { return p::entrance_count(1.0, q) >= 1 ? 1.0 : 0.0; }, 100000,
      RngStream(6, 1), 1);
  EXPECT_NEAR(st.mean, 1.0 - std::exp(-1.0), 3.5 * st.se);
}

TEST(EntranceCount, FromFixedPath) {
  // gaps 0.5, 0.2, 0.5: zeta = 0.5, 0.9, 2.4
  const auto a = make(3.0, {0.5, 0.7, 1.2});
  EXPECT_EQ(p::entrance_count(a, 0.4), 0u);
  EXPECT_EQ(p::entrance_count(a, 0.9), 2u);
  EXPECT_EQ(p::entrance_count(a, 2.0), 2u);
}

TEST(EntranceCount, ChiSquareAgainstExactLaw) {
  const double t = 25.0;
  const auto table = pfp::analytic::birth_distribution(t, 60);
  const std::size_t reps = 50000;
  std::vector<std::size_t> observed(table.probs.size(), 0);
  const auto v = s::mc_collect([t](RngStream& r) { return p::entrance_count(t, r); }, reps,
                               RngStream(7, 0), 1);
  for (auto m : v) ++observed[std::min(m, table.probs.size() - 1)];
  std::vector<double> probs(table.probs.begin(), table.probs.end());
  probs.back() += table.deficit;
  const auto chi = s::chi_square_gof(observed, probs);
  EXPECT_GT(chi.p_value, 1e-3);
}

TEST(Duality, ExitAndEntranceAgreeInLaw) {
  for (double t : {1.0, 5.0, 25.0}) {
    const auto n = draws([t](RngStream& r) { return p::sample_exit_count(t, r); }, 30000, 1);
    const auto m = draws([t](RngStream& r) { return p::entrance_count(t, r); }, 30000, 2);
    EXPECT_GT(s::ks_two_sample(n, m).p_value, 1e-3) << "t=" << t;
  }
}

TEST(WaitingIntegrals, HandExamples) {
  const auto none = p::waiting_integrals(make(2.0, {1.5}), 1.0);
  EXPECT_EQ(none.T, 0.0);
  EXPECT_EQ(none.S, 0.0);
  EXPECT_EQ(none.count, 0u);
  const auto f = p::waiting_integrals(make(5.0, {1.0, 3.0}), 4.0);
  EXPECT_DOUBLE_EQ(f.T, 4.0);
  EXPECT_DOUBLE_EQ(f.S, 4.0);
  EXPECT_EQ(f.count, 2u);
  EXPECT_THROW(p::waiting_integrals(make(3.0, {1.0}), 4.0), std::domain_error);
}

TEST(WaitingIntegrals, IntegrationByPartsOnEveryPath) {
  RngStream base(8, 0);
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream r = base.substream(i);
    const auto a = p::sample_arrivals(12.0, r);
    for (double x : {0.0, 1.0, 5.5, 12.0}) {
      const auto f = p::waiting_integrals(a, x);
      EXPECT_NEAR(f.T, x * f.count - f.S, 1e-12 * (1 + x * f.count));
    }
  }
}

TEST(WaitingIntegrals, Moments) {
  const auto st = s::mc_estimate(
      [](RngStream& r) { return p::waiting_integrals(p::sample_arrivals(10.0, r), 10.0).T; },
      100000, RngStream(9, 0), 1);
  EXPECT_NEAR(st.mean, 50.0, 3.5 * st.se);
  EXPECT_NEAR(st.variance, 1000.0 / 3.0, 3.5 * st.variance_se());
}

TEST(WaitingIntegrals, TEqualsSInLaw) {
  const auto T = draws(
      [](RngStream& r) { return p::waiting_integrals(p::sample_arrivals(2.0, r), 2.0).T; },
      30000, 3);
  const auto S = draws(
      [](RngStream& r) { return p::waiting_integrals(p::sample_arrivals(2.0, r), 2.0).S; },
      30000, 4);
  EXPECT_GT(s::ks_two_sample(T, S).p_value, 1e-3);
}

TEST(InverseIdentities, HandAndSeeded) {
  EXPECT_TRUE(p::inverse_identities_check(make(3.0, {0.5, 0.7, 1.2}), 1.5));
  EXPECT_TRUE(p::inverse_identities_check(make(3.0, {0.5, 0.7, 1.2}), 0.0));
  RngStream base(10, 0);
  for (std::uint64_t i = 0; i < 300; ++i) {
    RngStream r = base.substream(i);
    const auto a = p::sample_arrivals(60.0, r);
    for (double t : {0.0, 0.7, 3.0, 20.0})
      ASSERT_TRUE(p::inverse_identities_check(a, t)) << "replica " << i << " t=" << t;
  }
}

TEST(Urn, ZeroAndFirstAddition) {
  RngStream r(12, 0);
  EXPECT_EQ(p::urn_count(0.0, r), 0u);
  const auto st = s::mc_estimate([](RngStream& q) { return p::urn_first_addition_time(q); },
                                 100000, RngStream(12, 1), 1);
  EXPECT_NEAR(st.mean, 1.0, 3.5 * st.se);
}

TEST(Urn, SameLawAsEntranceCount) {
  const auto u = draws([](RngStream& r) { return p::urn_count(10.0, r); }, 30000, 5);
  const auto m = draws([](RngStream& r) { return p::entrance_count(10.0, r); }, 30000, 6);
  EXPECT_GT(s::ks_two_sample(u, m).p_value, 1e-3);
}

TEST(Zeta, Moments) {
  const auto st = s::mc_estimate([](RngStream& r) { return p::sample_zeta(10, r); }, 100000,
                                 RngStream(13, 0), 1);
  EXPECT_NEAR(st.mean, 55.0, 3.5 * st.se);
  EXPECT_NEAR(st.variance, 385.0, 3.5 * st.variance_se());
  const auto c = s::mc_estimate([](RngStream& r) { return p::sample_zeta(2, r) <= 2.0 ? 1.0 : 0.0; },
                                100000, RngStream(13, 1), 1);
  EXPECT_NEAR(c.mean, 0.399576400893728, 3.5 * c.se);
}

TEST(Zeta, OneIsExponential) {
  const auto z = draws([](RngStream& r) { return p::sample_zeta(1, r); }, 30000, 7);
  std::vector<double> u(z.size());
  std::transform(z.begin(), z.end(), u.begin(), [](double x) { return -std::expm1(-x); });
  EXPECT_GT(s::ks_uniform(u).p_value, 1e-3);
}

TEST(AtArrival, TAtPiNEqualsSAtNextInLaw) {
  for (int n : {3, 10}) {
    const auto T = draws([n](RngStream& r) { return p::sample_at_arrival(n, r).T; }, 30000, 8);
    const auto S =
        draws([n](RngStream& r) { return p::sample_at_arrival(n + 1, r).S; }, 30000, 9);
    EXPECT_GT(s::ks_two_sample(T, S).p_value, 1e-3) << "n=" << n;
  }
}
