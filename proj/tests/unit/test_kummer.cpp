#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle_values.hpp"
#include "testkit.hpp"
#include "watsonmle/errors.hpp"
#include "watsonmle/kummer.hpp"

namespace {

using watsonmle::EvalControls;
using watsonmle::KummerParams;
using watsonmle::kummer_ratio;
using watsonmle::kummer_ratio_pair;
using watsonmle::log_kummer_m;

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

TEST(LogKummerM, AtZeroIsZero) { EXPECT_EQ(log_kummer_m(0.5, 2.5, 0.0), 0.0); }

TEST(LogKummerM, ReducesToExponential) { EXPECT_NEAR(log_kummer_m(1.0, 1.0, 3.0), 3.0, 1e-14); }

TEST(LogKummerM, MatchesOracle) {
  EXPECT_LT(rel(log_kummer_m(0.5, 5.0, 10.0), oracle::kLogM_05_5_10), 1e-13);
  EXPECT_LT(rel(log_kummer_m(0.5, 5.0, -10.0), oracle::kLogM_05_5_m10), 1e-13);
  EXPECT_LT(rel(log_kummer_m(0.5, 2.0, 5.0), oracle::kLogM_05_2_5), 1e-13);
}

TEST(LogKummerM, FiniteWhereMOverflows) {
  const double v = log_kummer_m(0.5, 5.0, 2e6);
  ASSERT_TRUE(std::isfinite(v));
  EXPECT_LT(rel(v, oracle::kLogM_05_5_2e6), 1e-14);
}

TEST(LogKummerM, NegativeArgumentUsesTransformation) {
  const double lhs = log_kummer_m(0.5, 5.0, -10.0);
  const double rhs = -10.0 + log_kummer_m(4.5, 5.0, 10.0);
  EXPECT_LT(rel(lhs, rhs), 1e-13);
}

TEST(LogKummerM, TransformationHoldsAtRandomPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.05, 10.0);
  std::uniform_real_distribution<double> ux(-50.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const double a = ua(rng);
    const double c = a + 0.05 + 2.0 * ua(rng);
    const double x = ux(rng);
    const double lhs = log_kummer_m(a, c, x);
    const double rhs = x + log_kummer_m(c - a, c, -x);
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(lhs))) << a << " " << c << " " << x;
  }
}

TEST(LogKummerM, RejectsBadParameters) {
  EXPECT_THROW(log_kummer_m(0.0, 1.0, 1.0), watsonmle::DomainError);
  EXPECT_THROW(log_kummer_m(1.0, -1.0, 1.0), watsonmle::DomainError);
  EXPECT_THROW(log_kummer_m(1.0, 2.0, NAN), watsonmle::DomainError);
}

TEST(LogKummerM, BudgetExhaustionCarriesPartialSum) {
  EvalControls ctl;
  ctl.max_terms = 100;
  try {
    log_kummer_m(0.5, 5.0, 1e6, ctl);
    FAIL() << "expected SeriesConvergenceError";
  } catch (const watsonmle::SeriesConvergenceError& e) {
    EXPECT_GT(e.terms(), 100u);
    EXPECT_TRUE(std::isfinite(e.partial_log_sum()));
  }
}

TEST(EvalControls, Validates) {
  EvalControls ctl;
  ctl.rel_tolerance = 1e-3;
  EXPECT_THROW(ctl.validate(), watsonmle::DomainError);
  ctl = {};
  ctl.max_terms = 10;
  EXPECT_THROW(ctl.validate(), watsonmle::DomainError);
}

TEST(KummerRatio, AtZeroIsAOverC) { EXPECT_NEAR(kummer_ratio({0.5, 5.0}, 0.0), 0.1, 1e-16); }

TEST(KummerRatio, LargeArgumentExpansion) {
  EXPECT_NEAR(kummer_ratio({0.5, 5.0}, 1e4), 1.0 - 4.5e-4, 1e-6);
}

TEST(KummerRatio, MatchesOracle) {
  EXPECT_LT(rel(kummer_ratio({0.5, 5.0}, 10.0), oracle::kG_05_5_10), 1e-13);
  EXPECT_LT(rel(kummer_ratio({0.5, 5.0}, 1e4), oracle::kG_05_5_1e4), 1e-13);
  EXPECT_LT(rel(kummer_ratio({0.5, 5000.0}, -1e5), oracle::kG_05_5000_m1e5), 1e-12);
  EXPECT_LT(rel(kummer_ratio({0.5, 15.0}, 100.0), oracle::kG_05_15_100), 1e-13);
  EXPECT_LT(rel(kummer_ratio({0.5, 15.0}, -50.0), oracle::kG_05_15_m50), 1e-13);
  EXPECT_LT(rel(kummer_ratio({0.5, 1.5}, 5.0), oracle::kG_05_1p5_5), 1e-13);
  EXPECT_LT(rel(kummer_ratio({0.5, 5.0}, -1e4), oracle::kG_05_5_m1e4), 1e-12);
}

TEST(KummerRatio, ComplementKeepsRelativePrecision) {
  const auto g = kummer_ratio_pair({0.5, 5.0}, 1e4);
  EXPECT_LT(rel(g.complement, 1.0 - oracle::kG_05_5_1e4), 1e-11);
  EXPECT_NEAR(g.value + g.complement, 1.0, 1e-15);
}

TEST(KummerRatio, StrictlyIncreasingWithLimits) {
  for (KummerParams p : {KummerParams{0.5, 1.5}, KummerParams{0.5, 5.0}, KummerParams{2.0, 50.0}}) {
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double x = -1e3 + 5.0 * i;
      const double g = kummer_ratio(p, x);
      EXPECT_GT(g, prev) << "a=" << p.a << " c=" << p.c << " x=" << x;
      EXPECT_LT(g, 1.0);
      prev = g;
    }
    EXPECT_LT(kummer_ratio(p, -1e4), 1e-2);
    EXPECT_GT(kummer_ratio(p, 1e6), 1.0 - 1e-2);
  }
}

TEST(KummerRatio, RangeIsOpenUnitInterval) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-1e5, 1e5);
  for (int i = 0; i < 200; ++i) {
    const double g = kummer_ratio({0.5, 15.0}, ux(rng));
    EXPECT_GT(g, 0.0);
    EXPECT_LT(g, 1.0);
  }
}

TEST(KummerRatio, RequiresCAboveA) {
  EXPECT_THROW(kummer_ratio({5.0, 5.0}, 1.0), watsonmle::DomainError);
  EXPECT_THROW(kummer_ratio({-0.5, 5.0}, 1.0), watsonmle::DomainError);
}

TEST(KummerRatioDerivative, ClosedLimitAtZero) {
  EXPECT_NEAR(watsonmle::kummer_ratio_derivative_at_zero({0.5, 5.0}), 0.015, 1e-17);
  EXPECT_THROW(watsonmle::kummer_ratio_derivative({0.5, 5.0}, 0.0, 0.1), watsonmle::DomainError);
}

TEST(KummerRatioDerivative, MatchesFiniteDifference) {
  const KummerParams p{0.5, 5.0};
  const double d = watsonmle::kummer_ratio_derivative(p, 10.0, oracle::kG_05_5_10);
  EXPECT_LT(rel(d, oracle::kDG_05_5_10), 1e-6);
  const double h = 1e-5;
  const double fd = (kummer_ratio(p, 10.0 + h) - kummer_ratio(p, 10.0 - h)) / (2.0 * h);
  EXPECT_LT(rel(d, fd), 1e-6);
}

TEST(KummerRatioDerivative, Positive) {
  for (KummerParams p : {KummerParams{0.5, 1.5}, KummerParams{0.5, 50.0}}) {
    for (double x : {-500.0, -20.0, -1.0, 0.5, 3.0, 40.0, 900.0}) {
      EXPECT_GT(watsonmle::kummer_ratio_derivative(p, x, kummer_ratio(p, x)), 0.0) << x;
    }
  }
}

class IdentitySuite : public ::testing::TestWithParam<testkit::Identity> {};

TEST_P(IdentitySuite, HoldsAtRandomSamples) {
  const auto result = testkit::check_identity(GetParam(), 100, 3);
  EXPECT_LE(result.max_rel_error, 1e-10)
      << "worst at a=" << result.worst_a << " c=" << result.worst_c << " x=" << result.worst_x;
}

INSTANTIATE_TEST_SUITE_P(KummerIdentities, IdentitySuite, ::testing::ValuesIn(testkit::kAllIdentities),
                         [](const auto& info) {
                           return std::to_string(info.index) + "_" + testkit::identifier(testkit::name(info.param));
                         });

}  // namespace
