#include <gtest/gtest.h>

#include <cmath>

#include "loglap/error.hpp"
#include "loglap/specfun.hpp"

using namespace loglap;

// Reference values computed with mpmath at 30 digits.
TEST(SpecFun, LnGammaReference) {
  EXPECT_NEAR(ln_gamma(0.001), 6.90717888538385366, 1e-13);
  EXPECT_NEAR(ln_gamma(123.456), 469.605547129929483, 1e-12 * 469.6);
  EXPECT_NEAR(ln_gamma(0.5), 0.5 * std::log(kPi), 1e-14);
  EXPECT_NEAR(ln_gamma(1.0), 0.0, 1e-15);
  EXPECT_NEAR(ln_gamma(2.0), 0.0, 1e-15);
}

TEST(SpecFun, DigammaReference) {
  EXPECT_NEAR(digamma(0.001), -1000.57557193181028, 1e-10);
  EXPECT_NEAR(digamma(7.25), 1.91045352688373603, 1e-14);
  EXPECT_NEAR(digamma(1.0), -kEulerGamma, 1e-15);
  EXPECT_NEAR(digamma(0.5), -kEulerGamma - 2.0 * kLn2, 1e-14);
}

TEST(SpecFun, RecurrenceIdentities) {
  for (double x = 0.05; x < 40.0; x *= 1.37) {
    EXPECT_NEAR(ln_gamma(x + 1.0) - ln_gamma(x), std::log(x), 1e-12 * std::max(1.0, std::fabs(std::log(x))));
    EXPECT_NEAR(digamma(x + 1.0) - digamma(x), 1.0 / x, 1e-12 * std::max(1.0, 1.0 / x));
  }
}

TEST(SpecFun, ReflectionIdentities) {
  for (double x = 0.05; x < 1.0; x += 0.05) {
    // Gamma(x) Gamma(1-x) = pi / sin(pi x)
    EXPECT_NEAR(ln_gamma(x) + ln_gamma(1.0 - x), std::log(kPi / std::sin(kPi * x)), 1e-13);
    // psi(1-x) - psi(x) = pi cot(pi x)
    EXPECT_NEAR(digamma(1.0 - x) - digamma(x), kPi / std::tan(kPi * x),
                1e-12 * std::max(1.0, std::fabs(kPi / std::tan(kPi * x))));
  }
}

TEST(SpecFun, SphereMeasure) {
  EXPECT_DOUBLE_EQ(sphere_measure(1), 2.0);
  EXPECT_NEAR(sphere_measure(2), 2.0 * kPi, 1e-14);
  EXPECT_NEAR(sphere_measure(3), 4.0 * kPi, 1e-13);
}

TEST(SpecFun, NormConstBaseline) {
  EXPECT_NEAR(norm_const(1, 0.5, 2.0), 1.0 / kPi, 1e-12);
  const Params par(1, 0.5, 2.0);
  EXPECT_NEAR(par.C(), 1.0 / kPi, 1e-12);
  EXPECT_DOUBLE_EQ(par.sp(), 1.0);
  EXPECT_FALSE(par.has_p_star());
}

TEST(SpecFun, BothBranchesMatchClassicalAtP2) {
  for (int N = 1; N <= 3; ++N)
    for (int k = 0; k < 10; ++k) {
      const double s = 0.05 + 0.09 * k;
      const double c = norm_const_p2(N, s);
      EXPECT_NEAR(norm_const(N, s, 2.0), c, 1e-12 * c) << "N=" << N << " s=" << s;
    }
}

TEST(SpecFun, LogDerivativeMatchesCentralDifference) {
  for (int N = 1; N <= 2; ++N)
    for (double p : {1.5, 2.0, 3.0})
      for (double s : {0.1, 0.3, 0.7, 0.9}) {
        const double d = 1e-5;
        const double fd =
            (std::log(norm_const(N, s + d, p)) - std::log(norm_const(N, s - d, p))) / (2.0 * d);
        EXPECT_NEAR(log_norm_const(N, s, p), fd, 1e-6 * std::max(1.0, std::fabs(fd)))
            << N << " " << s << " " << p;
      }
}

TEST(SpecFun, SmallOrderLimits) {
  for (int N = 1; N <= 3; ++N)
    for (double p : {1.5, 2.0, 4.0}) {
      const ClassicalConst cc = classical_const(N, p);
      EXPECT_NEAR(cc.C, p * std::tgamma(0.5 * N) / (2.0 * std::pow(kPi, 0.5 * N)), 1e-13);
      const double s = 1e-7;
      EXPECT_NEAR(norm_const(N, s, p) / s, cc.C, 1e-5 * cc.C);
      EXPECT_NEAR(log_norm_const(N, s, p) - 1.0 / s, cc.rho, 1e-5);
    }
  EXPECT_NEAR(classical_const(1, 2.0).rho, -2.0 * kEulerGamma, 1e-13);
}

TEST(SpecFun, SignThresholdIsRootOfB) {
  for (int N = 1; N <= 3; ++N)
    for (double p : {1.5, 2.0, 3.0}) {
      const double s0 = b_sign_threshold(N, p);
      EXPECT_GT(s0, 0.5);
      EXPECT_LT(s0, 1.0);
      EXPECT_NEAR(log_norm_const(N, s0, p), 0.0, 1e-9);
      EXPECT_GT(log_norm_const(N, s0 - 1e-3, p), 0.0);
      EXPECT_LT(log_norm_const(N, s0 + 1e-3, p), 0.0);
    }
}

TEST(SpecFun, ParamsRejectsInvalid) {
  EXPECT_THROW(Params(0, 0.5, 2.0), DomainError);
  EXPECT_THROW(Params(1, 0.0, 2.0), DomainError);
  EXPECT_THROW(Params(1, 1.0, 2.0), DomainError);
  EXPECT_THROW(Params(1, 0.5, 1.0), DomainError);
  EXPECT_THROW(Params(1, std::nan(""), 2.0), DomainError);
}

TEST(SpecFun, CriticalExponent) {
  const Params par(2, 0.5, 2.0);
  ASSERT_TRUE(par.has_p_star());
  EXPECT_NEAR(par.p_star(), 4.0, 1e-15);
}

TEST(SpecFun, PhiP) {
  EXPECT_EQ(phi_p(0.0, 1.5), 0.0);
  EXPECT_DOUBLE_EQ(phi_p(-2.0, 2.0), -2.0);
  EXPECT_NEAR(phi_p(-4.0, 1.5), -2.0, 1e-15);
  EXPECT_NEAR(phi_p(3.0, 3.0), 9.0, 1e-14);
}

TEST(SpecFun, WorkedValues) {
  EXPECT_NEAR(ln_gamma(0.5), 0.5723649429, 1e-10);
  EXPECT_NEAR(ln_gamma(5.0), std::log(24.0), 1e-14);
  EXPECT_NEAR(digamma(0.5), -1.9635100260, 1e-10);
  EXPECT_NEAR(digamma(4.0) - digamma(3.0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(sphere_measure(2), 6.2831853072, 1e-10);
  EXPECT_NEAR(sphere_measure(3), 12.5663706144, 1e-10);
  EXPECT_NEAR(log_norm_const(1, 0.5, 2.0), 2.0 - 2.0 * kEulerGamma, 1e-13);
  EXPECT_NEAR(log_norm_const(1, 0.5, 2.0), 0.8455686702, 1e-10);
  EXPECT_NEAR(classical_const(2, 2.0).rho, 2.0 * kLn2 - 2.0 * kEulerGamma, 1e-13);
  EXPECT_NEAR(classical_const(2, 2.0).rho, 0.2318630313, 1e-10);
  EXPECT_NEAR(norm_const(2, 0.3, 2.0), norm_const_p2(2, 0.3), 1e-13);
  EXPECT_NEAR(norm_const(1, 0.75, 2.0), norm_const_p2(1, 0.75), 1e-13);
  const double h = 1e-5;
  const double fd = (std::log(norm_const(2, 0.3 + h, 3.0)) - std::log(norm_const(2, 0.3 - h, 3.0))) / (2 * h);
  EXPECT_NEAR(fd, log_norm_const(2, 0.3, 3.0), 1e-6);
}

TEST(SpecFun, ClassicalBeyondP2) {
  // C(N,s,p)/s -> C(N,p) independently of the branch choice
  for (double p : {1.3, 5.0}) {
    const double s = 1e-8;
    EXPECT_NEAR(norm_const(3, s, p) / s, classical_const(3, p).C, 1e-6);
  }
}

TEST(SpecFun, ThresholdDecreasing) {
  // B decreases in s, so it is positive below the root and negative above
  for (double s = 0.05; s < 0.99; s += 0.05)
    EXPECT_GT(log_norm_const(2, s, 2.0), log_norm_const(2, s + 0.01, 2.0));
}
