#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace qwt;

namespace {
// penalty written in the log domain, term by term
double penalty_log_domain(long long d_e, double dh) {
  const double d = static_cast<double>(d_e);
  const double t = std::log2(4.0 * d / dh) + 1.0;
  const double c = d * t * t;
  return 16.0 * std::log2(10.0) + 6.0 * std::log2(std::log2(d)) - 9.0 * std::log2(dh) + std::log2(std::log(30.0 * c / dh));
}
}  // namespace

TEST(AchievableRate, SumIdentityOverGrid) {
  for (double i0 : {0.0, 0.5, 3.0, 12.0}) {
    for (double iinf : {0.0, 0.3, 2.0}) {
      for (double ep : {1e-4, 0.01, 0.2}) {
        for (double dh : {1e-8, 1e-4, 0.05}) {
          for (long long de : {2LL, 4LL, 64LL}) {
            const auto r = achievable_rate({i0, iinf, ep, dh, de});
            EXPECT_NEAR(r.r_bits + r.r_tilde_bits, i0 + std::log2(ep), 1e-9);
            EXPECT_NEAR(r.penalty_bits, penalty_log_domain(de, dh), 1e-12 * std::abs(r.penalty_bits));
          }
        }
      }
    }
  }
}

TEST(AchievableRate, PenaltyMatchesHighPrecision) {
  for (double dh : {1e-12, 1e-6, 0.01, 0.5}) {
    for (long long de : {2LL, 3LL, 1024LL}) {
      const auto r = achievable_rate({1.0, 0.0, 0.1, dh, de});
      const double big = static_cast<double>(oracle::big_penalty(de, oracle::BigFloat(dh)));
      EXPECT_NEAR(r.penalty_bits, big, 1e-12 * std::abs(big));
    }
  }
}

TEST(AchievableRate, Monotonicity) {
  double prev = -1e300;
  for (double i0 = 0.0; i0 < 10.0; i0 += 0.5) {
    const double r = achievable_rate({i0, 1.0, 0.1, 1e-3, 2}).r_bits;
    EXPECT_GE(r, prev);
    prev = r;
  }
  prev = 1e300;
  for (double iinf = 0.0; iinf < 10.0; iinf += 0.5) {
    const double r = achievable_rate({5.0, iinf, 0.1, 1e-3, 2}).r_bits;
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(AchievableRate, Budgets) {
  const auto r = achievable_rate({1.0, 0.0, 0.01, 1e-4, 2});
  EXPECT_DOUBLE_EQ(r.error_budget, 0.06);
  EXPECT_DOUBLE_EQ(r.leakage_budget, 48.0 * 0.01);
  EXPECT_THROW(achievable_rate({1.0, 0.0, 0.0, 1e-4, 2}), DomainError);
  EXPECT_THROW(achievable_rate({1.0, 0.0, 0.1, 1e-4, 1}), DomainError);
  EXPECT_THROW(achievable_rate({std::numeric_limits<double>::infinity(), 0.0, 0.1, 1e-4, 2}), DomainError);
}

TEST(CodeParams, EqualityInBothConstraints) {
  const auto p = theorem3_code_params(0.18, 1.44);
  EXPECT_NEAR(p.eps_prime, 0.01, 1e-17);
  EXPECT_NEAR(p.delta_hat, 1e-4, 1e-18);
  for (double eps : {0.01, 0.3, 0.9}) {
    for (double delta : {0.01, 1.0, 1.9}) {
      const auto q = theorem3_code_params(eps, delta);
      EXPECT_NEAR(18.0 * q.eps_prime, eps, 1e-15);
      EXPECT_NEAR(144.0 * std::sqrt(q.delta_hat), delta, 1e-14);
    }
  }
  EXPECT_THROW(theorem3_code_params(1.0, 0.5), DomainError);
  EXPECT_THROW(theorem3_code_params(0.5, 2.0), DomainError);
}

TEST(Converse, Arithmetic) {
  EXPECT_DOUBLE_EQ(converse_bound(1.0, 0.0), 2.5);
  EXPECT_DOUBLE_EQ(converse_bound(3.2, 1.5), 3.2);
}

TEST(Converse, ProductStateHasZeroMaxDivergence) {
  Rng rng(41);
  const auto rho = oracle::random_state(2, rng);
  const CqState cq(Ensemble::indexed({0.4, 0.6}, {rho, rho}));
  const auto c = converse_secrecy_check(cq, 0.0);
  EXPECT_LE(c.leakage, 1e-12);
  EXPECT_LE(std::abs(c.iinf), 1e-3);
  EXPECT_TRUE(c.holds);
}

TEST(Converse, PerfectlyCorrelatedBit) {
  const Ensemble e = Ensemble::indexed({0.5, 0.5}, {DensityOperator(HermitianOperator::diagonal(RealVector::Unit(2, 0))),
                                                    DensityOperator(HermitianOperator::diagonal(RealVector::Unit(2, 1)))});
  const CqState cq(e);
  EXPECT_NEAR(cq_leakage(cq), 1.0, 1e-12);
  const auto c = converse_secrecy_check(cq, 1.0);
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.iinf, oracle::smooth_max_fine(e, std::nextafter(1.0, 0.0)), 2e-3);
  EXPECT_THROW(converse_secrecy_check(cq, 0.5), PreconditionError);
}

TEST(Converse, RandomStatesWithinLeakage) {
  Rng rng(42);
  for (int t = 0; t < 20; ++t) {
    const CqState cq(oracle::random_ensemble(2 + t % 3, 2, rng));
    const auto c = converse_secrecy_check(cq, cq_leakage(cq));
    EXPECT_TRUE(c.holds) << c.iinf;
  }
}
