#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace qwt;

namespace {

Ensemble basis_pair() {
  return Ensemble::indexed({0.5, 0.5}, {DensityOperator(HermitianOperator::diagonal(RealVector::Unit(2, 0))),
                                        DensityOperator(HermitianOperator::diagonal(RealVector::Unit(2, 1)))});
}

// qubit ensemble with a spread of eigenvalues and non-commuting members
Ensemble qubit_ensemble() {
  Rng rng(71);
  return oracle::random_ensemble(4, 2, rng);
}

}  // namespace

TEST(CoveringInstance, DegenerateCases) {
  Rng rng(72);
  const auto rho = oracle::random_state(3, rng);
  EXPECT_THROW(build_covering_instance(Ensemble::indexed({0.5, 0.5}, {rho, rho}), 0.0), DegenerateEpsilon);
  EXPECT_THROW(build_covering_instance(basis_pair(), 1.0), DegenerateEpsilon);
  const auto floored = build_covering_instance(basis_pair(), 1.0, kDefaultEpsilonFloor);
  EXPECT_TRUE(floored.floored);
  EXPECT_EQ(floored.eps, kDefaultEpsilonFloor);
  for (const auto& p : floored.pi_x) EXPECT_EQ(p.rank(), 2);
  EXPECT_THROW(build_covering_instance(Ensemble::indexed({1.0}, {DensityOperator::maximally_mixed(1)}), 1.0), DomainError);
  EXPECT_THROW(build_covering_instance(basis_pair(), -1.0), DomainError);
}

TEST(CoveringInstance, HandComputedEpsilon) {
  // sqrt(2) I/2 - |0><0| = diag(sqrt2/2 - 1, sqrt2/2): Pi_0 = |1><1|, so eps_0 = 1
  const auto ci = build_covering_instance(basis_pair(), 0.5);
  EXPECT_NEAR(ci.eps_x[0], 1.0, 1e-12);
  EXPECT_NEAR(ci.eps_x[1], 1.0, 1e-12);
  EXPECT_NEAR(ci.eps, 1.0, 1e-12);
}

TEST(Bands, DyadicMembership) {
  EXPECT_EQ(dyadic_band(1.0), 1);
  EXPECT_EQ(dyadic_band(0.75), 1);
  EXPECT_EQ(dyadic_band(0.5), 2);
  EXPECT_EQ(dyadic_band(0.3), 2);
  EXPECT_EQ(dyadic_band(0.25), 3);
  EXPECT_EQ(dyadic_band(std::ldexp(1.0, -20)), 21);
  EXPECT_EQ(band_count(2, 0.1), 7);
}

TEST(Bands, MaximallyMixedQubit) {
  const auto bd = band_decomposition(DensityOperator::maximally_mixed(2), 0.1);
  EXPECT_EQ(bd.k_bands, 7);
  for (int i = 1; i <= bd.k_bands; ++i) EXPECT_EQ(bd.empty(i), i != 2) << i;
  EXPECT_NEAR(bd.tail_mass, 0.0, 1e-15);
}

TEST(Bands, StructureOnRandomStates) {
  Rng rng(73);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index d = 2 + t % 6;
    const auto rho = oracle::random_state(d, rng, 1 + t % static_cast<int>(d));
    const double eps = 0.02 + 0.1 * (t % 5);
    const auto bd = band_decomposition(rho, eps);
    EXPECT_LE(bd.tail_mass, eps / 4.0 + 1e-10);
    for (int i = 1; i <= bd.k_bands; ++i) {
      if (bd.empty(i)) continue;
      EXPECT_LE(bd.lambda_max(i) / bd.lambda_min(i), 2.0);
      EXPECT_GT(bd.lambda_min(i), std::ldexp(1.0, -i));
      EXPECT_LE(bd.lambda_max(i), std::ldexp(1.0, -(i - 1)) + 1e-12);
      for (int l = i + 1; l <= bd.k_bands; ++l) {
        if (bd.empty(l)) continue;
        EXPECT_LE((bd.pi_i[i - 1].matrix() * bd.pi_i[l - 1].matrix()).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

TEST(Decomposition, SuiteHoldsOnRandomInstances) {
  Rng rng(74);
  int built = 0;
  for (int t = 0; t < 40; ++t) {
    const auto e = oracle::random_ensemble(2 + t % 4, 2 + t % 3, rng, 1 + t % 2);
    for (double i_param : {0.5, 1.0, 2.0}) {
      CoveringInstance ci;
      try {
        ci = build_covering_instance(e, i_param);
      } catch (const DegenerateEpsilon&) {
        continue;
      }
      if (ci.eps >= 1.0) continue;
      ++built;
      const auto s = decomposition_suite(ci);
      EXPECT_TRUE(s.all_ok()) << "trial " << t << " I " << i_param;
      EXPECT_GE(s.worst_exptr_slack, -1e-8);
      EXPECT_GE(s.worst_piminus_eig, -1e-8);
      EXPECT_LE(s.max_residual, 2.0);
    }
  }
  EXPECT_GT(built, 20);
}

TEST(Decomposition, IdenticalStatesLeaveNoPlusPart) {
  Rng rng(75);
  const auto rho = oracle::random_state(3, rng);
  const auto ci = build_covering_instance(Ensemble::indexed({0.5, 0.5}, {rho, rho}), 3.0, 0.05);
  const auto bands = band_decomposition(ci.rho, ci.eps);
  const auto s = band_split(ci, bands, 0);
  EXPECT_EQ(s.pi_plus_star.rank(), 0);
  EXPECT_LE((s.rho_minus.matrix() - s.rho_star.matrix()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(KeyLemma, TrivialProjectors) {
  Rng rng(76);
  const auto rho = oracle::random_state(3, rng);
  const auto full = key_lemma_check(rho, Projector::identity(3), 1000, 1);
  EXPECT_EQ(full.premise_hits, 0u);
  EXPECT_TRUE(full.passed());
  EXPECT_TRUE(key_lemma_check(rho, Projector::zero(3), 1000, 2).passed());
}

TEST(KeyLemma, RandomQutrits) {
  Rng rng(77);
  std::size_t hits = 0;
  for (int t = 0; t < 10; ++t) {
    const auto rho = oracle::random_state(3, rng);
    const auto pi = positive_part_projector(oracle::random_psd(3, rng) - HermitianOperator::identity(3) * 0.3,
                                            Positivity::strict);
    const auto bd = band_decomposition(rho, 0.1);
    std::vector<Projector> subs(bd.pi_i.begin(), bd.pi_i.end());
    const auto r = key_lemma_check(rho, pi, 1000, derive_seed(78, t), subs);
    EXPECT_TRUE(r.passed());
    hits += r.premise_hits;
  }
  EXPECT_GT(hits, 0u);
}

TEST(Gentle, RandomEnsemblesAndEffects) {
  Rng rng(79);
  for (int t = 0; t < 200; ++t) {
    const auto e = oracle::random_ensemble(2 + t % 3, 2 + t % 4, rng);
    const auto g = gentle_measurement_check(e, oracle::random_contraction(e.dim(), rng));
    EXPECT_LE(g.lhs, g.rhs + 1e-9);
  }
}

TEST(Sampling, DeterministicEnsembleHasNoDeviation) {
  Rng rng(80);
  const auto rho = oracle::random_state(2, rng);
  const auto ci = build_covering_instance(Ensemble::indexed({1.0}, {rho}), 1.0, kDefaultEpsilonFloor);
  const auto rep = covering_experiment(ci, 64, 20, 3);
  for (double d : rep.deviations) EXPECT_LE(d, 1e-15);
}

TEST(Sampling, SquareRootDecayAndBound) {
  const auto ci = build_covering_instance(qubit_ensemble(), 1.0, kDefaultEpsilonFloor);
  const auto a = covering_experiment(ci, 1024, 400, 81);
  const auto b = covering_experiment(ci, 4096, 400, 82);
  const double ratio = a.mean_deviation / b.mean_deviation;
  EXPECT_GE(ratio, 1.6);
  EXPECT_LE(ratio, 2.6);
  EXPECT_LE(a.empirical_fail, std::min(1.0, a.bound_rhs));
  EXPECT_TRUE(a.vacuous);
  const double sig = oracle::binomial_sigma(std::min(1.0, a.scalar_chernoff) + 1e-3, a.trials);
  EXPECT_LE(a.claim1_fail, a.scalar_chernoff + 3.0 * sig);
  EXPECT_LE(a.claim2_fail, a.scalar_chernoff + 3.0 * sig);
}

TEST(Sampling, BoundMatchesHighPrecision) {
  for (long long d : {2LL, 4LL, 16LL}) {
    for (double eps : {1e-3, 0.1, 0.5}) {
      for (double m : {1.0, 1e6, 1e30}) {
        const double lib = covering_bound_rhs(d, eps, 1.0, m);
        const double big = static_cast<double>(
            oracle::big_covering_rhs(d, oracle::BigFloat(eps), oracle::BigFloat(1.0), oracle::BigFloat(m)));
        EXPECT_NEAR(lib, big, 1e-10 * std::abs(big)) << d << " " << eps << " " << m;
      }
    }
  }
}

TEST(OffDiagonal, ConstantFamilyAndErrors) {
  Rng rng(83);
  RealVector ev(3);
  ev << 0.6, 0.3, 0.1;
  const DensityOperator rho(HermitianOperator::diagonal(ev));
  const auto ci = build_covering_instance(Ensemble::indexed({0.5, 0.5}, {rho, rho}), 1.0, 0.05);
  const auto bands = band_decomposition(ci.rho, ci.eps);
  const auto rep = offdiag_block_experiment(ci, bands, 1, 2, 100, 20, 4);
  for (double d : rep.trial.per_trial_stat) EXPECT_LE(d, 1e-14);
  EXPECT_THROW(offdiag_block_experiment(ci, bands, 1, 1, 100, 5, 4), DomainError);
  EXPECT_THROW(offdiag_block_experiment(ci, bands, 1, bands.k_bands, 100, 5, 4), EmptyBand);
}

TEST(OffDiagonal, RandomInstanceNormsAndTail) {
  Rng rng(84);
  for (int t = 0; t < 10; ++t) {
    const auto e = oracle::random_ensemble(3, 4, rng);
    const auto ci = build_covering_instance(e, 1.5, kDefaultEpsilonFloor);
    if (ci.eps >= 1.0) continue;
    const auto bands = band_decomposition(ci.rho, ci.eps);
    std::vector<int> nonempty;
    for (int i = 1; i <= bands.k_bands; ++i)
      if (!bands.empty(i)) nonempty.push_back(i);
    if (nonempty.size() < 2) continue;
    const auto rep = offdiag_block_experiment(ci, bands, nonempty[0], nonempty[1], 256, 50, derive_seed(85, t));
    EXPECT_LE(rep.max_trace_norm, 1.0 + 1e-8);
    EXPECT_LE(rep.max_op_norm, rep.op_norm_limit + 1e-8);
    EXPECT_LE(rep.trial.empirical_tail, std::min(1.0, rep.trial.bound_value));
  }
}
