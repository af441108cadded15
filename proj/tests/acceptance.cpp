// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "support/oracles.hpp"

using namespace qwt;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

WiretapChannelModel random_two_qubit_channel(Rng& rng, std::size_t inputs) {
  std::vector<DensityOperator> joints;
  std::vector<std::string> labels;
  for (std::size_t v = 0; v < inputs; ++v) {
    joints.push_back(oracle::random_state(4, rng, 2));
    labels.push_back("s" + std::to_string(v));
  }
  return WiretapChannelModel(2, 2, labels, joints, oracle::random_probs(inputs, rng));
}

WiretapChannelModel orthogonal_channel() {
  std::vector<DensityOperator> joints;
  for (int v = 0; v < 2; ++v) {
    joints.emplace_back(tensor(HermitianOperator::diagonal(RealVector::Unit(2, v)), HermitianOperator::identity(2) * 0.5));
  }
  return WiretapChannelModel(2, 2, {"0", "1"}, joints);
}

// Eve-side cq states of every code evaluated for criterion 6, reused by criterion 7.
std::vector<CodePerformance> g_codes;

Outcome np_oracle() {
  Rng rng(1001);
  std::uniform_int_distribution<int> dim(1, 6), nv(1, 4);
  double worst = 0.0;
  int infinite_mismatch = 0, checked = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = dim(rng);
    const std::size_t n = static_cast<std::size_t>(nv(rng));
    std::vector<DensityOperator> states;
    for (std::size_t v = 0; v < n; ++v) states.push_back(oracle::random_diagonal_state(d, rng, 0.3));
    const Ensemble e = Ensemble::indexed(oracle::random_probs(n, rng), states);
    std::vector<std::vector<double>> rd;
    std::vector<double> sd(static_cast<std::size_t>(d), 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      rd.emplace_back();
      for (Eigen::Index j = 0; j < d; ++j) {
        rd.back().push_back(states[v].matrix()(j, j).real());
        sd[static_cast<std::size_t>(j)] += e.prob(v) * rd.back().back();
      }
    }
    for (double eps : {0.0, 0.1, 0.3}) {
      const auto r = cq_hypothesis_testing_divergence(CqState(e), eps);
      const double o = oracle::knapsack_divergence(e.probs(), rd, sd, eps);
      ++checked;
      if (std::isinf(o) || r.infinite) {
        infinite_mismatch += std::isinf(o) != r.infinite;
      } else {
        worst = std::max(worst, std::abs(r.value_bits - o));
      }
    }
  }
  return {worst <= 1e-9 && infinite_mismatch == 0,
          std::to_string(checked) + " cases, max |diff| = " + num(worst) + " bits, infinity mismatches " +
              std::to_string(infinite_mismatch)};
}

Outcome grid_fidelity() {
  Rng rng(1002);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index d = 2 + t % 3;
    const auto e = oracle::random_ensemble(2 + t % 3, d, rng, t % 2 ? 1 : 0);
    const double eps = (t % 3 == 0) ? 0.01 : (t % 3 == 1 ? 0.1 : 0.3);
    worst = std::max(worst, std::abs(smooth_max_divergence(e, eps, 1e-3).value_bits - oracle::smooth_max_fine(e, eps, 1e-5)));
  }
  return {worst <= 2e-3, "50 ensembles, max |diff| = " + num(worst) + " bits"};
}

Outcome pinsker() {
  Rng rng(1003);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 10000; ++t) {
    const Eigen::Index d = 2 + t % 2;
    const auto rho = oracle::random_state(d, rng, 1 + t % 3 % static_cast<int>(d));
    const auto sigma = oracle::random_state(d, rng);
    for (double beta : {0.5, 1.0, 1.0 / std::numbers::ln2, 2.0}) {
      const auto c = pinsker_floor(rho, sigma, beta);
      worst = std::min(worst, c.lhs - c.rhs);
    }
  }
  const double pre = pinsker_prefactor(1.0 / std::numbers::ln2);
  return {worst >= -1e-10 && pre == 1.0, "10^4 pairs, min slack = " + num(worst) + ", prefactor(1/ln2) = " + format_double(pre)};
}

Outcome hayashi_nagaoka() {
  Rng rng(1004);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index d = 1 + t % 8;
    worst = std::min(worst, hayashi_nagaoka_gap(oracle::random_contraction(d, rng),
                                                oracle::random_psd(d, rng, 1 + t % static_cast<int>(d))));
  }
  return {worst >= -1e-8, "10^3 draws, min lambda_min = " + num(worst)};
}

Outcome gentle() {
  Rng rng(1005);
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 1000; ++t) {
    const auto e = oracle::random_ensemble(2 + t % 3, 2 + t % 4, rng, t % 2 ? 1 : 0);
    const auto g = gentle_measurement_check(e, oracle::random_contraction(e.dim(), rng));
    worst = std::max(worst, g.lhs - g.rhs);
  }
  return {worst <= 1e-9, "10^3 instances, max (lhs - 2 sqrt eps) = " + num(worst)};
}

Outcome wiretap_end_to_end() {
  Outcome out;
  {
    const auto ch = orthogonal_channel();
    const auto w = cq_hypothesis_testing_divergence(CqState(bob_marginals(ch)), 0.0).witness;
    const Codebook cb(2, 1, {"0", "1"});
    const auto perf = evaluate_code(cb, build_srm_decoder(cb, *w), ch);
    g_codes.push_back(perf);
    const bool exact = perf.avg_error == 0.0 && perf.leakage == 0.0;
    out.pass = out.pass && exact;
    out.detail += "orthogonal: error " + format_double(perf.avg_error) + ", leakage " + format_double(perf.leakage);
  }
  {
    Rng rng(1006);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const auto ch = random_two_qubit_channel(rng, 2 + t % 3);
      const auto bob = bob_marginals(ch);
      const auto w = cq_hypothesis_testing_divergence(CqState(bob), 0.05 * (t % 4)).witness;
      const auto cb = generate_codebook(bob, 2 + t % 3, 1 + t % 3, derive_seed(1007, t));
      const auto perf = evaluate_code(cb, build_srm_decoder(cb, *w), ch);
      const auto bf = oracle::brute_force_code(cb, *w, ch);
      worst = std::max({worst, std::abs(perf.avg_error - bf.avg_error), std::abs(perf.leakage - bf.leakage)});
      g_codes.push_back(perf);
    }
    out.pass = out.pass && worst <= 1e-10;
    out.detail += "; brute force max |diff| = " + num(worst);
  }
  {
    Rng rng(1008);
    const auto ch = random_two_qubit_channel(rng, 3);
    const auto bob = bob_marginals(ch);
    const auto w = cq_hypothesis_testing_divergence(CqState(bob), 0.1).witness;
    const auto res = expurgate(bob, ch, *w, 3, 2, 60, 1009);
    const double floor = 1.0 / 3.0 - 3.0 * oracle::binomial_sigma(1.0 / 3.0, 60);
    out.pass = out.pass && res.report.qualified_fraction > floor;
    out.detail += "; qualifying fraction " + num(res.report.qualified_fraction) + " (floor " + num(floor) + ")";
    g_codes.push_back(res.performance);
  }
  return out;
}

Outcome converse_chain() {
  if (g_codes.empty()) return {false, "criterion 6 produced no codes"};
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t failures = 0;
  for (const auto& perf : g_codes) {
    const auto c = converse_secrecy_check(message_eve_state(perf), perf.leakage, 1e-3);
    worst = std::max(worst, c.iinf);
    failures += !c.holds;
  }
  return {failures == 0, std::to_string(g_codes.size()) + " codes, max I_inf^delta = " + num(worst) + " bits (limit 1.501)"};
}

Outcome covering_decomposition() {
  Rng rng(1010);
  std::size_t instances = 0, bad = 0, viol = 0, probes = 0;
  double max_res = 0.0;
  for (int t = 0; t < 30 && instances < 20; ++t) {
    const auto e = oracle::random_ensemble(2 + t % 3, 2 + t % 3, rng, 1 + t % 2);
    CoveringInstance ci;
    try {
      ci = build_covering_instance(e, 1.0 + 0.5 * (t % 3));
    } catch (const DegenerateEpsilon&) {
      continue;
    }
    if (ci.eps >= 1.0) continue;
    ++instances;
    const auto s = decomposition_suite(ci);
    bad += !s.all_ok();
    max_res = std::max(max_res, s.max_residual);
    const auto bands = band_decomposition(ci.rho, ci.eps);
    std::vector<Projector> subs(bands.pi_i.begin(), bands.pi_i.end());
    subs.push_back(bands.pi_star);
    for (std::size_t x = 0; x < e.size(); ++x) {
      const auto k = key_lemma_check(ci.rho, ci.pi_x[x], 10000 / e.size() / 20 + 1, derive_seed(1011, t, x), subs);
      viol += k.violations_a + k.violations_b;
      probes += k.probes;
    }
  }
  // top up to 10^4 probes on one qutrit instance
  {
    const auto rho = oracle::random_state(3, rng);
    const auto pi = positive_part_projector(oracle::random_psd(3, rng) - HermitianOperator::identity(3) * 0.3,
                                            Positivity::strict);
    const auto k = key_lemma_check(rho, pi, 10000, 1012);
    viol += k.violations_a + k.violations_b;
    probes += k.probes;
  }
  return {bad == 0 && viol == 0 && instances > 0,
          std::to_string(instances) + " instances, suite failures " + std::to_string(bad) + ", key-lemma violations " +
              std::to_string(viol) + "/" + std::to_string(probes) + " probes, max residual " + num(max_res)};
}

Outcome covering_sampling() {
  Outcome out;
  Rng rng(1013);
  const auto rho = oracle::random_state(2, rng);
  const auto det = covering_experiment(build_covering_instance(Ensemble::indexed({1.0}, {rho}), 1.0, kDefaultEpsilonFloor), 256, 20, 1);
  double det_max = 0.0;
  for (double d : det.deviations) det_max = std::max(det_max, d);
  out.pass = det_max == 0.0;

  const auto ci = build_covering_instance(oracle::random_ensemble(4, 2, rng), 1.0, kDefaultEpsilonFloor);
  const auto a = covering_experiment(ci, 1024, 400, 1014);
  const auto b = covering_experiment(ci, 4096, 400, 1015);
  const double ratio = a.mean_deviation / b.mean_deviation;
  out.pass = out.pass && ratio >= 1.6 && ratio <= 2.6;
  out.pass = out.pass && a.empirical_fail <= std::min(1.0, a.bound_rhs) && b.empirical_fail <= std::min(1.0, b.bound_rhs);

  double worst_rel = 0.0;
  for (long long d : {2LL, 3LL, 8LL}) {
    for (double eps : {1e-3, 0.05, 0.5}) {
      for (double m : {1024.0, 1e12, 1e40}) {
        const double lib = covering_bound_rhs(d, eps, 1.0, m);
        const double big =
            static_cast<double>(oracle::big_covering_rhs(d, oracle::BigFloat(eps), oracle::BigFloat(1.0), oracle::BigFloat(m)));
        if (big != 0.0) worst_rel = std::max(worst_rel, std::abs(lib - big) / std::abs(big));
      }
    }
  }
  out.pass = out.pass && worst_rel <= 1e-10;
  out.detail = "deterministic deviation " + format_double(det_max) + "; sqrt-M ratio " + num(ratio) + "; tails " +
               num(a.empirical_fail) + ", " + num(b.empirical_fail) + " vs RHS " + num(a.bound_rhs) +
               (a.vacuous ? " (vacuous at this M)" : "") + "; RHS rel. error vs 50-digit " + num(worst_rel);
  return out;
}

Outcome concentration() {
  Outcome out;
  Rng rng(1016);
  double embed_err = 0.0;
  bool pad_exact = true;
  for (int t = 0; t < 100; ++t) {
    const Matrix m = oracle::ginibre(1 + t % 6, 1 + t % 6, rng);
    const auto c = check_embedding(m, hermitian_embed(m));
    embed_err = std::max({embed_err, c.trace_norm_error, c.op_norm_error, c.block_error, std::max(0.0, -c.min_eigenvalue)});
    const Matrix a = oracle::ginibre(6, 1 + t % 6, rng);
    const Matrix p = pad_columns(a, 6);
    pad_exact = pad_exact && p.leftCols(a.cols()) == a && (a.cols() == 6 || p.rightCols(6 - a.cols()).isZero(0.0));
  }
  out.pass = embed_err <= 1e-9 && pad_exact;
  out.detail = "embedding max err " + num(embed_err) + (pad_exact ? ", padding exact" : ", padding NOT exact");

  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t samples = 100000;
  for (int d : {2, 8, 32}) {
    std::size_t below = 0, above = 0;
    for (std::size_t s = 0; s < samples; ++s) {
      double x = 0.0;
      for (int k = 0; k < 2 * d; ++k) {
        const double z = normal(rng);
        x += z * z;
      }
      below += x < d;  // 2 beta d at beta = 1/2
      above += x >= d;
    }
    const double bound = chi2_lower_tail(d, 0.5);
    const double fb = static_cast<double>(below) / samples, fa = static_cast<double>(above) / samples;
    const bool ok = fb <= bound + 3.0 * oracle::binomial_sigma(std::min(bound, 0.5), samples) &&
                    fa >= 0.32 - 3.0 * oracle::binomial_sigma(0.32, samples);
    out.pass = out.pass && ok;
    out.detail += "; d=" + std::to_string(d) + ": Pr{X<d} " + num(fb) + " <= " + num(bound) + ", Pr{X>=d} " + num(fa);
  }

  std::size_t opnorm_hits = 0;
  for (int t = 0; t < 10000; ++t) opnorm_hits += operator_norm(gaussian_matrix(16, rng)) >= 6.0;
  out.pass = out.pass && static_cast<double>(opnorm_hits) / 10000.0 <= gauss_opnorm_tail(16, 6.0);
  out.detail += "; ||G||>=6 hits " + std::to_string(opnorm_hits);

  const Matrix a = oracle::ginibre(8, 2, rng);
  const auto tl = trace_lower_trial(a, 1000, 1017);
  const bool tl_ok = tl.main_frequency >= 0.22 - 3.0 * oracle::binomial_sigma(0.22, 1000) &&
                     tl.c11_frequency >= 0.98 - 3.0 * oracle::binomial_sigma(0.98, 1000);
  out.pass = out.pass && tl_ok;
  out.detail += "; ||A^g||>=||A||/120 freq " + num(tl.main_frequency) + ", C11 freq " + num(tl.c11_frequency);

  std::vector<double> x, y;
  const Eigen::Index q = stack_count(a);
  for (int t = 0; t < 2000; ++t) {
    x.push_back(singular_values(gaussian_block_embed(a, draw_shifts(8, q, rng)))[0]);
    y.push_back(singular_values(abar_sample(a, rng))[0]);
  }
  const double p = oracle::ks_two_sample_p(x, y);
  out.pass = out.pass && p > 1e-3;
  out.detail += "; KS p " + num(p);
  return out;
}

Outcome rate_formulas() {
  double worst_sum = 0.0, worst_dup = 0.0;
  int points = 0;
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      for (int c = 0; c < 10; ++c) {
        const double i0 = 0.5 * a;
        const double ep = std::pow(10.0, -1.0 - 0.3 * b);
        const double dh = std::pow(10.0, -1.0 - 1.1 * c);
        const long long de = 2LL << (c % 5);
        const auto r = achievable_rate({i0, 0.25 * b, ep, dh, de});
        worst_sum = std::max(worst_sum, std::abs(r.r_bits + r.r_tilde_bits - (i0 + std::log2(ep))));
        const double d = static_cast<double>(de);
        const double t = std::log2(4.0 * d / dh) + 1.0;
        const double dup = 16.0 * std::log2(10.0) + 6.0 * std::log2(std::log2(d)) - 9.0 * std::log2(dh) +
                           std::log2(std::log(30.0 * d * t * t / dh));
        worst_dup = std::max(worst_dup, std::abs(r.penalty_bits - dup) / std::abs(dup));
        ++points;
      }
    }
  }
  bool eq = true;
  for (double eps : {0.18, 0.01, 0.5}) {
    for (double delta : {1.44, 0.1, 1.9}) {
      const auto p = theorem3_code_params(eps, delta);
      eq = eq && std::abs(18.0 * p.eps_prime - eps) <= 1e-15 && std::abs(144.0 * std::sqrt(p.delta_hat) - delta) <= 1e-14;
    }
  }
  return {worst_sum <= 1e-9 && worst_dup <= 1e-12 && eq,
          std::to_string(points) + " points, max |R+R~-(I0+log eps')| " + num(worst_sum) + ", duplicate rel. diff " +
              num(worst_dup) + (eq ? ", code params tight" : ", code params NOT tight")};
}

Outcome spectral() {
  const double p = 0.11;
  const double h = -p * std::log2(p) - (1 - p) * std::log2(1 - p);
  struct Case {
    std::vector<std::vector<double>> joint;
    double target;
  };
  const std::vector<Case> cases{{{{0.12, 0.28}, {0.18, 0.42}}, 0.0},
                                {{{0.5, 0.0}, {0.0, 0.5}}, 1.0},
                                {{{0.5 * (1 - p), 0.5 * p}, {0.5 * p, 0.5 * (1 - p)}}, 1.0 - h}};
  Outcome out;
  double worst = 0.0;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto est = classical_spectral_estimate(cases[k].joint, 10000, 0.1, derive_seed(1018, k));
    worst = std::max({worst, std::abs(est.inf_rate - cases[k].target), std::abs(est.sup_rate - cases[k].target)});
  }
  out.pass = worst <= 0.05;
  Rng rng(1019);
  const CqState cq(oracle::random_ensemble(2, 2, rng));
  const auto s = tensor_power_rates(cq, 1, 0.1);
  const bool exact = s.rate_lower[0] == cq_hypothesis_testing_divergence(cq, 0.1).value_bits &&
                     s.rate_upper[0] == smooth_max_divergence(cq, 0.1).value_bits;
  out.pass = out.pass && exact;
  out.detail = "classical max |diff| " + num(worst) + " bits; n=1 " + (exact ? "exact" : "NOT exact");
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Neyman-Pearson vs knapsack oracle", np_oracle},
      {"smooth max grid fidelity", grid_fidelity},
      {"Pinsker-type floor", pinsker},
      {"Hayashi-Nagaoka inequality", hayashi_nagaoka},
      {"gentle measurement", gentle},
      {"wiretap end-to-end", wiretap_end_to_end},
      {"converse chain on simulated codes", converse_chain},
      {"covering decomposition suite", covering_decomposition},
      {"covering sampling behaviour", covering_sampling},
      {"concentration toolbox", concentration},
      {"rate formulas", rate_formulas},
      {"spectral diagnostics", spectral},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
