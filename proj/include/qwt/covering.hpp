#pragma once

// One-shot covering lemma: the instance (Pi_x, eps_x), the dyadic spectral
// bands of the average state, the Pi^+/Pi^- split inside each band, the
// deterministic inequalities of the proof and the sampling experiments.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qwt/ensembles.hpp"
#include "qwt/operator_core.hpp"
#include "qwt/parallel.hpp"
#include "qwt/random.hpp"
#include "qwt/rate_bounds.hpp"
#include "qwt/trial_report.hpp"
#include "qwt/wiretap_sim.hpp"

namespace qwt {

inline constexpr double kDegenerateEpsilon = 1e-12;
inline constexpr double kDefaultEpsilonFloor = 1e-6;

class DegenerateEpsilon : public Error {
 public:
  DegenerateEpsilon(double eps, double suggested_floor)
      : Error(ErrorCode::degenerate_epsilon,
              "covering epsilon " + format_double(eps) + " is zero; rerun with a floor such as " +
                  format_double(suggested_floor)),
        eps_(eps),
        floor_(suggested_floor) {}
  double epsilon() const { return eps_; }
  double suggested_floor() const { return floor_; }

 private:
  double eps_;
  double floor_;
};

struct CoveringInstance {
  Ensemble ensemble;
  DensityOperator rho;       // average state
  double i_param = 0.0;      // I
  std::vector<Projector> pi_x;  // {2^I rho >= rho_x}, weak
  std::vector<double> eps_x;    // 1 - Tr[Pi_x rho_x]
  double eps = 0.0;             // sum_x p_x eps_x, after any floor
  double eps_raw = 0.0;         // before the floor
  bool floored = false;

  Eigen::Index dim() const { return rho.dim(); }
};

/// Builds Pi_x and eps_x. A zero eps throws DegenerateEpsilon unless eps_floor > 0 is given.
inline CoveringInstance build_covering_instance(const Ensemble& e, double i_param, double eps_floor = 0.0) {
  if (!(i_param >= 0.0) || !std::isfinite(i_param)) throw DomainError("I must be a finite non-negative number");
  if (e.dim() < 2) throw DomainError("covering bounds need dimension at least 2");
  CoveringInstance ci;
  ci.ensemble = e;
  ci.rho = average_state(e);
  ci.i_param = i_param;
  const double scale = std::exp2(i_param);
  double eps = 0.0;
  for (std::size_t x = 0; x < e.size(); ++x) {
    ci.pi_x.push_back(positive_part_projector(ci.rho.op() * scale - e.state(x).op(), Positivity::weak));
    ci.eps_x.push_back(1.0 - trace_product(ci.pi_x.back().op(), e.state(x).op()));
    eps += e.prob(x) * ci.eps_x.back();
  }
  ci.eps_raw = eps;
  ci.eps = eps;
  if (eps <= kDegenerateEpsilon) {
    if (!(eps_floor > kDegenerateEpsilon)) throw DegenerateEpsilon(eps, kDefaultEpsilonFloor);
    ci.eps = eps_floor;
    ci.floored = true;
  }
  return ci;
}

struct BandDecomposition {
  int k_bands = 0;                    // K = ceil(log2(4 dim / eps))
  std::vector<Projector> pi_i;        // bands 1..K at index i-1
  std::vector<Matrix> basis;          // orthonormal eigenvectors spanning each band
  std::vector<RealVector> eigenvalues;
  Projector pi_star;
  double tail_mass = 0.0;             // Tr[Pi_star^c rho]

  bool empty(int i) const { return i < 1 || i > k_bands || basis[static_cast<std::size_t>(i - 1)].cols() == 0; }
  double lambda_min(int i) const { return eigenvalues[static_cast<std::size_t>(i - 1)].minCoeff(); }
  double lambda_max(int i) const { return eigenvalues[static_cast<std::size_t>(i - 1)].maxCoeff(); }
};

/// Band index i with lambda in (2^-i, 2^-(i-1)].
inline int dyadic_band(double lambda) {
  int i = static_cast<int>(std::floor(-std::log2(lambda))) + 1;
  while (i > 1 && lambda > std::ldexp(1.0, -(i - 1))) --i;
  while (!(lambda > std::ldexp(1.0, -i))) ++i;
  return std::max(i, 1);
}

inline int band_count(Eigen::Index dim, double eps) {
  return static_cast<int>(std::ceil(std::log2(4.0 * static_cast<double>(dim) / eps)));
}

inline BandDecomposition band_decomposition(const DensityOperator& rho, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("band decomposition needs eps in (0,1)");
  const EigenSystem es = eig_h(rho.op());
  const double tau = zero_threshold(es.values);
  BandDecomposition bd;
  bd.k_bands = band_count(rho.dim(), eps);
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(bd.k_bands));
  for (Eigen::Index j = 0; j < es.values.size(); ++j) {
    const double lambda = es.values[j];
    if (lambda <= tau) continue;
    const int i = dyadic_band(lambda);
    if (i <= bd.k_bands) members[static_cast<std::size_t>(i - 1)].push_back(j);
  }
  Matrix star_cols(rho.dim(), 0);
  for (const auto& idx : members) {
    Matrix cols(rho.dim(), static_cast<Eigen::Index>(idx.size()));
    RealVector vals(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
      cols.col(static_cast<Eigen::Index>(c)) = es.vectors.col(idx[c]);
      vals[static_cast<Eigen::Index>(c)] = es.values[idx[c]];
    }
    bd.pi_i.push_back(Projector::from_orthonormal_columns(cols, rho.dim()));
    bd.basis.push_back(cols);
    bd.eigenvalues.push_back(vals);
    Matrix grown(rho.dim(), star_cols.cols() + cols.cols());
    grown << star_cols, cols;
    star_cols = grown;
  }
  bd.pi_star = Projector::from_orthonormal_columns(star_cols, rho.dim());
  bd.tail_mass = 1.0 - trace_product(bd.pi_star.op(), rho.op());
  return bd;
}

struct BandSplit {
  std::vector<Projector> pi_plus_i;   // per band, Pi^+_{i,x}
  std::vector<Projector> pi_minus_i;  // Pi_i - Pi^+_{i,x}
  Projector pi_plus_star;
  Projector pi_minus_star;
  HermitianOperator rho_prime;  // Pi_x rho_x Pi_x
  HermitianOperator rho_star;   // Pi_star rho'_x Pi_star
  HermitianOperator rho_minus;
  HermitianOperator rho_plus;
  double residual = 0.0;  // ||rho_star - rho_minus - rho_plus||
};

/// Pi^+_{i,x} = {Pi_i Pi_x rho Pi_x Pi_i > 4 Pi_i rho Pi_i}, solved in each band's eigenbasis.
inline BandSplit band_split(const CoveringInstance& ci, const BandDecomposition& bands, std::size_t x) {
  const Eigen::Index d = ci.dim();
  const Matrix& px = ci.pi_x.at(x).matrix();
  const Matrix compressed_avg = px * ci.rho.matrix() * px;
  BandSplit s;
  Matrix plus_star = Matrix::Zero(d, d);
  for (std::size_t b = 0; b < bands.basis.size(); ++b) {
    const Matrix& w = bands.basis[b];
    if (w.cols() == 0) {
      s.pi_plus_i.push_back(Projector::zero(d));
      s.pi_minus_i.push_back(Projector::zero(d));
      continue;
    }
    const HermitianOperator local(Matrix(w.adjoint() * compressed_avg * w - 4.0 * (w.adjoint() * ci.rho.matrix() * w)));
    const Projector local_plus = positive_part_projector(local, Positivity::strict);
    const HermitianOperator plus(Matrix(w * local_plus.matrix() * w.adjoint()));
    const HermitianOperator minus(Matrix(w * (Matrix::Identity(w.cols(), w.cols()) - local_plus.matrix()) * w.adjoint()));
    s.pi_plus_i.push_back(Projector::verified(plus));
    s.pi_minus_i.push_back(Projector::verified(minus));
    plus_star += plus.matrix();
  }
  s.pi_plus_star = Projector::verified(HermitianOperator(plus_star));
  s.pi_minus_star = Projector::verified(bands.pi_star.op() - s.pi_plus_star.op());
  s.rho_prime = ci.pi_x[x].compress(ci.ensemble.state(x).op());
  s.rho_star = bands.pi_star.compress(s.rho_prime);
  s.rho_minus = s.pi_minus_star.compress(s.rho_star);
  s.rho_plus = s.pi_plus_star.compress(s.rho_star);
  s.residual = trace_norm(s.rho_star - s.rho_minus - s.rho_plus);
  return s;
}

struct GentleCheck {
  double lhs = 0.0;   // sum_x p_x ||rho_x - sqrt(L) rho_x sqrt(L)||
  double eps = 0.0;   // 1 - Tr[L rho]
  double rhs = 0.0;   // 2 sqrt(eps)
  bool holds = false;
};

/// Gentle measurement for an ensemble and any 0 <= L <= I.
inline GentleCheck gentle_measurement_check(const Ensemble& e, const HermitianOperator& lambda) {
  const Matrix root = sqrt_psd(lambda).matrix();
  GentleCheck g;
  g.eps = std::max(0.0, 1.0 - trace_product(lambda, average_state(e).op()));
  for (std::size_t x = 0; x < e.size(); ++x) {
    g.lhs += e.prob(x) * trace_norm(e.state(x).op() - HermitianOperator(Matrix(root * e.state(x).matrix() * root)));
  }
  g.rhs = 2.0 * std::sqrt(g.eps);
  g.holds = g.lhs <= g.rhs + 1e-9;
  return g;
}

struct DecompositionSuite {
  double eps = 0.0;
  double tail_mass = 0.0;
  bool tail_ok = false;             // tail_mass <= eps/4 + 1e-10
  double worst_band_ratio = 1.0;    // max over bands of lambda_max/lambda_min
  bool ratio_ok = false;
  double worst_exptr_slack = 0.0;   // min over x of 4 Tr[Pi_x^c rho_x Pi_x^c] - Tr[Pi^+ rho_star Pi^+]
  double worst_piminus_eig = 0.0;   // min over x, i of lambda_min(2^{I+2} lambda_max(i) Pi_i - Pi^- rho'_x Pi^-)
  double expected_plus_mass = 0.0;  // E_X Tr[rho^+_{star,X}]
  bool decompose_ok = false;        // <= 4 eps + 1e-8
  double max_residual = 0.0;        // largest decomposition residual
  double gentle_lhs = 0.0;          // sum p ||rho_x - Pi_star rho_x Pi_star||
  bool gentle_ok = false;           // <= 2 sqrt(eps/4) + 1e-9
  double claim2_lhs = 0.0;          // ||rho' - rho||
  bool claim2_ok = false;           // <= 2 sqrt(eps) + 1e-9

  bool exptr_ok() const { return worst_exptr_slack >= -1e-8; }
  bool piminus_ok() const { return worst_piminus_eig >= -1e-8; }
  bool all_ok() const { return tail_ok && ratio_ok && exptr_ok() && piminus_ok() && decompose_ok && gentle_ok && claim2_ok; }
};

/// Evaluates every deterministic inequality of the covering proof on one instance.
inline DecompositionSuite decomposition_suite(const CoveringInstance& ci) {
  const BandDecomposition bands = band_decomposition(ci.rho, ci.eps);
  DecompositionSuite r;
  r.eps = ci.eps;
  r.tail_mass = bands.tail_mass;
  r.tail_ok = bands.tail_mass <= ci.eps / 4.0 + 1e-10;
  for (int i = 1; i <= bands.k_bands; ++i) {
    if (!bands.empty(i)) r.worst_band_ratio = std::max(r.worst_band_ratio, bands.lambda_max(i) / bands.lambda_min(i));
  }
  r.ratio_ok = r.worst_band_ratio <= 2.0;
  r.worst_exptr_slack = std::numeric_limits<double>::infinity();
  r.worst_piminus_eig = std::numeric_limits<double>::infinity();
  const Eigen::Index d = ci.dim();
  Matrix rho_prime_avg = Matrix::Zero(d, d);
  for (std::size_t x = 0; x < ci.ensemble.size(); ++x) {
    const BandSplit s = band_split(ci, bands, x);
    const HermitianOperator& rho_x = ci.ensemble.state(x).op();
    const double plus_mass = s.rho_plus.trace();
    const double outside = ci.pi_x[x].complement().compress(rho_x).trace();
    r.worst_exptr_slack = std::min(r.worst_exptr_slack, 4.0 * outside - plus_mass);
    for (int i = 1; i <= bands.k_bands; ++i) {
      if (bands.empty(i)) continue;
      const auto& pm = s.pi_minus_i[static_cast<std::size_t>(i - 1)];
      const HermitianOperator bound = bands.pi_i[static_cast<std::size_t>(i - 1)].op() *
                                      (std::exp2(ci.i_param + 2.0) * bands.lambda_max(i));
      r.worst_piminus_eig = std::min(r.worst_piminus_eig, lambda_min(bound - pm.compress(s.rho_prime)));
    }
    r.expected_plus_mass += ci.ensemble.prob(x) * plus_mass;
    r.max_residual = std::max(r.max_residual, s.residual);
    r.gentle_lhs += ci.ensemble.prob(x) * trace_norm(rho_x - bands.pi_star.compress(rho_x));
    rho_prime_avg += ci.ensemble.prob(x) * s.rho_prime.matrix();
  }
  r.decompose_ok = r.expected_plus_mass <= 4.0 * ci.eps + 1e-8;
  r.gentle_ok = r.gentle_lhs <= 2.0 * std::sqrt(ci.eps / 4.0) + 1e-9;
  r.claim2_lhs = trace_norm(HermitianOperator(rho_prime_avg) - ci.rho.op());
  r.claim2_ok = r.claim2_lhs <= 2.0 * std::sqrt(ci.eps) + 1e-9;
  return r;
}

struct KeyLemmaReport {
  std::size_t probes = 0;
  std::size_t premise_hits = 0;     // vectors with <v|Pi_x rho Pi_x|v> > 4 <v|rho|v>
  std::size_t violations_a = 0;     // premise holds but <v|Pi_x rho Pi_x|v> >= 4 <v|Pi^c rho Pi^c|v> + 1e-10
  std::vector<double> part_b_lhs;   // Tr[Pi^+ Pi_x rho Pi_x Pi^+] per supplied Pi
  std::vector<double> part_b_rhs;   // 4 Tr[Pi^+ Pi_x^c rho Pi_x^c Pi^+]
  std::size_t violations_b = 0;

  bool passed() const { return violations_a == 0 && violations_b == 0; }
};

/// Probes part (a) with random vectors and vectors drawn from {Pi_x rho Pi_x > 4 rho};
/// checks part (b) for each projector in `subspaces` (the identity when empty).
inline KeyLemmaReport key_lemma_check(const DensityOperator& rho, const Projector& pi_x, std::size_t trials,
                                      std::uint64_t seed, std::vector<Projector> subspaces = {}) {
  if (rho.dim() != pi_x.dim()) throw ShapeError("key lemma needs equal dimensions");
  const Eigen::Index d = rho.dim();
  const Matrix inside = pi_x.matrix() * rho.matrix() * pi_x.matrix();
  const Matrix comp = pi_x.complement().matrix();
  const Matrix outside = comp * rho.matrix() * comp;
  const Projector plus_full = positive_part_projector(HermitianOperator(Matrix(inside - 4.0 * rho.matrix())), Positivity::strict);
  const Matrix plus_basis = eig_h(plus_full.op()).vectors.leftCols(plus_full.rank());

  KeyLemmaReport rep;
  rep.probes = trials;
  Rng rng(derive_seed(seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v[k] = cplx(normal(rng), normal(rng));
    return v;
  };
  for (std::size_t t = 0; t < trials; ++t) {
    // alternate unconstrained probes with probes inside the premise region
    Vector v = (t % 2 == 1 && plus_basis.cols() > 0) ? Vector(plus_basis * gaussian(plus_basis.cols())) : gaussian(d);
    v.normalize();
    const double a = (v.adjoint() * inside * v)(0, 0).real();
    const double r = (v.adjoint() * rho.matrix() * v)(0, 0).real();
    const double b = (v.adjoint() * outside * v)(0, 0).real();
    if (a > 4.0 * r) {
      ++rep.premise_hits;
      if (!(a < 4.0 * b + 1e-10)) ++rep.violations_a;
    }
  }
  if (subspaces.empty()) subspaces.push_back(Projector::identity(d));
  for (const auto& pi : subspaces) {
    const Matrix& p = pi.matrix();
    const Projector plus = positive_part_projector(HermitianOperator(Matrix(p * inside * p - 4.0 * (p * rho.matrix() * p))),
                                                   Positivity::strict);
    const double lhs = trace_product(plus.matrix(), inside).real();
    const double rhs = 4.0 * trace_product(plus.matrix(), outside).real();
    rep.part_b_lhs.push_back(lhs);
    rep.part_b_rhs.push_back(rhs);
    if (lhs > rhs + 1e-10) ++rep.violations_b;
  }
  return rep;
}

/// 30 C exp(-1e-16 eps^9 / (log2 dim)^6 * M / 2^I)
inline double covering_bound_rhs(Eigen::Index dim, double eps, double i_param, double m_samples) {
  if (dim < 2) throw DomainError("covering bound needs dimension at least 2");
  const long double c = covering_constant(static_cast<double>(dim), eps);
  const long double ld = std::log2(static_cast<long double>(dim));
  const long double e = eps;
  const long double expo = -1e-16L * std::pow(e, 9.0L) / std::pow(ld, 6.0L) * static_cast<long double>(m_samples) /
                           std::exp2(static_cast<long double>(i_param));
  return static_cast<double>(30.0L * c * std::exp(expo));
}

/// 25 dim exp(-1e-12 eps^3 M / 2^I)
inline double offdiag_bound(Eigen::Index dim, double eps, double i_param, double m_samples) {
  const long double e = eps;
  const long double expo = -1e-12L * e * e * e * static_cast<long double>(m_samples) /
                           std::exp2(static_cast<long double>(i_param));
  return static_cast<double>(25.0L * static_cast<long double>(dim) * std::exp(expo));
}

struct CoveringReport {
  std::size_t m_samples = 0;
  std::size_t trials = 0;
  double eps = 0.0;
  bool eps_floored = false;
  double i_param = 0.0;
  std::vector<double> deviations;  // ||rho~ - rho|| per trial
  double mean_deviation = 0.0;
  double threshold = 0.0;          // 22 sqrt(eps)
  double empirical_fail = 0.0;
  double c_const = 0.0;
  double bound_rhs = 0.0;
  bool vacuous = false;
  // scalar Chernoff layers of the first two claims
  double claim1_mean_bound = 0.0;  // sqrt(eps) + 2 eps
  double claim1_fail = 0.0;
  double claim2_mean_bound = 0.0;  // 2 sqrt(eps) + 2 eps
  double claim2_fail = 0.0;
  double scalar_chernoff = 0.0;    // exp(-2 M eps^2)
};

/// Label counts of M i.i.d. draws from probs.
inline std::vector<std::size_t> draw_counts(const std::vector<double>& probs, std::size_t m_samples, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::size_t> counts(probs.size(), 0);
  for (std::size_t m = 0; m < m_samples; ++m) ++counts[sample_index(probs, unif(rng))];
  return counts;
}

inline CoveringReport covering_experiment(const CoveringInstance& ci, std::size_t m_samples, std::size_t trials,
                                          std::uint64_t master_seed) {
  if (m_samples == 0) throw DomainError("covering experiment needs at least one sample");
  const Ensemble& e = ci.ensemble;
  const BandDecomposition bands = band_decomposition(ci.rho, ci.eps);
  std::vector<double> gentle_x(e.size());
  std::vector<double> prime_x(e.size());
  for (std::size_t x = 0; x < e.size(); ++x) {
    gentle_x[x] = trace_norm(e.state(x).op() - bands.pi_star.compress(e.state(x).op()));
    prime_x[x] = trace_norm(e.state(x).op() - ci.pi_x[x].compress(e.state(x).op()));
  }
  CoveringReport rep;
  rep.m_samples = m_samples;
  rep.trials = trials;
  rep.eps = ci.eps;
  rep.eps_floored = ci.floored;
  rep.i_param = ci.i_param;
  rep.threshold = 22.0 * std::sqrt(ci.eps);
  rep.c_const = covering_constant(static_cast<double>(ci.dim()), ci.eps);
  rep.bound_rhs = covering_bound_rhs(ci.dim(), ci.eps, ci.i_param, static_cast<double>(m_samples));
  rep.vacuous = rep.bound_rhs >= 1.0;
  rep.claim1_mean_bound = std::sqrt(ci.eps) + 2.0 * ci.eps;
  rep.claim2_mean_bound = 2.0 * std::sqrt(ci.eps) + 2.0 * ci.eps;
  rep.scalar_chernoff = std::exp(-2.0 * static_cast<double>(m_samples) * ci.eps * ci.eps);

  rep.deviations.resize(trials);
  std::vector<double> claim1(trials), claim2(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = make_rng(master_seed, t);
    const auto counts = draw_counts(e.probs(), m_samples, rng);
    Matrix mean = Matrix::Zero(ci.dim(), ci.dim());
    double g = 0.0, p = 0.0;
    for (std::size_t x = 0; x < e.size(); ++x) {
      if (counts[x] == 0) continue;
      const double w = static_cast<double>(counts[x]) / static_cast<double>(m_samples);
      mean += w * e.state(x).matrix();
      g += w * gentle_x[x];
      p += w * prime_x[x];
    }
    rep.deviations[t] = trace_norm(HermitianOperator(mean) - ci.rho.op());
    claim1[t] = g;
    claim2[t] = p;
  });
  rep.mean_deviation = mean_of(rep.deviations);
  rep.empirical_fail = fraction_at_least(rep.deviations, rep.threshold);
  rep.claim1_fail = fraction_at_least(claim1, rep.claim1_mean_bound);
  rep.claim2_fail = fraction_at_least(claim2, rep.claim2_mean_bound);
  return rep;
}

struct OffDiagReport {
  TrialReport trial;
  int band_i = 0;
  int band_l = 0;
  double eps = 0.0;
  double max_trace_norm = 0.0;    // max_x ||sigma^-_{i,l,x}||, must be <= 1
  double max_op_norm = 0.0;       // max_x ||sigma^-_{i,l,x}||_inf
  double op_norm_limit = 0.0;     // 2^{I+3} sqrt(lambda_min(i) lambda_min(l))
};

/// Sample-mean deviation of the off-diagonal blocks sigma^-_{i,l,x} = Pi^-_{i,x} rho'_x Pi^-_{l,x}.
inline OffDiagReport offdiag_block_experiment(const CoveringInstance& ci, const BandDecomposition& bands, int i, int l,
                                              std::size_t m_samples, std::size_t trials, std::uint64_t master_seed) {
  if (i == l) throw DomainError("off-diagonal blocks need i != l");
  if (bands.empty(i)) throw EmptyBand("band " + std::to_string(i) + " is empty");
  if (bands.empty(l)) throw EmptyBand("band " + std::to_string(l) + " is empty");
  const Ensemble& e = ci.ensemble;
  const Eigen::Index d = ci.dim();
  OffDiagReport rep;
  rep.band_i = i;
  rep.band_l = l;
  rep.eps = ci.eps;
  rep.op_norm_limit = std::exp2(ci.i_param + 3.0) * std::sqrt(bands.lambda_min(i) * bands.lambda_min(l));
  std::vector<Matrix> sigma(e.size());
  Matrix expected = Matrix::Zero(d, d);
  for (std::size_t x = 0; x < e.size(); ++x) {
    const BandSplit s = band_split(ci, bands, x);
    sigma[x] = s.pi_minus_i[static_cast<std::size_t>(i - 1)].matrix() * s.rho_prime.matrix() *
               s.pi_minus_i[static_cast<std::size_t>(l - 1)].matrix();
    const double tn = trace_norm(sigma[x]);
    const double on = operator_norm(sigma[x]);
    if (tn > 1.0 + 1e-8) throw PreconditionError("label '" + e.label(x) + "': trace norm " + format_double(tn) + " exceeds 1");
    if (on > rep.op_norm_limit + 1e-8) {
      throw PreconditionError("label '" + e.label(x) + "': operator norm " + format_double(on) + " exceeds " +
                              format_double(rep.op_norm_limit));
    }
    rep.max_trace_norm = std::max(rep.max_trace_norm, tn);
    rep.max_op_norm = std::max(rep.max_op_norm, on);
    expected += e.prob(x) * sigma[x];
  }
  rep.trial.trials = trials;
  rep.trial.per_trial_stat.resize(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = make_rng(master_seed, t);
    const auto counts = draw_counts(e.probs(), m_samples, rng);
    Matrix mean = Matrix::Zero(d, d);
    for (std::size_t x = 0; x < e.size(); ++x) {
      if (counts[x]) mean += (static_cast<double>(counts[x]) / static_cast<double>(m_samples)) * sigma[x];
    }
    rep.trial.per_trial_stat[t] = trace_norm(Matrix(mean - expected));
  });
  rep.trial.empirical_tail = fraction_at_least(rep.trial.per_trial_stat, ci.eps);
  rep.trial.bound_value = offdiag_bound(d, ci.eps, ci.i_param, static_cast<double>(m_samples));
  rep.trial.vacuous_flag = rep.trial.bound_value >= 1.0;
  return rep;
}

}  // namespace qwt
