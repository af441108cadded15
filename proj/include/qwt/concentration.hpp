#pragma once

// Matrix concentration toolbox: operator Chernoff bounds (plain, shifted,
// non-positive, non-square), the Hermitian embedding, column padding, Gaussian
// block embedding with random shifts, and the Gaussian/chi-squared facts used
// along the way. Each bound has an evaluator; the probabilistic statements have
// Monte Carlo harnesses returning TrialReport.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qwt/io.hpp"
#include "qwt/operator_core.hpp"
#include "qwt/parallel.hpp"
#include "qwt/random.hpp"
#include "qwt/trial_report.hpp"
#include "qwt/wiretap_sim.hpp"

namespace qwt {

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}
}  // namespace detail

/// 2 dim exp(-M eta^2 a / (2 ln 2))
inline double aw_chernoff_bound(double dim, double m_samples, double eta, double a) {
  detail::require(dim >= 1.0, "dimension must be at least 1");
  detail::require(m_samples >= 0.0, "sample count must be non-negative");
  detail::require(eta > 0.0 && eta < 0.5, "eta must lie in (0, 1/2)");
  detail::require(a > 0.0 && (1.0 + eta) * a <= 1.0, "a must satisfy 0 < a and (1+eta) a <= 1");
  return 2.0 * dim * std::exp(-m_samples * eta * eta * a / (2.0 * std::numbers::ln2));
}

/// 2 dim exp(-eps^2 M / (2 ln 2) * delta / (lambda + delta))
inline double shifted_chernoff_bound(double dim, double m_samples, double eps, double delta, double lambda) {
  detail::require(dim >= 1.0, "dimension must be at least 1");
  detail::require(delta > 0.0 && lambda > 0.0, "delta and lambda must be positive");
  detail::require(eps > 0.0 && eps < std::min(0.5, lambda / delta), "eps must lie in (0, min{1/2, lambda/delta})");
  return 2.0 * dim * std::exp(-eps * eps * m_samples / (2.0 * std::numbers::ln2) * delta / (lambda + delta));
}

/// 4 d exp(-eps^2 / (32 ln2 mu) * M / (2 beta + mu)), failure probability for square non-positive families.
inline double nonpositive_bound(double d, double m_samples, double eps, double mu, double beta) {
  detail::require(d >= 1.0, "dimension must be at least 1");
  detail::require(eps > 0.0 && eps < 0.5, "eps must lie in (0, 1/2)");
  detail::require(mu > 0.0 && beta >= 1.0, "need mu > 0 and beta >= 1");
  return 4.0 * d * std::exp(-eps * eps / (32.0 * std::numbers::ln2 * mu) * m_samples / (2.0 * beta + mu));
}

struct NonsquareBound {
  double headline;          // 25 d1 exp(-1e-11 eps^3 M / beta)
  double operator_part;     // 20 d1 exp(-1e-11 eps^3 M / beta)
  double scalar_part;       // 5 exp(-1e-8 eps^2 M)
};

inline NonsquareBound nonsquare_bound(double d1, double m_samples, double eps, double beta) {
  detail::require(d1 >= 1.0, "dimension must be at least 1");
  detail::require(eps > 0.0 && eps < 1.0, "eps must lie in (0,1)");
  detail::require(beta >= 1.0, "beta must be at least 1");
  const double op = std::exp(-1e-11 * eps * eps * eps * m_samples / beta);
  return {25.0 * d1 * op, 20.0 * d1 * op, 5.0 * std::exp(-1e-8 * eps * eps * m_samples)};
}

/// exp(-d l^2 / 16) for l >= 6
inline double gauss_opnorm_tail(double d, double ell) {
  detail::require(d >= 1.0, "dimension must be at least 1");
  detail::require(ell >= 6.0, "the operator-norm tail needs l >= 6");
  return std::exp(-d * ell * ell / 16.0);
}

/// Pr{X < 2 beta d} <= (beta e^{1-beta})^d for X chi-squared with 2d degrees of freedom.
inline double chi2_lower_tail(double d, double beta) {
  detail::require(d >= 1.0, "d must be at least 1");
  detail::require(beta > 0.0 && beta < 1.0, "beta must lie in (0,1)");
  return std::pow(beta * std::exp(1.0 - beta), d);
}

/// Pr{X > c} >= (E[X] - c) / (alpha - c) for X <= alpha almost surely.
inline double reverse_markov(double expect, double c, double alpha) {
  detail::require(c <= expect && expect <= alpha, "need c <= E[X] <= alpha");
  detail::require(c < alpha, "need c < alpha");
  return (expect - c) / (alpha - c);
}

inline constexpr double kTraceLowerProbability = 0.22;
inline constexpr double kClaimC11Probability = 0.98;
inline constexpr double kClaimC22Probability = 0.24;
inline constexpr double kChiSquaredHalfProbability = 0.32;

struct BoundSpec {
  std::string name;
  std::map<std::string, double> params;
};

/// Uniform entry point used by the command-line front end.
inline double evaluate(const BoundSpec& spec) {
  auto p = [&](const char* key) {
    auto it = spec.params.find(key);
    if (it == spec.params.end()) throw ValidationError("bound '" + spec.name + "' needs parameter '" + key + "'");
    return it->second;
  };
  if (spec.name == "aw_chernoff") return aw_chernoff_bound(p("dim"), p("m_samples"), p("eta"), p("a"));
  if (spec.name == "shifted_chernoff")
    return shifted_chernoff_bound(p("dim"), p("m_samples"), p("eps"), p("delta"), p("lambda"));
  if (spec.name == "nonpositive") return nonpositive_bound(p("d"), p("m_samples"), p("eps"), p("mu"), p("beta"));
  if (spec.name == "nonsquare") return nonsquare_bound(p("d1"), p("m_samples"), p("eps"), p("beta")).headline;
  if (spec.name == "gauss_opnorm") return gauss_opnorm_tail(p("d"), p("ell"));
  if (spec.name == "chi2_lower") return chi2_lower_tail(p("d"), p("beta"));
  if (spec.name == "reverse_markov") return reverse_markov(p("expect"), p("c"), p("alpha"));
  if (spec.name == "trace_lower") return kTraceLowerProbability;
  throw ValidationError("unknown bound '" + spec.name + "'");
}

// ---- embeddings -------------------------------------------------------------

/// B = [[sqrt(A A^dag), A], [A^dag, sqrt(A^dag A)]], built from the SVD of A.
inline HermitianOperator hermitian_embed(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("Hermitian embedding needs a square matrix");
  require_finite(a, "matrix");
  const Eigen::Index d = a.rows();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  const Matrix s = svd.singularValues().cast<cplx>().asDiagonal();
  Matrix b(2 * d, 2 * d);
  b.topLeftCorner(d, d) = u * s * u.adjoint();
  b.topRightCorner(d, d) = u * s * v.adjoint();
  b.bottomLeftCorner(d, d) = v * s * u.adjoint();
  b.bottomRightCorner(d, d) = v * s * v.adjoint();
  return HermitianOperator(b);
}

struct EmbedCheck {
  double min_eigenvalue = 0.0;  // B >= 0
  double block_error = 0.0;     // max |B_01 - A|
  double trace_norm_error = 0.0;  // | ||B|| - 2||A|| |
  double op_norm_error = 0.0;     // | ||B||_inf - 2||A||_inf |

  bool holds() const {
    return min_eigenvalue >= -1e-10 && block_error <= 1e-10 && trace_norm_error <= 1e-9 && op_norm_error <= 1e-9;
  }
};

inline EmbedCheck check_embedding(const Matrix& a, const HermitianOperator& b) {
  const Eigen::Index d = a.rows();
  EmbedCheck c;
  c.min_eigenvalue = lambda_min(b);
  c.block_error = (b.matrix().topRightCorner(d, d) - a).cwiseAbs().maxCoeff();
  c.trace_norm_error = std::abs(trace_norm(b) - 2.0 * trace_norm(a));
  c.op_norm_error = std::abs(operator_norm(b) - 2.0 * operator_norm(a));
  return c;
}

/// Appends zero columns up to `target` columns.
inline Matrix pad_columns(const Matrix& a, Eigen::Index target) {
  if (a.cols() > target) throw ShapeError("cannot pad " + std::to_string(a.cols()) + " columns down to " + std::to_string(target));
  Matrix out = Matrix::Zero(a.rows(), target);
  out.leftCols(a.cols()) = a;
  return out;
}

/// d x d matrix with entries (a + i b) / sqrt(2d), a, b ~ N(0,1).
inline Matrix gaussian_matrix(Eigen::Index d, Rng& rng) {
  if (d < 1) throw DomainError("Gaussian matrix needs d >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(d));
  Matrix g(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = cplx(re * scale, im * scale);
    }
  }
  return g;
}

inline Matrix gaussian_matrix(Eigen::Index d, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  return gaussian_matrix(d, rng);
}

/// q = floor(d1/d2); rejected when d2 > d1.
inline Eigen::Index stack_count(const Matrix& a) {
  if (a.cols() < 1 || a.rows() < a.cols()) throw ShapeError("need a d1 x d2 matrix with d1 >= d2 >= 1");
  return a.rows() / a.cols();
}

/// A^g = (1/q) [G_1 A | ... | G_q A]
inline Matrix gaussian_block_embed(const Matrix& a, const std::vector<Matrix>& g) {
  if (g.empty()) throw ShapeError("need at least one Gaussian block");
  const Eigen::Index d1 = a.rows();
  const Eigen::Index d2 = a.cols();
  const auto q = static_cast<Eigen::Index>(g.size());
  Matrix out(d1, q * d2);
  for (Eigen::Index i = 0; i < q; ++i) {
    const Matrix& gi = g[static_cast<std::size_t>(i)];
    if (gi.rows() != d1 || gi.cols() != d1) throw ShapeError("Gaussian blocks must be d1 x d1");
    out.middleCols(i * d2, d2) = gi * a;
  }
  return out / static_cast<double>(q);
}

inline std::vector<Matrix> draw_shifts(Eigen::Index d1, Eigen::Index q, Rng& rng) {
  std::vector<Matrix> g;
  for (Eigen::Index i = 0; i < q; ++i) g.push_back(gaussian_matrix(d1, rng));
  return g;
}

/// d1 x d1 diagonal holding q copies of the singular values of A, zeros after.
inline RealVector stacked_singular_values(const Matrix& a) {
  const Eigen::Index q = stack_count(a);
  const RealVector s = singular_values(a);
  RealVector out = RealVector::Zero(a.rows());
  for (Eigen::Index i = 0; i < q; ++i) out.segment(i * a.cols(), s.size()) = s;
  return out;
}

/// The reformulated sampler (1/q) H Lambda-bar with H Gaussian d1 x d1.
inline Matrix abar_sample(const Matrix& a, Rng& rng) {
  const Eigen::Index q = stack_count(a);
  const RealVector lam = stacked_singular_values(a);
  return gaussian_matrix(a.rows(), rng) * lam.cast<cplx>().asDiagonal() / static_cast<double>(q);
}

// ---- trial harnesses --------------------------------------------------------

struct ShiftedChernoffReport {
  TrialReport trial;  // empirical_tail = failure frequency of the success event
  double lambda = 0.0;
  double sigma_norm = 0.0;
  double threshold = 0.0;  // eps (||sigma|| + delta dim)
  bool zeta_ok = false;
};

/// Shifted operator Chernoff: Pr{||sigma~ - sigma|| <= eps(||sigma|| + delta dim)}.
inline ShiftedChernoffReport shifted_chernoff_trial(const std::vector<HermitianOperator>& family,
                                                    const std::vector<double>& probs, double eps, double delta,
                                                    std::size_t m_samples, std::size_t trials, std::uint64_t seed) {
  if (family.empty() || family.size() != probs.size()) throw ShapeError("family and probabilities must align");
  validate_distribution(probs, "family");
  const Eigen::Index d = family.front().dim();
  ShiftedChernoffReport rep;
  for (const auto& s : family) {
    if (s.dim() != d) throw ShapeError("family members must share one dimension");
    if (lambda_min(s) < -1e-10) throw NotPositive("family members must be positive semidefinite");
    rep.lambda = std::max(rep.lambda, operator_norm(s));
  }
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (!(rep.lambda > 0.0)) rep.lambda = delta;  // all-zero family: any lambda works
  const double bound = shifted_chernoff_bound(static_cast<double>(d), static_cast<double>(m_samples), eps, delta, rep.lambda);

  Matrix avg = Matrix::Zero(d, d);
  for (std::size_t x = 0; x < family.size(); ++x) avg += probs[x] * family[x].matrix();
  const HermitianOperator sigma(avg);
  rep.sigma_norm = trace_norm(sigma);
  rep.threshold = eps * (rep.sigma_norm + delta * static_cast<double>(d));

  // zeta_x = (sigma_x + delta I)/(lambda + delta): 0 <= zeta_x <= I and E zeta >= delta I/(lambda + delta)
  const double scale = 1.0 / (rep.lambda + delta);
  rep.zeta_ok = true;
  for (const auto& s : family) {
    const RealVector ev = eig_h((s + HermitianOperator::identity(d) * delta) * scale).values;
    rep.zeta_ok = rep.zeta_ok && ev.minCoeff() >= -1e-12 && ev.maxCoeff() <= 1.0 + 1e-12;
  }
  const double zeta_floor = lambda_min((sigma + HermitianOperator::identity(d) * delta) * scale);
  rep.zeta_ok = rep.zeta_ok && zeta_floor >= delta * scale - 1e-12;

  rep.trial.trials = trials;
  rep.trial.per_trial_stat.resize(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = make_rng(seed, t);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::size_t> counts(family.size(), 0);
    for (std::size_t m = 0; m < m_samples; ++m) ++counts[sample_index(probs, unif(rng))];
    Matrix mean = Matrix::Zero(d, d);
    for (std::size_t x = 0; x < family.size(); ++x) {
      if (counts[x]) mean += (static_cast<double>(counts[x]) / static_cast<double>(m_samples)) * family[x].matrix();
    }
    rep.trial.per_trial_stat[t] = trace_norm(HermitianOperator(mean) - sigma);
  });
  std::size_t fails = 0;
  for (double dev : rep.trial.per_trial_stat) fails += dev > rep.threshold;
  rep.trial.empirical_tail = trials ? static_cast<double>(fails) / static_cast<double>(trials) : 0.0;
  rep.trial.bound_value = bound;
  rep.trial.vacuous_flag = bound >= 1.0;
  return rep;
}

struct TraceLowerReport {
  TrialReport trial;        // per_trial_stat = ||A^g|| / ||A||
  double main_frequency = 0.0;  // {||A^g|| >= ||A||/120}, paper floor 0.22
  double c11_frequency = 0.0;   // {||H L|| >= Tr[H^dag H L]/6}, paper floor 0.98
  double c22_frequency = 0.0;   // {Tr[H^dag H L] >= (d1/d2)||A||/20}, paper floor 0.24
};

inline TraceLowerReport trace_lower_trial(const Matrix& a, std::size_t trials, std::uint64_t seed) {
  const Eigen::Index q = stack_count(a);
  const double norm_a = trace_norm(a);
  if (!(norm_a > 0.0)) throw DomainError("trace lower bound needs a nonzero matrix");
  const RealVector lam = stacked_singular_values(a);
  const double ratio = static_cast<double>(a.rows()) / static_cast<double>(a.cols());
  TraceLowerReport rep;
  rep.trial.trials = trials;
  rep.trial.per_trial_stat.resize(trials);
  std::vector<char> c11(trials), c22(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = make_rng(seed, t);
    const Matrix ag = gaussian_block_embed(a, draw_shifts(a.rows(), q, rng));
    rep.trial.per_trial_stat[t] = trace_norm(ag) / norm_a;
    const Matrix h = gaussian_matrix(a.rows(), rng);
    const Matrix hl = h * lam.cast<cplx>().asDiagonal();
    const double tr = (h.adjoint() * h).diagonal().real().dot(lam);
    c11[t] = trace_norm(hl) >= tr / 6.0;
    c22[t] = tr >= ratio * norm_a / 20.0;
  });
  std::size_t main_hits = 0, c11_hits = 0, c22_hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    main_hits += rep.trial.per_trial_stat[t] >= 1.0 / 120.0;
    c11_hits += c11[t] != 0;
    c22_hits += c22[t] != 0;
  }
  const double n = trials ? static_cast<double>(trials) : 1.0;
  rep.main_frequency = static_cast<double>(main_hits) / n;
  rep.c11_frequency = static_cast<double>(c11_hits) / n;
  rep.c22_frequency = static_cast<double>(c22_hits) / n;
  rep.trial.empirical_tail = rep.main_frequency;
  rep.trial.bound_value = kTraceLowerProbability;
  rep.trial.vacuous_flag = false;
  return rep;
}

struct NonsquareReport {
  TrialReport trial;  // per_trial_stat = ||A~ - A||, tail at eps
  NonsquareBound bound{};
  double ell = 10.0;
  double t_const = 0.0;              // 4 ln(480 l^3 / eps)
  double indicator_limit = 0.0;      // eps / (480 l)
  double mean_indicator_mass = 0.0;  // average over trials of sum_x p_x I_x
  double e2_frequency = 0.0;         // trials with sum_x p_x I_x < eps/(480 l)
  double eg_frequency = 0.0;         // trials with ||A^g_x|| <= l ||A_x|| for all x
};

/// Non-square Chernoff harness; A_x must satisfy ||A_x|| <= 1 and ||A_x||_inf <= beta/d2.
inline NonsquareReport nonsquare_chernoff_experiment(const std::vector<Matrix>& family, const std::vector<double>& probs,
                                                     const std::vector<std::string>& labels, double beta, double eps,
                                                     std::size_t m_samples, std::size_t trials, std::uint64_t seed) {
  if (family.empty() || family.size() != probs.size() || family.size() != labels.size()) {
    throw ShapeError("family, probabilities and labels must align");
  }
  validate_distribution(probs, "family");
  const Eigen::Index d1 = family.front().rows();
  const Eigen::Index d2 = family.front().cols();
  const Eigen::Index q = stack_count(family.front());
  std::vector<double> op_norms(family.size());
  for (std::size_t x = 0; x < family.size(); ++x) {
    if (family[x].rows() != d1 || family[x].cols() != d2) throw ShapeError("family members must share one shape");
    const double tn = trace_norm(family[x]);
    op_norms[x] = operator_norm(family[x]);
    if (tn > 1.0 + 1e-10) throw PreconditionError("label '" + labels[x] + "': trace norm " + format_double(tn) + " exceeds 1");
    if (op_norms[x] > beta / static_cast<double>(d2) + 1e-10) {
      throw PreconditionError("label '" + labels[x] + "': operator norm " + format_double(op_norms[x]) + " exceeds beta/d2");
    }
  }
  NonsquareReport rep;
  rep.bound = nonsquare_bound(static_cast<double>(d1), static_cast<double>(m_samples), eps, beta);
  rep.t_const = 4.0 * std::log(480.0 * rep.ell * rep.ell * rep.ell / eps);
  rep.indicator_limit = eps / (480.0 * rep.ell);

  Matrix avg = Matrix::Zero(d1, d2);
  for (std::size_t x = 0; x < family.size(); ++x) avg += probs[x] * family[x];
  rep.trial.trials = trials;
  rep.trial.per_trial_stat.resize(trials);
  std::vector<double> indicator_mass(trials);
  std::vector<char> eg(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = make_rng(seed, t);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::size_t> counts(family.size(), 0);
    for (std::size_t m = 0; m < m_samples; ++m) ++counts[sample_index(probs, unif(rng))];
    Matrix mean = Matrix::Zero(d1, d2);
    for (std::size_t x = 0; x < family.size(); ++x) {
      if (counts[x]) mean += (static_cast<double>(counts[x]) / static_cast<double>(m_samples)) * family[x];
    }
    rep.trial.per_trial_stat[t] = trace_norm(Matrix(mean - avg));
    // one shift g per trial, shared by all labels
    const std::vector<Matrix> g = draw_shifts(d1, q, rng);
    double mass = 0.0;
    bool all_small = true;
    for (std::size_t x = 0; x < family.size(); ++x) {
      const Matrix ag = gaussian_block_embed(family[x], g);
      if (operator_norm(ag) > rep.t_const / static_cast<double>(q) * op_norms[x]) mass += probs[x];
      all_small = all_small && trace_norm(ag) <= rep.ell * trace_norm(family[x]) + 1e-12;
    }
    indicator_mass[t] = mass;
    eg[t] = all_small;
  });
  rep.trial.empirical_tail = fraction_at_least(rep.trial.per_trial_stat, eps);
  rep.trial.bound_value = rep.bound.headline;
  rep.trial.vacuous_flag = rep.bound.headline >= 1.0;
  rep.mean_indicator_mass = mean_of(indicator_mass);
  std::size_t e2 = 0, egc = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    e2 += indicator_mass[t] < rep.indicator_limit;
    egc += eg[t] != 0;
  }
  const double n = trials ? static_cast<double>(trials) : 1.0;
  rep.e2_frequency = static_cast<double>(e2) / n;
  rep.eg_frequency = static_cast<double>(egc) / n;
  return rep;
}

}  // namespace qwt
