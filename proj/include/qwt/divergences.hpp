#pragma once

// One-shot divergences: the hypothesis-testing divergence (optimal
// Neyman-Pearson test with boundary randomisation), the smooth max divergence
// of a state ensemble against its average, and the Pinsker-type floor.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qwt/ensembles.hpp"
#include "qwt/operator_core.hpp"
#include "qwt/parallel.hpp"

namespace qwt {

class NoFiniteValue : public Error {
 public:
  NoFiniteValue(const std::string& what, std::vector<double> gammas, std::vector<double> tails)
      : Error(ErrorCode::no_finite_value, what), gammas_(std::move(gammas)), tails_(std::move(tails)) {}
  const std::vector<double>& gammas() const { return gammas_; }
  const std::vector<double>& tails() const { return tails_; }

 private:
  std::vector<double> gammas_;
  std::vector<double> tails_;
};

/// Test 0 <= Gamma <= I, kept block-diagonal: one block for a plain state pair,
/// one block Lambda_v per classical symbol for cq inputs.
struct HypothesisTest {
  std::vector<std::string> labels;
  std::vector<HermitianOperator> blocks;
  double achieved_alpha = 0.0;  // Tr[Gamma rho]
  double achieved_beta = 0.0;   // Tr[Gamma sigma]

  HermitianOperator gamma_op() const { return blocks.size() == 1 ? blocks.front() : direct_sum(blocks); }

  const HermitianOperator& block(const std::string& label) const {
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (labels[k] == label) return blocks[k];
    }
    throw KeyError("test has no block for label '" + label + "'");
  }
};

struct DivergenceResult {
  double value_bits = 0.0;
  bool infinite = false;
  double epsilon = 0.0;
  std::optional<HypothesisTest> witness;  // hypothesis-testing divergence
  std::optional<double> threshold;        // smooth max divergence: the returned gamma
  std::vector<double> grid;               // smooth max divergence: scanned gammas
  std::vector<double> tail;               // and tail(gamma) at each of them
};

inline void check_epsilon(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("epsilon must lie in [0,1), got " + format_double(eps));
}

namespace detail {

struct NpBlock {
  double weight;
  const HermitianOperator* rho;
  const HermitianOperator* sigma;
};

// Sign decisions in the threshold sweep use a roundoff-level cutoff so that the
// breakpoints of alpha(t) sit at the exact eigenvalue crossings.
inline Projector np_positive_part(const HermitianOperator& h) {
  EigenSystem es = eig_h(h);
  const double cut = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + es.values.cwiseAbs().maxCoeff());
  Eigen::Index count = 0;
  while (count < es.values.size() && es.values[count] > cut) ++count;
  return Projector::from_orthonormal_columns(es.vectors.leftCols(count), h.dim());
}

struct ThresholdTest {
  std::vector<Projector> projectors;
  double alpha = 0.0;
  double beta = 0.0;
};

inline ThresholdTest threshold_test(const std::vector<NpBlock>& blocks, double t) {
  ThresholdTest out;
  out.projectors.resize(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    out.projectors[b] = np_positive_part(*blocks[b].rho - *blocks[b].sigma * t);
    if (blocks[b].weight > 0.0) {
      out.alpha += blocks[b].weight * trace_product(out.projectors[b].op(), *blocks[b].rho);
      out.beta += blocks[b].weight * trace_product(out.projectors[b].op(), *blocks[b].sigma);
    }
  }
  return out;
}

inline HypothesisTest mixed_test(const std::vector<std::string>& labels, const ThresholdTest& a, const ThresholdTest& b,
                                 double lambda, double target) {
  HypothesisTest test;
  test.labels = labels;
  for (std::size_t k = 0; k < a.projectors.size(); ++k) {
    test.blocks.push_back(a.projectors[k].op() * lambda + b.projectors[k].op() * (1.0 - lambda));
  }
  test.achieved_alpha = target;
  test.achieved_beta = lambda * a.beta + (1.0 - lambda) * b.beta;
  return test;
}

inline DivergenceResult finish_test(HypothesisTest test, double eps) {
  DivergenceResult r;
  r.epsilon = eps;
  if (test.achieved_beta <= 0.0) {
    r.infinite = true;
    r.value_bits = std::numeric_limits<double>::infinity();
  } else {
    r.value_bits = -std::log2(test.achieved_beta);
  }
  r.witness = std::move(test);
  return r;
}

/// max Tr[Gamma sigma]^-1 over block-diagonal tests with Tr[Gamma rho] = 1 - eps.
inline DivergenceResult neyman_pearson(const std::vector<NpBlock>& blocks, const std::vector<std::string>& labels,
                                       double eps) {
  check_epsilon(eps);
  const double target = 1.0 - eps;

  // mass of rho inside ker(sigma): if it already meets the target, beta can be 0
  {
    ThresholdTest kernel;
    for (const auto& blk : blocks) {
      kernel.projectors.push_back(support_projector(*blk.sigma).complement());
      if (blk.weight > 0.0) kernel.alpha += blk.weight * trace_product(kernel.projectors.back().op(), *blk.rho);
    }
    if (kernel.alpha > 0.0 && kernel.alpha >= target) {
      ThresholdTest none;
      for (const auto& blk : blocks) none.projectors.push_back(Projector::zero(blk.rho->dim()));
      return finish_test(mixed_test(labels, kernel, none, target / kernel.alpha, target), eps);
    }
  }

  if (eps == 0.0) {
    ThresholdTest supp;
    for (const auto& blk : blocks) {
      supp.projectors.push_back(support_projector(*blk.rho));
      if (blk.weight > 0.0) {
        supp.alpha += blk.weight * trace_product(supp.projectors.back().op(), *blk.rho);
        supp.beta += blk.weight * trace_product(supp.projectors.back().op(), *blk.sigma);
      }
    }
    HypothesisTest test;
    test.labels = labels;
    for (const auto& p : supp.projectors) test.blocks.push_back(p.op());
    test.achieved_alpha = supp.alpha;
    test.achieved_beta = supp.beta;
    return finish_test(std::move(test), eps);
  }

  // the t = 0 end is the trivial test Gamma = I
  ThresholdTest lo_test;
  for (const auto& blk : blocks) {
    lo_test.projectors.push_back(Projector::identity(blk.rho->dim()));
    if (blk.weight > 0.0) {
      lo_test.alpha += blk.weight * blk.rho->trace();
      lo_test.beta += blk.weight * blk.sigma->trace();
    }
  }
  double lo = 0.0;
  double hi = 1.0;
  ThresholdTest hi_test = threshold_test(blocks, hi);
  int doublings = 0;
  while (hi_test.alpha >= target) {
    if (++doublings > 1000) throw NoFiniteValue("threshold search did not terminate", {}, {});
    lo = hi;
    lo_test = std::move(hi_test);
    hi *= 2.0;
    hi_test = threshold_test(blocks, hi);
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    ThresholdTest mid_test = threshold_test(blocks, mid);
    if (mid_test.alpha >= target) {
      lo = mid;
      lo_test = std::move(mid_test);
    } else {
      hi = mid;
      hi_test = std::move(mid_test);
    }
  }
  const double gap = lo_test.alpha - hi_test.alpha;
  const double lambda = gap > 0.0 ? std::clamp((target - hi_test.alpha) / gap, 0.0, 1.0) : 1.0;
  return finish_test(mixed_test(labels, lo_test, hi_test, lambda, target), eps);
}

}  // namespace detail

/// I_0^eps(rho || sigma) = -log2 min{Tr[Gamma sigma] : 0 <= Gamma <= I, Tr[Gamma rho] >= 1 - eps}.
inline DivergenceResult hypothesis_testing_divergence(const HermitianOperator& rho, const HermitianOperator& sigma,
                                                      double eps) {
  if (rho.dim() != sigma.dim()) throw ShapeError("hypothesis test needs equal dimensions");
  std::vector<detail::NpBlock> blocks{{1.0, &rho, &sigma}};
  return detail::neyman_pearson(blocks, {"all"}, eps);
}

inline DivergenceResult hypothesis_testing_divergence(const DensityOperator& rho, const DensityOperator& sigma,
                                                      double eps) {
  return hypothesis_testing_divergence(rho.op(), sigma.op(), eps);
}

/// I_0^eps[V;B] of a cq state against rho^V (x) rho^B; the witness blocks are the Lambda_v.
inline DivergenceResult cq_hypothesis_testing_divergence(const CqState& cq, double eps) {
  const Ensemble& e = cq.ensemble();
  const DensityOperator rho_b = average_state(e);
  std::vector<detail::NpBlock> blocks;
  for (std::size_t v = 0; v < e.size(); ++v) blocks.push_back({e.prob(v), &e.state(v).op(), &rho_b.op()});
  return detail::neyman_pearson(blocks, e.labels(), eps);
}

/// sum_v p_v Tr[{rho_v - 2^gamma rho > 0} rho_v]
inline double smooth_max_tail(const Ensemble& e, const DensityOperator& avg, double gamma) {
  const double scale = std::exp2(gamma);
  double tail = 0.0;
  for (std::size_t v = 0; v < e.size(); ++v) {
    if (e.prob(v) <= 0.0) continue;
    Projector p = positive_part_projector(e.state(v).op() - avg.op() * scale, Positivity::strict);
    tail += e.prob(v) * trace_product(p.op(), e.state(v).op());
  }
  return tail;
}

inline double smooth_max_tail(const Ensemble& e, double gamma) { return smooth_max_tail(e, average_state(e), gamma); }

struct GammaRange {
  double lo;
  double hi;
};

/// Interval guaranteed to contain the tail's drop from 1 to 0.
inline GammaRange smooth_max_range(const Ensemble& e, const DensityOperator& avg) {
  auto min_positive = [](const RealVector& ev) {
    const double tau = zero_threshold(ev);
    double best = std::numeric_limits<double>::infinity();
    for (double x : ev) {
      if (x > tau) best = std::min(best, x);
    }
    return best;
  };
  const RealVector avg_ev = eig_h(avg.op()).values;
  const double avg_max = avg_ev.maxCoeff();
  const double avg_min = min_positive(avg_ev);
  double lo = std::numeric_limits<double>::infinity();
  double top = 0.0;
  for (std::size_t v = 0; v < e.size(); ++v) {
    if (e.prob(v) <= 0.0) continue;
    const RealVector ev = eig_h(e.state(v).op()).values;
    lo = std::min(lo, std::log2(min_positive(ev) / avg_max) - 1.0);
    top = std::max(top, ev.maxCoeff());
  }
  return {lo, std::log2(top / avg_min) + 1.0};
}

/// I_inf^eps[V;E]: smallest grid gamma with tail(gamma) <= eps. The grid sits on
/// integer multiples of grid_step and covers smooth_max_range; every point is evaluated.
inline DivergenceResult smooth_max_divergence(const Ensemble& e, double eps, double grid_step_bits = 1e-3) {
  check_epsilon(eps);
  if (!(grid_step_bits > 0.0) || !std::isfinite(grid_step_bits)) throw DomainError("grid step must be positive");
  const DensityOperator avg = average_state(e);
  const GammaRange range = smooth_max_range(e, avg);
  const long long first = static_cast<long long>(std::floor(range.lo / grid_step_bits));
  const long long last = static_cast<long long>(std::ceil(range.hi / grid_step_bits));
  if (last - first > 50'000'000LL) throw TooLarge("smooth max grid has too many points");
  const std::size_t count = static_cast<std::size_t>(last - first + 1);

  DivergenceResult r;
  r.epsilon = eps;
  r.grid.resize(count);
  r.tail.resize(count);
  parallel_for(count, [&](std::size_t k) {
    r.grid[k] = static_cast<double>(first + static_cast<long long>(k)) * grid_step_bits;
    r.tail[k] = smooth_max_tail(e, avg, r.grid[k]);
  });
  std::optional<std::size_t> hit;
  for (std::size_t k = 0; k < count && !hit; ++k) {
    if (r.tail[k] <= eps) hit = k;
  }
  if (!hit || r.tail.back() > eps) {
    throw NoFiniteValue("tail exceeds epsilon at the top of the gamma grid", r.grid, r.tail);
  }
  r.value_bits = r.grid[*hit];
  r.threshold = r.value_bits;
  return r;
}

/// I_inf^eps[V;E] of a cq state, i.e. of its ensemble against the marginal.
inline DivergenceResult smooth_max_divergence(const CqState& cq, double eps, double grid_step_bits = 1e-3) {
  return smooth_max_divergence(cq.ensemble(), eps, grid_step_bits);
}

struct PinskerCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double prefactor = 0.0;
  bool holds = false;
};

inline double pinsker_prefactor(double beta) {
  const double b = beta * std::numbers::ln2;
  return 2.0 * b / (b + 1.0);
}

/// ||rho - sigma|| against (2 beta ln2 / (beta ln2 + 1)) Tr[{rho > 2^beta sigma} rho].
inline PinskerCheck pinsker_floor(const DensityOperator& rho, const DensityOperator& sigma, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive, got " + format_double(beta));
  if (rho.dim() != sigma.dim()) throw ShapeError("Pinsker floor needs equal dimensions");
  PinskerCheck c;
  c.lhs = trace_norm(rho.op() - sigma.op());
  const Projector pi = positive_part_projector(rho.op() - sigma.op() * std::exp2(beta), Positivity::strict);
  c.prefactor = pinsker_prefactor(beta);
  c.rhs = c.prefactor * trace_product(pi.op(), rho.op());
  c.holds = c.lhs >= c.rhs - 1e-10;
  return c;
}

}  // namespace qwt
