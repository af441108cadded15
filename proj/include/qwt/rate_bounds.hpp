#pragma once

// Achievability and converse rate formulas with explicit constants.

#include <cmath>
#include <string>

#include "qwt/divergences.hpp"
#include "qwt/ensembles.hpp"

namespace qwt {

struct AchievabilityInputs {
  double i0_bits = 0.0;    // I_0^{eps'}[V;B]
  double iinf_bits = 0.0;  // I_inf^{delta_hat}[V;E]
  double eps_prime = 0.0;
  double delta_hat = 0.0;
  long long dim_e = 2;
};

struct RatePair {
  double r_bits = 0.0;        // message rate R, may be negative
  double r_tilde_bits = 0.0;  // band rate R~
  double c_const = 0.0;
  double penalty_bits = 0.0;  // the log2(10^16 ...) term shared by R and R~
  double error_budget = 0.0;
  double leakage_budget = 0.0;
};

/// C = dim (log2(4 dim / eps) + 1)^2, shared with the covering lemma.
inline double covering_constant(double dim, double eps) {
  const double t = std::log2(4.0 * dim / eps) + 1.0;
  return dim * t * t;
}

inline RatePair achievable_rate(const AchievabilityInputs& in) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw DomainError(what);
  };
  need(std::isfinite(in.i0_bits), "i0_bits must be finite");
  need(std::isfinite(in.iinf_bits), "iinf_bits must be finite");
  need(in.eps_prime > 0.0 && in.eps_prime < 1.0, "eps_prime must lie in (0,1)");
  need(in.delta_hat > 0.0 && in.delta_hat < 1.0, "delta_hat must lie in (0,1)");
  need(in.dim_e >= 2, "dim_e must be at least 2");

  RatePair out;
  const double d = static_cast<double>(in.dim_e);
  out.c_const = covering_constant(d, in.delta_hat);
  need(in.delta_hat < 30.0 * out.c_const, "delta_hat must be below 30C");

  // long double keeps delta_hat^9 representable for very small delta_hat
  const long double log_dim = std::log2(static_cast<long double>(d));
  const long double dh = in.delta_hat;
  const long double inner = -std::log(dh / (30.0L * static_cast<long double>(out.c_const)));
  const long double product = 1e16L * std::pow(log_dim, 6.0L) / std::pow(dh, 9.0L) * inner;
  out.penalty_bits = static_cast<double>(std::log2(product));

  const double leak_term = std::max(0.0, in.iinf_bits);
  out.r_bits = in.i0_bits - leak_term + std::log2(in.eps_prime) - out.penalty_bits;
  out.r_tilde_bits = leak_term + out.penalty_bits;
  out.error_budget = 6.0 * in.eps_prime;
  out.leakage_budget = 48.0 * std::sqrt(in.delta_hat);
  return out;
}

struct CodeParams {
  double eps_prime;
  double delta_hat;
};

/// Largest eps', delta_hat with 18 eps' <= eps and 144 sqrt(delta_hat) <= delta.
inline CodeParams theorem3_code_params(double eps_target, double delta_target) {
  if (!(eps_target > 0.0 && eps_target < 1.0)) throw DomainError("eps target must lie in (0,1)");
  if (!(delta_target > 0.0 && delta_target < 2.0)) throw DomainError("delta target must lie in (0,2)");
  const double root = delta_target / 144.0;
  return {eps_target / 18.0, root * root};
}

inline constexpr double kConverseSlackBits = 1.5;

/// R <= I_0^eps - I_inf^delta + 1.5
inline double converse_bound(double i0_eps, double iinf_delta) {
  if (!std::isfinite(i0_eps) || !std::isfinite(iinf_delta)) throw DomainError("converse bound needs finite divergences");
  return i0_eps - iinf_delta + kConverseSlackBits;
}

/// ||rho^{VE} - rho^V (x) rho^E|| of a cq state, block by block.
inline double cq_leakage(const CqState& cq) {
  const Ensemble& e = cq.ensemble();
  const DensityOperator avg = average_state(e);
  double total = 0.0;
  for (std::size_t v = 0; v < e.size(); ++v) total += e.prob(v) * trace_norm(e.state(v).op() - avg.op());
  return total;
}

struct ConverseCheck {
  double leakage = 0.0;
  double delta = 0.0;
  double iinf = 0.0;
  double limit = 0.0;  // 1.5 + grid step
  bool holds = false;
};

/// Leakage <= delta forces I_inf^delta[V;E] <= 1.5 (Pinsker floor at beta = 1/ln2).
inline ConverseCheck converse_secrecy_check(const CqState& code_cq_ve, double delta, double grid_step_bits = 1e-3) {
  ConverseCheck c;
  c.delta = delta;
  c.leakage = cq_leakage(code_cq_ve);
  if (c.leakage > delta + 1e-12) {
    throw PreconditionError("leakage " + format_double(c.leakage) + " exceeds delta " + format_double(delta));
  }
  c.iinf = smooth_max_divergence(code_cq_ve, std::min(delta, std::nextafter(1.0, 0.0)), grid_step_bits).value_bits;
  c.limit = kConverseSlackBits + grid_step_bits;
  c.holds = c.iinf <= c.limit;
  return c;
}

}  // namespace qwt
