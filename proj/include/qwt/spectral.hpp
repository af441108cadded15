#pragma once

// Finite-n information-spectrum diagnostics: normalized one-shot divergences of
// tensor-power cq states, and Monte Carlo quantiles of the normalized
// information density for iid classical sources.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qwt/divergences.hpp"
#include "qwt/ensembles.hpp"
#include "qwt/parallel.hpp"
#include "qwt/random.hpp"

namespace qwt {

inline constexpr double kTensorPowerDimLimit = 4096.0;

struct SpectralSeries {
  std::vector<int> n_values;
  std::vector<double> rate_lower;  // (1/n) I_0^eps
  std::vector<double> rate_upper;  // (1/n) I_inf^eps
  double eps = 0.0;
};

/// n-fold tensor power of a cq state; labels are comma-joined symbol strings.
inline CqState tensor_power(const CqState& cq, int n) {
  if (n < 1) throw DomainError("tensor power needs n >= 1");
  const Ensemble& e = cq.ensemble();
  std::vector<std::string> labels = e.labels();
  std::vector<double> probs = e.probs();
  std::vector<HermitianOperator> states;
  for (const auto& s : e.states()) states.push_back(s.op());
  for (int k = 1; k < n; ++k) {
    std::vector<std::string> nl;
    std::vector<double> np;
    std::vector<HermitianOperator> ns;
    for (std::size_t a = 0; a < labels.size(); ++a) {
      for (std::size_t v = 0; v < e.size(); ++v) {
        nl.push_back(labels[a] + "," + e.label(v));
        np.push_back(probs[a] * e.prob(v));
        ns.push_back(tensor(states[a], e.state(v).op()));
      }
    }
    labels = std::move(nl);
    probs = std::move(np);
    states = std::move(ns);
  }
  // renormalize the product weights so rounding cannot trip the distribution check
  double total = 0.0;
  for (double p : probs) total += p;
  std::vector<DensityOperator> dens;
  for (std::size_t k = 0; k < states.size(); ++k) {
    probs[k] /= total;
    dens.emplace_back(states[k]);
  }
  return CqState(Ensemble(std::move(labels), std::move(probs), std::move(dens)));
}

inline SpectralSeries tensor_power_rates(const CqState& cq, int n_max, double eps, double grid_step_bits = 1e-3) {
  if (n_max < 1) throw DomainError("n_max must be at least 1");
  check_epsilon(eps);
  const double per_copy = static_cast<double>(cq.n_classical()) * static_cast<double>(cq.dim_quantum());
  if (std::pow(per_copy, n_max) > kTensorPowerDimLimit) {
    throw TooLarge("tensor power of dimension " + format_double(per_copy) + "^" + std::to_string(n_max) +
                   " exceeds " + format_double(kTensorPowerDimLimit));
  }
  SpectralSeries s;
  s.eps = eps;
  for (int n = 1; n <= n_max; ++n) {
    const CqState power = n == 1 ? cq : tensor_power(cq, n);
    const double lower = cq_hypothesis_testing_divergence(power, eps).value_bits;
    const double upper = smooth_max_divergence(power, eps, grid_step_bits).value_bits;
    s.n_values.push_back(n);
    s.rate_lower.push_back(lower / n);
    s.rate_upper.push_back(upper / n);
  }
  return s;
}

struct SpectralEstimate {
  double inf_rate = 0.0;  // empirical eps-quantile
  double sup_rate = 0.0;  // empirical (1-eps)-quantile
  double mean_rate = 0.0;
  std::vector<double> block_rates;  // sorted
};

/// Joint pmf p[v][y]; each of `blocks` iid blocks of length n_samples gives one
/// value of (1/n) log2 p(v^n,y^n) / (p(v^n) p(y^n)).
inline SpectralEstimate classical_spectral_estimate(const std::vector<std::vector<double>>& p_joint,
                                                    std::size_t n_samples, double eps, std::uint64_t seed,
                                                    std::size_t blocks = 200) {
  if (p_joint.empty() || p_joint.front().empty()) throw ValidationError("joint distribution is empty");
  const std::size_t nv = p_joint.size();
  const std::size_t ny = p_joint.front().size();
  std::vector<double> flat;
  for (const auto& row : p_joint) {
    if (row.size() != ny) throw ShapeError("joint distribution rows must have equal length");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  validate_distribution(flat, "joint distribution");
  if (n_samples < 1000) throw DomainError("need at least 1000 samples per block");
  if (blocks < 1) throw DomainError("need at least one block");
  check_epsilon(eps);

  std::vector<double> pv(nv, 0.0), py(ny, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t y = 0; y < ny; ++y) {
      pv[v] += p_joint[v][y];
      py[y] += p_joint[v][y];
    }
  }
  std::vector<double> density(flat.size(), 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double p = p_joint[v][y];
      if (p > 0.0) density[v * ny + y] = std::log2(p / (pv[v] * py[y]));
    }
  }

  SpectralEstimate out;
  out.block_rates.resize(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng = make_rng(seed, b);
    std::discrete_distribution<std::size_t> draw(flat.begin(), flat.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) sum += density[draw(rng)];
    out.block_rates[b] = sum / static_cast<double>(n_samples);
  });
  std::sort(out.block_rates.begin(), out.block_rates.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(blocks - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t j = std::min(i + 1, blocks - 1);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * out.block_rates[i] + w * out.block_rates[j];
  };
  out.inf_rate = quantile(eps);
  out.sup_rate = quantile(1.0 - eps);
  double acc = 0.0;
  for (double r : out.block_rates) acc += r;
  out.mean_rate = acc / static_cast<double>(blocks);
  return out;
}

/// I(V;Y) in bits.
inline double mutual_information_bits(const std::vector<std::vector<double>>& p_joint) {
  std::vector<double> pv(p_joint.size(), 0.0), py(p_joint.front().size(), 0.0);
  for (std::size_t v = 0; v < p_joint.size(); ++v) {
    for (std::size_t y = 0; y < py.size(); ++y) {
      pv[v] += p_joint[v][y];
      py[y] += p_joint[v][y];
    }
  }
  double i = 0.0;
  for (std::size_t v = 0; v < p_joint.size(); ++v) {
    for (std::size_t y = 0; y < py.size(); ++y) {
      const double p = p_joint[v][y];
      if (p > 0.0) i += p * std::log2(p / (pv[v] * py[y]));
    }
  }
  return i;
}

}  // namespace qwt
