#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace qwt {

/// Empirical tail frequency of a Monte Carlo experiment next to its bound.
struct TrialReport {
  std::size_t trials = 0;
  double empirical_tail = 0.0;
  double bound_value = 0.0;
  std::vector<double> per_trial_stat;
  bool vacuous_flag = false;  // bound >= 1

  /// Standard deviation of a frequency estimate at probability p.
  double sigma_at(double p) const {
    if (trials == 0) return 0.0;
    p = std::clamp(p, 0.0, 1.0);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }

  /// empirical_tail <= min(1, bound) + k sigma
  bool within_bound(double k_sigma = 3.0) const {
    const double cap = std::min(1.0, bound_value);
    return empirical_tail <= cap + k_sigma * sigma_at(cap) + 1e-15;
  }
};

inline double fraction_at_least(const std::vector<double>& values, double threshold) {
  if (values.empty()) return 0.0;
  std::size_t hits = 0;
  for (double v : values) hits += v >= threshold;
  return static_cast<double>(hits) / static_cast<double>(values.size());
}

inline double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace qwt
