#pragma once

// Random-codebook wiretap scheme: i.i.d. codebook, uniform band encoding,
// square-root-measurement decoder built from the hypothesis-test witness,
// exact error/leakage evaluation and Markov expurgation.

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwt/divergences.hpp"
#include "qwt/ensembles.hpp"
#include "qwt/parallel.hpp"
#include "qwt/random.hpp"

namespace qwt {

/// n_messages x band_size table of ensemble indices v(m,i).
class Codebook {
 public:
  Codebook() = default;

  Codebook(std::size_t n_messages, std::size_t band_size, std::vector<std::string> table, std::uint64_t seed = 0)
      : n_messages_(n_messages), band_size_(band_size), table_(std::move(table)), seed_(seed) {
    if (n_messages_ == 0 || band_size_ == 0) throw DomainError("codebook sizes must be positive");
    if (table_.size() != n_messages_ * band_size_) throw ShapeError("codebook table has the wrong number of cells");
  }

  std::size_t n_messages() const { return n_messages_; }
  std::size_t band_size() const { return band_size_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& label(std::size_t m, std::size_t i) const { return table_[m * band_size_ + i]; }
  const std::vector<std::string>& table() const { return table_; }
  double rate_bits() const { return std::log2(static_cast<double>(n_messages_)); }
  double band_rate_bits() const { return std::log2(static_cast<double>(band_size_)); }

  /// Same table with messages reordered: row m of the result is row perm[m] here.
  Codebook permuted(const std::vector<std::size_t>& perm) const {
    std::vector<std::string> t;
    for (std::size_t m = 0; m < n_messages_; ++m) {
      for (std::size_t i = 0; i < band_size_; ++i) t.push_back(label(perm.at(m), i));
    }
    return Codebook(n_messages_, band_size_, std::move(t), seed_);
  }

 private:
  std::size_t n_messages_ = 0;
  std::size_t band_size_ = 0;
  std::vector<std::string> table_;
  std::uint64_t seed_ = 0;
};

/// Inverse-CDF draw from probs using a uniform u in [0,1).
inline std::size_t sample_index(const std::vector<double>& probs, double u) {
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last_positive = k;
    cum += probs[k];
    if (u < cum) return k;
  }
  return last_positive;
}

/// Each cell v(m,i) is drawn i.i.d. from p_V with its own counter-derived stream.
inline Codebook generate_codebook(const Ensemble& e, std::size_t n_messages, std::size_t band_size, std::uint64_t seed) {
  if (n_messages == 0 || band_size == 0) throw DomainError("codebook sizes must be positive");
  std::vector<std::string> table(n_messages * band_size);
  for (std::size_t m = 0; m < n_messages; ++m) {
    for (std::size_t i = 0; i < band_size; ++i) {
      const double u = unit_interval(derive_seed(seed, m, i));
      table[m * band_size + i] = e.label(sample_index(e.probs(), u));
    }
  }
  return Codebook(n_messages, band_size, std::move(table), seed);
}

struct SrmDecoder {
  std::size_t n_messages = 0;
  std::size_t band_size = 0;
  std::vector<HermitianOperator> elements;  // E(m,i) at m * band_size + i
  HermitianOperator completion;             // I - sum E(m,i)

  const HermitianOperator& element(std::size_t m, std::size_t i) const { return elements[m * band_size + i]; }

  /// T_m = sum_i E(m,i)
  HermitianOperator message_operator(std::size_t m) const {
    Matrix acc = Matrix::Zero(completion.dim(), completion.dim());
    for (std::size_t i = 0; i < band_size; ++i) acc += element(m, i).matrix();
    return HermitianOperator(acc);
  }
};

/// E(m,i) = S^{-1/2} Lambda_{v(m,i)} S^{-1/2}, S = sum over the codebook.
inline SrmDecoder build_srm_decoder(const Codebook& cb, const HypothesisTest& witness) {
  std::vector<const HermitianOperator*> lambdas;
  for (const auto& label : cb.table()) lambdas.push_back(&witness.block(label));
  const Eigen::Index d = lambdas.front()->dim();
  Matrix s = Matrix::Zero(d, d);
  for (const auto* l : lambdas) s += l->matrix();
  const Matrix root = inv_sqrt_on_support(HermitianOperator(s)).matrix();

  SrmDecoder dec;
  dec.n_messages = cb.n_messages();
  dec.band_size = cb.band_size();
  Matrix total = Matrix::Zero(d, d);
  for (const auto* l : lambdas) {
    dec.elements.emplace_back(Matrix(root * l->matrix() * root));
    total += dec.elements.back().matrix();
  }
  dec.completion = HermitianOperator(Matrix(Matrix::Identity(d, d) - total));
  return dec;
}

struct PovmCheck {
  double min_eigenvalue = 0.0;       // over all E(m,i) and the completion
  double completeness_error = 0.0;   // ||sum E + E_perp - I||_max
  bool valid() const { return min_eigenvalue >= -1e-8 && completeness_error <= 1e-8; }
};

inline PovmCheck check_povm(const SrmDecoder& dec) {
  PovmCheck c;
  const Eigen::Index d = dec.completion.dim();
  Matrix total = dec.completion.matrix();
  c.min_eigenvalue = lambda_min(dec.completion);
  for (const auto& e : dec.elements) {
    c.min_eigenvalue = std::min(c.min_eigenvalue, lambda_min(e));
    total += e.matrix();
  }
  c.completeness_error = (total - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  return c;
}

/// lambda_min of 2(I - S) + 4T - (I - (S+T)^{-1/2} S (S+T)^{-1/2}), identity taken on supp(S+T).
/// Non-negative whenever 0 <= S <= I and T >= 0.
inline double hayashi_nagaoka_gap(const HermitianOperator& s, const HermitianOperator& t) {
  if (s.dim() != t.dim()) throw ShapeError("S and T must share one dimension");
  const HermitianOperator sum = s + t;
  const Matrix supp = support_projector(sum).matrix();
  const Matrix root = inv_sqrt_on_support(sum).matrix();
  const Matrix lhs = supp - root * s.matrix() * root;
  const Matrix rhs = 2.0 * (supp - supp * s.matrix() * supp) + 4.0 * supp * t.matrix() * supp;
  return lambda_min(HermitianOperator(Matrix(rhs - lhs)));
}

struct CodePerformance {
  double avg_error = 0.0;
  double leakage = 0.0;
  std::vector<double> per_message_error;
  double triangle_bound = 0.0;             // 2 mean_m ||rho^E_m - rho^E||
  std::vector<DensityOperator> eve_states;  // rho^E_m, band-averaged
};

/// Message m's band average (1/k) sum_i states[v(m,i)].
inline DensityOperator band_average(const Codebook& cb, const Ensemble& states, std::size_t m) {
  Matrix acc = Matrix::Zero(states.dim(), states.dim());
  for (std::size_t i = 0; i < cb.band_size(); ++i) acc += states.state(states.index_of(cb.label(m, i))).matrix();
  return DensityOperator(Matrix(acc / static_cast<double>(cb.band_size())));
}

inline CodePerformance evaluate_code(const Codebook& cb, const SrmDecoder& dec, const WiretapChannelModel& ch) {
  if (dec.completion.dim() != ch.dim_b()) throw ShapeError("decoder acts on dimension " + std::to_string(dec.completion.dim()) +
                                                           " but Bob's system has " + std::to_string(ch.dim_b()));
  if (dec.n_messages != cb.n_messages() || dec.band_size != cb.band_size()) throw ShapeError("decoder and codebook disagree");
  const Ensemble bob = bob_marginals(ch);
  const Ensemble eve = eve_marginals(ch);
  const std::size_t n = cb.n_messages();

  CodePerformance perf;
  perf.per_message_error.resize(n);
  double err_sum = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double success = trace_product(dec.message_operator(m), band_average(cb, bob, m).op());
    perf.per_message_error[m] = std::clamp(1.0 - success, 0.0, 1.0);
    err_sum += perf.per_message_error[m];
  }
  perf.avg_error = err_sum / static_cast<double>(n);

  Matrix mean_eve = Matrix::Zero(ch.dim_e(), ch.dim_e());
  for (std::size_t m = 0; m < n; ++m) {
    perf.eve_states.push_back(band_average(cb, eve, m));
    mean_eve += perf.eve_states.back().matrix();
  }
  const HermitianOperator tilde(Matrix(mean_eve / static_cast<double>(n)));
  const DensityOperator true_avg = average_state(eve);
  double leak = 0.0;
  double tri = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    leak += trace_norm(perf.eve_states[m].op() - tilde);
    tri += trace_norm(perf.eve_states[m].op() - true_avg.op());
  }
  perf.leakage = leak / static_cast<double>(n);
  perf.triangle_bound = 2.0 * tri / static_cast<double>(n);
  return perf;
}

/// Uniform message register paired with Eve's band-averaged states.
inline CqState message_eve_state(const CodePerformance& perf) {
  const std::size_t n = perf.eve_states.size();
  return CqState(Ensemble::indexed(std::vector<double>(n, 1.0 / static_cast<double>(n)), perf.eve_states));
}

struct ExpurgationReport {
  std::size_t trials = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> errors;
  std::vector<double> leakages;
  std::vector<bool> qualified;
  double mean_error = 0.0;
  double mean_leakage = 0.0;
  double qualified_fraction = 0.0;
  std::size_t chosen = 0;
};

class ExpurgationFailed : public Error {
 public:
  ExpurgationFailed(const std::string& what, ExpurgationReport report)
      : Error(ErrorCode::expurgation_failed, what), report_(std::move(report)) {}
  const ExpurgationReport& report() const { return report_; }

 private:
  ExpurgationReport report_;
};

struct ExpurgationResult {
  Codebook codebook;
  CodePerformance performance;
  ExpurgationReport report;
};

// Slack on the factor-3 comparisons so that identically zero error or leakage
// (mean 0) still counts as meeting the event.
inline constexpr double kExpurgationSlack = 1e-12;

/// Draws `trials` codebooks from e, keeps the first with error < 3 mean and leakage < 3 mean.
inline ExpurgationResult expurgate(const Ensemble& e, const WiretapChannelModel& ch, const HypothesisTest& witness,
                                   std::size_t n_messages, std::size_t band_size, std::size_t trials,
                                   std::uint64_t master_seed) {
  if (trials == 0) throw DomainError("expurgation needs at least one trial");
  ExpurgationReport rep;
  rep.trials = trials;
  rep.seeds.resize(trials);
  rep.errors.resize(trials);
  rep.leakages.resize(trials);
  parallel_for(trials, [&](std::size_t t) {
    rep.seeds[t] = derive_seed(master_seed, t);
    const Codebook cb = generate_codebook(e, n_messages, band_size, rep.seeds[t]);
    const CodePerformance perf = evaluate_code(cb, build_srm_decoder(cb, witness), ch);
    rep.errors[t] = perf.avg_error;
    rep.leakages[t] = perf.leakage;
  });
  for (std::size_t t = 0; t < trials; ++t) {
    rep.mean_error += rep.errors[t];
    rep.mean_leakage += rep.leakages[t];
  }
  rep.mean_error /= static_cast<double>(trials);
  rep.mean_leakage /= static_cast<double>(trials);
  std::size_t count = 0;
  std::optional<std::size_t> first;
  for (std::size_t t = 0; t < trials; ++t) {
    const bool ok = rep.errors[t] < 3.0 * rep.mean_error + kExpurgationSlack &&
                    rep.leakages[t] < 3.0 * rep.mean_leakage + kExpurgationSlack;
    rep.qualified.push_back(ok);
    if (ok) {
      ++count;
      if (!first) first = t;
    }
  }
  rep.qualified_fraction = static_cast<double>(count) / static_cast<double>(trials);
  if (!first) {
    throw ExpurgationFailed("no codebook met both factor-3 events (mean error " + format_double(rep.mean_error) +
                                ", mean leakage " + format_double(rep.mean_leakage) + ")",
                            rep);
  }
  rep.chosen = *first;
  ExpurgationResult out;
  out.codebook = generate_codebook(e, n_messages, band_size, rep.seeds[rep.chosen]);
  out.performance = evaluate_code(out.codebook, build_srm_decoder(out.codebook, witness), ch);
  out.report = std::move(rep);
  return out;
}

}  // namespace qwt
