#pragma once

// State ensembles, classical-quantum states and the extensional wiretap
// channel model, plus their JSON loaders.

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qwt/io.hpp"
#include "qwt/operator_core.hpp"

namespace qwt {

inline constexpr double kProbabilityTolerance = 1e-10;

inline void validate_distribution(const std::vector<double>& probs, const std::string& what) {
  if (probs.empty()) throw ValidationError(what + ": empty distribution");
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (!std::isfinite(probs[k]) || probs[k] < 0.0) {
      throw ValidationError(what + ": probability " + std::to_string(k) + " is negative or non-finite");
    }
    total += probs[k];
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw ValidationError(what + ": probabilities sum to " + format_double(total) + ", expected 1");
  }
}

/// Finite family {p_x, rho_x} of states on a common space.
class Ensemble {
 public:
  Ensemble() = default;

  Ensemble(std::vector<std::string> labels, std::vector<double> probs, std::vector<DensityOperator> states)
      : labels_(std::move(labels)), probs_(std::move(probs)), states_(std::move(states)) {
    if (labels_.size() != probs_.size() || labels_.size() != states_.size()) {
      throw ShapeError("ensemble needs one label, probability and state per element");
    }
    validate_distribution(probs_, "ensemble");
    for (std::size_t k = 0; k < states_.size(); ++k) {
      if (states_[k].dim() != states_.front().dim()) {
        throw ValidationError("ensemble states must share one dimension; element '" + labels_[k] + "' has " +
                              std::to_string(states_[k].dim()));
      }
      for (std::size_t j = 0; j < k; ++j) {
        if (labels_[j] == labels_[k]) throw ValidationError("duplicate ensemble label '" + labels_[k] + "'");
      }
    }
  }

  /// Labels "0", "1", ... for quick construction.
  static Ensemble indexed(std::vector<double> probs, std::vector<DensityOperator> states) {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < probs.size(); ++k) labels.push_back(std::to_string(k));
    return Ensemble(std::move(labels), std::move(probs), std::move(states));
  }

  std::size_t size() const { return labels_.size(); }
  Eigen::Index dim() const { return states_.front().dim(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<DensityOperator>& states() const { return states_; }
  const std::string& label(std::size_t k) const { return labels_[k]; }
  double prob(std::size_t k) const { return probs_[k]; }
  const DensityOperator& state(std::size_t k) const { return states_[k]; }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t k = 0; k < labels_.size(); ++k) {
      if (labels_[k] == label) return k;
    }
    throw KeyError("unknown label '" + label + "'");
  }

 private:
  std::vector<std::string> labels_;
  std::vector<double> probs_;
  std::vector<DensityOperator> states_;
};

/// sum_x p_x rho_x
inline DensityOperator average_state(const Ensemble& e) {
  Matrix acc = Matrix::Zero(e.dim(), e.dim());
  for (std::size_t k = 0; k < e.size(); ++k) acc += e.prob(k) * e.state(k).matrix();
  return DensityOperator(acc);
}

/// rho^{VB} = sum_v p(v) |v><v| (x) rho_v, stored through its ensemble.
class CqState {
 public:
  CqState() = default;
  explicit CqState(Ensemble e) : ensemble_(std::move(e)) {}

  const Ensemble& ensemble() const { return ensemble_; }
  std::size_t n_classical() const { return ensemble_.size(); }
  Eigen::Index dim_quantum() const { return ensemble_.dim(); }

  DensityOperator joint() const {
    const Eigen::Index nv = static_cast<Eigen::Index>(n_classical());
    const Eigen::Index d = dim_quantum();
    Matrix m = Matrix::Zero(nv * d, nv * d);
    for (Eigen::Index v = 0; v < nv; ++v) {
      m.block(v * d, v * d, d, d) = ensemble_.prob(static_cast<std::size_t>(v)) * ensemble_.state(static_cast<std::size_t>(v)).matrix();
    }
    return DensityOperator(m);
  }

  DensityOperator classical_marginal() const {
    RealVector p(static_cast<Eigen::Index>(n_classical()));
    for (std::size_t v = 0; v < n_classical(); ++v) p[static_cast<Eigen::Index>(v)] = ensemble_.prob(v);
    return DensityOperator(HermitianOperator::diagonal(p));
  }

  DensityOperator quantum_marginal() const { return average_state(ensemble_); }

  /// rho^V (x) rho^B
  DensityOperator product_of_marginals() const {
    return DensityOperator(tensor(classical_marginal().op(), quantum_marginal().op()));
  }

 private:
  Ensemble ensemble_;
};

/// Finite input alphabet mapped to joint Bob-Eve states on C^{dim_b} (x) C^{dim_e}.
class WiretapChannelModel {
 public:
  WiretapChannelModel() = default;

  WiretapChannelModel(Eigen::Index dim_b, Eigen::Index dim_e, std::vector<std::string> labels,
                      std::vector<DensityOperator> joint_states, std::vector<double> probs = {})
      : dim_b_(dim_b), dim_e_(dim_e), labels_(std::move(labels)), states_(std::move(joint_states)), probs_(std::move(probs)) {
    if (dim_b_ <= 0 || dim_e_ <= 0) throw ValidationError("channel dimensions must be positive");
    if (labels_.empty() || labels_.size() != states_.size()) {
      throw ShapeError("channel needs one joint state per input label");
    }
    for (std::size_t k = 0; k < states_.size(); ++k) {
      if (states_[k].dim() != dim_b_ * dim_e_) {
        throw ValidationError("declared dims " + std::to_string(dim_b_) + "x" + std::to_string(dim_e_) +
                              " do not factor the joint dimension of input '" + labels_[k] + "'");
      }
      for (std::size_t j = 0; j < k; ++j) {
        if (labels_[j] == labels_[k]) throw ValidationError("duplicate channel label '" + labels_[k] + "'");
      }
    }
    if (!probs_.empty()) {
      if (probs_.size() != labels_.size()) throw ShapeError("channel probabilities must match the input labels");
      validate_distribution(probs_, "channel input");
    }
  }

  Eigen::Index dim_b() const { return dim_b_; }
  Eigen::Index dim_e() const { return dim_e_; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const DensityOperator& joint_state(std::size_t k) const { return states_[k]; }
  bool has_probs() const { return !probs_.empty(); }

  /// Input distribution; uniform when the file supplied none.
  std::vector<double> input_probs() const {
    if (!probs_.empty()) return probs_;
    return std::vector<double>(labels_.size(), 1.0 / static_cast<double>(labels_.size()));
  }

  WiretapChannelModel with_probs(std::vector<double> probs) const {
    return WiretapChannelModel(dim_b_, dim_e_, labels_, states_, std::move(probs));
  }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t k = 0; k < labels_.size(); ++k) {
      if (labels_[k] == label) return k;
    }
    throw KeyError("unknown channel input '" + label + "'");
  }

 private:
  Eigen::Index dim_b_ = 0;
  Eigen::Index dim_e_ = 0;
  std::vector<std::string> labels_;
  std::vector<DensityOperator> states_;
  std::vector<double> probs_;
};

inline Ensemble channel_marginals(const WiretapChannelModel& ch, Subsystem traced) {
  std::vector<DensityOperator> states;
  for (std::size_t k = 0; k < ch.size(); ++k) {
    states.emplace_back(partial_trace(ch.joint_state(k).op(), ch.dim_b(), ch.dim_e(), traced));
  }
  return Ensemble(ch.labels(), ch.input_probs(), std::move(states));
}

/// {p_v, Tr_E rho^{BE}_v}
inline Ensemble bob_marginals(const WiretapChannelModel& ch) { return channel_marginals(ch, Subsystem::second); }
/// {p_v, Tr_B rho^{BE}_v}
inline Ensemble eve_marginals(const WiretapChannelModel& ch) { return channel_marginals(ch, Subsystem::first); }

// ---- file formats ----------------------------------------------------------

namespace detail {
inline std::string label_from_json(const Json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw FormatError(where + ": label must be a string or integer");
}

inline DensityOperator state_from_json(const Json& j, const std::string& where) {
  Matrix m = matrix_from_json(j, where);
  if (m.rows() != m.cols()) throw ValidationError(where + ": state matrix is not square");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kRelativeZero * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw ValidationError(where + ": state matrix is not Hermitian");
  }
  try {
    return DensityOperator(m);
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

inline const Json& inputs_array(const Json& doc, const std::string& source) {
  const Json& inputs = require_field(doc, "inputs", source);
  if (!inputs.is_array() || inputs.empty()) throw FormatError(source + ".inputs: expected a non-empty array");
  return inputs;
}
}  // namespace detail

inline Ensemble ensemble_from_json(const Json& doc, const std::string& source = "ensemble") {
  const Json& inputs = detail::inputs_array(doc, source);
  std::vector<std::string> labels;
  std::vector<double> probs;
  std::vector<DensityOperator> states;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const std::string where = source + ".inputs[" + std::to_string(k) + "]";
    const Json& item = inputs[k];
    labels.push_back(item.contains("label") ? detail::label_from_json(item["label"], where + ".label") : std::to_string(k));
    probs.push_back(json_number(require_field(item, "prob", where), where + ".prob"));
    states.push_back(detail::state_from_json(require_field(item, "state", where), where + ".state"));
  }
  if (doc.contains("dim")) {
    long long dim = json_integer(doc["dim"], source + ".dim");
    for (std::size_t k = 0; k < states.size(); ++k) {
      if (states[k].dim() != dim) {
        throw ValidationError(source + ".inputs[" + std::to_string(k) + "].state: dimension differs from declared dim");
      }
    }
  }
  return Ensemble(std::move(labels), std::move(probs), std::move(states));
}

inline Json ensemble_to_json(const Ensemble& e) {
  Json doc;
  doc["dim"] = e.dim();
  Json inputs = Json::array();
  for (std::size_t k = 0; k < e.size(); ++k) {
    inputs.push_back({{"label", e.label(k)}, {"prob", e.prob(k)}, {"state", matrix_to_json(e.state(k).matrix())}});
  }
  doc["inputs"] = std::move(inputs);
  return doc;
}

inline WiretapChannelModel channel_from_json(const Json& doc, const std::string& source = "channel") {
  const long long dim_b = json_integer(require_field(doc, "dim_b", source), source + ".dim_b");
  const long long dim_e = json_integer(require_field(doc, "dim_e", source), source + ".dim_e");
  const Json& inputs = detail::inputs_array(doc, source);
  std::vector<std::string> labels;
  std::vector<double> probs;
  std::vector<DensityOperator> states;
  std::size_t with_prob = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const std::string where = source + ".inputs[" + std::to_string(k) + "]";
    const Json& item = inputs[k];
    labels.push_back(item.contains("label") ? detail::label_from_json(item["label"], where + ".label") : std::to_string(k));
    if (item.contains("prob")) {
      probs.push_back(json_number(item["prob"], where + ".prob"));
      ++with_prob;
    }
    states.push_back(detail::state_from_json(require_field(item, "state", where), where + ".state"));
  }
  if (with_prob != 0 && with_prob != inputs.size()) {
    throw FormatError(source + ".inputs: either every input or none carries a prob");
  }
  return WiretapChannelModel(dim_b, dim_e, std::move(labels), std::move(states), std::move(probs));
}

inline Json channel_to_json(const WiretapChannelModel& ch) {
  Json doc;
  doc["dim_b"] = ch.dim_b();
  doc["dim_e"] = ch.dim_e();
  Json inputs = Json::array();
  const auto probs = ch.input_probs();
  for (std::size_t k = 0; k < ch.size(); ++k) {
    Json item = {{"label", ch.labels()[k]}, {"state", matrix_to_json(ch.joint_state(k).matrix())}};
    if (ch.has_probs()) item["prob"] = probs[k];
    inputs.push_back(std::move(item));
  }
  doc["inputs"] = std::move(inputs);
  return doc;
}

inline Ensemble load_ensemble(const std::string& path) { return ensemble_from_json(load_json_file(path), path); }
inline WiretapChannelModel load_channel(const std::string& path) { return channel_from_json(load_json_file(path), path); }
inline void save_ensemble(const Ensemble& e, const std::string& path) { write_text_file(path, dump_json(ensemble_to_json(e))); }
inline void save_channel(const WiretapChannelModel& ch, const std::string& path) {
  write_text_file(path, dump_json(channel_to_json(ch)));
}

}  // namespace qwt
