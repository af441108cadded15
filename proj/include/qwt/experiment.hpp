#pragma once

// Batch driver behind the command-line tool: config parsing, command dispatch,
// result files (JSON/CSV), the run manifest and exit-code mapping.

#include <Eigen/Core>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "qwt/concentration.hpp"
#include "qwt/covering.hpp"
#include "qwt/divergences.hpp"
#include "qwt/ensembles.hpp"
#include "qwt/io.hpp"
#include "qwt/parallel.hpp"
#include "qwt/rate_bounds.hpp"
#include "qwt/spectral.hpp"
#include "qwt/wiretap_sim.hpp"

namespace qwt {

inline constexpr const char* kVersion = "1.0.0";

enum class ExitCode : int { ok = 0, validation = 2, numeric = 3, io = 4 };

struct ExperimentConfig {
  std::string command;
  std::map<std::string, std::string> inputs;  // resolved paths
  Json params = Json::object();
  std::uint64_t seed = 0;
  std::string output = ".";
  std::string source = "config";
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<long long> trials;
  std::optional<std::size_t> threads;
};

struct RunOutcome {
  ExitCode code = ExitCode::ok;
  std::string error_line;  // "E_<TAG> message", empty on success
  std::vector<std::string> files;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorCode::io, what) {}
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> names{"divergence", "rate", "simulate", "covering", "chernoff", "spectral"};
  return names;
}

inline ExperimentConfig parse_config(const Json& doc, const std::string& source, const std::string& base_dir = ".") {
  if (!doc.is_object()) throw FormatError(source + ": config must be a JSON object");
  ExperimentConfig c;
  c.source = source;
  const Json& cmd = require_field(doc, "command", source);
  if (!cmd.is_string()) throw FormatError(source + ".command: expected a string");
  c.command = cmd.get<std::string>();
  bool known = false;
  for (const auto& n : known_commands()) known = known || n == c.command;
  if (!known) throw ValidationError(source + ".command: unknown command '" + c.command + "'");
  c.seed = json_seed(require_field(doc, "seed", source), source + ".seed");
  if (auto it = doc.find("inputs"); it != doc.end()) {
    if (!it->is_object()) throw FormatError(source + ".inputs: expected an object of paths");
    for (auto kv = it->begin(); kv != it->end(); ++kv) {
      if (!kv->is_string()) throw FormatError(source + ".inputs." + kv.key() + ": expected a path");
      std::filesystem::path p(kv->get<std::string>());
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      c.inputs[kv.key()] = p.lexically_normal().string();
    }
  }
  if (auto it = doc.find("params"); it != doc.end()) {
    if (!it->is_object()) throw FormatError(source + ".params: expected an object");
    c.params = *it;
  }
  if (auto it = doc.find("output"); it != doc.end()) {
    if (!it->is_string()) throw FormatError(source + ".output: expected a path");
    std::filesystem::path p(it->get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    c.output = p.lexically_normal().string();
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw InputError("config file not found: " + path);
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_config(load_json_file(path), path, base.empty() ? "." : base);
}

inline void apply_overrides(ExperimentConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.output) c.output = *o.output;
  if (o.trials) {
    if (*o.trials < 1) throw ValidationError("--trials must be at least 1");
    c.params["trials"] = *o.trials;
  }
}

namespace detail {

inline double param_number(const ExperimentConfig& c, const std::string& key, std::optional<double> fallback = {}) {
  auto it = c.params.find(key);
  if (it == c.params.end()) {
    if (fallback) return *fallback;
    throw ValidationError("params." + key + ": missing for command '" + c.command + "'");
  }
  if (!it->is_number()) throw ValidationError("params." + key + ": expected a number");
  return it->get<double>();
}

inline std::size_t param_count(const ExperimentConfig& c, const std::string& key, std::optional<long long> fallback = {}) {
  auto it = c.params.find(key);
  if (it == c.params.end()) {
    if (fallback) return static_cast<std::size_t>(*fallback);
    throw ValidationError("params." + key + ": missing for command '" + c.command + "'");
  }
  if (!it->is_number_integer() || it->get<long long>() < 1) {
    throw ValidationError("params." + key + ": expected a positive integer");
  }
  return static_cast<std::size_t>(it->get<long long>());
}

inline std::string param_string(const ExperimentConfig& c, const std::string& key, const std::string& fallback) {
  auto it = c.params.find(key);
  if (it == c.params.end()) return fallback;
  if (!it->is_string()) throw ValidationError("params." + key + ": expected a string");
  return it->get<std::string>();
}

inline const std::string& input_path(const ExperimentConfig& c, const std::string& key) {
  auto it = c.inputs.find(key);
  if (it == c.inputs.end()) throw ValidationError("inputs." + key + ": missing for command '" + c.command + "'");
  return it->second;
}

inline Json divergence_json(const DivergenceResult& r) {
  Json j = Json::object();
  j["epsilon"] = r.epsilon;
  j["infinite"] = r.infinite;
  j["value_bits"] = r.infinite ? Json(nullptr) : Json(r.value_bits);
  return j;
}

// Results are staged in memory and written once the command finished.
struct Staged {
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
  void json(const std::string& name, const Json& j) { files.emplace_back(name, dump_json(j)); }
  void text(const std::string& name, std::string s) { files.emplace_back(name, std::move(s)); }
};

inline std::string csv_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x);
}

inline void run_divergence(const ExperimentConfig& c, Json& result, Staged&) {
  const Ensemble e = load_ensemble(input_path(c, "ensemble"));
  const std::string kind = param_string(c, "kind", "hypothesis_testing");
  const double eps = param_number(c, "eps");
  result["kind"] = kind;
  DivergenceResult r;
  if (kind == "hypothesis_testing") {
    r = cq_hypothesis_testing_divergence(CqState(e), eps);
  } else if (kind == "smooth_max") {
    r = smooth_max_divergence(e, eps, param_number(c, "grid_step", 1e-3));
  } else {
    throw ValidationError("params.kind: expected 'hypothesis_testing' or 'smooth_max'");
  }
  result.update(divergence_json(r));
}

inline void run_rate(const ExperimentConfig& c, Json& result, Staged&) {
  const WiretapChannelModel ch = load_channel(input_path(c, "channel"));
  const double grid = param_number(c, "grid_step", 1e-3);
  double eps_prime = 0.0, delta_hat = 0.0;
  if (c.params.contains("eps") || c.params.contains("delta")) {
    const CodeParams p = theorem3_code_params(param_number(c, "eps"), param_number(c, "delta"));
    eps_prime = p.eps_prime;
    delta_hat = p.delta_hat;
    result["eps_target"] = param_number(c, "eps");
    result["delta_target"] = param_number(c, "delta");
  } else {
    eps_prime = param_number(c, "eps_prime");
    delta_hat = param_number(c, "delta_hat");
  }
  const DivergenceResult i0 = cq_hypothesis_testing_divergence(CqState(bob_marginals(ch)), eps_prime);
  const DivergenceResult iinf = smooth_max_divergence(eve_marginals(ch), delta_hat, grid);
  if (i0.infinite) throw NoFiniteValue("I_0 is infinite for this channel; the rate formula needs a finite value", {}, {});
  AchievabilityInputs in{i0.value_bits, iinf.value_bits, eps_prime, delta_hat, static_cast<long long>(ch.dim_e())};
  const RatePair rp = achievable_rate(in);
  result["eps_prime"] = eps_prime;
  result["delta_hat"] = delta_hat;
  result["i0_bits"] = i0.value_bits;
  result["iinf_bits"] = iinf.value_bits;
  result["rate_bits"] = rp.r_bits;
  result["band_rate_bits"] = rp.r_tilde_bits;
  result["penalty_bits"] = rp.penalty_bits;
  result["covering_constant"] = rp.c_const;
  result["error_budget"] = rp.error_budget;
  result["leakage_budget"] = rp.leakage_budget;
}

inline void run_simulate(const ExperimentConfig& c, Json& result, Staged& out, const std::string& hash) {
  const WiretapChannelModel ch = load_channel(input_path(c, "channel"));
  const double eps = param_number(c, "eps");
  const std::size_t n = param_count(c, "n_messages");
  const std::size_t k = param_count(c, "band_size");
  const std::size_t trials = param_count(c, "trials", 60);
  const double grid = param_number(c, "grid_step", 1e-3);
  const Ensemble bob = bob_marginals(ch);
  const DivergenceResult i0 = cq_hypothesis_testing_divergence(CqState(bob), eps);

  std::string csv = "# config_hash=" + hash + "\nseed,n_messages,band_size,avg_error,leakage,qualified_flag\n";
  auto rows = [&](const ExpurgationReport& rep) {
    for (std::size_t t = 0; t < rep.trials; ++t) {
      csv += std::to_string(rep.seeds[t]) + "," + std::to_string(n) + "," + std::to_string(k) + "," +
             format_double(rep.errors[t]) + "," + format_double(rep.leakages[t]) + "," + (rep.qualified[t] ? "1" : "0") + "\n";
    }
  };
  try {
    const ExpurgationResult ex = expurgate(bob, ch, *i0.witness, n, k, trials, c.seed);
    rows(ex.report);
    out.text("simulate.csv", csv);
    result["witness_i0_bits"] = i0.infinite ? Json(nullptr) : Json(i0.value_bits);
    result["trials"] = trials;
    result["mean_error"] = ex.report.mean_error;
    result["mean_leakage"] = ex.report.mean_leakage;
    result["qualified_fraction"] = ex.report.qualified_fraction;
    result["chosen_trial"] = ex.report.chosen;
    result["chosen_seed"] = ex.report.seeds[ex.report.chosen];
    result["chosen_error"] = ex.performance.avg_error;
    result["chosen_leakage"] = ex.performance.leakage;
    const ConverseCheck cc =
        converse_secrecy_check(message_eve_state(ex.performance), ex.performance.leakage, grid);
    result["converse_iinf_bits"] = cc.iinf;
    result["converse_limit_bits"] = cc.limit;
    result["converse_holds"] = cc.holds;
  } catch (const ExpurgationFailed& f) {
    rows(f.report());
    throw;
  }
}

inline void run_covering(const ExperimentConfig& c, Json& result, Staged& out, const std::string& hash) {
  const Ensemble e = load_ensemble(input_path(c, "ensemble"));
  const double i_param = param_number(c, "i_param");
  const double floor = param_number(c, "eps_floor", 0.0);
  const std::size_t m = param_count(c, "m_samples");
  const std::size_t trials = param_count(c, "trials", 100);
  const CoveringInstance ci = build_covering_instance(e, i_param, floor);
  const DecompositionSuite ds = decomposition_suite(ci);
  const CoveringReport rep = covering_experiment(ci, m, trials, c.seed);
  result["eps"] = ci.eps;
  result["eps_raw"] = ci.eps_raw;
  result["eps_floored"] = ci.floored;
  result["i_param"] = i_param;
  Json d = Json::object();
  d["tail_mass"] = ds.tail_mass;
  d["tail_ok"] = ds.tail_ok;
  d["worst_band_ratio"] = ds.worst_band_ratio;
  d["ratio_ok"] = ds.ratio_ok;
  d["worst_exptr_slack"] = ds.worst_exptr_slack;
  d["worst_piminus_eig"] = ds.worst_piminus_eig;
  d["expected_plus_mass"] = ds.expected_plus_mass;
  d["decompose_ok"] = ds.decompose_ok;
  d["max_residual"] = ds.max_residual;
  d["gentle_ok"] = ds.gentle_ok;
  d["claim2_ok"] = ds.claim2_ok;
  result["decomposition"] = d;
  Json s = Json::object();
  s["m_samples"] = m;
  s["trials"] = trials;
  s["mean_deviation"] = rep.mean_deviation;
  s["threshold"] = rep.threshold;
  s["empirical_tail"] = rep.empirical_fail;
  s["bound_rhs"] = rep.bound_rhs;
  s["vacuous"] = rep.vacuous;
  s["claim1_fail"] = rep.claim1_fail;
  s["claim2_fail"] = rep.claim2_fail;
  s["scalar_chernoff"] = rep.scalar_chernoff;
  result["sampling"] = s;
  std::string csv = "# config_hash=" + hash + "\ntrial,deviation\n";
  for (std::size_t t = 0; t < rep.deviations.size(); ++t) csv += std::to_string(t) + "," + format_double(rep.deviations[t]) + "\n";
  out.text("covering_deviations.csv", csv);
}

inline std::map<std::string, double> number_map(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_number()) throw ValidationError(where + "." + it.key() + ": expected a number");
    out[it.key()] = it->get<double>();
  }
  return out;
}

inline void run_chernoff(const ExperimentConfig& c, Json& result, Staged&) {
  Json values = Json::array();
  if (auto it = c.params.find("bounds"); it != c.params.end()) {
    if (!it->is_array()) throw ValidationError("params.bounds: expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const Json& b = (*it)[k];
      const std::string where = "params.bounds[" + std::to_string(k) + "]";
      if (!b.is_object() || !b.contains("name") || !b["name"].is_string()) throw ValidationError(where + ".name: missing");
      BoundSpec spec{b["name"].get<std::string>(), b.contains("params") ? number_map(b["params"], where + ".params")
                                                                           : std::map<std::string, double>{}};
      Json row = Json::object();
      row["name"] = spec.name;
      row["value"] = evaluate(spec);
      values.push_back(row);
    }
  }
  result["bounds"] = values;
  if (auto it = c.params.find("trace_lower"); it != c.params.end()) {
    const auto p = number_map(*it, "params.trace_lower");
    auto get = [&](const char* key) {
      auto f = p.find(key);
      if (f == p.end() || f->second < 1) throw ValidationError(std::string("params.trace_lower.") + key + ": expected a positive integer");
      return static_cast<Eigen::Index>(f->second);
    };
    const Eigen::Index d1 = get("d1"), d2 = get("d2");
    const std::size_t trials = param_count(c, "trials", 1000);
    Rng rng = make_rng(c.seed, 0xA11CE);
    Matrix a = gaussian_matrix(d1, rng).leftCols(d2);
    const TraceLowerReport rep = trace_lower_trial(a, trials, derive_seed(c.seed, 1));
    Json t = Json::object();
    t["d1"] = d1;
    t["d2"] = d2;
    t["trials"] = trials;
    t["main_frequency"] = rep.main_frequency;
    t["main_floor"] = kTraceLowerProbability;
    t["c11_frequency"] = rep.c11_frequency;
    t["c11_floor"] = kClaimC11Probability;
    t["c22_frequency"] = rep.c22_frequency;
    t["c22_floor"] = kClaimC22Probability;
    result["trace_lower"] = t;
  }
}

inline void run_spectral(const ExperimentConfig& c, Json& result, Staged& out, const std::string& hash) {
  const double eps = param_number(c, "eps");
  bool any = false;
  if (c.inputs.count("ensemble")) {
    any = true;
    const Ensemble e = load_ensemble(input_path(c, "ensemble"));
    const int n_max = static_cast<int>(param_count(c, "n_max", 2));
    const SpectralSeries s = tensor_power_rates(CqState(e), n_max, eps, param_number(c, "grid_step", 1e-3));
    std::string csv = "# config_hash=" + hash + "\nn,rate_lower,rate_upper\n";
    for (std::size_t k = 0; k < s.n_values.size(); ++k) {
      csv += std::to_string(s.n_values[k]) + "," + csv_number(s.rate_lower[k]) + "," + csv_number(s.rate_upper[k]) + "\n";
    }
    out.text("spectral.csv", csv);
    result["n_max"] = n_max;
  }
  if (auto it = c.params.find("p_joint"); it != c.params.end()) {
    any = true;
    std::vector<std::vector<double>> p;
    if (!it->is_array()) throw ValidationError("params.p_joint: expected a matrix of probabilities");
    for (const auto& row : *it) {
      if (!row.is_array()) throw ValidationError("params.p_joint: expected a matrix of probabilities");
      std::vector<double> r;
      for (const auto& x : row) {
        if (!x.is_number()) throw ValidationError("params.p_joint: entries must be numbers");
        r.push_back(x.get<double>());
      }
      p.push_back(std::move(r));
    }
    const SpectralEstimate est = classical_spectral_estimate(p, param_count(c, "n_samples", 10000), eps, c.seed,
                                                             param_count(c, "blocks", 200));
    Json j = Json::object();
    j["inf_rate"] = est.inf_rate;
    j["sup_rate"] = est.sup_rate;
    j["mean_rate"] = est.mean_rate;
    j["mutual_information_bits"] = mutual_information_bits(p);
    result["classical"] = j;
  }
  if (!any) throw ValidationError("spectral needs inputs.ensemble or params.p_joint");
}

inline std::pair<ExitCode, std::string> classify(const Error& e) {
  switch (e.code()) {
    case ErrorCode::io: return {ExitCode::io, "E_IO"};
    case ErrorCode::format:
    case ErrorCode::validation:
    case ErrorCode::shape:
    case ErrorCode::domain:
    case ErrorCode::missing_label:
    case ErrorCode::precondition:
    case ErrorCode::invalid_operator: return {ExitCode::validation, "E_VALIDATION"};
    case ErrorCode::degenerate_epsilon:
    case ErrorCode::not_positive:
    case ErrorCode::no_finite_value:
    case ErrorCode::expurgation_failed:
    case ErrorCode::empty_band:
    case ErrorCode::too_large: return {ExitCode::numeric, "E_NUMERIC"};
  }
  return {ExitCode::numeric, "E_NUMERIC"};
}

inline std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

}  // namespace detail

/// Hash of everything that determines the results: command, params, seed and input contents.
inline std::string config_hash(const ExperimentConfig& c) {
  Json j = Json::object();
  j["command"] = c.command;
  j["params"] = c.params;
  j["seed"] = c.seed;
  Json in = Json::object();
  for (const auto& [key, path] : c.inputs) in[key] = hex64(fnv1a64(read_text_file(path)));
  j["inputs"] = in;
  return hex64(fnv1a64(dump_json(j, 0)));
}

inline RunOutcome run(const ExperimentConfig& c) {
  namespace fs = std::filesystem;
  RunOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  detail::Staged staged;
  try {
    for (const auto& [key, path] : c.inputs) {
      if (!fs::exists(path)) throw InputError("inputs." + key + ": file not found: " + path);
    }
    const std::string hash = config_hash(c);
    Json result = Json::object();
    result["command"] = c.command;
    result["config_hash"] = hash;
    result["seed"] = c.seed;
    if (c.command == "divergence") detail::run_divergence(c, result, staged);
    else if (c.command == "rate") detail::run_rate(c, result, staged);
    else if (c.command == "simulate") detail::run_simulate(c, result, staged, hash);
    else if (c.command == "covering") detail::run_covering(c, result, staged, hash);
    else if (c.command == "chernoff") detail::run_chernoff(c, result, staged);
    else if (c.command == "spectral") detail::run_spectral(c, result, staged, hash);
    else throw ValidationError("unknown command '" + c.command + "'");
    staged.json("result.json", result);

    Json inputs = Json::object();
    std::string all_inputs;
    for (const auto& [key, path] : c.inputs) {
      const std::string body = read_text_file(path);
      inputs[key] = hex64(fnv1a64(body));
      all_inputs += body;
    }
    Json manifest = Json::object();
    manifest["config_hash"] = hash;
    manifest["inputs"] = inputs;
    manifest["inputs_hash"] = hex64(fnv1a64(all_inputs));
    manifest["seed"] = c.seed;
    Json versions = Json::object();
    versions["qwt"] = kVersion;
    versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    versions["compiler"] = __VERSION__;
    manifest["versions"] = versions;
    manifest["threads"] = thread_budget();
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json files = Json::array();
    for (const auto& f : staged.files) files.push_back(f.first);
    manifest["files"] = files;
    staged.json("manifest.json", manifest);

    std::error_code ec;
    fs::create_directories(c.output, ec);
    if (ec) throw IoError("cannot create output directory " + c.output + ": " + ec.message());
    std::vector<std::pair<fs::path, fs::path>> moves;
    try {
      for (const auto& [name, body] : staged.files) {
        const fs::path final_path = fs::path(c.output) / name;
        const fs::path tmp = fs::path(c.output) / (name + ".partial");
        write_text_file(tmp.string(), body);
        moves.emplace_back(tmp, final_path);
      }
      for (const auto& [tmp, final_path] : moves) {
        fs::rename(tmp, final_path);
        outcome.files.push_back(final_path.string());
      }
    } catch (...) {
      for (const auto& [tmp, final_path] : moves) fs::remove(tmp, ec);
      for (const auto& f : outcome.files) fs::remove(f, ec);
      outcome.files.clear();
      throw;
    }
  } catch (const InputError& e) {
    outcome.code = ExitCode::io;
    outcome.error_line = "E_INPUT " + detail::one_line(e.what());
  } catch (const Error& e) {
    auto [code, tag] = detail::classify(e);
    outcome.code = code;
    outcome.error_line = tag + " " + detail::one_line(e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    outcome.code = ExitCode::io;
    outcome.error_line = "E_IO " + detail::one_line(e.what());
  } catch (const std::exception& e) {
    outcome.code = ExitCode::numeric;
    outcome.error_line = "E_INTERNAL " + detail::one_line(e.what());
  }
  return outcome;
}

}  // namespace qwt
