// qwt: run one experiment described by a JSON config.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "qwt/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quantum wiretap one-shot toolkit: batch experiments"};
  std::string config_path;
  qwt::Overrides ov;
  std::uint64_t seed = 0;
  std::string out_dir;
  long long trials = 0;
  std::size_t threads = 0;
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* trials_opt = app.add_option("--trials", trials, "override params.trials");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (0 = all cores)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "E_USAGE %s\n", e.what());
    return static_cast<int>(qwt::ExitCode::validation);
  }
  if (*seed_opt) ov.seed = seed;
  if (*out_opt) ov.output = out_dir;
  if (*trials_opt) ov.trials = trials;
  if (*threads_opt) qwt::thread_budget() = threads;

  qwt::ExperimentConfig cfg;
  try {
    cfg = qwt::load_config(config_path);
    qwt::apply_overrides(cfg, ov);
  } catch (const qwt::InputError& e) {
    std::fprintf(stderr, "E_INPUT %s\n", e.what());
    return static_cast<int>(qwt::ExitCode::io);
  } catch (const qwt::Error& e) {
    auto [code, tag] = qwt::detail::classify(e);
    std::fprintf(stderr, "%s %s\n", tag.c_str(), qwt::detail::one_line(e.what()).c_str());
    return static_cast<int>(code);
  }
  const qwt::RunOutcome r = qwt::run(cfg);
  if (r.code != qwt::ExitCode::ok) {
    std::fprintf(stderr, "%s\n", r.error_line.c_str());
    return static_cast<int>(r.code);
  }
  for (const auto& f : r.files) std::cout << f << "\n";
  return 0;
}
