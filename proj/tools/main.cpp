#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "dampwave/commands.hpp"
#include "dampwave/runtime.hpp"

extern "C" void openblas_set_num_threads(int);

int main(int argc, char** argv) {
  dampwave::select_blas_kernels(argv);
  CLI::App app{"Spectral laboratory for the damped wave equation"};
  std::string command, config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("command", command, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(dampwave::command_names()));
  app.add_option("--config", config_path, "YAML configuration file");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides seed)");
  auto* thr_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    dampwave::RunConfig cfg = config_path.empty() ? dampwave::parse_config("")
                                                  : dampwave::load_config(config_path);
    if (!out_dir.empty())
      cfg.out = out_dir;
    if (*seed_opt)
      cfg.seed = seed;
    if (*thr_opt)
      cfg.threads = threads;
    Eigen::setNbThreads(cfg.threads);
    openblas_set_num_threads(cfg.threads);
    const auto bundle = dampwave::run_command(command, cfg);
    std::cout << bundle.manifest()["files"].dump() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dampwave::exit_code_for(e);
  }
}
