#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "invariantkit/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"invariant-kit: set-invariance verification via minimal barrier functions"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned long long seed = 0;
  int threads = 0;

  auto* run_cmd = app.add_subcommand("run", "execute a problem config and write a report bundle");
  run_cmd->add_option("config", config_path, "problem config (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides the config)");
  run_cmd->add_option("--seed", seed, "RNG seed for random initial conditions");
  run_cmd->add_option("--threads", threads, "worker threads (default: INVARIANT_KIT_THREADS or 1)");

  std::string mu_text;
  auto* check_cmd = app.add_subcommand("check-mu", "classify a comparison function in w");
  check_cmd->add_option("expr", mu_text, "expression in the variable w")->required();

  auto* version_cmd = app.add_subcommand("version", "print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (version_cmd->parsed()) {
      std::cout << "invariant-kit " << invkit::cli::kVersion << "\n";
      return 0;
    }
    if (check_cmd->parsed()) {
      const auto [json, code] = invkit::cli::check_mu(mu_text);
      std::cout << json;
      return code;
    }
    invkit::cli::RunOptions opts;
    opts.out_dir_override = out_dir;
    opts.seed = seed;
    if (threads > 0) {
      opts.threads = threads;
    } else if (const char* env = std::getenv("INVARIANT_KIT_THREADS")) {
      opts.threads = std::max(1, std::atoi(env));
    }
    const auto res = invkit::cli::run(config_path, opts);
    std::cout << "report: " << res.report_path << " (exit " << res.exit_code << ")\n";
    return res.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
