#include <iostream>

#include <CLI11.hpp>

#include "runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pbeam: time-periodic solutions of the semilinear variable-coefficient beam"};
  app.require_subcommand(1);
  app.fallthrough();

  pbeam::cli::RunOptions options;
  std::uint64_t seed = 0;
  bool strict = false;
  app.add_option("--config", options.config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", options.out_dir, "Output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized diagnostics");
  auto* strict_opt =
      app.add_flag("--strict-a2,!--no-strict-a2", strict, "Enforce rho > 1 and the normalization");

  const std::pair<const char*, const char*> commands[] = {
      {"eigen", "Eigenvalues, eigenfunctions and the asymptotic fit"},
      {"lattice", "Space-time spectrum, null/range split and inverse bounds"},
      {"solve", "Regularized continuation solve of L u + g(u) = f_hat"},
      {"verify", "Diagnostics suite and constant-coefficient oracles"},
      {"manufactured", "Solve a manufactured problem and report recovery error"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << "error code=ConfigError message=\"invalid command line\"\n";
    return code == 0 ? 0 : 2;
  }

  options.command = app.get_subcommands().front()->get_name();
  if (seed_opt->count() > 0) options.seed = seed;
  if (strict_opt->count() > 0) options.strict_a2 = strict;
  return pbeam::cli::run(options, std::cout, std::cerr);
}
