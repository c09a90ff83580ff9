#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace pbeam::cli {

struct RunOptions {
  /// eigen | lattice | solve | verify | manufactured
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<bool> strict_a2;
};

/// Runs one subcommand. Returns 0 on success, 1 on a module error and 2 on
/// a configuration error; failures print one `error code=<Name> ...` line
/// to `err`.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace pbeam::cli
