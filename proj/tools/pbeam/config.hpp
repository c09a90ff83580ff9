#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbeam/coefficients.hpp"
#include "pbeam/nonlinear_solver.hpp"
#include "pbeam/spectral_operator.hpp"

namespace pbeam::cli {

inline constexpr int kSchemaVersion = 1;

/// One real space-time mode (c cos(theta_m t) + s sin(theta_m t)) phi_n(x).
struct ModeTerm {
  int m = 0;
  int n = 1;
  double cos = 0.0;
  double sin = 0.0;
};

struct ForcingConfig {
  /// "none", "modes" (terms give the forcing) or "manufactured"
  /// (terms give the exact solution u*).
  std::string type = "none";
  std::vector<ModeTerm> terms;
  /// True when the terms describe f; they are divided by rho on ingestion.
  bool density_scaled = false;
  double margin = 0.1;
};

struct Config {
  std::string preset = "constant";
  ProfileRecipe recipe;
  /// Literal samples on uniform points over [0, pi] ("samples" preset).
  std::vector<double> alpha_samples;
  std::vector<double> beta_samples;

  int resolution = 256;
  int modes = 4;
  int fit_min = 5;

  std::optional<FrequencySpec> frequency;
  std::optional<double> null_tol;
  int bound_trials = 100;
  std::vector<int> compactness_ranks;
  std::vector<int> convergence_resolutions;

  std::string nonlinearity = "zero";
  double g_amplitude = 1.0;
  double g_slope = 1.0;

  ForcingConfig forcing;
  SolverConfig solver;
  std::uint64_t seed = 0;
  std::string hash;  // FNV-1a of the canonical JSON text

  Nonlinearity make_nonlinearity() const;
};

/// Throws Error(ConfigError) with the offending key in the message.
Config parse_config(const nlohmann::json& doc);
Config load_config(const std::string& path);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace pbeam::cli
