#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pbeam/grid.hpp"

namespace pbeam {

/// Mass density and bending stiffness generated from alpha, beta:
///   rho(x) = rho0 * exp(4 int_0^x beta),  eta(x) = exp(4 int_0^x alpha).
/// The strict flag enforces rho > 1 and int_0^pi (rho/eta)^{1/4} dx = pi.
struct CoefficientProfile {
  SpatialGrid grid;
  std::vector<double> alpha;
  std::vector<double> beta;
  double rho0 = 1.0;
  std::vector<double> rho;
  std::vector<double> eta;
  bool strict_a2 = false;
  /// Constant added to alpha by the most recent calibration (0 if none).
  double calibration_shift = 0.0;

  /// alpha + beta at x = 0 and x = pi (rotational spring strengths).
  double spring_left() const { return alpha.front() + beta.front(); }
  double spring_right() const { return alpha.back() + beta.back(); }

  /// Short tag identifying the profile in spectra and reports.
  std::string id() const;
};

/// Absolute tolerance on int (rho/eta)^{1/4} dx - pi accepted as normalized.
inline constexpr double kNormalizationTolerance = 1e-10;

CoefficientProfile build_profiles(std::span<const double> alpha,
                                  std::span<const double> beta, double rho0,
                                  const SpatialGrid& grid, bool strict_a2,
                                  bool calibrate = false);

/// Shift alpha by the constant c that makes int (rho/eta)^{1/4} dx = pi.
CoefficientProfile calibrate_normalization(const CoefficientProfile& profile);

/// int_0^pi (rho/eta)^{1/4} dx on the profile grid.
double normalization_integral(const CoefficientProfile& profile);

/// Analytic generating functions, sampled onto a grid on demand.
struct CoefficientFunctions {
  std::function<double(double)> alpha;
  std::function<double(double)> beta;
};

std::vector<double> sample(const std::function<double(double)>& f,
                           const SpatialGrid& grid);

/// Named presets.
/// "constant":       alpha = beta = 0 (rho = rho0, eta = 1).
/// "exp-linear":     alpha, beta constant (rho, eta exponential in x).
/// "sine-perturbed": alpha = a0 + a1 sin(ka x + pa), same form for beta.
CoefficientFunctions constant_preset();
CoefficientFunctions exp_linear_preset(double alpha, double beta);

struct SineTerm {
  double mean = 0.0;
  double amplitude = 0.0;
  double frequency = 1.0;
  double phase = 0.0;
  double operator()(double x) const;
};
CoefficientFunctions sine_perturbed_preset(SineTerm alpha, SineTerm beta);

/// Everything needed to rebuild a profile at any resolution.
struct ProfileRecipe {
  CoefficientFunctions functions;
  double rho0 = 1.0;
  bool strict_a2 = false;
  bool calibrate = false;

  CoefficientProfile build(const SpatialGrid& grid) const;
};

}  // namespace pbeam
