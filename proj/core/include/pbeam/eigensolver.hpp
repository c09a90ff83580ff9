#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "pbeam/coefficients.hpp"
#include "pbeam/grid.hpp"

namespace pbeam {

/// Eigenpairs of (eta phi'')'' = mu rho phi with phi = 0 and
/// 2(alpha+beta) phi' + phi'' = 0 at both ends.
///
/// Eigenfunctions are sampled on the profile grid and are orthonormal in
/// the discrete measure sum_k w_k rho_k (.)(.). Index n = 1..count follows
/// the ascending order of mu.
struct BeamSpectrum {
  std::vector<double> mu;
  /// phi(k, n-1) = phi_n(x_k), one column per mode.
  Eigen::MatrixXd phi;
  /// Cubic Hermite coefficients (value, slope per element boundary node),
  /// one column per mode. Used to evaluate derivatives exactly.
  Eigen::MatrixXd hermite;
  SpatialGrid grid;
  /// rho_k * w_k: the measure the eigenfunctions are orthonormal in.
  std::vector<double> rho_weights;
  std::string profile_id;

  int count() const noexcept { return static_cast<int>(mu.size()); }
  int resolution() const noexcept { return grid.elements(); }
};

/// Scale-relative gap below which eigenvalues are treated as one cluster.
inline bool same_cluster(double a, double b) {
  return std::abs(a - b) <= 1e-6 * (1.0 + std::abs(a));
}

/// Solve for the `count` smallest eigenpairs using cubic Hermite finite
/// elements on the profile grid (resolution = number of grid cells).
/// Requires count <= resolution / 4.
BeamSpectrum solve_eigenproblem(const CoefficientProfile& profile, int count);

/// Discrete bending energy int eta (phi_n'')^2 dx + [2 eta (alpha+beta) phi_n'^2]_0^pi
/// of mode n (1-based). Equals mu_n for a normalized eigenfunction.
double bending_energy(const BeamSpectrum& spectrum, const CoefficientProfile& profile, int n);

/// phi_n'(0) and phi_n'(pi).
double end_slope_left(const BeamSpectrum& spectrum, int n);
double end_slope_right(const BeamSpectrum& spectrum, int n);

/// max_{n,k} |<phi_n, phi_k>_rho - delta_nk|.
double check_orthonormality(const BeamSpectrum& spectrum);

/// mu_n = n^4 + 2 n^2 a + b_n. `a` comes from a least-squares fit of
/// mu_n - n^4 on (2 n^2, 1) over the fit range; b_n is reported for every n.
struct AsymptoticFit {
  double a = 0.0;
  double intercept = 0.0;
  std::vector<double> b;  // b[n-1]
  int n_min = 0;
  int n_max = 0;
  /// RMS deviation of mu_n - n^4 from 2 n^2 a + intercept over the range.
  double fit_residual = 0.0;
  /// Least-squares slope of |b_n| against n over the range, and mean |b_n|.
  double abs_b_slope = 0.0;
  double mean_abs_b = 0.0;
};

AsymptoticFit fit_asymptotics(std::span<const double> mu, int n_min, int n_max = 0);
AsymptoticFit fit_asymptotics(const BeamSpectrum& spectrum, int n_min, int n_max = 0);

}  // namespace pbeam
