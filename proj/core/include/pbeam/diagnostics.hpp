#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pbeam/coefficients.hpp"
#include "pbeam/eigensolver.hpp"
#include "pbeam/field.hpp"
#include "pbeam/spectral_operator.hpp"

namespace pbeam {

/// Ratios of the three inverse-operator estimates for one range field h:
///   norm:        delta ||L^{-1} h|| / ||h||            (<= 1)
///   coercivity:  <L^{-1} h, h> / ||h||^2                (>= -1/gamma)
///   sup:         max |S L^{-1} h| / (C_eff ||h||)       (<= 1)
/// C_eff = sqrt(tail sum) T^{-1/2} max_n max_x |phi_n| is the Cauchy-Schwarz
/// constant for the discrete basis; it is <= sqrt(tail sum) when T >= 1
/// and |phi_n| < 1.
struct BoundRatios {
  double norm = 0.0;
  double coercivity = 0.0;
  double sup = 0.0;
  double sup_over_tail = 0.0;  // max |S L^{-1} h| / (sqrt(tail sum) ||h||)
};

BoundRatios inverse_bound_ratios(const FourierField& h, const LambdaLattice& lattice,
                                 const BeamSpectrum& spectrum);

struct InverseBoundsReport {
  int trials = 0;
  int violations = 0;
  double worst_norm = 0.0;
  double worst_coercivity = 0.0;
  double coercivity_floor = 0.0;  // -1/gamma
  double worst_sup = 0.0;
  double worst_sup_over_tail = 0.0;
  double tail_sum = 0.0;
  double sup_constant = 0.0;
  double effective_sup_constant = 0.0;
};

/// Random Hermitian range fields; throws BoundViolation on the first
/// field that breaks any estimate by more than 1e-12 relative.
InverseBoundsReport verify_inverse_bounds(const LambdaLattice& lattice,
                                          const BeamSpectrum& spectrum, int trials,
                                          std::uint64_t seed);

struct CompactnessRow {
  int rank = 0;
  /// max 1/|lambda| over discarded non-null modes (exact block norm).
  double block_norm = 0.0;
  /// sqrt(sum over discarded non-null modes of 1/lambda^2).
  double tail_bound = 0.0;
};

struct CompactnessReport {
  std::vector<CompactnessRow> rows;
  bool block_norm_monotone = false;  // non-increasing in rank
  bool block_norm_strict = false;    // strictly decreasing while nonzero
  bool tail_bound_monotone = false;
};

/// Rank N keeps the modes |m| < N, n < N and discards the rest.
CompactnessReport compactness_decay(const LambdaLattice& lattice, const std::vector<int>& ranks);

struct ResonanceBand {
  int n = 0;
  double min_abs_lambda = 0.0;  // over non-null entries
  int null_count = 0;
  int near_resonances = 0;      // |p n^2 - q |m| + p a| < 0.5
};

struct RationalityReport {
  double a = 0.0;
  /// max |lambda - (1/p^2)(p n^2 + q m + p a)(p n^2 - q m + p a) - (b_n - a^2)|.
  double factorization_residual = 0.0;
  /// Same with the constant intercept in place of b_n, over the fit range.
  double constant_b_residual = 0.0;
  std::vector<ResonanceBand> bands;
  int null_total = 0;
  int near_resonance_total = 0;
  /// Least-squares slope of per-band min |lambda| against n.
  double min_lambda_trend = 0.0;
  std::string verdict;
  std::string residual_label;
};

/// `exact_model` marks synthetic spectra with no o(1/n) remainder.
RationalityReport rationality_probe(const AsymptoticFit& fit, const LambdaLattice& lattice,
                                    bool exact_model = false);

struct ConvergenceRow {
  int n = 0;
  std::vector<double> mu;  // per resolution; NaN where not computed
  double order = 0.0;      // NaN when unavailable
  double last_delta = 0.0;
  std::string status;      // "converged", "asymptotic" or "unconverged"
};

struct ConvergenceReport {
  std::vector<int> resolutions;
  std::vector<ConvergenceRow> rows;
  static constexpr double kDesignOrder = 4.0;
};

/// Requires at least three resolutions with a constant refinement ratio.
/// Indices beyond resolution/4 are not computed at that resolution.
ConvergenceReport convergence_study(const ProfileRecipe& recipe, int count,
                                    const std::vector<int>& resolutions);

}  // namespace pbeam
