#include "pbeam/coefficients.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "pbeam/error.hpp"

namespace pbeam {

namespace {

constexpr double kShiftBracket = 10.0;

// int (rho/eta)^{1/4} e^{-c x} dx: the normalization integral after adding c
// to alpha. Strictly decreasing in c.
double shifted_integral(const CoefficientProfile& p, double c) {
  const auto x = p.grid.nodes();
  const auto w = p.grid.weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    acc += w[k] * std::pow(p.rho[k] / p.eta[k], 0.25) * std::exp(-c * x[k]);
  return acc;
}

void check_strict(const CoefficientProfile& p) {
  for (std::size_t k = 0; k < p.rho.size(); ++k) {
    if (!(p.rho[k] > 1.0))
      throw Error(ErrorCode::A2Violation,
                  "rho must exceed 1 everywhere; rho(" +
                      std::to_string(p.grid.nodes()[k]) + ") = " +
                      std::to_string(p.rho[k]));
  }
  const double deviation = normalization_integral(p) - std::numbers::pi;
  if (std::abs(deviation) > kNormalizationTolerance)
    throw Error(ErrorCode::A2Violation,
                "int (rho/eta)^{1/4} dx deviates from pi by " +
                    std::to_string(deviation) + " and calibration was not requested");
}

}  // namespace

std::string CoefficientProfile::id() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "profile[nodes=%d,rho0=%.6g,a+b(0)=%.6g,a+b(pi)=%.6g,c=%.6g]",
                grid.size(), rho0, spring_left(), spring_right(), calibration_shift);
  return buf;
}

CoefficientProfile build_profiles(std::span<const double> alpha,
                                  std::span<const double> beta, double rho0,
                                  const SpatialGrid& grid, bool strict_a2,
                                  bool calibrate) {
  if (!(rho0 > 0.0))
    throw Error(ErrorCode::NonPositiveDensity,
                "rho0 must be positive, got " + std::to_string(rho0));
  const int n = grid.size();
  if (static_cast<int>(alpha.size()) != n || static_cast<int>(beta.size()) != n)
    throw Error(ErrorCode::ShapeMismatch,
                "alpha and beta need one sample per grid node (" + std::to_string(n) + ")");

  CoefficientProfile p{.grid = grid,
                       .alpha = {alpha.begin(), alpha.end()},
                       .beta = {beta.begin(), beta.end()},
                       .rho0 = rho0,
                       .rho = {},
                       .eta = {},
                       .strict_a2 = strict_a2};
  const auto int_alpha = grid.cumulative_integral(p.alpha);
  const auto int_beta = grid.cumulative_integral(p.beta);
  p.rho.resize(n);
  p.eta.resize(n);
  for (int k = 0; k < n; ++k) {
    p.rho[k] = rho0 * std::exp(4.0 * int_beta[k]);
    p.eta[k] = std::exp(4.0 * int_alpha[k]);
    if (!(p.rho[k] > 0.0) || !(p.eta[k] > 0.0) || !std::isfinite(p.rho[k]) ||
        !std::isfinite(p.eta[k]))
      throw Error(ErrorCode::NonPositiveDensity,
                  "rho/eta not finite and positive at node " + std::to_string(k));
  }

  if (calibrate) p = calibrate_normalization(p);
  if (strict_a2) check_strict(p);
  return p;
}

double normalization_integral(const CoefficientProfile& profile) {
  return shifted_integral(profile, 0.0);
}

CoefficientProfile calibrate_normalization(const CoefficientProfile& profile) {
  constexpr double target = std::numbers::pi;
  CoefficientProfile out = profile;
  out.calibration_shift = 0.0;
  if (std::abs(shifted_integral(profile, 0.0) - target) <= 1e-14 * target) return out;

  double lo = -kShiftBracket;
  double hi = kShiftBracket;
  if (shifted_integral(profile, lo) < target || shifted_integral(profile, hi) > target)
    throw Error(ErrorCode::CalibrationFailed,
                "no alpha shift in [-10, 10] brackets int (rho/eta)^{1/4} dx = pi");
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (shifted_integral(profile, mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  const double c = 0.5 * (lo + hi);

  const auto x = profile.grid.nodes();
  for (std::size_t k = 0; k < x.size(); ++k) {
    out.alpha[k] += c;
    out.eta[k] *= std::exp(4.0 * c * x[k]);
  }
  out.calibration_shift = c;
  if (std::abs(normalization_integral(out) - target) > kNormalizationTolerance)
    throw Error(ErrorCode::CalibrationFailed, "bisection did not reach the pi normalization");
  return out;
}

std::vector<double> sample(const std::function<double(double)>& f, const SpatialGrid& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid.nodes()) out.push_back(f(x));
  return out;
}

CoefficientFunctions constant_preset() {
  return {[](double) { return 0.0; }, [](double) { return 0.0; }};
}

CoefficientFunctions exp_linear_preset(double alpha, double beta) {
  return {[alpha](double) { return alpha; }, [beta](double) { return beta; }};
}

double SineTerm::operator()(double x) const {
  return mean + amplitude * std::sin(frequency * x + phase);
}

CoefficientFunctions sine_perturbed_preset(SineTerm alpha, SineTerm beta) {
  return {alpha, beta};
}

CoefficientProfile ProfileRecipe::build(const SpatialGrid& grid) const {
  return build_profiles(sample(functions.alpha, grid), sample(functions.beta, grid), rho0,
                        grid, strict_a2, calibrate);
}

}  // namespace pbeam
