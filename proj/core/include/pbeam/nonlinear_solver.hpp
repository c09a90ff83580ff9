#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pbeam/coefficients.hpp"
#include "pbeam/eigensolver.hpp"
#include "pbeam/error.hpp"
#include "pbeam/field.hpp"
#include "pbeam/spectral_operator.hpp"

namespace pbeam {

enum class Monotonicity { NonDecreasing, NonIncreasing };

/// Bounded monotone scalar nonlinearity g with its limits at -inf and +inf.
struct Nonlinearity {
  std::string name;
  std::function<double(double)> g;
  Monotonicity direction = Monotonicity::NonDecreasing;
  double bound = 1.0;  // M with |g| < M
  double limit_minus = 0.0;
  double limit_plus = 0.0;

  double lower() const { return std::min(limit_minus, limit_plus); }
  double upper() const { return std::max(limit_minus, limit_plus); }

  /// Probes 10^4 points on [-1e4, 1e4]: ordering, |g| < M and the tail
  /// samples against the stated limits (within 1e-3). Throws InvalidArgument.
  void validate() const;
};

Nonlinearity zero_nonlinearity();
/// amplitude * tanh(slope * u).
Nonlinearity tanh_nonlinearity(double amplitude, double slope = 1.0);
/// amplitude * atan(slope * u).
Nonlinearity arctan_nonlinearity(double amplitude, double slope = 1.0);

/// The objects every solver operation works on. The fine time grid
/// oversamples the truncation by 2x for the pseudo-spectral nonlinear term.
struct SpectralContext {
  CoefficientProfile profile;
  BeamSpectrum spectrum;
  LambdaLattice lattice;

  const FrequencySpec& freq() const noexcept { return lattice.freq; }
  int fine_time_nodes() const noexcept { return 4 * lattice.m_max() + 4; }
  FourierField zero_field() const { return FourierField(lattice.m_max(), lattice.modes()); }
};

/// Scaled forcing f_hat = f / rho split as f_hat = f* + f** with f* the
/// range projection and f** the null projection.
struct ForcingSpec {
  PhysicalField f_hat;
  FourierField f_hat_coeff;
  FourierField f_star;
  FourierField f_null;
  PhysicalField f_star_star;
  /// Margin in min g(+-inf) + margin <= f** <= max g(+-inf) - margin.
  double margin = 0.1;
};

/// f / rho, pointwise.
PhysicalField scale_by_density(const PhysicalField& f, const CoefficientProfile& profile);

ForcingSpec decompose_forcing(const PhysicalField& f_hat, const SpectralContext& ctx,
                              double margin = 0.1);

struct A3Report {
  bool ok = false;
  /// min over grid points of the distance from f** to the shrunk interval
  /// edges; negative when violated.
  double worst_margin = 0.0;
  double f_min = 0.0;
  double f_max = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

A3Report check_a3(const ForcingSpec& spec, const Nonlinearity& g);

/// F(u) = L u + eps u + P g(S u) - P f_hat on the truncation.
FourierField residual(const FourierField& u, double eps, const ForcingSpec& spec,
                      const Nonlinearity& g, const SpectralContext& ctx);

struct SolverConfig {
  /// Coefficient-norm tolerance on F(u) for each regularized solve.
  double tol = 1e-10;
  int max_iters = 60;
  double eps_start = 1e-1;
  double eps_end = 1e-6;
  double eps_ratio = 0.5;
  /// Consecutive-solution distance declaring the eps -> 0 limit reached.
  double limit_tol = 1e-5;
  /// Tolerance on the eps = 0 range residual and null balance.
  double final_tol = 1e-8;
  bool waive_a3 = false;
  /// Finish with Newton on the eps = 0 equation from the last u_eps.
  bool limit_polish = true;
  double blowup_factor = 10.0;

  std::vector<double> schedule() const;
};

struct SolveStep {
  double eps = 0.0;
  FourierField u;
  double residual_norm = 0.0;
  double eps_times_norm = 0.0;
  double L_u_norm = 0.0;
  double l1_norm = 0.0;
  double sup_norm = 0.0;
  int iterations = 0;
};

struct SolveTrace {
  std::vector<SolveStep> steps;
  bool converged = false;
  bool polished = false;
  FourierField final_u;
  /// ||P_R(L u + g(u) - f_hat)|| and ||P_N(g(u) - f_hat)|| at eps = 0.
  double final_range_residual = 0.0;
  double final_null_balance = 0.0;
  A3Report a3;
  std::string diagnostic;
};

/// Failure of a solve; carries the trace accumulated before the failure.
class SolveFailure : public Error {
 public:
  SolveFailure(ErrorCode code, const std::string& what, SolveTrace trace)
      : Error(code, what), trace_(std::move(trace)) {}
  const SolveTrace& trace() const noexcept { return trace_; }

 private:
  SolveTrace trace_;
};

struct RegularizedSolution {
  FourierField u;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Newton with step halving and a damped Picard fallback on
/// L u + eps u + g(u) = f_hat. Throws NonConvergence or A3Unverified.
RegularizedSolution solve_regularized(double eps, const ForcingSpec& spec, const Nonlinearity& g,
                                      const SolverConfig& config, const FourierField& u0,
                                      const SpectralContext& ctx);

/// Warm-started solves along config.schedule() with monitored bounds.
/// Throws SolveFailure (MonitorBlowup, NonConvergence, A3Unverified).
SolveTrace continuation_solve(const ForcingSpec& spec, const Nonlinearity& g,
                              const SolverConfig& config, const SpectralContext& ctx);

/// max over basis test functions psi_mn of
/// |lambda_mn <u, psi>_rho + <g(u), psi>_rho - int f psi-bar|,
/// with f the unscaled forcing (f = rho f_hat).
double weak_residual(const FourierField& u, const PhysicalField& f, const Nonlinearity& g,
                     const SpectralContext& ctx);

/// f_hat = L u* + g(u*) sampled on the fine time grid, so that u* is the
/// exact solution of the truncated problem.
PhysicalField manufactured_forcing(const FourierField& u_star, const Nonlinearity& g,
                                   const SpectralContext& ctx);

}  // namespace pbeam
