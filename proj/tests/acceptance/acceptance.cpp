// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 only if
// all pass. Oracles come from tests/unit/oracles.hpp and share no code with
// the library.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pbeam/diagnostics.hpp"
#include "pbeam/eigensolver.hpp"
#include "pbeam/nonlinear_solver.hpp"
#include "pbeam/spectral_operator.hpp"
#include "pbeam/transforms.hpp"

using namespace pbeam;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> quartic(int modes) {
  std::vector<double> mu;
  for (int n = 1; n <= modes; ++n) mu.push_back(std::pow(static_cast<double>(n), 4));
  return mu;
}

FourierField unit(const LambdaLattice& lat, int m, int n) {
  FourierField u(lat.m_max(), lat.modes());
  u(m, n) = 1.0;
  return u;
}

Verdict ac1() {
  const CoefficientProfile p = fixture::constant_profile(fixture::kReferenceResolution);
  const BeamSpectrum s = solve_eigenproblem(p, 10);
  double worst = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const double exact = std::pow(static_cast<double>(n), 4);
    worst = std::max(worst, std::abs(s.mu[n - 1] - exact) / exact);
  }
  const ProfileRecipe constant{constant_preset(), 1.0, false, false};
  const ConvergenceReport conv = convergence_study(constant, 4, {32, 64, 128});
  const double order = conv.rows[0].order;
  const bool ok = worst <= 1e-6 && std::abs(order - ConvergenceReport::kDesignOrder) <= 0.3;
  return {ok, fmt("max |mu_n - n^4|/n^4 (n<=10, %d elements) = %.3e <= 1e-6; order(mu_1; 32/64/128) "
                  "= %.3f vs 4 +- 0.3",
                  fixture::kReferenceResolution, worst, order)};
}

Verdict ac2() {
  const SpectralContext c = fixture::constant_context(4, 16);
  std::set<std::pair<int, int>> found;
  for (int n = 1; n <= 4; ++n) {
    for (int m = -16; m <= 16; ++m) {
      if (c.lattice.is_null(m, n)) found.insert({m, n});
    }
  }
  const auto expected = oracle::null_modes(4, 16);
  const oracle::Gaps g = oracle::gaps(4, 16);
  const bool oracle_ok = expected.size() == 8 && g.delta == oracle::Rational(1) &&
                         g.gamma == oracle::Rational(3);
  const double dd = std::abs(c.lattice.delta - oracle::to_double(g.delta));
  const double dg = std::abs(c.lattice.gamma - oracle::to_double(g.gamma));
  const bool ok = oracle_ok && found == expected && dd <= 1e-8 && dg <= 1e-8;
  return {ok, fmt("null modes %zu/%zu match enumeration; delta = %.12f; gamma = %.12f", found.size(),
                  expected.size(), c.lattice.delta, c.lattice.gamma)};
}

Verdict ac3() {
  // 512 elements put gamma within 3e-12 of 3, so the witness also matches -1/3 to 1e-12.
  const SpectralContext c = fixture::constant_context(4, 16, 1, 1, 512);
  InverseBoundsReport rep;
  try {
    rep = verify_inverse_bounds(c.lattice, c.spectrum, 100, 2024);
  } catch (const Error& e) {
    return {false, std::string("bound violation: ") + e.what()};
  }
  const double w_norm = inverse_bound_ratios(unit(c.lattice, 0, 1), c.lattice, c.spectrum).norm;
  FourierField h21 = unit(c.lattice, 2, 1);
  h21(-2, 1) = 1.0;
  const double w_coer = inverse_bound_ratios(h21, c.lattice, c.spectrum).coercivity;
  const bool ok = rep.violations == 0 && rep.trials == 100 && std::abs(w_norm - 1.0) <= 1e-12 &&
                  std::abs(w_coer + 1.0 / c.lattice.gamma) <= 1e-12 &&
                  std::abs(w_coer + 1.0 / 3.0) <= 1e-12;
  return {ok, fmt("100 trials, %d violations (worst norm %.3f, coercivity %.4f >= %.4f, sup %.3f); "
                  "witness (0,1) = %.15f, (2,1) = %.15f",
                  rep.violations, rep.worst_norm, rep.worst_coercivity, rep.coercivity_floor,
                  rep.worst_sup, w_norm, w_coer)};
}

Verdict ac4() {
  const oracle::Rational exact = oracle::tail_sum(1, 2);
  const SpectralContext small = fixture::constant_context(1, 2);
  const double computed = tail_sum(small.lattice).sum;
  bool ok = exact == oracle::Rational(11, 9) &&
            std::abs(computed - oracle::to_double(exact)) <= 1e-9;

  std::vector<double> sums;
  for (int n = 1; n <= 64; n *= 2) {
    const LambdaLattice lat = assemble_lattice(quartic(n), FrequencySpec::make(1, 1, 2 * n), 1e-9);
    sums.push_back(tail_sum(lat).sum);
    long double ref = 0.0L;
    for (int k = 1; k <= n; ++k) {
      for (int m = -2 * n; m <= 2 * n; ++m) {
        const std::int64_t l = oracle::scaled_lambda(m, k, 1, 1);
        if (l != 0) ref += 1.0L / (static_cast<long double>(l) * l);
      }
    }
    ok = ok && std::abs(sums.back() - static_cast<double>(ref)) <= 1e-13 * sums.back();
  }
  for (std::size_t i = 1; i < sums.size(); ++i) ok = ok && sums[i] >= sums[i - 1];
  for (std::size_t i = 2; i < sums.size(); ++i) {
    ok = ok && sums[i] - sums[i - 1] <= sums[i - 1] - sums[i - 2];
  }
  return {ok, fmt("sum 1/lambda^2 (n<=1,|m|<=2) = 11/9 exactly; computed %.12f; doubling truncations "
                  "%.6f -> %.6f, increments shrinking",
                  computed, sums.front(), sums.back())};
}

Verdict ac5() {
  const SpectralContext c = fixture::constant_context(6, 10);
  std::mt19937_64 rng(5);
  double worst_coeff = 0.0, worst_parseval = 0.0;
  for (int t = 0; t < 50; ++t) {
    const FourierField u = random_hermitian_field(10, 6, rng);
    const PhysicalField v = synthesize(u, c.spectrum, c.freq());
    const FourierField back = analyze(v, c.spectrum, c.freq());
    worst_coeff = std::max(worst_coeff, (back - u).coeff().cwiseAbs().maxCoeff());
    const double e = u.coeff().squaredNorm();
    worst_parseval = std::max(worst_parseval, std::abs(inner_product(v, v, c.profile) - e) / e);
  }
  const bool ok = worst_coeff <= 1e-10 && worst_parseval <= 1e-8;
  return {ok, fmt("50 fields: max coefficient error %.3e <= 1e-10; Parseval relative %.3e <= 1e-8",
                  worst_coeff, worst_parseval)};
}

Verdict ac6() {
  const SpectralContext c = fixture::constant_context(4, 8);
  const Nonlinearity g = tanh_nonlinearity(0.5);
  FourierField u_star = c.zero_field();
  add_real_mode(u_star, c.freq(), 1, 1, 0.1);
  add_real_mode(u_star, c.freq(), 0, 2, 0.05);
  add_real_mode(u_star, c.freq(), 3, 1, 0.0, 0.02);
  add_real_mode(u_star, c.freq(), 2, 3, 0.01, -0.01);
  const PhysicalField f = manufactured_forcing(u_star, g, c);
  const ForcingSpec spec = decompose_forcing(f, c);
  SolveTrace tr;
  try {
    tr = continuation_solve(spec, g, SolverConfig{}, c);
  } catch (const SolveFailure& e) {
    return {false, std::string("solve failed: ") + e.what()};
  }
  const double err = (tr.final_u - u_star).norm();
  const double weak = weak_residual(tr.final_u, f, g, c);
  const auto& first = tr.steps.front();
  const auto& last = tr.steps.back();
  double lu_max = 0.0;
  bool eps_decreasing = true;
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    lu_max = std::max(lu_max, tr.steps[i].L_u_norm);
    if (i > 0) eps_decreasing = eps_decreasing && tr.steps[i].eps_times_norm < tr.steps[i - 1].eps_times_norm;
  }
  const bool ok = tr.converged && err <= 1e-7 && weak <= 1e-6 && eps_decreasing &&
                  last.eps_times_norm <= 1e-4 * first.eps_times_norm &&
                  lu_max <= 10.0 * first.L_u_norm;
  return {ok, fmt("||u - u*|| = %.3e <= 1e-7; weak residual %.3e <= 1e-6; eps||u|| %.2e -> %.2e; "
                  "max ||Lu|| / first = %.3f; %zu steps",
                  err, weak, first.eps_times_norm, last.eps_times_norm, lu_max / first.L_u_norm,
                  tr.steps.size())};
}

Verdict ac7() {
  const SpectralContext c = fixture::constant_context(4, 8, 1, 1, 128);
  FourierField h = c.zero_field();
  add_real_mode(h, c.freq(), 1, 1, 3.0);
  const ForcingSpec spec =
      decompose_forcing(synthesize(h, c.spectrum, c.freq(), c.fine_time_nodes()), c);
  SolverConfig cfg;
  cfg.waive_a3 = true;
  cfg.max_iters = 40;
  try {
    continuation_solve(spec, tanh_nonlinearity(1.0), cfg, c);
    return {false, "solve reported success on an A3-violating forcing"};
  } catch (const SolveFailure& e) {
    const bool ok = (e.code() == ErrorCode::MonitorBlowup || e.code() == ErrorCode::NonConvergence) &&
                    !e.trace().diagnostic.empty();
    return {ok, fmt("%s after %zu steps: %s", std::string(to_string(e.code())).c_str(),
                    e.trace().steps.size(), e.trace().diagnostic.c_str())};
  }
}

Verdict ac8() {
  const CoefficientProfile p = fixture::sine_recipe().build(SpatialGrid::composite_lobatto(1024));
  const BeamSpectrum s = solve_eigenproblem(p, 20);
  const AsymptoticFit fit = fit_asymptotics(s, 5, 20);
  const bool ok = fit.abs_b_slope <= 0.05 * fit.mean_abs_b;
  return {ok, fmt("sine-perturbed preset, 1024 elements: a = %.6f, slope |b_n| (n in [5,20]) = %.3e "
                  "<= 0.05 * mean|b_n| = %.3e",
                  fit.a, fit.abs_b_slope, 0.05 * fit.mean_abs_b)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    double budget_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"AC1", 10.0, ac1}, {"AC2", 1.0, ac2},   {"AC3", 5.0, ac3},   {"AC4", 1.0, ac4},
      {"AC5", 5.0, ac5},  {"AC6", 60.0, ac6},  {"AC7", 60.0, ac7},  {"AC8", 30.0, ac8},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = v.pass && secs <= c.budget_s;
    failures += pass ? 0 : 1;
    std::printf("%s %s  %s [%.2f s / %.0f s]\n", c.id, pass ? "PASS" : "FAIL", v.detail.c_str(), secs,
                c.budget_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
