#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "pbeam/eigensolver.hpp"
#include "pbeam/error.hpp"

using namespace pbeam;

TEST_CASE("constant profile reproduces the pinned-pinned beam") {
  const auto profile = fixture::constant_profile();
  const BeamSpectrum s = solve_eigenproblem(profile, 3);
  REQUIRE(s.count() == 3);
  const double expected[] = {1.0, 16.0, 81.0};
  for (int n = 1; n <= 3; ++n) {
    CHECK(std::abs(s.mu[n - 1] - expected[n - 1]) <= 1e-6 * expected[n - 1]);
    double worst = 0.0;
    for (int k = 0; k < s.grid.size(); ++k) {
      const double x = s.grid.nodes()[k];
      worst = std::max(worst, std::abs(s.phi(k, n - 1) - std::sqrt(2.0 / std::numbers::pi) *
                                                               std::sin(n * x)));
    }
    CHECK(worst <= 1e-6);
    CHECK(end_slope_left(s, n) > 0.0);
  }
}

TEST_CASE("eigenfunctions are rho-orthonormal and vanish at the ends") {
  for (const auto& profile :
       {fixture::constant_profile(), fixture::sine_recipe().build(SpatialGrid::composite_lobatto(256))}) {
    const BeamSpectrum s = solve_eigenproblem(profile, 12);
    CHECK(check_orthonormality(s) <= 1e-8);
    for (int n = 1; n <= s.count(); ++n) {
      CHECK(std::abs(s.phi(0, n - 1)) <= 1e-8);
      CHECK(std::abs(s.phi(s.grid.size() - 1, n - 1)) <= 1e-8);
      CHECK(end_slope_left(s, n) > 0.0);
    }
    for (int n = 2; n <= s.count(); ++n) CHECK(s.mu[n - 1] > s.mu[n - 2]);
  }
}

TEST_CASE("check_orthonormality detects scaling and ignores permutation") {
  BeamSpectrum s = solve_eigenproblem(fixture::constant_profile(64), 4);
  BeamSpectrum scaled = s;
  scaled.phi.col(1) *= 2.0;
  CHECK(check_orthonormality(scaled) >= 3.0 - 1e-8);
  BeamSpectrum swapped = s;
  swapped.phi.col(0).swap(swapped.phi.col(2));
  CHECK(check_orthonormality(swapped) <= 1e-8);
}

TEST_CASE("bending energy matches mu including the spring terms") {
  const auto profile = fixture::sine_recipe().build(SpatialGrid::composite_lobatto(256));
  const BeamSpectrum s = solve_eigenproblem(profile, 10);
  for (int n = 1; n <= s.count(); ++n) {
    CHECK(std::abs(bending_energy(s, profile, n) - s.mu[n - 1]) / s.mu[n - 1] <= 1e-6);
  }
}

TEST_CASE("bending energy of the constant profile matches the analytic value") {
  // int (phi_n'')^2 = n^4 for phi_n = sqrt(2/pi) sin(nx); no spring terms.
  const auto profile = fixture::constant_profile();
  const BeamSpectrum s = solve_eigenproblem(profile, 6);
  for (int n = 1; n <= 6; ++n) {
    const double n4 = std::pow(n, 4);
    CHECK(std::abs(bending_energy(s, profile, n) - n4) <= 1e-6 * n4);
  }
}

TEST_CASE("eigenfunctions stay below 1 when rho > 1") {
  const auto profile = fixture::sine_recipe().build(SpatialGrid::composite_lobatto(256));
  const BeamSpectrum s = solve_eigenproblem(profile, 12);
  CHECK(s.phi.cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("ordering is stable under refinement") {
  const auto recipe = fixture::sine_recipe();
  const BeamSpectrum coarse = solve_eigenproblem(recipe.build(SpatialGrid::composite_lobatto(64)), 12);
  const BeamSpectrum fine = solve_eigenproblem(recipe.build(SpatialGrid::composite_lobatto(128)), 12);
  for (int n = 1; n <= 12; ++n) {
    CHECK(std::abs(coarse.mu[n - 1] - fine.mu[n - 1]) <= 1e-3 * fine.mu[n - 1]);
    // Cell boundaries of the coarse grid are cell boundaries of the fine grid.
    double worst = 0.0;
    for (int e = 0; e <= 64; ++e) {
      worst = std::max(worst, std::abs(coarse.phi(4 * e, n - 1) - fine.phi(8 * e, n - 1)));
    }
    // A swapped or sign-flipped mode would differ at O(1).
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("resolution and count preconditions") {
  const auto profile = fixture::constant_profile(16);
  CHECK_NOTHROW(solve_eigenproblem(profile, 4));
  try {
    solve_eigenproblem(profile, 5);
    FAIL("expected DiscretizationTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DiscretizationTooCoarse);
  }
  CHECK_THROWS_AS(solve_eigenproblem(profile, 0), Error);
}

TEST_CASE("fit recovers an injected asymptotic model exactly") {
  std::vector<double> mu;
  for (int n = 1; n <= 20; ++n) mu.push_back(std::pow(n, 4) + 2.0 * n * n * 0.3 + 1.0);
  const AsymptoticFit fit = fit_asymptotics(mu, 5);
  CHECK(std::abs(fit.a - 0.3) <= 1e-10);
  for (int n = 1; n <= 20; ++n) CHECK(std::abs(fit.b[n - 1] - 1.0) <= 1e-10);
  CHECK(fit.fit_residual <= 1e-9);
}

TEST_CASE("fit of the constant spectrum gives a = 0") {
  const BeamSpectrum s = solve_eigenproblem(fixture::constant_profile(), 12);
  const AsymptoticFit fit = fit_asymptotics(s, 5);
  CHECK(std::abs(fit.a) <= 1e-4);
  double discretization = 0.0;
  double worst_b = 0.0;
  for (int n = 5; n <= 12; ++n) {
    discretization = std::max(discretization, std::abs(s.mu[n - 1] - std::pow(n, 4)));
    worst_b = std::max(worst_b, std::abs(fit.b[n - 1]));
  }
  CHECK(worst_b <= discretization);
}

TEST_CASE("fit needs five points") {
  std::vector<double> mu{1, 16, 81, 256, 625, 1296};
  CHECK_NOTHROW(fit_asymptotics(mu, 2));
  try {
    fit_asymptotics(mu, 3);
    FAIL("expected InsufficientModes");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientModes);
  }
}

TEST_CASE("calibrated exp-linear profile has bounded b_n") {
  const ProfileRecipe recipe{exp_linear_preset(0.0, 0.05), 1.1, true, true};
  const BeamSpectrum s = solve_eigenproblem(recipe.build(SpatialGrid::composite_lobatto(1024)), 20);
  const AsymptoticFit fit = fit_asymptotics(s, 5);
  double worst = 0.0;
  for (int n = 5; n <= 20; ++n) worst = std::max(worst, std::abs(fit.b[n - 1]));
  CHECK(worst <= 0.01);
  CHECK(std::isfinite(fit.a));
}

TEST_CASE("variable-profile b_n show no growth over [5, 20]") {
  const BeamSpectrum s =
      solve_eigenproblem(fixture::sine_recipe().build(SpatialGrid::composite_lobatto(1024)), 20);
  const AsymptoticFit fit = fit_asymptotics(s, 5);
  CHECK(fit.abs_b_slope <= 0.05 * fit.mean_abs_b);
}
