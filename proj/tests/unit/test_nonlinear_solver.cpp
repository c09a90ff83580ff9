#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "pbeam/error.hpp"
#include "pbeam/nonlinear_solver.hpp"
#include "pbeam/transforms.hpp"

using namespace pbeam;

namespace {

const SpectralContext& ctx() {
  static const SpectralContext c = fixture::constant_context(4, 6);
  return c;
}

PhysicalField fine(const FourierField& u) {
  return synthesize(u, ctx().spectrum, ctx().freq(), ctx().fine_time_nodes());
}

FourierField unit(int m, int n) {
  FourierField u = ctx().zero_field();
  u(m, n) = 1.0;
  return u;
}

FourierField null_pair(double c) {
  FourierField u = ctx().zero_field();
  u(1, 1) = c;
  u(-1, 1) = c;
  return u;
}

double diff(const FourierField& a, const FourierField& b) { return (a - b).norm(); }

SolverConfig waived() {
  SolverConfig cfg;
  cfg.waive_a3 = true;
  return cfg;
}

// u* = 0.1 * cos(t) phi_1 (up to the basis normalisation) and its forcing.
FourierField manufactured_u() { return null_pair(0.1); }

}  // namespace

TEST_CASE("nonlinearity factories and validation") {
  const Nonlinearity t = tanh_nonlinearity(0.5);
  CHECK_NOTHROW(t.validate());
  CHECK(t.lower() == -0.5);
  CHECK(t.upper() == 0.5);
  CHECK_NOTHROW(arctan_nonlinearity(1.0, 2.0).validate());
  CHECK_NOTHROW(zero_nonlinearity().validate());

  const Nonlinearity down = tanh_nonlinearity(-2.0);
  CHECK(down.direction == Monotonicity::NonIncreasing);
  CHECK(down.limit_minus == 2.0);
  CHECK(down.limit_plus == -2.0);
  CHECK_NOTHROW(down.validate());

  Nonlinearity wavy = t;
  wavy.g = [](double u) { return 0.5 * std::sin(u); };
  CHECK_THROWS_AS(wavy.validate(), Error);
  Nonlinearity loose = t;
  loose.bound = 0.4;
  CHECK_THROWS_AS(loose.validate(), Error);
  Nonlinearity wrong_limits = t;
  wrong_limits.limit_plus = 0.6;
  CHECK_THROWS_AS(wrong_limits.validate(), Error);
}

TEST_CASE("epsilon schedule") {
  const auto s = SolverConfig{}.schedule();
  REQUIRE(s.size() == 17);
  CHECK(s.front() == 0.1);
  CHECK(s.back() >= 1e-6);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] < s[i - 1]);
  SolverConfig bad;
  bad.eps_ratio = 1.0;
  CHECK_THROWS_AS(bad.schedule(), Error);
  bad = SolverConfig{};
  bad.eps_end = 1.0;
  CHECK_THROWS_AS(bad.schedule(), Error);
}

TEST_CASE("density scaling") {
  const CoefficientProfile p = fixture::sine_recipe().build(SpatialGrid::composite_lobatto(32));
  PhysicalField f;
  f.period = 2.0 * std::numbers::pi;
  f.values = Eigen::MatrixXd::Constant(5, p.grid.size(), 3.0);
  const PhysicalField fh = scale_by_density(f, p);
  for (int k = 0; k < p.grid.size(); ++k) CHECK(fh.values(2, k) == doctest::Approx(3.0 / p.rho[k]));
  f.values = Eigen::MatrixXd::Zero(5, 7);
  CHECK_THROWS_AS(scale_by_density(f, p), Error);
}

TEST_CASE("forcing decomposition") {
  SUBCASE("range-only support") {
    const ForcingSpec s = decompose_forcing(fine(unit(0, 1)), ctx());
    CHECK(s.f_star_star.values.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(diff(s.f_star, s.f_hat_coeff) <= 1e-12);
    CHECK(diff(s.f_star, unit(0, 1)) <= 1e-10);
  }
  SUBCASE("null-only support") {
    const ForcingSpec s = decompose_forcing(fine(null_pair(0.5)), ctx());
    CHECK(s.f_star.norm() <= 1e-12);
    CHECK((s.f_star_star.values - s.f_hat.values).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("random forcing reconstructs") {
    std::mt19937_64 rng(5);
    const FourierField h = random_hermitian_field(6, 4, rng);
    const ForcingSpec s = decompose_forcing(fine(h), ctx());
    CHECK(project_null(s.f_star, ctx().lattice).norm() == 0.0);
    PhysicalField sum = fine(s.f_star);
    sum.values += s.f_star_star.values;
    PhysicalField gap = sum;
    gap.values -= s.f_hat.values;
    CHECK(std::sqrt(inner_product(gap, gap, ctx().profile)) <= 1e-10);
  }
}

TEST_CASE("A3 check") {
  const Nonlinearity t = tanh_nonlinearity(1.0);
  ForcingSpec s = decompose_forcing(fine(unit(0, 1)), ctx());
  A3Report r = check_a3(s, t);
  CHECK(r.ok);
  CHECK(r.worst_margin == doctest::Approx(0.9).epsilon(1e-11));

  s.f_star_star.values.setZero();
  s.f_star_star.values(3, 10) = 0.95;
  r = check_a3(s, t);
  CHECK_FALSE(r.ok);
  CHECK(r.f_max == 0.95);

  // f** = a cos(t) phi_1: its extremum on the grid is a * max|phi_1|.
  FourierField shape = ctx().zero_field();
  add_real_mode(shape, ctx().freq(), 1, 1, 1.0);
  const double peak = ctx().spectrum.phi.col(0).cwiseAbs().maxCoeff();
  const Nonlinearity g2 = tanh_nonlinearity(2.0);
  for (double a : {0.5, 2.0, 5.0}) {
    const ForcingSpec sa = decompose_forcing(fine(a * shape), ctx(), 0.2);
    const bool scan = a * peak <= 2.0 - 0.2;
    CHECK(check_a3(sa, g2).ok == scan);
    CHECK(check_a3(sa, g2).f_max == doctest::Approx(a * peak).epsilon(1e-10));
  }
}

TEST_CASE("residual examples") {
  const Nonlinearity zero = zero_nonlinearity();
  SUBCASE("zero state") {
    const ForcingSpec s = decompose_forcing(fine(ctx().zero_field()), ctx());
    CHECK(residual(ctx().zero_field(), 0.0, s, tanh_nonlinearity(1.0), ctx()).norm() == 0.0);
  }
  SUBCASE("exact linear solution") {
    FourierField f = ctx().zero_field();
    add_real_mode(f, ctx().freq(), 0, 1, 1.0);
    add_real_mode(f, ctx().freq(), 2, 1, 0.0, 0.5);
    add_real_mode(f, ctx().freq(), 3, 3, 0.2, 0.1);
    const ForcingSpec s = decompose_forcing(fine(f), ctx());
    const FourierField u = apply_L_inverse(s.f_star, ctx().lattice);
    CHECK(residual(u, 0.0, s, zero, ctx()).norm() <= 1e-10);
  }
  SUBCASE("diagonal regularized solve") {
    // Lattice from the exact eigenvalues n^4 so that lambda(0,1) = 1 exactly;
    // the computed mu_1 carries ~1e-12 roundoff even on fine grids.
    SpectralContext exact = ctx();
    const std::vector<double> mu{1.0, 16.0, 81.0, 256.0};
    exact.lattice = assemble_lattice(mu, exact.freq());
    const ForcingSpec s = decompose_forcing(fine(unit(0, 1)), exact);
    CHECK(residual((1.0 / 1.1) * unit(0, 1), 0.1, s, zero, exact).norm() <= 1e-12);
  }
}

TEST_CASE("regularized solves with a known answer") {
  const Nonlinearity zero = zero_nonlinearity();
  SUBCASE("range mode") {
    const ForcingSpec s = decompose_forcing(fine(unit(0, 1)), ctx());
    const RegularizedSolution r = solve_regularized(0.1, s, zero, waived(), ctx().zero_field(), ctx());
    CHECK(diff(r.u, (1.0 / 1.1) * unit(0, 1)) <= 1e-10);
    CHECK(std::abs(r.u(0, 1).real() - 0.9091) <= 1e-4);
    CHECK(r.residual_norm <= 1e-10);
  }
  SUBCASE("null mode balanced by epsilon alone") {
    const ForcingSpec s = decompose_forcing(fine(null_pair(0.2)), ctx());
    const RegularizedSolution r = solve_regularized(0.1, s, zero, waived(), ctx().zero_field(), ctx());
    CHECK(diff(r.u, null_pair(2.0)) <= 1e-10);
    CHECK(0.1 * r.u.norm() == doctest::Approx(null_pair(0.2).norm()).epsilon(1e-10));
  }
  SUBCASE("A3 required unless waived") {
    const ForcingSpec s = decompose_forcing(fine(unit(0, 1)), ctx());
    try {
      solve_regularized(0.1, s, zero, SolverConfig{}, ctx().zero_field(), ctx());
      FAIL("expected A3Unverified");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::A3Unverified);
    }
    CHECK_THROWS_AS(solve_regularized(0.0, s, zero, waived(), ctx().zero_field(), ctx()), Error);
  }
}

TEST_CASE("manufactured regularized solve") {
  const Nonlinearity g = tanh_nonlinearity(0.5);
  const FourierField u_star = manufactured_u();
  const ForcingSpec s = decompose_forcing(manufactured_forcing(u_star, g, ctx()), ctx());
  REQUIRE(check_a3(s, g).ok);
  SolverConfig cfg;
  const RegularizedSolution r = solve_regularized(1e-3, s, g, cfg, ctx().zero_field(), ctx());
  CHECK(r.residual_norm <= cfg.tol);

  // At eps = 0 the manufactured state solves the equation exactly.
  CHECK(residual(u_star, 0.0, s, g, ctx()).norm() <= 1e-12);
}

TEST_CASE("uniqueness from different initial guesses") {
  const Nonlinearity g = tanh_nonlinearity(0.5);
  const ForcingSpec s = decompose_forcing(manufactured_forcing(manufactured_u(), g, ctx()), ctx());
  const SolverConfig cfg;
  std::mt19937_64 rng(21);
  const RegularizedSolution a =
      solve_regularized(0.05, s, g, cfg, random_hermitian_field(6, 4, rng), ctx());
  const RegularizedSolution b =
      solve_regularized(0.05, s, g, cfg, random_hermitian_field(6, 4, rng), ctx());
  CHECK(diff(a.u, b.u) <= 10.0 * cfg.tol);
}

TEST_CASE("continuation on a linear problem") {
  FourierField f = ctx().zero_field();
  add_real_mode(f, ctx().freq(), 0, 1, 1.0);
  add_real_mode(f, ctx().freq(), 2, 1, 0.0, 0.5);
  const ForcingSpec s = decompose_forcing(fine(f), ctx());
  const SolveTrace tr = continuation_solve(s, zero_nonlinearity(), waived(), ctx());
  CHECK(tr.converged);
  CHECK(diff(tr.final_u, apply_L_inverse(s.f_star, ctx().lattice)) <= 1e-6);
  CHECK(tr.final_range_residual <= 1e-8);
  const auto& first = tr.steps.front();
  for (const auto& st : tr.steps) {
    CHECK(st.residual_norm <= 1e-10);
    CHECK(st.L_u_norm == doctest::Approx(first.L_u_norm).epsilon(0.1));
    CHECK(st.l1_norm == doctest::Approx(first.l1_norm).epsilon(0.1));
    CHECK(st.eps_times_norm <= first.eps_times_norm * (1.0 + 1e-12));
  }
}

TEST_CASE("continuation recovers a manufactured solution") {
  const Nonlinearity g = tanh_nonlinearity(0.5);
  const FourierField u_star = manufactured_u();
  const PhysicalField f = manufactured_forcing(u_star, g, ctx());
  const ForcingSpec s = decompose_forcing(f, ctx());
  const SolverConfig cfg;
  const SolveTrace tr = continuation_solve(s, g, cfg, ctx());
  CHECK(tr.converged);
  CHECK(tr.a3.ok);
  CHECK(diff(tr.final_u, u_star) <= 1e-7);
  CHECK(tr.final_null_balance <= cfg.final_tol);
  CHECK(tr.final_range_residual <= cfg.final_tol);
  CHECK(tr.steps.size() == cfg.schedule().size());
  CHECK(tr.steps.back().eps_times_norm < 1e-5 * tr.steps.front().eps_times_norm * 1e2);

  const auto& first = tr.steps.front();
  for (const auto& st : tr.steps) {
    CHECK(st.residual_norm <= cfg.tol);
    CHECK(st.eps_times_norm <= 10.0 * first.eps_times_norm);
    CHECK(st.L_u_norm <= 10.0 * std::max(first.L_u_norm, 1e-8));
    CHECK(st.l1_norm <= 10.0 * first.l1_norm);
    CHECK(st.sup_norm <= 10.0 * first.sup_norm);
  }
  // The constant profile has rho = 1, so f and f_hat coincide.
  CHECK(weak_residual(tr.final_u, f, g, ctx()) <= 1e-6);
}

TEST_CASE("non-increasing nonlinearity via sign flip") {
  const Nonlinearity g = tanh_nonlinearity(-0.5);
  const FourierField u_star = manufactured_u();
  const ForcingSpec s = decompose_forcing(manufactured_forcing(u_star, g, ctx()), ctx());
  const SolveTrace tr = continuation_solve(s, g, SolverConfig{}, ctx());
  CHECK(tr.converged);
  CHECK(diff(tr.final_u, u_star) <= 1e-7);
}

TEST_CASE("A3 violation terminates with a diagnostic") {
  const ForcingSpec s = decompose_forcing(fine(null_pair(3.0)), ctx());
  const Nonlinearity g = tanh_nonlinearity(1.0);
  CHECK_FALSE(check_a3(s, g).ok);
  try {
    continuation_solve(s, g, SolverConfig{}, ctx());
    FAIL("expected A3Unverified");
  } catch (const SolveFailure& e) {
    CHECK(e.code() == ErrorCode::A3Unverified);
  }

  SolverConfig cfg = waived();
  cfg.max_iters = 40;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    continuation_solve(s, g, cfg, ctx());
    FAIL("expected a solve failure");
  } catch (const SolveFailure& e) {
    const bool expected =
        e.code() == ErrorCode::MonitorBlowup || e.code() == ErrorCode::NonConvergence;
    CHECK(expected);
    CHECK_FALSE(e.trace().diagnostic.empty());
    CHECK_FALSE(e.trace().converged);
  }
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(30));
}

TEST_CASE("weak residual") {
  const Nonlinearity zero = zero_nonlinearity();
  const PhysicalField none = fine(ctx().zero_field());
  CHECK(weak_residual(ctx().zero_field(), none, tanh_nonlinearity(1.0), ctx()) == 0.0);

  FourierField f = ctx().zero_field();
  add_real_mode(f, ctx().freq(), 0, 2, 0.3);
  add_real_mode(f, ctx().freq(), 5, 4, -0.2, 0.7);
  const PhysicalField fp = fine(f);
  const ForcingSpec s = decompose_forcing(fp, ctx());
  const FourierField u = apply_L_inverse(s.f_star, ctx().lattice);
  CHECK(weak_residual(u, fp, zero, ctx()) <= 1e-8);
  CHECK(weak_residual(ctx().zero_field(), fp, zero, ctx()) > 0.1);
}

TEST_CASE("discrete monotonicity of g") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 2.0);
  PhysicalField u = fine(ctx().zero_field());
  PhysicalField v = u;
  for (const Nonlinearity& g : {tanh_nonlinearity(1.0), arctan_nonlinearity(0.3, 4.0)}) {
    for (int trial = 0; trial < 20; ++trial) {
      for (Eigen::Index i = 0; i < u.values.size(); ++i) {
        u.values.data()[i] = normal(rng);
        v.values.data()[i] = normal(rng);
      }
      PhysicalField dg = u;
      dg.values = u.values.unaryExpr(g.g) - v.values.unaryExpr(g.g);
      PhysicalField du = u;
      du.values -= v.values;
      CHECK(inner_product(dg, du, ctx().profile) >= -1e-10);
    }
  }
}
