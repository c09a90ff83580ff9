#include "pbeam/nonlinear_solver.hpp"

#include <Eigen/QR>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pbeam/transforms.hpp"

namespace pbeam {

void Nonlinearity::validate() const {
  if (!g) throw Error(ErrorCode::InvalidArgument, "nonlinearity '" + name + "' has no function");
  if (!(bound > 0.0)) throw Error(ErrorCode::InvalidArgument, "bound M must be positive");
  constexpr int kProbe = 10000;
  constexpr double kRange = 1e4;
  const double sign = direction == Monotonicity::NonDecreasing ? 1.0 : -1.0;
  double prev = g(-kRange);
  for (int i = 0; i < kProbe; ++i) {
    const double u = -kRange + 2.0 * kRange * i / (kProbe - 1);
    const double v = g(u);
    if (!std::isfinite(v) || std::abs(v) >= bound) {
      throw Error(ErrorCode::InvalidArgument,
                  name + ": |g(" + std::to_string(u) + ")| not below M = " + std::to_string(bound));
    }
    if (sign * (v - prev) < -1e-14 * (1.0 + std::abs(v))) {
      throw Error(ErrorCode::InvalidArgument, name + ": not monotone near u = " + std::to_string(u));
    }
    prev = v;
  }
  if (std::abs(g(-kRange) - limit_minus) > 1e-3 || std::abs(g(kRange) - limit_plus) > 1e-3) {
    throw Error(ErrorCode::InvalidArgument, name + ": tail samples disagree with stated limits");
  }
}

Nonlinearity zero_nonlinearity() {
  return {"zero", [](double) { return 0.0; }, Monotonicity::NonDecreasing, 1.0, 0.0, 0.0};
}

Nonlinearity tanh_nonlinearity(double amplitude, double slope) {
  const double a = std::abs(amplitude);
  const bool up = amplitude * slope >= 0.0;
  return {"tanh",
          [amplitude, slope](double u) { return amplitude * std::tanh(slope * u); },
          up ? Monotonicity::NonDecreasing : Monotonicity::NonIncreasing,
          a > 0.0 ? 1.5 * a : 1.0,
          up ? -a : a,
          up ? a : -a};
}

Nonlinearity arctan_nonlinearity(double amplitude, double slope) {
  const double a = std::abs(amplitude) * std::numbers::pi / 2.0;
  const bool up = amplitude * slope >= 0.0;
  return {"arctan",
          [amplitude, slope](double u) { return amplitude * std::atan(slope * u); },
          up ? Monotonicity::NonDecreasing : Monotonicity::NonIncreasing,
          a > 0.0 ? 1.5 * a : 1.0,
          up ? -a : a,
          up ? a : -a};
}

namespace {

PhysicalField apply_pointwise(const PhysicalField& v, const std::function<double(double)>& f) {
  PhysicalField out = v;
  out.values = v.values.unaryExpr(f);
  return out;
}

PhysicalField fine_field(const FourierField& u, const SpectralContext& ctx) {
  return synthesize(u, ctx.spectrum, ctx.freq(), ctx.fine_time_nodes());
}

FourierField nonlinear_term(const PhysicalField& v, const Nonlinearity& g,
                            const SpectralContext& ctx) {
  return analyze(apply_pointwise(v, g.g), ctx.spectrum, ctx.freq());
}

FourierField residual_from(const FourierField& u, const PhysicalField& v, double eps,
                           const ForcingSpec& spec, const Nonlinearity& g,
                           const SpectralContext& ctx) {
  FourierField f = apply_L(u, ctx.lattice);
  f.coeff() += eps * u.coeff();
  f += nonlinear_term(v, g, ctx);
  f -= spec.f_hat_coeff;
  return f;
}

// Galerkin Jacobian of u -> P g(S u):
//   J[(m,n),(m',n')] = sum_k rho_k w_k phi_n phi_n' G_{m-m'}(x_k),
// G_d the discrete Fourier coefficients of g'(S u) on the fine time grid.
Eigen::MatrixXcd jacobian(const PhysicalField& v, double eps, const Nonlinearity& g,
                          const SpectralContext& ctx) {
  const int mm = ctx.lattice.m_max();
  const int width = 2 * mm + 1;
  const int modes = ctx.lattice.modes();
  const int nt = v.time_nodes();
  const int nodes = v.space_nodes();

  const Eigen::MatrixXd dg = v.values.unaryExpr([&g](double x) {
    const double h = 1e-6 * (1.0 + std::abs(x));
    return (g.g(x + h) - g.g(x - h)) / (2.0 * h);
  });

  const int span = 4 * mm + 1;  // d = m - m' in [-2 m_max, 2 m_max]
  Eigen::MatrixXcd basis(span, nt);
  for (int d = -2 * mm; d <= 2 * mm; ++d) {
    for (int j = 0; j < nt; ++j) {
      const long long r = ((static_cast<long long>(d) * j) % nt + nt) % nt;
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(r) / nt;
      basis(d + 2 * mm, j) = {std::cos(angle) / nt, std::sin(angle) / nt};
    }
  }
  const Eigen::MatrixXcd ghat = basis * dg;  // span x nodes

  const Eigen::Map<const Eigen::VectorXd> rw(ctx.spectrum.rho_weights.data(), nodes);
  const Eigen::MatrixXd& phi = ctx.spectrum.phi;
  std::vector<Eigen::MatrixXcd> block(span);
  for (int d = 0; d < span; ++d) {
    const Eigen::VectorXd re = rw.cwiseProduct(ghat.row(d).real().transpose());
    const Eigen::VectorXd im = rw.cwiseProduct(ghat.row(d).imag().transpose());
    const Eigen::MatrixXd bre = phi.transpose() * re.asDiagonal() * phi;
    const Eigen::MatrixXd bim = phi.transpose() * im.asDiagonal() * phi;
    block[d] = bre.cast<std::complex<double>>() + std::complex<double>(0, 1) * bim.cast<std::complex<double>>();
  }

  const int size = width * modes;
  Eigen::MatrixXcd jac(size, size);
  for (int n = 0; n < modes; ++n) {
    for (int np = 0; np < modes; ++np) {
      for (int m = -mm; m <= mm; ++m) {
        for (int mp = -mm; mp <= mm; ++mp) {
          jac(n * width + m + mm, np * width + mp + mm) = block[m - mp + 2 * mm](n, np);
        }
      }
    }
  }
  for (int n = 0; n < modes; ++n) {
    for (int r = 0; r < width; ++r) {
      jac(n * width + r, n * width + r) += ctx.lattice.symbol(r, n) + eps;
    }
  }
  return jac;
}

struct Iterate {
  FourierField u;
  PhysicalField v;
  double r = 0.0;
};

Iterate evaluate(FourierField u, double eps, const ForcingSpec& spec, const Nonlinearity& g,
                 const SpectralContext& ctx, FourierField* f_out = nullptr) {
  u.make_hermitian();
  Iterate it{std::move(u), {}, 0.0};
  it.v = fine_field(it.u, ctx);
  FourierField f = residual_from(it.u, it.v, eps, spec, g, ctx);
  it.r = f.norm();
  if (f_out) *f_out = std::move(f);
  return it;
}

// Damped Picard u <- (1 - w) u + w (L + eps)^{-1} (f_hat - P g(S u)).
bool picard_step(Iterate& cur, double eps, const ForcingSpec& spec, const Nonlinearity& g,
                 const SpectralContext& ctx) {
  FourierField target = spec.f_hat_coeff - nonlinear_term(cur.v, g, ctx);
  for (Eigen::Index c = 0; c < target.coeff().cols(); ++c) {
    for (Eigen::Index r = 0; r < target.coeff().rows(); ++r) {
      const double d = ctx.lattice.symbol(r, c) + eps;
      target.coeff()(r, c) = std::abs(d) > 1e-14 ? target.coeff()(r, c) / d : cur.u.coeff()(r, c);
    }
  }
  double w = 1.0;
  for (int k = 0; k < 12; ++k, w *= 0.5) {
    FourierField trial = cur.u;
    trial.coeff() = (1.0 - w) * cur.u.coeff() + w * target.coeff();
    Iterate next = evaluate(std::move(trial), eps, spec, g, ctx);
    if (next.r < cur.r) {
      cur = std::move(next);
      return true;
    }
  }
  return false;
}

RegularizedSolution newton(double eps, const ForcingSpec& spec, const Nonlinearity& g,
                           const SolverConfig& config, const FourierField& u0,
                           const SpectralContext& ctx) {
  FourierField f;
  Iterate cur = evaluate(u0, eps, spec, g, ctx, &f);
  int it = 0;
  for (; it < config.max_iters && cur.r > config.tol; ++it) {
    const Eigen::MatrixXcd jac = jacobian(cur.v, eps, g, ctx);
    const Eigen::Map<const Eigen::VectorXcd> rhs(f.coeff().data(), f.coeff().size());
    const Eigen::VectorXcd step = -Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd>(jac).solve(rhs);

    bool accepted = false;
    double s = 1.0;
    for (int k = 0; k <= 10; ++k, s *= 0.5) {
      FourierField trial = cur.u;
      trial.coeff() += s * Eigen::Map<const Eigen::MatrixXcd>(step.data(), f.coeff().rows(),
                                                               f.coeff().cols());
      FourierField ft;
      Iterate next = evaluate(std::move(trial), eps, spec, g, ctx, &ft);
      if (next.r < (1.0 - 1e-4 * s) * cur.r) {
        cur = std::move(next);
        f = std::move(ft);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!picard_step(cur, eps, spec, g, ctx)) break;
      cur = evaluate(cur.u, eps, spec, g, ctx, &f);
    }
  }
  if (cur.r > config.tol) {
    std::ostringstream msg;
    msg << "regularized solve at eps=" << eps << " stopped after " << it
        << " iterations; best residual " << cur.r << " > tol " << config.tol;
    throw Error(ErrorCode::NonConvergence, msg.str());
  }
  return {std::move(cur.u), cur.r, it};
}

Nonlinearity flipped(const Nonlinearity& g) {
  Nonlinearity out = g;
  out.g = [f = g.g](double v) { return -f(-v); };
  out.direction = Monotonicity::NonDecreasing;
  out.limit_minus = -g.limit_plus;
  out.limit_plus = -g.limit_minus;
  return out;
}

ForcingSpec negated(ForcingSpec spec) {
  spec.f_hat.values *= -1.0;
  spec.f_hat_coeff *= -1.0;
  spec.f_star *= -1.0;
  spec.f_null *= -1.0;
  spec.f_star_star.values *= -1.0;
  return spec;
}

}  // namespace

PhysicalField scale_by_density(const PhysicalField& f, const CoefficientProfile& profile) {
  if (f.space_nodes() != profile.grid.size()) {
    throw Error(ErrorCode::ShapeMismatch, "forcing grid does not match profile grid");
  }
  PhysicalField out = f;
  for (int k = 0; k < f.space_nodes(); ++k) out.values.col(k) /= profile.rho[k];
  return out;
}

ForcingSpec decompose_forcing(const PhysicalField& f_hat, const SpectralContext& ctx,
                              double margin) {
  ForcingSpec spec;
  spec.f_hat = f_hat;
  spec.margin = margin;
  spec.f_hat_coeff = analyze(f_hat, ctx.spectrum, ctx.freq());
  spec.f_star = project_range(spec.f_hat_coeff, ctx.lattice);
  spec.f_null = project_null(spec.f_hat_coeff, ctx.lattice);
  spec.f_star_star = synthesize(spec.f_null, ctx.spectrum, ctx.freq(),
                                std::max(f_hat.time_nodes(), ctx.fine_time_nodes()));
  return spec;
}

A3Report check_a3(const ForcingSpec& spec, const Nonlinearity& g) {
  A3Report rep;
  rep.lower = g.lower();
  rep.upper = g.upper();
  const auto& v = spec.f_star_star.values;
  rep.f_min = v.size() ? v.minCoeff() : 0.0;
  rep.f_max = v.size() ? v.maxCoeff() : 0.0;
  rep.worst_margin = std::min(rep.f_min - rep.lower - spec.margin,
                              rep.upper - spec.margin - rep.f_max);
  rep.ok = rep.worst_margin >= 0.0;
  return rep;
}

FourierField residual(const FourierField& u, double eps, const ForcingSpec& spec,
                      const Nonlinearity& g, const SpectralContext& ctx) {
  return residual_from(u, fine_field(u, ctx), eps, spec, g, ctx);
}

std::vector<double> SolverConfig::schedule() const {
  if (!(eps_start > 0.0) || !(eps_end > 0.0) || eps_end > eps_start || !(eps_ratio > 0.0) ||
      !(eps_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid epsilon schedule");
  }
  std::vector<double> out;
  for (double e = eps_start; e >= eps_end * (1.0 - 1e-12); e *= eps_ratio) out.push_back(e);
  return out;
}

RegularizedSolution solve_regularized(double eps, const ForcingSpec& spec, const Nonlinearity& g,
                                      const SolverConfig& config, const FourierField& u0,
                                      const SpectralContext& ctx) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (!ctx.lattice.matches(u0)) throw Error(ErrorCode::ShapeMismatch, "initial guess shape");
  if (!config.waive_a3) {
    const A3Report a3 = check_a3(spec, g);
    if (!a3.ok) {
      throw Error(ErrorCode::A3Unverified,
                  "f** outside [g_min + margin, g_max - margin]; worst margin " +
                      std::to_string(a3.worst_margin));
    }
  }
  if (g.direction == Monotonicity::NonIncreasing) {
    FourierField v0 = u0;
    v0 *= -1.0;
    RegularizedSolution s = newton(eps, negated(spec), flipped(g), config, v0, ctx);
    s.u *= -1.0;
    return s;
  }
  return newton(eps, spec, g, config, u0, ctx);
}

SolveTrace continuation_solve(const ForcingSpec& spec_in, const Nonlinearity& g_in,
                              const SolverConfig& config, const SpectralContext& ctx) {
  SolveTrace trace;
  trace.a3 = check_a3(spec_in, g_in);
  if (!trace.a3.ok && !config.waive_a3) {
    trace.diagnostic = "A3 not satisfied; worst margin " + std::to_string(trace.a3.worst_margin);
    throw SolveFailure(ErrorCode::A3Unverified, trace.diagnostic, trace);
  }
  const bool flip = g_in.direction == Monotonicity::NonIncreasing;
  const ForcingSpec spec = flip ? negated(spec_in) : spec_in;
  const Nonlinearity g = flip ? flipped(g_in) : g_in;
  const double sign = flip ? -1.0 : 1.0;

  auto fail = [&](ErrorCode code, const std::string& msg) {
    trace.diagnostic = msg;
    if (flip) {
      for (auto& s : trace.steps) s.u *= -1.0;
    }
    return SolveFailure(code, msg, trace);
  };

  FourierField u = ctx.zero_field();
  std::array<double, 4> first{};
  for (double eps : config.schedule()) {
    RegularizedSolution sol;
    try {
      sol = newton(eps, spec, g, config, u, ctx);
    } catch (const Error& e) {
      throw fail(e.code(), e.what());
    }
    u = sol.u;
    const PhysicalField v = fine_field(u, ctx);
    SolveStep step;
    step.eps = eps;
    step.u = u;
    step.residual_norm = sol.residual_norm;
    step.iterations = sol.iterations;
    step.eps_times_norm = eps * u.norm();
    step.L_u_norm = apply_L(u, ctx.lattice).norm();
    step.l1_norm = l1_norm(v, ctx.profile);
    step.sup_norm = sup_norm(v);
    trace.steps.push_back(step);

    const std::array<double, 4> now{step.eps_times_norm, step.L_u_norm, step.l1_norm,
                                    step.sup_norm};
    static constexpr std::array<const char*, 4> kNames{"eps*||u||", "||Lu||", "||u||_L1",
                                                       "||u||_Linf"};
    if (trace.steps.size() == 1) {
      first = now;
      continue;
    }
    for (int i = 0; i < 4; ++i) {
      const double cap = config.blowup_factor * std::max(first[i], 1e-8);
      if (now[i] > cap) {
        std::ostringstream msg;
        msg << "monitor " << kNames[i] << " = " << now[i] << " at eps=" << eps << " exceeds "
            << config.blowup_factor << "x its first value " << first[i];
        throw fail(ErrorCode::MonitorBlowup, msg.str());
      }
    }
  }

  const auto& steps = trace.steps;
  const double limit_gap =
      steps.size() >= 2 ? (steps.back().u - steps[steps.size() - 2].u).norm() : 0.0;

  FourierField final_u = u;
  if (config.limit_polish) {
    try {
      final_u = newton(0.0, spec, g, config, u, ctx).u;
      trace.polished = true;
    } catch (const Error&) {
      final_u = u;
    }
  }

  const PhysicalField v = fine_field(final_u, ctx);
  const FourierField f0 = residual_from(final_u, v, 0.0, spec, g, ctx);
  trace.final_range_residual = project_range(f0, ctx.lattice).norm();
  trace.final_null_balance =
      project_null(nonlinear_term(v, g, ctx) - spec.f_hat_coeff, ctx.lattice).norm();
  trace.final_u = final_u;
  trace.final_u *= sign;

  const bool limit_ok = limit_gap <= config.limit_tol;
  const bool final_ok = trace.final_range_residual <= config.final_tol &&
                        trace.final_null_balance <= config.final_tol;
  trace.converged = limit_ok && final_ok;
  if (!trace.converged) {
    std::ostringstream msg;
    msg << "limit gap " << limit_gap << " (tol " << config.limit_tol << "), range residual "
        << trace.final_range_residual << ", null balance " << trace.final_null_balance
        << " (tol " << config.final_tol << ")";
    throw fail(ErrorCode::NonConvergence, msg.str());
  }
  if (flip) {
    for (auto& s : trace.steps) s.u *= -1.0;
  }
  trace.diagnostic = "converged";
  return trace;
}

double weak_residual(const FourierField& u, const PhysicalField& f, const Nonlinearity& g,
                     const SpectralContext& ctx) {
  const PhysicalField v = fine_field(u, ctx);
  FourierField w = apply_L(analyze(v, ctx.spectrum, ctx.freq()), ctx.lattice);
  w += nonlinear_term(v, g, ctx);
  w -= analyze_unweighted(f, ctx.spectrum, ctx.freq());
  return w.coeff().cwiseAbs().maxCoeff();
}

PhysicalField manufactured_forcing(const FourierField& u_star, const Nonlinearity& g,
                                   const SpectralContext& ctx) {
  PhysicalField f = fine_field(apply_L(u_star, ctx.lattice), ctx);
  f.values += fine_field(u_star, ctx).values.unaryExpr(g.g);
  return f;
}

}  // namespace pbeam
