#include "runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "config.hpp"
#include "pbeam/diagnostics.hpp"
#include "pbeam/eigensolver.hpp"
#include "pbeam/error.hpp"
#include "pbeam/nonlinear_solver.hpp"
#include "pbeam/spectral_operator.hpp"
#include "pbeam/transforms.hpp"

namespace pbeam::cli {

namespace {

namespace fs = std::filesystem;

// Key-value report mirrored to stdout.
class Report {
 public:
  template <typename T>
  void add(const std::string& key, const T& value) {
    std::ostringstream s;
    s.precision(17);
    s << std::boolalpha << value;
    lines_.emplace_back(key, s.str());
  }
  const std::vector<std::pair<std::string, std::string>>& lines() const { return lines_; }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

struct Session {
  const RunOptions& options;
  Config cfg;
  std::ostream& out;
  Report report;
  std::optional<double> null_tol;  // resolved value, once a lattice exists

  std::string header() const {
    std::ostringstream h;
    h.precision(17);
    h << "# pbeam schema_version=" << kSchemaVersion << " command=" << options.command << "\n";
    h << "# config_hash=" << cfg.hash << " seed=" << cfg.seed << "\n";
    h << "# N=" << cfg.modes << " m_max=";
    if (cfg.frequency) {
      h << cfg.frequency->m_max;
    } else {
      h << "n/a";
    }
    h << " null_tol=";
    if (null_tol) {
      h << *null_tol;
    } else {
      h << "n/a";
    }
    h << " resolution=" << cfg.resolution << "\n";
    return h.str();
  }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(fs::path(options.out_dir) / name);
    if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + name + " in " + options.out_dir);
    f.precision(17);
    f << header();
    return f;
  }

  void write_report() const {
    std::ofstream f = open("report.txt");
    for (const auto& [k, v] : report.lines()) {
      f << k << "=" << v << "\n";
      out << k << "=" << v << "\n";
    }
  }

  const FrequencySpec& frequency() const {
    if (!cfg.frequency) throw Error(ErrorCode::ConfigError, "missing frequency section");
    return *cfg.frequency;
  }
};

CoefficientProfile build_profile(const Config& cfg) {
  return cfg.recipe.build(SpatialGrid::composite_lobatto(cfg.resolution));
}

std::optional<AsymptoticFit> try_fit(const BeamSpectrum& s, int n_min) {
  if (s.count() - n_min + 1 < 5) return std::nullopt;
  return fit_asymptotics(s, n_min);
}

void write_eigen_table(const Session& session, const BeamSpectrum& s,
                       const std::optional<AsymptoticFit>& fit) {
  std::ofstream f = session.open("eigen.csv");
  f << "n,mu,b_n\n";
  for (int n = 1; n <= s.count(); ++n) {
    f << n << "," << s.mu[n - 1] << ",";
    if (fit) f << fit->b[n - 1];
    f << "\n";
  }
}

void report_spectrum(Session& session, const CoefficientProfile& profile, const BeamSpectrum& s,
                     const std::optional<AsymptoticFit>& fit) {
  Report& r = session.report;
  r.add("profile", profile.id());
  r.add("calibration_shift", profile.calibration_shift);
  r.add("normalization_integral", normalization_integral(profile));
  r.add("modes", s.count());
  r.add("mu_1", s.mu.front());
  r.add("mu_N", s.mu.back());
  r.add("orthonormality_defect", check_orthonormality(s));
  if (fit) {
    r.add("fit_range", std::to_string(fit->n_min) + ".." + std::to_string(fit->n_max));
    r.add("fit_a", fit->a);
    r.add("fit_intercept", fit->intercept);
    r.add("fit_residual", fit->fit_residual);
    r.add("abs_b_slope", fit->abs_b_slope);
    r.add("mean_abs_b", fit->mean_abs_b);
  } else {
    r.add("fit", "skipped (fewer than 5 modes in fit range)");
  }
}

LambdaLattice lattice_stage(Session& session, const BeamSpectrum& s) {
  LambdaLattice lat = assemble_lattice(s, session.frequency(), session.cfg.null_tol);
  session.null_tol = lat.null_tol;
  std::ofstream f = session.open("lattice.csv");
  f << "m,n,lambda,null\n";
  for (int n = 1; n <= lat.modes(); ++n) {
    for (int m = -lat.m_max(); m <= lat.m_max(); ++m) {
      f << m << "," << n << "," << lat.at(m, n) << "," << (lat.is_null(m, n) ? 1 : 0) << "\n";
    }
  }
  const TailSum tail = tail_sum(lat);
  Report& r = session.report;
  r.add("period", session.frequency().period());
  r.add("null_tol", lat.null_tol);
  r.add("delta", lat.delta);
  r.add("delta_at", "(" + std::to_string(lat.delta_at.first) + "," +
                        std::to_string(lat.delta_at.second) + ")");
  r.add("gamma", lat.gamma);
  r.add("gamma_at", "(" + std::to_string(lat.gamma_at.first) + "," +
                        std::to_string(lat.gamma_at.second) + ")");
  r.add("null_count", lat.null_count());
  std::ostringstream nulls;
  for (int n = 1; n <= lat.modes(); ++n) {
    for (int m = -lat.m_max(); m <= lat.m_max(); ++m) {
      if (lat.is_null(m, n)) nulls << "(" << m << "," << n << ")";
    }
  }
  r.add("null_modes", nulls.str());
  r.add("tail_sum", tail.sum);
  r.add("sup_constant", tail.sup_constant);
  return lat;
}

void bounds_stage(Session& session, const LambdaLattice& lat, const BeamSpectrum& s) {
  const InverseBoundsReport b =
      verify_inverse_bounds(lat, s, session.cfg.bound_trials, session.cfg.seed);
  Report& r = session.report;
  r.add("bounds_trials", b.trials);
  r.add("bounds_violations", b.violations);
  r.add("bounds_worst_norm_ratio", b.worst_norm);
  r.add("bounds_worst_coercivity", b.worst_coercivity);
  r.add("bounds_coercivity_floor", b.coercivity_floor);
  r.add("bounds_worst_sup_ratio", b.worst_sup);
  r.add("bounds_effective_sup_constant", b.effective_sup_constant);

  std::vector<int> ranks = session.cfg.compactness_ranks;
  if (ranks.empty()) ranks = {4, 8, 16};
  const CompactnessReport c = compactness_decay(lat, ranks);
  for (const auto& row : c.rows) {
    const std::string k = "compactness_rank_" + std::to_string(row.rank);
    r.add(k + "_block_norm", row.block_norm);
    r.add(k + "_tail_bound", row.tail_bound);
  }
  r.add("compactness_block_norm_monotone", c.block_norm_monotone);
  r.add("compactness_tail_bound_monotone", c.tail_bound_monotone);
}

int cmd_eigen(Session& session) {
  const CoefficientProfile profile = build_profile(session.cfg);
  const BeamSpectrum s = solve_eigenproblem(profile, session.cfg.modes);
  const auto fit = try_fit(s, session.cfg.fit_min);
  if (session.cfg.frequency) session.null_tol = default_null_tol(s.mu);
  write_eigen_table(session, s, fit);
  report_spectrum(session, profile, s, fit);
  session.write_report();
  return 0;
}

int cmd_lattice(Session& session) {
  const CoefficientProfile profile = build_profile(session.cfg);
  const BeamSpectrum s = solve_eigenproblem(profile, session.cfg.modes);
  const auto fit = try_fit(s, session.cfg.fit_min);
  const LambdaLattice lat = lattice_stage(session, s);
  write_eigen_table(session, s, fit);
  report_spectrum(session, profile, s, fit);
  bounds_stage(session, lat, s);
  session.write_report();
  return 0;
}

FourierField field_from_terms(const std::vector<ModeTerm>& terms, const SpectralContext& ctx) {
  FourierField u = ctx.zero_field();
  for (const auto& t : terms) {
    if (t.m > u.m_max() || t.n > u.modes()) {
      throw Error(ErrorCode::ConfigError, "forcing term (m=" + std::to_string(t.m) +
                                              ", n=" + std::to_string(t.n) +
                                              ") outside the truncation");
    }
    add_real_mode(u, ctx.freq(), t.m, t.n, t.cos, t.sin);
  }
  return u;
}

void write_trace(const Session& session, const SolveTrace& trace) {
  std::ofstream f = session.open("trace.csv");
  f << "eps,residual,eps_norm,Lu_norm,l1_norm,sup_norm,iterations\n";
  for (const auto& s : trace.steps) {
    f << s.eps << "," << s.residual_norm << "," << s.eps_times_norm << "," << s.L_u_norm << ","
      << s.l1_norm << "," << s.sup_norm << "," << s.iterations << "\n";
  }
}

void write_field(const Session& session, const FourierField& u, const SpectralContext& ctx) {
  const PhysicalField v = synthesize(u, ctx.spectrum, ctx.freq());
  const auto x = ctx.spectrum.grid.nodes();
  std::ofstream f = session.open("field.csv");
  f << "t,x,value\n";
  for (int j = 0; j < v.time_nodes(); ++j) {
    for (int k = 0; k < v.space_nodes(); ++k) {
      f << v.time(j) << "," << x[k] << "," << v.values(j, k) << "\n";
    }
  }
}

int cmd_solve(Session& session, bool manufactured) {
  const Config& cfg = session.cfg;
  const CoefficientProfile profile = build_profile(cfg);
  BeamSpectrum s = solve_eigenproblem(profile, cfg.modes);
  LambdaLattice lat = lattice_stage(session, s);
  SpectralContext ctx{profile, std::move(s), std::move(lat)};

  const bool use_u_star = manufactured || cfg.forcing.type == "manufactured";
  if (manufactured && cfg.forcing.terms.empty()) {
    throw Error(ErrorCode::ConfigError, "manufactured needs forcing.terms describing u*");
  }
  const Nonlinearity g = cfg.make_nonlinearity();
  g.validate();

  std::optional<FourierField> u_star;
  PhysicalField f_hat;
  if (use_u_star) {
    u_star = field_from_terms(cfg.forcing.terms, ctx);
    f_hat = manufactured_forcing(*u_star, g, ctx);
  } else {
    f_hat = synthesize(field_from_terms(cfg.forcing.terms, ctx), ctx.spectrum, ctx.freq(),
                       ctx.fine_time_nodes());
    if (cfg.forcing.density_scaled) f_hat = scale_by_density(f_hat, profile);
  }
  const ForcingSpec spec = decompose_forcing(f_hat, ctx, cfg.forcing.margin);

  Report& r = session.report;
  r.add("nonlinearity", g.name);
  r.add("forcing", use_u_star ? "manufactured" : cfg.forcing.type);
  r.add("f_star_norm", spec.f_star.norm());
  r.add("f_null_norm", spec.f_null.norm());

  SolveTrace trace;
  try {
    trace = continuation_solve(spec, g, cfg.solver, ctx);
  } catch (const SolveFailure& e) {
    trace = e.trace();
    write_trace(session, trace);
    r.add("a3_ok", trace.a3.ok);
    r.add("a3_worst_margin", trace.a3.worst_margin);
    r.add("converged", false);
    r.add("steps", trace.steps.size());
    r.add("diagnostic", trace.diagnostic);
    session.write_report();
    throw;
  }
  write_trace(session, trace);
  write_field(session, trace.final_u, ctx);

  PhysicalField f = f_hat;
  for (int k = 0; k < f.space_nodes(); ++k) f.values.col(k) *= profile.rho[k];

  r.add("a3_ok", trace.a3.ok);
  r.add("a3_worst_margin", trace.a3.worst_margin);
  r.add("converged", trace.converged);
  r.add("polished", trace.polished);
  r.add("steps", trace.steps.size());
  r.add("final_eps_times_norm", trace.steps.back().eps_times_norm);
  r.add("final_range_residual", trace.final_range_residual);
  r.add("final_null_balance", trace.final_null_balance);
  r.add("weak_residual", weak_residual(trace.final_u, f, g, ctx));
  r.add("solution_norm", trace.final_u.norm());
  if (u_star) r.add("recovery_error", (trace.final_u - *u_star).norm());
  session.write_report();
  return 0;
}

// Constant-coefficient oracle battery, independent of the config.
bool oracle_battery(Report& r) {
  bool all = true;
  auto check = [&](const std::string& name, bool ok, double value) {
    r.add("oracle_" + name, std::string(ok ? "pass " : "FAIL ") + [&] {
      std::ostringstream s;
      s.precision(17);
      s << value;
      return s.str();
    }());
    all = all && ok;
  };

  const ProfileRecipe recipe{constant_preset(), 1.0, false, false};
  const CoefficientProfile profile = recipe.build(SpatialGrid::composite_lobatto(256));
  const BeamSpectrum s10 = solve_eigenproblem(profile, 10);
  double worst = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const double n4 = std::pow(n, 4);
    worst = std::max(worst, std::abs(s10.mu[n - 1] - n4) / n4);
  }
  check("eigen_n4_rel_error", worst <= 1e-6, worst);

  BeamSpectrum s4 = s10;
  s4.mu.resize(4);
  const LambdaLattice lat = assemble_lattice(s4, FrequencySpec::make(1, 1, 16));
  std::set<std::pair<int, int>> expected, found;
  for (int n = 1; n <= 4; ++n) {
    for (int m = -16; m <= 16; ++m) {
      if (n * n * n * n == m * m) expected.insert({m, n});
      if (lat.is_null(m, n)) found.insert({m, n});
    }
  }
  check("null_modes", found == expected && found.size() == 8, static_cast<double>(found.size()));
  check("delta", std::abs(lat.delta - 1.0) <= 1e-8, lat.delta);
  check("gamma", std::abs(lat.gamma - 3.0) <= 1e-8, lat.gamma);

  const LambdaLattice small = assemble_lattice(std::span<const double>(s10.mu.data(), 1),
                                               FrequencySpec::make(1, 1, 2));
  const double tail = tail_sum(small).sum;
  check("tail_sum_11_9", std::abs(tail - 11.0 / 9.0) <= 1e-8, tail);
  return all;
}

int cmd_verify(Session& session) {
  Report& r = session.report;
  const bool oracles = oracle_battery(r);

  const Config& cfg = session.cfg;
  const CoefficientProfile profile = build_profile(cfg);
  const BeamSpectrum s = solve_eigenproblem(profile, cfg.modes);
  const auto fit = try_fit(s, cfg.fit_min);
  write_eigen_table(session, s, fit);
  report_spectrum(session, profile, s, fit);
  r.add("rayleigh_defect_max", [&] {
    double worst = 0.0;
    for (int n = 1; n <= s.count(); ++n) {
      worst = std::max(worst, std::abs(bending_energy(s, profile, n) - s.mu[n - 1]) / s.mu[n - 1]);
    }
    return worst;
  }());

  if (cfg.frequency) {
    const LambdaLattice lat = lattice_stage(session, s);
    bounds_stage(session, lat, s);
    if (s.count() >= 5) {
      const AsymptoticFit probe_fit = fit ? *fit : fit_asymptotics(s.mu, 1);
      const RationalityReport rp = rationality_probe(probe_fit, lat);
      r.add("rationality_factorization_residual", rp.factorization_residual);
      r.add("rationality_residual_label", rp.residual_label);
      r.add("rationality_near_resonances", rp.near_resonance_total);
      r.add("rationality_min_lambda_trend", rp.min_lambda_trend);
      r.add("rationality_verdict", rp.verdict);
    } else {
      r.add("rationality", "skipped (fewer than 5 modes)");
    }
  }

  std::vector<int> res = cfg.convergence_resolutions;
  if (res.empty()) res = {std::max(4, cfg.resolution / 4), std::max(8, cfg.resolution / 2),
                          std::max(16, cfg.resolution)};
  const ConvergenceReport conv = convergence_study(cfg.recipe, cfg.modes, res);
  for (const auto& row : conv.rows) {
    const std::string k = "convergence_n" + std::to_string(row.n);
    r.add(k + "_status", row.status);
    r.add(k + "_order", row.order);
  }
  r.add("oracles", oracles ? "pass" : "FAIL");
  session.write_report();
  if (!oracles) throw Error(ErrorCode::BoundViolation, "constant-coefficient oracle battery failed");
  return 0;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n') ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    Config cfg = load_config(options.config_path);
    if (options.seed) cfg.seed = *options.seed;
    if (options.strict_a2) cfg.recipe.strict_a2 = *options.strict_a2;
    fs::create_directories(options.out_dir);
    Session session{options, std::move(cfg), out, {}, std::nullopt};
    if (options.command == "eigen") return cmd_eigen(session);
    if (options.command == "lattice") return cmd_lattice(session);
    if (options.command == "solve") return cmd_solve(session, false);
    if (options.command == "manufactured") return cmd_solve(session, true);
    if (options.command == "verify") return cmd_verify(session);
    throw Error(ErrorCode::ConfigError, "unknown subcommand '" + options.command + "'");
  } catch (const Error& e) {
    err << "error code=" << to_string(e.code()) << " command=" << options.command
        << " message=" << quoted(e.what()) << "\n";
    return e.code() == ErrorCode::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error code=Internal command=" << options.command << " message=" << quoted(e.what())
        << "\n";
    return 1;
  }
}

}  // namespace pbeam::cli
