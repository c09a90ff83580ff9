#include "pbeam/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pbeam/error.hpp"
#include "pbeam/transforms.hpp"

namespace pbeam {

namespace {

double max_abs_phi(const BeamSpectrum& spectrum, int modes) {
  return spectrum.phi.leftCols(modes).cwiseAbs().maxCoeff();
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

BoundRatios inverse_bound_ratios(const FourierField& h, const LambdaLattice& lattice,
                                 const BeamSpectrum& spectrum) {
  const double hn = h.norm();
  if (!(hn > 0.0)) throw Error(ErrorCode::InvalidArgument, "h must be nonzero");
  const FourierField u = apply_L_inverse(h, lattice);
  const TailSum tail = tail_sum(lattice);
  const double c_eff = tail.sup_constant / std::sqrt(lattice.freq.period()) *
                       max_abs_phi(spectrum, lattice.modes());
  const int nt = 4 * lattice.m_max() + 4;
  const double sup = sup_norm(synthesize(u, spectrum, lattice.freq, nt));

  BoundRatios r;
  r.norm = lattice.delta * u.norm() / hn;
  r.coercivity = (u.coeff().conjugate().cwiseProduct(h.coeff())).sum().real() / (hn * hn);
  r.sup = c_eff > 0.0 ? sup / (c_eff * hn) : 0.0;
  r.sup_over_tail = tail.sup_constant > 0.0 ? sup / (tail.sup_constant * hn) : 0.0;
  return r;
}

InverseBoundsReport verify_inverse_bounds(const LambdaLattice& lattice,
                                          const BeamSpectrum& spectrum, int trials,
                                          std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  const TailSum tail = tail_sum(lattice);
  InverseBoundsReport rep;
  rep.tail_sum = tail.sum;
  rep.sup_constant = tail.sup_constant;
  rep.effective_sup_constant = tail.sup_constant / std::sqrt(lattice.freq.period()) *
                               max_abs_phi(spectrum, lattice.modes());
  rep.coercivity_floor = std::isinf(lattice.gamma) ? 0.0 : -1.0 / lattice.gamma;
  rep.worst_coercivity = std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  constexpr double kSlack = 1e-12;
  for (int t = 0; t < trials; ++t) {
    const FourierField h =
        project_range(random_hermitian_field(lattice.m_max(), lattice.modes(), rng), lattice);
    const BoundRatios r = inverse_bound_ratios(h, lattice, spectrum);
    ++rep.trials;
    rep.worst_norm = std::max(rep.worst_norm, r.norm);
    rep.worst_coercivity = std::min(rep.worst_coercivity, r.coercivity);
    rep.worst_sup = std::max(rep.worst_sup, r.sup);
    rep.worst_sup_over_tail = std::max(rep.worst_sup_over_tail, r.sup_over_tail);

    const bool bad = r.norm > 1.0 + kSlack ||
                     r.coercivity < rep.coercivity_floor * (1.0 + kSlack) - kSlack ||
                     r.sup > 1.0 + kSlack;
    if (bad) {
      ++rep.violations;
      std::ostringstream msg;
      msg << "trial " << t << " (seed " << seed << ", ||h||=" << h.norm()
          << "): norm ratio " << r.norm << ", coercivity " << r.coercivity << " vs floor "
          << rep.coercivity_floor << ", sup ratio " << r.sup;
      throw Error(ErrorCode::BoundViolation, msg.str());
    }
  }
  return rep;
}

CompactnessReport compactness_decay(const LambdaLattice& lattice, const std::vector<int>& ranks) {
  CompactnessReport rep;
  for (int rank : ranks) {
    CompactnessRow row{rank, 0.0, 0.0};
    double sum = 0.0;
    for (int n = 1; n <= lattice.modes(); ++n) {
      for (int m = -lattice.m_max(); m <= lattice.m_max(); ++m) {
        if (std::abs(m) < rank && n < rank) continue;
        if (lattice.is_null(m, n)) continue;
        const double l = lattice.at(m, n);
        row.block_norm = std::max(row.block_norm, 1.0 / std::abs(l));
        sum += 1.0 / (l * l);
      }
    }
    row.tail_bound = std::sqrt(sum);
    rep.rows.push_back(row);
  }
  rep.block_norm_monotone = rep.block_norm_strict = rep.tail_bound_monotone = true;
  for (size_t i = 1; i < rep.rows.size(); ++i) {
    const auto& a = rep.rows[i - 1];
    const auto& b = rep.rows[i];
    if (b.block_norm > a.block_norm) rep.block_norm_monotone = false;
    if (b.block_norm >= a.block_norm && a.block_norm > 0.0) rep.block_norm_strict = false;
    if (b.tail_bound > a.tail_bound) rep.tail_bound_monotone = false;
  }
  return rep;
}

RationalityReport rationality_probe(const AsymptoticFit& fit, const LambdaLattice& lattice,
                                    bool exact_model) {
  RationalityReport rep;
  rep.a = fit.a;
  const double p = lattice.freq.p;
  const double q = lattice.freq.q;
  const double a = fit.a;
  const int modes = std::min<int>(lattice.modes(), static_cast<int>(fit.b.size()));

  std::vector<double> band_n, band_min;
  for (int n = 1; n <= modes; ++n) {
    ResonanceBand band;
    band.n = n;
    band.min_abs_lambda = std::numeric_limits<double>::infinity();
    const double n2 = static_cast<double>(n) * n;
    const bool in_fit = n >= fit.n_min && n <= fit.n_max;
    for (int m = -lattice.m_max(); m <= lattice.m_max(); ++m) {
      const double l = lattice.at(m, n);
      const double model = (p * n2 + q * m + p * a) * (p * n2 - q * m + p * a) / (p * p);
      rep.factorization_residual =
          std::max(rep.factorization_residual, std::abs(l - model - (fit.b[n - 1] - a * a)));
      if (in_fit) {
        rep.constant_b_residual =
            std::max(rep.constant_b_residual, std::abs(l - model - (fit.intercept - a * a)));
      }
      if (lattice.is_null(m, n)) {
        ++band.null_count;
      } else {
        band.min_abs_lambda = std::min(band.min_abs_lambda, std::abs(l));
      }
      if (std::abs(p * n2 - q * std::abs(m) + p * a) < 0.5) ++band.near_resonances;
    }
    rep.null_total += band.null_count;
    rep.near_resonance_total += band.near_resonances;
    if (std::isfinite(band.min_abs_lambda)) {
      band_n.push_back(n);
      band_min.push_back(band.min_abs_lambda);
    }
    rep.bands.push_back(band);
  }
  rep.min_lambda_trend = slope(band_n, band_min);

  int bands_with_null = 0;
  for (const auto& b : rep.bands) bands_with_null += b.null_count > 0 ? 1 : 0;
  std::ostringstream v;
  if (bands_with_null >= 2) {
    v << "accumulation: null modes recur in " << bands_with_null << " of " << rep.bands.size()
      << " bands (rational-a signature)";
  } else if (rep.min_lambda_trend > 0.0) {
    v << "growth: min |lambda| per band increases with n (slope " << rep.min_lambda_trend
      << "); spectrum discrete and unbounded on the truncation";
  } else {
    v << "inconclusive: no recurring null modes and no growth of min |lambda|";
  }
  rep.verdict = v.str();
  rep.residual_label = exact_model ? "exact model" : "model mismatch including o(1/n)";
  return rep;
}

ConvergenceReport convergence_study(const ProfileRecipe& recipe, int count,
                                    const std::vector<int>& resolutions) {
  if (resolutions.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "convergence study needs at least 3 resolutions");
  }
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  const double ratio = static_cast<double>(resolutions[1]) / resolutions[0];
  for (size_t i = 1; i < resolutions.size(); ++i) {
    const double r = static_cast<double>(resolutions[i]) / resolutions[i - 1];
    if (!(r > 1.0) || std::abs(r - ratio) > 1e-12 * ratio) {
      throw Error(ErrorCode::InvalidArgument, "resolutions must grow by a constant ratio");
    }
  }

  ConvergenceReport rep;
  rep.resolutions = resolutions;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.rows.resize(count);
  for (int n = 1; n <= count; ++n) {
    rep.rows[n - 1].n = n;
    rep.rows[n - 1].mu.assign(resolutions.size(), nan);
  }
  for (size_t i = 0; i < resolutions.size(); ++i) {
    const int solvable = std::min(count, resolutions[i] / 4);
    if (solvable < 1) continue;
    const CoefficientProfile profile =
        recipe.build(SpatialGrid::composite_lobatto(resolutions[i]));
    const BeamSpectrum s = solve_eigenproblem(profile, solvable);
    for (int n = 1; n <= solvable; ++n) rep.rows[n - 1].mu[i] = s.mu[n - 1];
  }

  const size_t k = resolutions.size();
  for (auto& row : rep.rows) {
    const double m0 = row.mu[k - 3], m1 = row.mu[k - 2], m2 = row.mu[k - 1];
    const double d1 = m1 - m0;
    const double d2 = m2 - m1;
    row.last_delta = d2;
    row.order = nan;
    bool complete = true;
    for (double v : row.mu) complete = complete && !std::isnan(v);
    if (!complete) {
      row.status = "unconverged";
      continue;
    }
    if (std::abs(d2) <= 1e-10 * std::max(1.0, std::abs(m2))) {
      row.status = "converged";
      continue;
    }
    row.order = std::log(std::abs(d1 / d2)) / std::log(ratio);
    row.status = std::abs(d2) < std::abs(d1) ? "asymptotic" : "unconverged";
  }
  return rep;
}

}  // namespace pbeam
