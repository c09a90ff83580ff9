#include "pbeam/spectral_operator.hpp"

#include <cmath>
#include <numeric>

#include "pbeam/error.hpp"

namespace pbeam {

FrequencySpec FrequencySpec::make(int p, int q, int m_max) {
  if (p < 1 || q < 1) {
    throw Error(ErrorCode::InvalidFrequency, "p and q must be positive integers");
  }
  if (std::gcd(p, q) != 1) {
    throw Error(ErrorCode::InvalidFrequency,
                "p=" + std::to_string(p) + " and q=" + std::to_string(q) + " are not coprime");
  }
  if (m_max < 0) throw Error(ErrorCode::InvalidFrequency, "m_max must be non-negative");
  return FrequencySpec{p, q, m_max};
}

double default_null_tol(std::span<const double> mu) {
  return mu.empty() ? 1e-6 : 1e-6 * (1.0 + std::abs(mu.back()));
}

LambdaLattice assemble_lattice(const BeamSpectrum& spectrum, const FrequencySpec& freq,
                               std::optional<double> null_tol) {
  return assemble_lattice(std::span<const double>(spectrum.mu), freq, null_tol);
}

LambdaLattice assemble_lattice(std::span<const double> mu, const FrequencySpec& freq,
                               std::optional<double> null_tol) {
  if (mu.empty()) throw Error(ErrorCode::InvalidArgument, "empty spectrum");
  const double tol = null_tol.value_or(default_null_tol(mu));
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "null_tol must be positive");

  LambdaLattice lat;
  lat.freq = freq;
  lat.mu.assign(mu.begin(), mu.end());
  lat.null_tol = tol;
  const int rows = freq.temporal_modes();
  const int cols = static_cast<int>(mu.size());
  lat.lambda.resize(rows, cols);
  lat.null_mask.resize(rows, cols);
  lat.delta = std::numeric_limits<double>::infinity();

  for (int n = 1; n <= cols; ++n) {
    for (int m = -freq.m_max; m <= freq.m_max; ++m) {
      const double theta = freq.theta(m);
      const double value = mu[n - 1] - theta * theta;
      const int r = m + freq.m_max;
      lat.lambda(r, n - 1) = value;
      const bool is_null = std::abs(value) <= tol;
      lat.null_mask(r, n - 1) = is_null;
      if (is_null) continue;
      // Strict comparisons keep the first hit in (n, m) order, m ascending.
      if (std::abs(value) < lat.delta) {
        lat.delta = std::abs(value);
        lat.delta_at = {m, n};
      }
      if (value < 0.0 && -value < lat.gamma) {
        lat.gamma = -value;
        lat.gamma_at = {m, n};
      }
    }
  }
  if (kNullSeparation * tol >= lat.delta) {
    throw Error(ErrorCode::DegenerateTolerance,
                "null_tol " + std::to_string(tol) + " is not separated from delta " +
                    std::to_string(lat.delta) + " at (m=" + std::to_string(lat.delta_at.first) +
                    ", n=" + std::to_string(lat.delta_at.second) + ")");
  }
  return lat;
}

namespace {

void check_shape(const FourierField& u, const LambdaLattice& lattice) {
  if (!lattice.matches(u)) {
    throw Error(ErrorCode::ShapeMismatch, "field truncation (" + std::to_string(u.m_max()) + ", " +
                                              std::to_string(u.modes()) +
                                              ") does not match lattice (" +
                                              std::to_string(lattice.m_max()) + ", " +
                                              std::to_string(lattice.modes()) + ")");
  }
}

}  // namespace

FourierField apply_L(const FourierField& u, const LambdaLattice& lattice) {
  check_shape(u, lattice);
  FourierField h = u;
  for (Eigen::Index c = 0; c < h.coeff().cols(); ++c) {
    for (Eigen::Index r = 0; r < h.coeff().rows(); ++r) h.coeff()(r, c) *= lattice.symbol(r, c);
  }
  return h;
}

FourierField apply_L_inverse(const FourierField& h, const LambdaLattice& lattice,
                             std::optional<double> range_tol) {
  check_shape(h, lattice);
  const double tol = range_tol.value_or(1e-10 * h.norm());
  FourierField u(h.m_max(), h.modes());
  for (int c = 0; c < h.coeff().cols(); ++c) {
    for (int r = 0; r < h.coeff().rows(); ++r) {
      if (lattice.null_mask(r, c)) {
        if (std::abs(h.coeff()(r, c)) > tol) {
          throw Error(ErrorCode::NotInRange,
                      "null mode (m=" + std::to_string(r - h.m_max()) +
                          ", n=" + std::to_string(c + 1) + ") carries " +
                          std::to_string(std::abs(h.coeff()(r, c))));
        }
        continue;
      }
      u.coeff()(r, c) = h.coeff()(r, c) / lattice.lambda(r, c);
    }
  }
  return u;
}

FourierField project_range(const FourierField& h, const LambdaLattice& lattice) {
  check_shape(h, lattice);
  FourierField out = h;
  out.coeff() = lattice.null_mask.select(std::complex<double>(0.0), h.coeff());
  return out;
}

FourierField project_null(const FourierField& h, const LambdaLattice& lattice) {
  check_shape(h, lattice);
  FourierField out = h;
  out.coeff() = lattice.null_mask.select(h.coeff(), std::complex<double>(0.0));
  return out;
}

TailSum tail_sum(const LambdaLattice& lattice) {
  TailSum t;
  for (int c = 0; c < lattice.lambda.cols(); ++c) {
    for (int r = 0; r < lattice.lambda.rows(); ++r) {
      if (lattice.null_mask(r, c)) continue;
      const double l = lattice.lambda(r, c);
      t.sum += 1.0 / (l * l);
    }
  }
  t.sup_constant = std::sqrt(t.sum);
  return t;
}

}  // namespace pbeam
