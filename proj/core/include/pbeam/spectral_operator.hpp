#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <span>
#include <utility>

#include "pbeam/eigensolver.hpp"
#include "pbeam/field.hpp"

namespace pbeam {

/// lambda_{mn} = mu_n - theta_m^2 over |m| <= m_max, 1 <= n <= N, with the
/// null/range classification and the gap constants of the truncation.
struct LambdaLattice {
  FrequencySpec freq;
  std::vector<double> mu;
  /// lambda(m + m_max, n - 1).
  Eigen::MatrixXd lambda;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> null_mask;
  double null_tol = 0.0;
  /// min |lambda| over non-null entries.
  double delta = 0.0;
  /// min (theta_m^2 - mu_n) over non-null entries with theta_m^2 > mu_n;
  /// +inf when no such entry exists in the truncation.
  double gamma = std::numeric_limits<double>::infinity();
  std::pair<int, int> delta_at{0, 0};
  std::pair<int, int> gamma_at{0, 0};

  int m_max() const noexcept { return freq.m_max; }
  int modes() const noexcept { return static_cast<int>(mu.size()); }
  double at(int m, int n) const { return lambda(m + freq.m_max, n - 1); }
  /// Diagonal of L as applied: lambda on range modes, exactly 0 on null modes.
  double symbol(Eigen::Index r, Eigen::Index c) const {
    return null_mask(r, c) ? 0.0 : lambda(r, c);
  }
  bool is_null(int m, int n) const { return null_mask(m + freq.m_max, n - 1); }
  /// dim N(L) within the truncation.
  int null_count() const { return static_cast<int>(null_mask.count()); }
  bool matches(const FourierField& u) const {
    return u.m_max() == m_max() && u.modes() == modes();
  }
};

/// assemble_lattice rejects a tolerance unless delta > kNullSeparation * null_tol,
/// so that no retained mode sits close to the null band.
inline constexpr double kNullSeparation = 10.0;

/// Default null tolerance 1e-6 (1 + mu_N).
double default_null_tol(std::span<const double> mu);

LambdaLattice assemble_lattice(const BeamSpectrum& spectrum, const FrequencySpec& freq,
                               std::optional<double> null_tol = std::nullopt);
LambdaLattice assemble_lattice(std::span<const double> mu, const FrequencySpec& freq,
                               std::optional<double> null_tol = std::nullopt);

/// h_{mn} = lambda_{mn} u_{mn}.
FourierField apply_L(const FourierField& u, const LambdaLattice& lattice);

/// u_{mn} = h_{mn} / lambda_{mn} on range modes, 0 on null modes. Throws
/// NotInRange if a null-mode coefficient exceeds range_tol (default
/// 1e-10 ||h||).
FourierField apply_L_inverse(const FourierField& h, const LambdaLattice& lattice,
                             std::optional<double> range_tol = std::nullopt);

FourierField project_range(const FourierField& h, const LambdaLattice& lattice);
FourierField project_null(const FourierField& h, const LambdaLattice& lattice);

struct TailSum {
  /// sum over non-null entries of 1 / lambda^2.
  double sum = 0.0;
  /// sqrt(sum): the constant in ||L^{-1} h||_inf <= C ||h||.
  double sup_constant = 0.0;
};

TailSum tail_sum(const LambdaLattice& lattice);

}  // namespace pbeam
