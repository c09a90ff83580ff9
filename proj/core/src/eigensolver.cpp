#include "pbeam/eigensolver.hpp"

#include <lapacke.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "pbeam/error.hpp"

namespace pbeam {

namespace {

constexpr int kQ = SpatialGrid::kPointsPerElement;
constexpr int kBand = 3;  // half bandwidth of the Hermite system
constexpr int kInverseIterations = 5;

struct HermiteBasis {
  // Values and second derivatives (times h^2) of the four cubic Hermite
  // shape functions at the Lobatto points of the unit cell. Slope functions
  // carry an extra factor h applied at use.
  std::array<std::array<double, 4>, kQ> value{};
  std::array<std::array<double, 4>, kQ> curvature{};

  HermiteBasis() {
    const auto s = SpatialGrid::reference_points();
    for (int q = 0; q < kQ; ++q) {
      const double t = s[q];
      value[q] = {1 - 3 * t * t + 2 * t * t * t, t - 2 * t * t + t * t * t,
                  3 * t * t - 2 * t * t * t, -t * t + t * t * t};
      curvature[q] = {-6 + 12 * t, -4 + 6 * t, 6 - 12 * t, -2 + 6 * t};
    }
  }
};

const HermiteBasis& basis() {
  static const HermiteBasis b;
  return b;
}

// Element shape values / second derivatives including the h scaling.
std::array<double, 4> shape_values(int q, double h) {
  const auto& v = basis().value[q];
  return {v[0], h * v[1], v[2], h * v[3]};
}

std::array<double, 4> shape_curvatures(int q, double h) {
  const auto& c = basis().curvature[q];
  const double h2 = h * h;
  return {c[0] / h2, c[1] / h, c[2] / h2, c[3] / h};
}

// Full Hermite dof layout: 2i = value at x_i = i h, 2i+1 = slope.
// The two end values are pinned to zero and dropped from the system.
struct DofMap {
  int full = 0;
  int reduced = 0;
  std::vector<int> to_reduced;  // -1 for constrained dofs
  std::vector<int> to_full;

  explicit DofMap(int elements) {
    full = 2 * (elements + 1);
    to_reduced.assign(full, -1);
    for (int i = 0; i < full; ++i) {
      if (i == 0 || i == 2 * elements) continue;
      to_reduced[i] = static_cast<int>(to_full.size());
      to_full.push_back(i);
    }
    reduced = static_cast<int>(to_full.size());
  }
};

// Symmetric band matrix in LAPACK upper storage, column major.
class SymmetricBand {
 public:
  explicit SymmetricBand(int n) : n_(n), data_(static_cast<std::size_t>(n) * (kBand + 1), 0.0) {}

  void add(int i, int j, double v) {
    if (i > j) std::swap(i, j);
    data_[static_cast<std::size_t>(j) * (kBand + 1) + (kBand + i - j)] += v;
  }
  double get(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (j - i > kBand) return 0.0;
    return data_[static_cast<std::size_t>(j) * (kBand + 1) + (kBand + i - j)];
  }
  int size() const { return n_; }
  double* data() { return data_.data(); }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j) {
      for (int i = std::max(0, j - kBand); i <= j; ++i) {
        const double a = get(i, j);
        y[i] += a * x[j];
        if (i != j) y[j] += a * x[i];
      }
    }
    return y;
  }

 private:
  int n_;
  std::vector<double> data_;
};

struct Assembly {
  SymmetricBand stiffness;
  SymmetricBand mass;
};

Assembly assemble(const CoefficientProfile& p, const DofMap& dofs) {
  const SpatialGrid& grid = p.grid;
  const int elements = grid.elements();
  const double h = grid.element_width();
  const auto ref_w = SpatialGrid::reference_weights();
  Assembly a{SymmetricBand(dofs.reduced), SymmetricBand(dofs.reduced)};

  for (int e = 0; e < elements; ++e) {
    std::array<int, 4> idx{};
    for (int l = 0; l < 4; ++l) idx[l] = dofs.to_reduced[2 * e + l];
    for (int q = 0; q < kQ; ++q) {
      const int k = grid.node_index(e, q);
      const double w = ref_w[q] * h;
      const auto N = shape_values(q, h);
      const auto B = shape_curvatures(q, h);
      for (int r = 0; r < 4; ++r) {
        if (idx[r] < 0) continue;
        for (int c = 0; c <= r; ++c) {
          if (idx[c] < 0) continue;
          a.stiffness.add(idx[r], idx[c], w * p.eta[k] * B[r] * B[c]);
          a.mass.add(idx[r], idx[c], w * p.rho[k] * N[r] * N[c]);
        }
      }
    }
  }
  // Rotational springs from the natural condition phi'' = -2(alpha+beta) phi'.
  const int left_slope = dofs.to_reduced[1];
  const int right_slope = dofs.to_reduced[2 * elements + 1];
  a.stiffness.add(left_slope, left_slope, -2.0 * p.eta.front() * p.spring_left());
  a.stiffness.add(right_slope, right_slope, 2.0 * p.eta.back() * p.spring_right());
  return a;
}

std::vector<double> smallest_eigenvalues(Assembly a, int count) {
  const int n = a.stiffness.size();
  std::vector<double> w(n);
  std::vector<lapack_int> ifail(n);
  double q_dummy = 0.0;
  double z_dummy = 0.0;
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsbgvx(
      LAPACK_COL_MAJOR, 'N', 'I', 'U', n, kBand, kBand, a.stiffness.data(), kBand + 1,
      a.mass.data(), kBand + 1, &q_dummy, 1, 0.0, 0.0, 1, count, 0.0, &found, w.data(),
      &z_dummy, 1, ifail.data());
  if (info != 0 || found != count)
    throw Error(ErrorCode::EigensolveFailure,
                "banded generalized eigensolve failed (info=" + std::to_string(info) + ")");
  w.resize(count);
  return w;
}

// LU factorization of K - sigma M in LAPACK general band storage.
class ShiftedSolver {
 public:
  ShiftedSolver(const Assembly& a, double sigma) : n_(a.stiffness.size()) {
    ldab_ = 3 * kBand + 1;
    ab_.assign(static_cast<std::size_t>(ldab_) * n_, 0.0);
    pivots_.assign(n_, 0);
    for (int j = 0; j < n_; ++j) {
      for (int i = std::max(0, j - kBand); i <= std::min(n_ - 1, j + kBand); ++i) {
        const double v = a.stiffness.get(i, j) - sigma * a.mass.get(i, j);
        ab_[static_cast<std::size_t>(j) * ldab_ + (2 * kBand + i - j)] = v;
      }
    }
    info_ = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kBand, kBand, ab_.data(), ldab_,
                           pivots_.data());
  }

  bool ok() const { return info_ == 0; }

  Eigen::VectorXd solve(Eigen::VectorXd rhs) const {
    LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kBand, kBand, 1, ab_.data(), ldab_,
                   pivots_.data(), rhs.data(), n_);
    return rhs;
  }

 private:
  int n_;
  int ldab_;
  std::vector<double> ab_;
  std::vector<lapack_int> pivots_;
  lapack_int info_ = 0;
};

Eigen::VectorXd expand(const Eigen::VectorXd& reduced, const DofMap& dofs) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(dofs.full);
  for (int r = 0; r < dofs.reduced; ++r) full[dofs.to_full[r]] = reduced[r];
  return full;
}

Eigen::VectorXd samples_from_hermite(const Eigen::VectorXd& full, const SpatialGrid& grid) {
  const int elements = grid.elements();
  const double h = grid.element_width();
  Eigen::VectorXd out(grid.size());
  for (int e = 0; e < elements; ++e) {
    for (int q = 0; q < kQ; ++q) {
      const auto N = shape_values(q, h);
      double v = 0.0;
      for (int l = 0; l < 4; ++l) v += N[l] * full[2 * e + l];
      out[grid.node_index(e, q)] = v;
    }
  }
  return out;
}

double energy_of(const Eigen::VectorXd& full, const CoefficientProfile& p) {
  const SpatialGrid& grid = p.grid;
  const double h = grid.element_width();
  const auto ref_w = SpatialGrid::reference_weights();
  double acc = 0.0;
  for (int e = 0; e < grid.elements(); ++e) {
    for (int q = 0; q < kQ; ++q) {
      const auto B = shape_curvatures(q, h);
      // Group the value dofs as a difference quotient to limit cancellation.
      const double slope_mean = (full[2 * e + 2] - full[2 * e]) / h;
      const double curv = (B[2] * h) * slope_mean + B[1] * full[2 * e + 1] + B[3] * full[2 * e + 3];
      acc += ref_w[q] * h * p.eta[grid.node_index(e, q)] * curv * curv;
    }
  }
  const int E = grid.elements();
  acc += 2.0 * p.eta.back() * p.spring_right() * full[2 * E + 1] * full[2 * E + 1];
  acc -= 2.0 * p.eta.front() * p.spring_left() * full[1] * full[1];
  return acc;
}

double weighted_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                    std::span<const double> measure) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) acc += measure[k] * a[k] * b[k];
  return acc;
}

}  // namespace

BeamSpectrum solve_eigenproblem(const CoefficientProfile& profile, int count) {
  const SpatialGrid& grid = profile.grid;
  if (!grid.has_elements())
    throw Error(ErrorCode::InvalidArgument, "eigensolve needs a composite Lobatto grid");
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  const int elements = grid.elements();
  if (4 * count > elements)
    throw Error(ErrorCode::DiscretizationTooCoarse,
                "count " + std::to_string(count) + " exceeds resolution/4 with resolution " +
                    std::to_string(elements));

  const DofMap dofs(elements);
  const Assembly system = assemble(profile, dofs);
  const std::vector<double> sigma = smallest_eigenvalues(system, count);
  if (!(sigma.front() > 0.0))
    throw Error(ErrorCode::EigensolveFailure,
                "operator is not positive definite on the constrained subspace (mu_1 = " +
                    std::to_string(sigma.front()) + ")");

  std::vector<double> measure(grid.size());
  for (int k = 0; k < grid.size(); ++k) measure[k] = profile.rho[k] * grid.weights()[k];

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> reduced_vecs;
  reduced_vecs.reserve(count);

  int cluster_start = 0;
  for (int j = 0; j < count; ++j) {
    if (j > 0 && !same_cluster(sigma[j - 1], sigma[j])) cluster_start = j;
    double shift = sigma[j];
    ShiftedSolver solver(system, shift);
    for (int attempt = 0; !solver.ok() && attempt < 8; ++attempt) {
      shift -= 1e-10 * (1.0 + std::abs(shift)) * (attempt + 1);
      solver = ShiftedSolver(system, shift);
    }
    if (!solver.ok())
      throw Error(ErrorCode::EigensolveFailure, "shifted factorization failed");

    Eigen::VectorXd x(dofs.reduced);
    for (auto& v : x) v = normal(rng);
    for (int it = 0; it < kInverseIterations; ++it) {
      x = solver.solve(system.mass.multiply(x));
      for (int i = cluster_start; i < j; ++i) {
        const double proj = reduced_vecs[i].dot(system.mass.multiply(x));
        x -= proj * reduced_vecs[i];
      }
      x /= std::sqrt(x.dot(system.mass.multiply(x)));
    }
    reduced_vecs.push_back(std::move(x));
  }

  BeamSpectrum out{.mu = std::vector<double>(count),
                   .phi = {},
                   .hermite = {},
                   .grid = grid,
                   .rho_weights = measure,
                   .profile_id = profile.id()};
  out.phi.resize(grid.size(), count);
  out.hermite.resize(dofs.full, count);
  for (int j = 0; j < count; ++j) {
    out.hermite.col(j) = expand(reduced_vecs[j], dofs);
    out.phi.col(j) = samples_from_hermite(out.hermite.col(j), grid);
  }

  // Modified Gram-Schmidt in the discrete rho-measure, twice. Clusters are
  // covered by the same sweep.
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j < count; ++j) {
      for (int i = 0; i < j; ++i) {
        const double proj = weighted_dot(out.phi.col(i), out.phi.col(j), measure);
        out.phi.col(j) -= proj * out.phi.col(i);
        out.hermite.col(j) -= proj * out.hermite.col(i);
      }
      const double norm = std::sqrt(weighted_dot(out.phi.col(j), out.phi.col(j), measure));
      out.phi.col(j) /= norm;
      out.hermite.col(j) /= norm;
    }
  }

  for (int j = 0; j < count; ++j) {
    double orientation = out.hermite(1, j);
    if (std::abs(orientation) <= 1e-12 * out.hermite.col(j).cwiseAbs().maxCoeff()) {
      for (Eigen::Index k = 0; k < out.phi.rows(); ++k) {
        if (std::abs(out.phi(k, j)) > 1e-8) {
          orientation = out.phi(k, j);
          break;
        }
      }
    }
    if (orientation < 0.0) {
      out.phi.col(j) *= -1.0;
      out.hermite.col(j) *= -1.0;
    }
    out.mu[j] = energy_of(out.hermite.col(j), profile);
  }
  return out;
}

double bending_energy(const BeamSpectrum& spectrum, const CoefficientProfile& profile, int n) {
  if (n < 1 || n > spectrum.count())
    throw Error(ErrorCode::InvalidArgument, "mode index out of range");
  if (profile.grid.size() != spectrum.grid.size() ||
      profile.grid.elements() != spectrum.grid.elements())
    throw Error(ErrorCode::ShapeMismatch, "profile and spectrum grids differ");
  return energy_of(spectrum.hermite.col(n - 1), profile);
}

double end_slope_left(const BeamSpectrum& spectrum, int n) {
  return spectrum.hermite(1, n - 1);
}

double end_slope_right(const BeamSpectrum& spectrum, int n) {
  return spectrum.hermite(2 * spectrum.resolution() + 1, n - 1);
}

double check_orthonormality(const BeamSpectrum& spectrum) {
  const int count = spectrum.count();
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    for (int j = i; j < count; ++j) {
      const double g =
          weighted_dot(spectrum.phi.col(i), spectrum.phi.col(j), spectrum.rho_weights);
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

AsymptoticFit fit_asymptotics(std::span<const double> mu, int n_min, int n_max) {
  const int count = static_cast<int>(mu.size());
  if (n_max <= 0 || n_max > count) n_max = count;
  if (n_min < 1) n_min = 1;
  const int points = n_max - n_min + 1;
  if (points < 5)
    throw Error(ErrorCode::InsufficientModes,
                "asymptotic fit needs >= 5 modes in range, got " + std::to_string(points));

  Eigen::MatrixXd design(points, 2);
  Eigen::VectorXd rhs(points);
  for (int n = n_min; n <= n_max; ++n) {
    const double nn = n;
    design(n - n_min, 0) = 2.0 * nn * nn;
    design(n - n_min, 1) = 1.0;
    rhs[n - n_min] = mu[n - 1] - nn * nn * nn * nn;
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);

  AsymptoticFit fit;
  fit.a = coef[0];
  fit.intercept = coef[1];
  fit.n_min = n_min;
  fit.n_max = n_max;
  fit.b.resize(count);
  for (int n = 1; n <= count; ++n) {
    const double nn = n;
    fit.b[n - 1] = mu[n - 1] - nn * nn * nn * nn - 2.0 * nn * nn * fit.a;
  }
  fit.fit_residual = std::sqrt((design * coef - rhs).squaredNorm() / points);

  double mean_n = 0.0, mean_b = 0.0;
  for (int n = n_min; n <= n_max; ++n) {
    mean_n += n;
    mean_b += std::abs(fit.b[n - 1]);
  }
  mean_n /= points;
  mean_b /= points;
  double sxy = 0.0, sxx = 0.0;
  for (int n = n_min; n <= n_max; ++n) {
    sxy += (n - mean_n) * (std::abs(fit.b[n - 1]) - mean_b);
    sxx += (n - mean_n) * (n - mean_n);
  }
  fit.abs_b_slope = sxy / sxx;
  fit.mean_abs_b = mean_b;
  return fit;
}

AsymptoticFit fit_asymptotics(const BeamSpectrum& spectrum, int n_min, int n_max) {
  return fit_asymptotics(std::span<const double>(spectrum.mu), n_min, n_max);
}

}  // namespace pbeam
