#include "pbeam/transforms.hpp"

#include <cmath>
#include <numbers>

#include "pbeam/error.hpp"

namespace pbeam {

double FourierField::hermitian_defect() const {
  double worst = 0.0;
  for (int m = 0; m <= m_max_; ++m) {
    for (int n = 1; n <= modes(); ++n) {
      worst = std::max(worst, std::abs((*this)(-m, n) - std::conj((*this)(m, n))));
    }
  }
  return worst;
}

void FourierField::make_hermitian() {
  for (int m = 0; m <= m_max_; ++m) {
    for (int n = 1; n <= modes(); ++n) {
      const std::complex<double> avg = 0.5 * ((*this)(m, n) + std::conj((*this)(-m, n)));
      (*this)(m, n) = avg;
      (*this)(-m, n) = std::conj(avg);
    }
  }
}

FourierField& FourierField::operator+=(const FourierField& o) {
  if (!same_shape(o)) throw Error(ErrorCode::ShapeMismatch, "field shapes differ");
  coeff_ += o.coeff_;
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& o) {
  if (!same_shape(o)) throw Error(ErrorCode::ShapeMismatch, "field shapes differ");
  coeff_ -= o.coeff_;
  return *this;
}

namespace {

void check_spectrum_shape(const FourierField& u, const BeamSpectrum& spectrum,
                          const FrequencySpec& freq) {
  if (u.m_max() != freq.m_max || u.modes() > spectrum.count()) {
    throw Error(ErrorCode::ShapeMismatch, "field truncation does not match spectrum/frequency");
  }
}

// E(j, m + m_max) = T^{-1/2} exp(i theta_m t_j). theta_m t_j = 2 pi m j / nt,
// reduced mod nt so large products stay exact.
Eigen::MatrixXcd time_basis(const FrequencySpec& freq, int nt) {
  const int width = freq.temporal_modes();
  const double scale = 1.0 / std::sqrt(freq.period());
  Eigen::MatrixXcd e(nt, width);
  for (int j = 0; j < nt; ++j) {
    for (int m = 0; m <= freq.m_max; ++m) {
      const long long r = (static_cast<long long>(m) * j) % nt;
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) / nt;
      const std::complex<double> z(scale * std::cos(angle), scale * std::sin(angle));
      e(j, m + freq.m_max) = z;
      e(j, -m + freq.m_max) = std::conj(z);
    }
  }
  return e;
}

FourierField project(const PhysicalField& field, const BeamSpectrum& spectrum,
                     const FrequencySpec& freq, const Eigen::VectorXd& measure) {
  const int nt = field.time_nodes();
  if (nt < freq.temporal_modes()) {
    throw Error(ErrorCode::AliasRisk, "time nodes " + std::to_string(nt) + " < 2 m_max + 1 = " +
                                          std::to_string(freq.temporal_modes()));
  }
  if (field.space_nodes() != spectrum.grid.size()) {
    throw Error(ErrorCode::ShapeMismatch, "field grid does not match spectrum grid");
  }
  const Eigen::MatrixXcd e = time_basis(freq, nt);
  // Spatial projection first: (nt x nodes) * (nodes x N).
  const Eigen::MatrixXd spatial = field.values * (measure.asDiagonal() * spectrum.phi);
  FourierField out(freq.m_max, spectrum.count());
  out.coeff() = (freq.period() / nt) * (e.adjoint() * spatial);
  return out;
}

}  // namespace

PhysicalField synthesize(const FourierField& u, const BeamSpectrum& spectrum,
                         const FrequencySpec& freq, int time_nodes) {
  check_spectrum_shape(u, spectrum, freq);
  const double scale = std::max(1.0, u.norm());
  if (u.hermitian_defect() > 1e-12 * scale) {
    throw Error(ErrorCode::SymmetryViolation,
                "coefficients are not Hermitian: defect " + std::to_string(u.hermitian_defect()));
  }
  const int nt = time_nodes > 0 ? time_nodes : default_time_nodes(freq);
  const Eigen::MatrixXcd temporal = time_basis(freq, nt) * u.coeff();
  PhysicalField out;
  out.period = freq.period();
  out.values = temporal.real() * spectrum.phi.leftCols(u.modes()).transpose();
  return out;
}

FourierField analyze(const PhysicalField& field, const BeamSpectrum& spectrum,
                     const FrequencySpec& freq) {
  const Eigen::VectorXd measure =
      Eigen::Map<const Eigen::VectorXd>(spectrum.rho_weights.data(), spectrum.grid.size());
  return project(field, spectrum, freq, measure);
}

FourierField analyze_unweighted(const PhysicalField& field, const BeamSpectrum& spectrum,
                                const FrequencySpec& freq) {
  const auto w = spectrum.grid.weights();
  const Eigen::VectorXd measure = Eigen::Map<const Eigen::VectorXd>(w.data(), spectrum.grid.size());
  return project(field, spectrum, freq, measure);
}

namespace {

Eigen::VectorXd rho_measure(const CoefficientProfile& profile) {
  const auto w = profile.grid.weights();
  Eigen::VectorXd m(profile.grid.size());
  for (int k = 0; k < m.size(); ++k) m(k) = profile.rho[k] * w[k];
  return m;
}

void check_on_profile(const PhysicalField& u, const CoefficientProfile& profile) {
  if (u.space_nodes() != profile.grid.size()) {
    throw Error(ErrorCode::ShapeMismatch, "field grid does not match profile grid");
  }
}

}  // namespace

double inner_product(const PhysicalField& u, const PhysicalField& v,
                     const CoefficientProfile& profile) {
  if (u.values.rows() != v.values.rows() || u.values.cols() != v.values.cols() ||
      u.period != v.period) {
    throw Error(ErrorCode::ShapeMismatch, "physical fields sampled on different grids");
  }
  check_on_profile(u, profile);
  const double dt = u.period / u.time_nodes();
  return dt * ((u.values.array() * v.values.array()).colwise().sum().matrix() *
               rho_measure(profile))(0);
}

double l1_norm(const PhysicalField& u, const CoefficientProfile& profile) {
  check_on_profile(u, profile);
  const double dt = u.period / u.time_nodes();
  return dt * (u.values.cwiseAbs().colwise().sum() * rho_measure(profile))(0);
}

double sup_norm(const PhysicalField& u) {
  return u.values.size() == 0 ? 0.0 : u.values.cwiseAbs().maxCoeff();
}

void add_real_mode(FourierField& u, const FrequencySpec& freq, int m, int n, double c,
                   double s) {
  if (m < 0 || m > u.m_max() || n < 1 || n > u.modes()) {
    throw Error(ErrorCode::InvalidArgument, "mode outside truncation");
  }
  const double root_t = std::sqrt(freq.period());
  if (m == 0) {
    u(0, n) += root_t * c;
    return;
  }
  // c cos + s sin = Re((c - i s) e^{i theta t}).
  const std::complex<double> z = 0.5 * root_t * std::complex<double>(c, -s);
  u(m, n) += z;
  u(-m, n) += std::conj(z);
}

FourierField random_hermitian_field(int m_max, int modes, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  FourierField u(m_max, modes);
  for (int n = 1; n <= modes; ++n) {
    u(0, n) = normal(rng);
    for (int m = 1; m <= m_max; ++m) {
      const double re = normal(rng);
      const double im = normal(rng);
      u(m, n) = {re, im};
      u(-m, n) = {re, -im};
    }
  }
  return u;
}

}  // namespace pbeam
