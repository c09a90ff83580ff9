#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>

namespace pbeam {

/// Rational period T = 2 pi p / q with temporal truncation |m| <= m_max.
/// Temporal frequencies are theta_m = 2 pi m / T = q m / p.
struct FrequencySpec {
  int p = 1;
  int q = 1;
  int m_max = 0;

  /// Validates p, q >= 1, gcd(p, q) = 1 and m_max >= 0.
  static FrequencySpec make(int p, int q, int m_max);

  double period() const noexcept { return 2.0 * std::numbers::pi * p / q; }
  double theta(int m) const noexcept { return static_cast<double>(q) * m / p; }
  int temporal_modes() const noexcept { return 2 * m_max + 1; }
};

/// Coefficients u_{mn} of a space-time field in the basis
/// T^{-1/2} e^{i theta_m t} phi_n(x), |m| <= m_max, 1 <= n <= modes.
/// Real fields satisfy u_{-m,n} = conj(u_{m,n}).
class FourierField {
 public:
  FourierField() = default;
  FourierField(int m_max, int modes)
      : m_max_(m_max), coeff_(Eigen::MatrixXcd::Zero(2 * m_max + 1, modes)) {}

  int m_max() const noexcept { return m_max_; }
  int modes() const noexcept { return static_cast<int>(coeff_.cols()); }
  Eigen::Index size() const noexcept { return coeff_.size(); }

  std::complex<double>& operator()(int m, int n) { return coeff_(m + m_max_, n - 1); }
  const std::complex<double>& operator()(int m, int n) const {
    return coeff_(m + m_max_, n - 1);
  }

  Eigen::MatrixXcd& coeff() noexcept { return coeff_; }
  const Eigen::MatrixXcd& coeff() const noexcept { return coeff_; }

  bool same_shape(const FourierField& other) const noexcept {
    return m_max_ == other.m_max_ && modes() == other.modes();
  }

  /// L2(Omega) norm with the rho-weighted measure (Parseval).
  double norm() const { return coeff_.norm(); }

  /// max |u_{-m,n} - conj(u_{m,n})|.
  double hermitian_defect() const;
  /// Replace the field by its real part: (u_{m,n} + conj(u_{-m,n})) / 2.
  void make_hermitian();

  FourierField& operator+=(const FourierField& o);
  FourierField& operator-=(const FourierField& o);
  FourierField& operator*=(double s) {
    coeff_ *= s;
    return *this;
  }
  friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
  friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
  friend FourierField operator*(double s, FourierField a) { return a *= s; }

 private:
  int m_max_ = 0;
  Eigen::MatrixXcd coeff_;
};

/// Samples of a real field on uniform time nodes t_j = j T / nt, j < nt,
/// times the spatial grid nodes: values(j, k) = u(t_j, x_k).
struct PhysicalField {
  double period = 0.0;
  Eigen::MatrixXd values;

  int time_nodes() const noexcept { return static_cast<int>(values.rows()); }
  int space_nodes() const noexcept { return static_cast<int>(values.cols()); }
  double time(int j) const noexcept { return period * j / time_nodes(); }
};

}  // namespace pbeam
