#include "pbeam/grid.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "pbeam/error.hpp"

namespace pbeam {

namespace {

constexpr int kQ = SpatialGrid::kPointsPerElement;

const std::array<double, kQ>& lobatto_points() {
  static const std::array<double, kQ> pts = [] {
    const double g = std::sqrt(3.0 / 7.0);
    const std::array<double, kQ> ref{-1.0, -g, 0.0, g, 1.0};
    std::array<double, kQ> out{};
    for (int i = 0; i < kQ; ++i) out[i] = 0.5 * (ref[i] + 1.0);
    return out;
  }();
  return pts;
}

const std::array<double, kQ>& lobatto_weights() {
  static const std::array<double, kQ> w{0.05, 49.0 / 180.0, 16.0 / 45.0,
                                        49.0 / 180.0, 0.05};
  return w;
}

// cum[q][j] = int_0^{s_q} l_j(s) ds on the unit cell, l_j the Lagrange
// basis on the Lobatto points.
const Eigen::Matrix<double, kQ, kQ>& cumulative_weights() {
  static const Eigen::Matrix<double, kQ, kQ> cum = [] {
    const auto& s = lobatto_points();
    Eigen::Matrix<double, kQ, kQ> vander;
    for (int i = 0; i < kQ; ++i)
      for (int k = 0; k < kQ; ++k) vander(i, k) = std::pow(s[i], k);
    // Column j of coeffs holds the monomial coefficients of l_j.
    const Eigen::Matrix<double, kQ, kQ> coeffs =
        vander.fullPivLu().solve(Eigen::Matrix<double, kQ, kQ>::Identity());
    Eigen::Matrix<double, kQ, kQ> out;
    for (int q = 0; q < kQ; ++q) {
      for (int j = 0; j < kQ; ++j) {
        double acc = 0.0;
        for (int k = 0; k < kQ; ++k)
          acc += coeffs(k, j) * std::pow(s[q], k + 1) / (k + 1);
        out(q, j) = acc;
      }
    }
    return out;
  }();
  return cum;
}

}  // namespace

std::span<const double> SpatialGrid::reference_points() noexcept {
  return lobatto_points();
}

std::span<const double> SpatialGrid::reference_weights() noexcept {
  return lobatto_weights();
}

SpatialGrid SpatialGrid::composite_lobatto(int elements) {
  if (elements < 1)
    throw Error(ErrorCode::InvalidArgument,
                "composite grid needs at least one element, got " +
                    std::to_string(elements));
  SpatialGrid grid;
  grid.elements_ = elements;
  const int n = elements * (kQ - 1) + 1;
  grid.nodes_.assign(n, 0.0);
  grid.weights_.assign(n, 0.0);
  const double h = std::numbers::pi / elements;
  const auto& s = lobatto_points();
  const auto& w = lobatto_weights();
  for (int e = 0; e < elements; ++e) {
    for (int q = 0; q < kQ; ++q) {
      const int k = grid.node_index(e, q);
      grid.nodes_[k] = (e + s[q]) * h;
      grid.weights_[k] += w[q] * h;
    }
  }
  grid.nodes_.back() = std::numbers::pi;
  grid.validate();
  return grid;
}

SpatialGrid::SpatialGrid(std::vector<double> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  validate();
}

double SpatialGrid::element_width() const noexcept {
  return elements_ > 0 ? std::numbers::pi / elements_ : 0.0;
}

void SpatialGrid::validate() const {
  if (nodes_.size() < 2 || nodes_.size() != weights_.size())
    throw Error(ErrorCode::ShapeMismatch,
                "grid needs >= 2 nodes and one weight per node");
  if (nodes_.front() != 0.0 || std::abs(nodes_.back() - std::numbers::pi) > 1e-14)
    throw Error(ErrorCode::InvalidArgument, "grid must span exactly [0, pi]");
  double total = 0.0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (k > 0 && !(nodes_[k] > nodes_[k - 1]))
      throw Error(ErrorCode::InvalidArgument, "grid nodes must increase strictly");
    if (!(weights_[k] > 0.0))
      throw Error(ErrorCode::InvalidArgument, "grid weights must be positive");
    total += weights_[k];
  }
  if (std::abs(total - std::numbers::pi) > 1e-12 * std::numbers::pi)
    throw Error(ErrorCode::InvalidArgument, "grid weights must sum to pi");
}

std::vector<double> SpatialGrid::cumulative_integral(std::span<const double> f) const {
  if (static_cast<int>(f.size()) != size())
    throw Error(ErrorCode::ShapeMismatch, "cumulative_integral: sample count mismatch");
  std::vector<double> out(f.size(), 0.0);
  if (elements_ == 0) {
    for (std::size_t k = 1; k < f.size(); ++k)
      out[k] = out[k - 1] + 0.5 * (nodes_[k] - nodes_[k - 1]) * (f[k] + f[k - 1]);
    return out;
  }
  const auto& cum = cumulative_weights();
  const double h = element_width();
  for (int e = 0; e < elements_; ++e) {
    const int base = node_index(e, 0);
    const double start = out[base];
    for (int q = 1; q < kQ; ++q) {
      double acc = 0.0;
      for (int j = 0; j < kQ; ++j) acc += cum(q, j) * f[base + j];
      out[base + q] = start + h * acc;
    }
  }
  return out;
}

double SpatialGrid::integrate(std::span<const double> f) const {
  if (static_cast<int>(f.size()) != size())
    throw Error(ErrorCode::ShapeMismatch, "integrate: sample count mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += weights_[k] * f[k];
  return acc;
}

}  // namespace pbeam
