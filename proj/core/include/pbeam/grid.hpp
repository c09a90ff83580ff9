#pragma once

#include <span>
#include <vector>

namespace pbeam {

/// Quadrature grid on [0, pi].
///
/// The default layout is a composite Gauss-Lobatto grid: the interval is
/// split into `elements` equal cells and each cell carries the five
/// Lobatto points of degree-7 exactness. Adjacent cells share their
/// endpoint, so there are 4*elements + 1 nodes. The weights of this grid
/// are the discrete measure used by every inner product in the library.
class SpatialGrid {
 public:
  static constexpr int kPointsPerElement = 5;

  /// Composite Gauss-Lobatto grid with the given number of cells.
  static SpatialGrid composite_lobatto(int elements);

  /// Arbitrary grid; validated against the grid invariants. Grids built
  /// this way have no element structure and cannot host an eigensolve.
  SpatialGrid(std::vector<double> nodes, std::vector<double> weights);

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  int size() const noexcept { return static_cast<int>(nodes_.size()); }

  /// Number of cells; 0 for grids without element structure.
  int elements() const noexcept { return elements_; }
  bool has_elements() const noexcept { return elements_ > 0; }
  double element_width() const noexcept;

  /// Global node index of local point q in cell e.
  int node_index(int element, int local) const noexcept {
    return element * (kPointsPerElement - 1) + local;
  }

  /// Running integral F(x_k) = int_0^{x_k} f dx, exact for piecewise
  /// polynomials of degree <= 4 on composite grids (trapezoid otherwise).
  /// The final entry equals sum(weights * f) up to round-off.
  std::vector<double> cumulative_integral(std::span<const double> f) const;

  double integrate(std::span<const double> f) const;

  /// Reference Lobatto abscissae on [0, 1] and weights summing to 1.
  static std::span<const double> reference_points() noexcept;
  static std::span<const double> reference_weights() noexcept;

 private:
  SpatialGrid() = default;
  void validate() const;

  std::vector<double> nodes_;
  std::vector<double> weights_;
  int elements_ = 0;
};

}  // namespace pbeam
