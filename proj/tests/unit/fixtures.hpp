#pragma once

#include <cmath>
#include <numbers>

#include "pbeam/coefficients.hpp"
#include "pbeam/eigensolver.hpp"
#include "pbeam/nonlinear_solver.hpp"
#include "pbeam/spectral_operator.hpp"

namespace fixture {

inline constexpr int kReferenceResolution = 256;

inline pbeam::CoefficientProfile constant_profile(int elements = kReferenceResolution) {
  const pbeam::ProfileRecipe recipe{pbeam::constant_preset(), 1.0, false, false};
  return recipe.build(pbeam::SpatialGrid::composite_lobatto(elements));
}

inline pbeam::ProfileRecipe sine_recipe() {
  return {pbeam::sine_perturbed_preset({0.0, 0.1, 2.0, 0.0},
                                       {0.05, 0.1, 1.0, std::numbers::pi / 2.0}),
          1.1, true, true};
}

inline pbeam::SpectralContext constant_context(int modes, int m_max, int p = 1, int q = 1,
                                               int elements = kReferenceResolution) {
  pbeam::CoefficientProfile profile = constant_profile(elements);
  pbeam::BeamSpectrum s = pbeam::solve_eigenproblem(profile, modes);
  pbeam::LambdaLattice lat = pbeam::assemble_lattice(s, pbeam::FrequencySpec::make(p, q, m_max));
  return {std::move(profile), std::move(s), std::move(lat)};
}

}  // namespace fixture
