#pragma once

#include <random>

#include "pbeam/coefficients.hpp"
#include "pbeam/eigensolver.hpp"
#include "pbeam/field.hpp"

namespace pbeam {

/// 2 m_max + 2 uniform time nodes: one above the Nyquist count.
inline int default_time_nodes(const FrequencySpec& freq) { return 2 * freq.m_max + 2; }

/// values(t_j, x_k) = sum u_mn T^{-1/2} e^{i theta_m t_j} phi_n(x_k).
/// time_nodes <= 0 selects the default count.
PhysicalField synthesize(const FourierField& u, const BeamSpectrum& spectrum,
                         const FrequencySpec& freq, int time_nodes = 0);

/// u_mn = (T / nt) sum_j sum_k v(t_j, x_k) T^{-1/2} e^{-i theta_m t_j}
///        phi_n(x_k) rho_k w_k.
/// The rho-weighted measure is taken from the spectrum, which is built
/// on the same profile and grid.
FourierField analyze(const PhysicalField& field, const BeamSpectrum& spectrum,
                     const FrequencySpec& freq);

/// Same projection with the plain length measure w_k in place of rho_k w_k:
/// the coefficients of int v psi-bar dx dt against the basis functions.
FourierField analyze_unweighted(const PhysicalField& field, const BeamSpectrum& spectrum,
                                const FrequencySpec& freq);

/// int_Omega u v rho dt dx by the trapezoid rule in t and grid quadrature in x.
double inner_product(const PhysicalField& u, const PhysicalField& v,
                     const CoefficientProfile& profile);

/// int_Omega |u| rho dt dx.
double l1_norm(const PhysicalField& u, const CoefficientProfile& profile);
double sup_norm(const PhysicalField& u);

/// Adds (c cos(theta_m t) + s sin(theta_m t)) phi_n(x) for m >= 0.
void add_real_mode(FourierField& u, const FrequencySpec& freq, int m, int n, double c,
                   double s = 0.0);

/// I.i.d. standard normal coefficients on independent modes, Hermitian
/// symmetrized so the field is real.
FourierField random_hermitian_field(int m_max, int modes, std::mt19937_64& rng);

}  // namespace pbeam
