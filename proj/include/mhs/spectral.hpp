#pragma once

// spectral_core: transforms between nodal and Fourier representations on T^2
// and the Fourier-multiplier operators used throughout the solver.

#include <complex>
#include <functional>

#include "mhs/grid.hpp"

namespace mhs {

// Forward transform, paper convention: no prefactor on the forward integral,
// 1/(2*pi)^2 on the inverse sum.
SpectralField2 to_spectral(const ScalarField2& field);

// Inverse transform; throws SymmetryViolation when the reconstruction has a
// relative imaginary residue above 1e-10 (broken conjugate symmetry).
ScalarField2 from_spectral(const SpectralField2& s);

// coeffs(xi) <- mu(m,n) * coeffs(xi). Nyquist rows/columns are zeroed.
using Multiplier = std::function<std::complex<double>(int m, int n)>;
SpectralField2 apply_multiplier(const SpectralField2& s, const Multiplier& mu);

// Riesz transforms, multiplier -i*xi_j/|xi| (0 at xi=0).
SpectralField2 riesz_x(const SpectralField2& s);
SpectralField2 riesz_y(const SpectralField2& s);

// Degree -1 multipliers -i*xi_j/|xi|^2 (0 at xi=0).
SpectralField2 op_B_x(const SpectralField2& s);
SpectralField2 op_B_y(const SpectralField2& s);

// Spectral partial derivatives (multipliers i*m, i*n).
SpectralField2 deriv_x(const SpectralField2& s);
SpectralField2 deriv_y(const SpectralField2& s);

// The slab multiplier m(xi) = (cosh(|xi|L)-1)/(|xi| sinh(|xi|L))
//                           = tanh(|xi|L/2)/|xi|,  m(0) = L/2.
// Nonvanishing on every mode, hence exactly invertible.
double t0_multiplier(double xi_norm, double L);
SpectralField2 t0_apply(const SpectralField2& s, double L);
SpectralField2 t0_inverse(const SpectralField2& s, double L);

// Nodal convenience wrappers.
ScalarField2 deriv_x(const ScalarField2& f);
ScalarField2 deriv_y(const ScalarField2& f);
ScalarField2 t0_inverse(const ScalarField2& f, double L);

// Grid mean <f> = (1/(2*pi)^2) * quadrature of f.
double mean(const ScalarField2& f);
// <f g> by the same quadrature.
double mean_product(const ScalarField2& f, const ScalarField2& g);

// Discrete proxy for the C^{k,alpha} norm: max over nodes of all spectral
// derivatives up to order k plus the alpha seminorms of the order-k
// derivatives over node pairs within `distance_cap` (torus metric in x,y,
// straight in z; cap <= 0 means no cap). z derivatives of 3-D fields use
// 4th-order finite differences.
double holder_norm_estimate(const ScalarField2& f, int k, double alpha,
                            double distance_cap = 0.0);
double holder_norm_estimate(const ScalarField3& f, int k, double alpha,
                            double distance_cap = 0.0);

// Parseval check helper: sum |coeffs|^2/(2*pi)^2 (equals the grid quadrature
// of f^2 for real fields).
double spectral_energy(const SpectralField2& s);

// z derivative of a slab field, 4th-order finite differences (one-sided at
// the boundary levels).
ScalarField3 deriv_z_fd4(const ScalarField3& f);

}  // namespace mhs
