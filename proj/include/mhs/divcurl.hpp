#pragma once

// divcurl: curl W = j, div W = 0, W.n = f on the slab with the two horizontal
// flux degrees of freedom, via the mode-wise vector potential. The vertical
// problems are solved exactly against the cubic-spline interpolant of each
// Fourier coefficient, so W carries analytic z-derivatives.

#include <array>
#include <vector>

#include "mhs/boundary.hpp"
#include "mhs/grid.hpp"

namespace mhs {

struct Fluxes {
  double J1 = 0.0;
  double J2 = 0.0;
};

struct DivCurlOptions {
  double slice_mean_tol = 1e-6;  // gate on per-slice means of j3 (relative)
};

struct VectorPotential {
  SlabGrid3 grid;
  // per component, per z level, spectral coefficients of Z and dZ/dz
  std::array<std::vector<SpectralField2>, 3> Z;
  std::array<std::vector<SpectralField2>, 3> dZ;
  // second z-derivatives of Z1, Z2 at the nodes (= a^2 Z - j by the ODE)
  std::array<std::vector<SpectralField2>, 2> d2Z;
};

struct DivCurlSolution {
  VectorField3 W;
  VectorField3 dWdz;  // analytic z-derivative of W
  Fluxes realized;
  double res_curl = 0.0;      // ||curl W - j||_inf
  double res_div = 0.0;       // ||div W||_inf
  double res_bn_minus = 0.0;  // ||W3|_{z=0} - f_minus||_inf
  double res_bn_plus = 0.0;   // ||W3|_{z=L} - f_plus||_inf
};

// Z1,Z2 from the Dirichlet Green solve with boundary data h; Z3 from the
// divergence-free relation (Z3 mean column set to zero). Throws
// SliceMeanViolation when a z slice of j3 has a non-negligible mean.
VectorPotential solve_vector_potential(const VectorField3& j, const DerivedBoundary& derived,
                                       const DivCurlOptions& opt = {});

// W = curl Z + f_mean e3 + A1 e1 + A2 e2, with analytic z-derivatives.
void assemble_field(const VectorPotential& pot, double f_mean, double A1, double A2,
                    VectorField3& W, VectorField3& dWdz);

// Harmonic constants fixed by prescribed fluxes J1, J2.
DivCurlSolution divcurl_solve(const VectorField3& j, const BoundaryData& data,
                              const Fluxes& flux, const DivCurlOptions& opt = {});

// Harmonic constants fixed by the tangential-trace means <W_l|_{z=0}> = <g_l>
// (the gamma-step variant; fluxes are realized, not prescribed).
DivCurlSolution divcurl_solve_for_traces(const VectorField3& j, const BoundaryData& data,
                                         const DerivedBoundary& derived,
                                         const DivCurlOptions& opt = {});

// Realized fluxes of a field: integrals over the x=0 and y=0 sections
// (exact in the periodic directions, trapezoid in z).
Fluxes measure_fluxes(const VectorField3& W);

}  // namespace mhs
