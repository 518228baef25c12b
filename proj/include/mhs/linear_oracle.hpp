#pragma once

// linear_oracle: closed-form solver of the linearized problem (flat flow,
// z-independent current). Kept on an independent code path from the nonlinear
// pipeline (no shared multiplier helpers beyond the FFT) so agreement between
// the two is a genuine cross-check.

#include "mhs/boundary.hpp"
#include "mhs/current_eq.hpp"
#include "mhs/divcurl.hpp"
#include "mhs/grid.hpp"

namespace mhs {

struct LinearSolution {
  CurrentBoundary j0;
  VectorField3 Z;
  VectorField3 B;      // the perturbation field: curl Z + <f> e3 (+ flux terms)
  VectorField3 dBdz;   // analytic z-derivatives
  Fluxes flux;
  double res_curl = 0.0;   // ||curl B - j0||_inf, analytic z-derivatives
  double res_div = 0.0;
  double res_bn_minus = 0.0, res_bn_plus = 0.0;
  double res_btau = 0.0;   // ||(B1,B2)|_{z=0} - g||_inf
};

CurrentBoundary linear_j0(const BoundaryData& data, const DerivedBoundary& derived,
                          double L);

// J1 = pi L^2 <G2>, J2 = pi L^2 <G1>.
Fluxes linear_fluxes(const DerivedBoundary& derived, double L);

// Closed-form vector potential and field on the given slab grid.
LinearSolution linear_field(const CurrentBoundary& j0, const DerivedBoundary& derived,
                            const Fluxes& flux, const SlabGrid3& grid);

// Full oracle run.
LinearSolution linear_solve(const BoundaryData& data, const SlabGrid3& grid);

}  // namespace mhs
