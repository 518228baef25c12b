#pragma once

// fixed_point: the outer Gamma iteration, pressure reconstruction and the
// end-to-end residual report for the MHS system.

#include <map>
#include <string>

#include "mhs/boundary.hpp"
#include "mhs/config.hpp"
#include "mhs/current_eq.hpp"
#include "mhs/divcurl.hpp"
#include "mhs/grid.hpp"

namespace mhs {

struct DiagnosticsReport {
  double residual_curl = 0.0;   // ||curl B - j||_inf (FD4 z-derivatives)
  double residual_div = 0.0;    // ||div B||_inf
  double residual_bn = 0.0;     // worst normal-trace defect over both faces
  double residual_btau = 0.0;   // ||(B1,B2)|_{z=0} - g||_inf
  double residual_force = 0.0;  // ||j x B - grad p||_inf
  double pressure_mean_defect_x = 0.0;  // |<(j x B)_1>| at z=0
  double pressure_mean_defect_y = 0.0;  // |<(j x B)_2>| at z=0
  double contraction_estimate = 0.0;    // last Lipschitz quotient of Gamma
  double iterate_delta = 0.0;           // ||b_{n+1}-b_n||_inf at exit
  double holder_delta = 0.0;            // Hoelder-estimate delta (reported only)
  std::map<std::string, double> operator_norms;
};

struct SolverState {
  VectorField3 b;    // perturbation; B = (0,0,1) + b
  VectorField3 j;
  CurrentBoundary j0;
  Fluxes flux;       // realized fluxes of B
  ScalarField3 p;
  int iterate = 0;
  DiagnosticsReport diagnostics;
};

struct GammaStats {
  int neumann_iterations = 0;
  double neumann_contraction = 0.0;
  double kernel_tail = 0.0;
  double j0_constraint_residual = 0.0;
};

// One application of Gamma: flow -> kernels -> j0 -> transport -> div-curl.
VectorField3 gamma_step(const VectorField3& b, const BoundaryData& data,
                        const DerivedBoundary& derived, const SolverConfig& config,
                        SolverState* state = nullptr, GammaStats* stats = nullptr);

// Outer fixed-point iteration from b = 0. Throws NonConvergence.
SolverState solve(const BoundaryData& data, const SolverConfig& config);

// p(x,y,z) along the x -> y -> z contour from the origin, spectral
// antiderivatives in x,y and trapezoid in z; p(0,0,0) = 0.
// Throws PathDependence when curl(j x B) or the periodicity defects exceed tol.
ScalarField3 pressure_reconstruct(const VectorField3& B, const VectorField3& j,
                                  double tol = 1e-5);

// Recompute every residual of the report from the state fields.
DiagnosticsReport verify(const SolverState& state, const BoundaryData& data,
                         const SolverConfig& config);

// B = (0,0,1) + b.
VectorField3 full_field(const VectorField3& b);

}  // namespace mhs
