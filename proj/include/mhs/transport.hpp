#pragma once

// transport: characteristics of the current transport equation in the slab,
// flow inversion, the fundamental-matrix solve along characteristics and the
// splitting j = jbar + delta_j.

#include <vector>

#include "mhs/boundary.hpp"
#include "mhs/grid.hpp"

namespace mhs {

struct FlowOptions {
  double flow_tol = 1e-10;  // Newton residual for the inverse map
  int max_newton = 50;
  double b3_margin = 0.1;  // require max|b3| <= 1 - margin
};

// How off-grid surface values are evaluated. Bicubic is the production
// choice; Trig evaluates the trigonometric interpolant exactly (used where
// the flow map and its spectral Jacobian must be the same discrete object).
enum class FlowEval { Bicubic, Trig };

// Per z-level flow data, all in label space:
//   Psi_z(eta) = eta + (lambda_x, lambda_y)(eta),  Theta = det(I+grad Lambda)-1,
//   Psi_z^{-1}(r) = r + (inv_x, inv_y)(r).
struct FlowData {
  SlabGrid3 grid;
  std::vector<ScalarField2> lambda_x, lambda_y;
  std::vector<ScalarField2> theta;
  std::vector<ScalarField2> inv_x, inv_y;
  bool inverted = false;

  int levels() const { return grid.levels(); }
};

// RK4 flow of dX/dz = b1/(1+b3), dY/dz = b2/(1+b3) from the identity at z=0,
// velocity interpolated bicubically in (x,y) and linearly between z levels.
// Throws FieldTooLarge / StepFailure.
FlowData integrate_flow(const VectorField3& b, const FlowOptions& opt = {});

// Per-level Newton inversion of Psi_z; fills inv_x/inv_y.
void invert_flow(FlowData& flow, const FlowOptions& opt = {},
                 FlowEval eval = FlowEval::Bicubic);

// Full current: w solves dw/dz = A(b(Phi)) w with w(0)=j0, then j = w o Phi^{-1}.
// j0 components are (j0_1, j0_2, j0_3) sampled on the surface grid.
VectorField3 transport_solve(const VectorField3& b, const FlowData& flow,
                             const std::array<ScalarField2, 3>& j0,
                             const FlowOptions& opt = {});

// Perturbation part only: integrates d(w-j0)/dz = A(w-j0) + A j0 from zero
// data; delta_j = (w-j0) o Phi^{-1}.
VectorField3 transport_delta(const VectorField3& b, const FlowData& flow,
                             const std::array<ScalarField2, 3>& j0,
                             const FlowOptions& opt = {});

// z-independent advection of a surface field: ubar(r,z) = u(Psi_z^{-1}(r)).
ScalarField3 pullback_surface(const FlowData& flow, const ScalarField2& u,
                              FlowEval eval = FlowEval::Bicubic);

// max over z levels of ||div j||_inf (spectral in x,y; FD4 in z).
double check_div_transport(const VectorField3& j);

}  // namespace mhs
