#pragma once

// current_equation: the nonlocal integral equation for the inflow current.
// Operator A, the kernel decomposition T0 + sum T_kappa, the perturbation
// operators S and H*, the right-hand sides, the linear map Upsilon and its
// Neumann inversion.

#include <array>
#include <complex>
#include <vector>

#include "mhs/boundary.hpp"
#include "mhs/divcurl.hpp"
#include "mhs/grid.hpp"
#include "mhs/transport.hpp"

namespace mhs {

struct CurrentBoundary {
  ScalarField2 j0_1, j0_2, j0_3;

  std::array<ScalarField2, 3> as_array() const { return {j0_1, j0_2, j0_3}; }
};

struct CurrentOptions {
  int n_s = 32;           // Gauss-Legendre nodes for the s-integrals
  double j0_tol = 1e-10;  // Neumann stop on ||u_{k+1}-u_k||_inf
  int max_neumann = 200;
  double damping = 1.0;
  FlowOptions flow;
};

// Per-mode, per-surface-node kernel coefficients c_kappa(xi,eta), signed so
// that a_xi(eta) = m(xi) + sum_kappa c_kappa(xi,eta); at Lambda=Theta=0 all
// c_kappa vanish.
struct KernelCoeffs {
  TorusGrid2 grid;
  double L = 0.0;
  std::array<std::vector<std::complex<double>>, 4> c;  // [kappa][mode*nodes+node]
  std::vector<double> s_nodes, s_weights;              // cached quadrature rule
  double tail_bound = 0.0;  // max band-edge coefficient mass (diagnostic)
};

// (A theta)(r) = sum_xi e^{ir.xi}/(2pi)^2  int_0^L sinh(|xi|(L-z0))/sinh(|xi|L)
//                theta_hat(xi,z0) dz0, trapezoid on theta's own z grid.
ScalarField2 op_A_apply(const ScalarField3& theta);

KernelCoeffs build_kernel_coeffs(const FlowData& flow, const CurrentOptions& opt = {});

// T_kappa with the leading T0^{-1} folded in (kappa in 1..4).
ScalarField2 t_kappa_apply(int kappa, const KernelCoeffs& kc, const ScalarField2& u);
// sum over kappa of T0^{-1} T_kappa u
ScalarField2 t_sum_apply(const KernelCoeffs& kc, const ScalarField2& u);

// S pair from a transported perturbation current delta_j:
//   S1 = T0^{-1}[ (mn/|xi|^2) A(dj1) + (n^2/|xi|^2 - 1) A(dj2) ]
//   S2 = T0^{-1}[ (m^2/|xi|^2 - 1) A(dj1) + (mn/|xi|^2) A(dj2) ]
std::array<ScalarField2, 2> op_S(const VectorField3& delta_j, double L);

// H* pair: B_y/B_x of q* = -d1(b3) j0^1 - d2(b3) j0^2 - b3 (d1 j0^1 + d2 j0^2),
// all coefficients traced at z=0.
std::array<ScalarField2, 2> op_H_star(const VectorField3& b, const CurrentBoundary& j0);

// Data term of the integral equation (independent of the unknown pair).
std::array<ScalarField2, 2> build_rhs(const VectorField3& b, const FlowData& flow,
                                      const BoundaryData& data, const DerivedBoundary& derived,
                                      const CurrentOptions& opt = {});

// The linear operator applied to u = (j0^1, j0^2); strictly linear (the j0^3
// contributions live in build_rhs).
std::array<ScalarField2, 2> upsilon_apply(const VectorField3& b, const FlowData& flow,
                                          const KernelCoeffs& kc, const BoundaryData& data,
                                          const std::array<ScalarField2, 2>& u,
                                          const CurrentOptions& opt = {});

struct J0Result {
  CurrentBoundary j0;
  int iterations = 0;
  double contraction = 0.0;  // last measured ratio ||d_{k+1}||/||d_k||
  double final_delta = 0.0;
  double constraint_residual = 0.0;  // divergence-constraint defect at the solution
};

// Neumann/fixed-point iteration u <- rhs + Upsilon u from u = rhs.
J0Result solve_j0(const VectorField3& b, const FlowData& flow, const KernelCoeffs& kc,
                  const BoundaryData& data, const DerivedBoundary& derived,
                  const CurrentOptions& opt = {});

// Flux values read off the xi=0 balance of the integral equation (labels
// follow the geometric convention: J1 pairs with the x=0 section).
Fluxes compute_fluxes(const CurrentBoundary& j0, const VectorField3& delta_j,
                      const BoundaryData& data, const DerivedBoundary& derived,
                      const KernelCoeffs& kc);

// Divergence-constraint residual at a candidate j0 (reported diagnostic).
double constraint_residual(const VectorField3& b, const CurrentBoundary& j0);

}  // namespace mhs
