#pragma once

// boundary_data: validation of the Grad-Rubin data (f,g) and construction of
// the derived surface functions h_l^+-, the Z-script traces, the G_l fields
// and the third inflow current component.

#include "mhs/grid.hpp"

namespace mhs {

struct BoundaryData {
  ScalarField2 f_minus;  // B.n - 1 at z = 0
  ScalarField2 f_plus;   // B.n - 1 at z = L
  VectorField2 g;        // tangential trace (g1,g2) at z = 0
};

struct DerivedBoundary {
  ScalarField2 h1_minus, h1_plus, h2_minus, h2_plus;
  ScalarField2 Z1_script, Z2_script;
  ScalarField2 G1, G2;
  ScalarField2 j0_3;
};

struct ValidateOptions {
  double mean_tol = 1e-10;   // |<f_minus> - <f_plus>| gate
  double M_max = 0.1;        // Hoelder smallness gate
  double alpha = 0.5;        // exponent for the Hoelder estimate
};

// Throws CompatibilityViolation / SmallnessViolation.
void validate(const BoundaryData& data, const ValidateOptions& opt);

// Antiderivative constructions of paper-style h functions:
//   h2 = int_0^x f - (x/2pi) int_0^{2pi} f,   per face;
//   h1 = -(1/2pi) int_0^y int f dx dt + (y/(2pi)^2) int int f,  per face.
void build_h(const BoundaryData& data, DerivedBoundary& out);

// Mode-wise four-term sums carrying the h data to the tangential traces.
void build_Z_script(const DerivedBoundary& h, double L, DerivedBoundary& out);

// G_l = T0^{-1} (g_l - Z_l).
void build_G(const BoundaryData& data, double L, DerivedBoundary& out);

// j0^3 = d1 g2 - d2 g1 (spectral derivatives; mean-free by construction).
ScalarField2 j0_third(const VectorField2& g);

// Convenience: full derived-boundary build.
DerivedBoundary build_derived(const BoundaryData& data, double L);

}  // namespace mhs
