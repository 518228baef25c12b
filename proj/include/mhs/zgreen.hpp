#pragma once

// One-dimensional machinery for the mode-wise vertical problems
//   -u'' + a^2 u = rho(z) on [0,L], u(0)=u(L)=0,
// solved exactly against the cubic-spline interpolant of rho, with analytic
// z-derivatives. All exponentials are of non-positive argument.

#include <array>
#include <vector>

namespace mhs {

struct SplineZ {
  int panels = 0;
  double h = 0.0;
  std::vector<double> y;                    // node values
  std::vector<std::array<double, 4>> c;     // per-panel monomial coeffs in t in [0,h]
};

SplineZ build_spline(const std::vector<double>& values, double h);

// I[i] = int_0^L G(a; z_i, z0) S(z0) dz0 and dI[i] = d/dz at z_i, where G is
// the Dirichlet Green function of -d^2/dz^2 + a^2 on [0,L].
void green_apply(const SplineZ& rho, double a, double L, std::vector<double>& I,
                 std::vector<double>& dI);

// Homogeneous-solution interpolants carrying boundary data and derivatives:
//   sigma_minus = sinh(a(L-z))/sinh(aL), sigma_plus = sinh(az)/sinh(aL),
// with a->0 limits (L-z)/L and z/L.
double sigma_minus(double a, double L, double z);
double sigma_plus(double a, double L, double z);
double dsigma_minus(double a, double L, double z);
double dsigma_plus(double a, double L, double z);

// (sinh(aL)-sinh(az)-sinh(a(L-z)))/(a^2 sinh(aL)) and its z-derivative;
// a->0 limits z(L-z)/2 and L/2 - z.
double bracket_B(double a, double L, double z);
double bracket_dB(double a, double L, double z);

}  // namespace mhs
