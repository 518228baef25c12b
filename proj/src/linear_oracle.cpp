#include "mhs/linear_oracle.hpp"

#include <cmath>
#include <complex>

#include "mhs/spectral.hpp"

namespace mhs {

namespace {

using cd = std::complex<double>;

// Local stable evaluations of the vertical profiles (kept separate from the
// production helpers on purpose).
struct Profiles {
  double sm, sp, dsm, dsp;  // sinh interpolants and their z-derivatives
  double br, dbr;           // (sinh aL - sinh az - sinh a(L-z))/(a^2 sinh aL), d/dz
};

Profiles profiles(double a, double L, double z) {
  Profiles p;
  if (a == 0.0) {
    p.sm = (L - z) / L;
    p.sp = z / L;
    p.dsm = -1.0 / L;
    p.dsp = 1.0 / L;
    p.br = 0.5 * z * (L - z);
    p.dbr = 0.5 * L - z;
    return p;
  }
  const double q = std::exp(-2.0 * a * L);
  const double ez = std::exp(-a * z), eLz = std::exp(-a * (L - z));
  const double e2Lz = std::exp(-a * (2.0 * L - z)), eLpz = std::exp(-a * (L + z));
  p.sm = (ez - e2Lz) / (1.0 - q);
  p.sp = (eLz - eLpz) / (1.0 - q);
  p.dsm = -a * (ez + e2Lz) / (1.0 - q);
  p.dsp = a * (eLz + eLpz) / (1.0 - q);
  p.br = (1.0 - p.sm - p.sp) / (a * a);
  p.dbr = -(p.dsm + p.dsp) / (a * a);
  return p;
}

}  // namespace

CurrentBoundary linear_j0(const BoundaryData& data, const DerivedBoundary& derived, double L) {
  (void)L;
  const TorusGrid2& g = data.g.grid;
  const SpectralField2 G1 = to_spectral(derived.G1), G2 = to_spectral(derived.G2);
  SpectralField2 j1(g), j2(g);
  const Fluxes J = linear_fluxes(derived, L);
  for (int ky = 0; ky < g.n_y; ++ky)
    for (int kx = 0; kx < g.n_x; ++kx) {
      const int idx = ky * g.n_x + kx;
      if (j1.is_nyquist(kx, ky)) continue;
      const double m = j1.mode_m(kx), n = j1.mode_n(ky);
      const double r2 = m * m + n * n;
      if (r2 == 0.0) {
        const double s = kTwoPi * kTwoPi;
        j1.coeffs[idx] = s * (mean(derived.G2) - J.J1 / (M_PI * L * L));
        j2.coeffs[idx] = s * (-mean(derived.G1) + J.J2 / (M_PI * L * L));
        continue;
      }
      j1.coeffs[idx] = (m * n / r2) * G1.coeffs[idx] + (n * n / r2) * G2.coeffs[idx];
      j2.coeffs[idx] = -(m * m / r2) * G1.coeffs[idx] - (m * n / r2) * G2.coeffs[idx];
    }
  CurrentBoundary out;
  out.j0_1 = from_spectral(j1);
  out.j0_2 = from_spectral(j2);
  out.j0_3 = derived.j0_3;
  return out;
}

Fluxes linear_fluxes(const DerivedBoundary& derived, double L) {
  Fluxes f;
  f.J1 = M_PI * L * L * mean(derived.G2);
  f.J2 = M_PI * L * L * mean(derived.G1);
  return f;
}

LinearSolution linear_field(const CurrentBoundary& j0, const DerivedBoundary& derived,
                            const Fluxes& flux, const SlabGrid3& grid) {
  const TorusGrid2& base = grid.base;
  const double L = grid.L;
  const int nl = grid.levels();

  const SpectralField2 J1h = to_spectral(j0.j0_1), J2h = to_spectral(j0.j0_2),
                       J3h = to_spectral(j0.j0_3);
  const SpectralField2 h1m = to_spectral(derived.h1_minus), h1p = to_spectral(derived.h1_plus);
  const SpectralField2 h2m = to_spectral(derived.h2_minus), h2p = to_spectral(derived.h2_plus);

  LinearSolution sol;
  sol.flux = flux;
  sol.Z = VectorField3(grid);
  sol.B = VectorField3(grid);
  sol.dBdz = VectorField3(grid);

  for (int iz = 0; iz < nl; ++iz) {
    const double z = grid.z(iz);
    SpectralField2 Z1(base), Z2(base), Z3(base), B1(base), B2(base), B3(base), D1(base),
        D2(base), D3(base);
    for (int ky = 0; ky < base.n_y; ++ky)
      for (int kx = 0; kx < base.n_x; ++kx) {
        const int idx = ky * base.n_x + kx;
        if (Z1.is_nyquist(kx, ky)) continue;
        const double m = Z1.mode_m(kx), n = Z1.mode_n(ky);
        const double r2 = m * m + n * n;
        const double a = std::sqrt(r2);
        const Profiles pr = profiles(a, L, z);
        const cd im_i(0.0, m), in_i(0.0, n);

        cd z1 = pr.br * J1h.coeffs[idx] + pr.sm * h1m.coeffs[idx] + pr.sp * h1p.coeffs[idx];
        cd z2 = pr.br * J2h.coeffs[idx] + pr.sm * h2m.coeffs[idx] + pr.sp * h2p.coeffs[idx];
        cd dz1 = pr.dbr * J1h.coeffs[idx] + pr.dsm * h1m.coeffs[idx] + pr.dsp * h1p.coeffs[idx];
        cd dz2 = pr.dbr * J2h.coeffs[idx] + pr.dsm * h2m.coeffs[idx] + pr.dsp * h2p.coeffs[idx];
        cd d2z1 = r2 * z1 - J1h.coeffs[idx];
        cd d2z2 = r2 * z2 - J2h.coeffs[idx];
        if (r2 == 0.0) {
          const double s = kTwoPi * kTwoPi;
          z1 += s * z * flux.J1 / (kTwoPi * L);
          z2 -= s * z * flux.J2 / (kTwoPi * L);
          dz1 += s * flux.J1 / (kTwoPi * L);
          dz2 -= s * flux.J2 / (kTwoPi * L);
        }
        cd z3 = 0.0, dz3 = 0.0;
        if (r2 > 0.0) {
          z3 = (J3h.coeffs[idx] - im_i * dz1 - in_i * dz2) / r2;
          dz3 = -im_i * z1 - in_i * z2;
        }
        Z1.coeffs[idx] = z1;
        Z2.coeffs[idx] = z2;
        Z3.coeffs[idx] = z3;
        B1.coeffs[idx] = in_i * z3 - dz2;
        B2.coeffs[idx] = dz1 - im_i * z3;
        B3.coeffs[idx] = im_i * z2 - in_i * z1;
        D1.coeffs[idx] = in_i * dz3 - d2z2;
        D2.coeffs[idx] = d2z1 - im_i * dz3;
        D3.coeffs[idx] = im_i * dz2 - in_i * dz1;
      }
    sol.Z.comp[0].set_level(iz, from_spectral(Z1));
    sol.Z.comp[1].set_level(iz, from_spectral(Z2));
    sol.Z.comp[2].set_level(iz, from_spectral(Z3));
    sol.B.comp[0].set_level(iz, from_spectral(B1));
    sol.B.comp[1].set_level(iz, from_spectral(B2));
    sol.B.comp[2].set_level(iz, from_spectral(B3));
    sol.dBdz.comp[0].set_level(iz, from_spectral(D1));
    sol.dBdz.comp[1].set_level(iz, from_spectral(D2));
    sol.dBdz.comp[2].set_level(iz, from_spectral(D3));
  }
  sol.j0 = j0;
  return sol;
}

LinearSolution linear_solve(const BoundaryData& data, const SlabGrid3& grid) {
  const DerivedBoundary derived = build_derived(data, grid.L);
  const CurrentBoundary j0 = linear_j0(data, derived, grid.L);
  const Fluxes flux = linear_fluxes(derived, grid.L);
  LinearSolution sol = linear_field(j0, derived, flux, grid);

  // add the vertical mean field <f> e3
  const double A = mean(data.f_minus);
  for (auto& v : sol.B.comp[2].values) v += A;

  // residual diagnostics (analytic z-derivatives, spectral x,y)
  const int nl = grid.levels(), ns = grid.base.size();
  double rc = 0.0, rd = 0.0;
  for (int iz = 0; iz < nl; ++iz) {
    const SpectralField2 s1 = to_spectral(sol.B.comp[0].level(iz));
    const SpectralField2 s2 = to_spectral(sol.B.comp[1].level(iz));
    const SpectralField2 s3 = to_spectral(sol.B.comp[2].level(iz));
    const ScalarField2 d2B3 = from_spectral(deriv_y(s3)), d1B3 = from_spectral(deriv_x(s3));
    const ScalarField2 d1B2 = from_spectral(deriv_x(s2)), d2B1 = from_spectral(deriv_y(s1));
    const ScalarField2 d1B1 = from_spectral(deriv_x(s1)), d2B2 = from_spectral(deriv_y(s2));
    for (int i = 0; i < ns; ++i) {
      const size_t k = size_t(iz) * ns + i;
      rc = std::max({rc,
                     std::abs(d2B3.values[i] - sol.dBdz.comp[1].values[k] - j0.j0_1.values[i]),
                     std::abs(sol.dBdz.comp[0].values[k] - d1B3.values[i] - j0.j0_2.values[i]),
                     std::abs(d1B2.values[i] - d2B1.values[i] - j0.j0_3.values[i])});
      rd = std::max(rd, std::abs(d1B1.values[i] + d2B2.values[i] +
                                 sol.dBdz.comp[2].values[k]));
    }
  }
  sol.res_curl = rc;
  sol.res_div = rd;
  double bm = 0.0, bp = 0.0, bt = 0.0;
  for (int i = 0; i < ns; ++i) {
    const size_t ktop = size_t(nl - 1) * ns + i;
    bm = std::max(bm, std::abs(sol.B.comp[2].values[i] - data.f_minus.values[i]));
    bp = std::max(bp, std::abs(sol.B.comp[2].values[ktop] - data.f_plus.values[i]));
    bt = std::max({bt, std::abs(sol.B.comp[0].values[i] - data.g[0].values[i]),
                   std::abs(sol.B.comp[1].values[i] - data.g[1].values[i])});
  }
  sol.res_bn_minus = bm;
  sol.res_bn_plus = bp;
  sol.res_btau = bt;
  return sol;
}

}  // namespace mhs
