#include "mhs/divcurl.hpp"

#include <cmath>
#include <complex>

#include "mhs/errors.hpp"
#include "mhs/spectral.hpp"
#include "mhs/zgreen.hpp"

namespace mhs {

namespace {

using cd = std::complex<double>;

std::vector<SpectralField2> slice_spectra(const ScalarField3& f, bool zero_nyquist) {
  const int nl = f.grid.levels();
  std::vector<SpectralField2> out;
  out.reserve(nl);
  for (int iz = 0; iz < nl; ++iz) {
    SpectralField2 s = to_spectral(f.level(iz));
    if (zero_nyquist) {
      for (int ky = 0; ky < s.grid.n_y; ++ky)
        for (int kx = 0; kx < s.grid.n_x; ++kx)
          if (s.is_nyquist(kx, ky)) s.coeffs[size_t(ky) * s.grid.n_x + kx] = 0.0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

VectorPotential solve_vector_potential(const VectorField3& j, const DerivedBoundary& derived,
                                       const DivCurlOptions& opt) {
  const SlabGrid3& g = j.grid;
  const TorusGrid2& base = g.base;
  const int nl = g.levels();
  const double L = g.L;

  std::array<std::vector<SpectralField2>, 3> jh;
  for (int c = 0; c < 3; ++c) jh[c] = slice_spectra(j.comp[c], true);

  // slice-mean compatibility of j3
  const double jscale = std::max(1.0, max_abs(j));
  for (int iz = 0; iz < nl; ++iz) {
    const double m = std::abs(jh[2][iz].coeffs[0]) / (kTwoPi * kTwoPi);
    if (m > opt.slice_mean_tol * jscale)
      throw SliceMeanViolation("solve_vector_potential: slice mean of j3 at level " +
                               std::to_string(iz) + " is " + std::to_string(m));
  }

  const SpectralField2 h1m = to_spectral(derived.h1_minus), h1p = to_spectral(derived.h1_plus);
  const SpectralField2 h2m = to_spectral(derived.h2_minus), h2p = to_spectral(derived.h2_plus);

  VectorPotential pot;
  pot.grid = g;
  for (int c = 0; c < 3; ++c) {
    pot.Z[c].assign(nl, SpectralField2(base));
    pot.dZ[c].assign(nl, SpectralField2(base));
  }
  for (int c = 0; c < 2; ++c) pot.d2Z[c].assign(nl, SpectralField2(base));

  const int nmodes = base.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int mode = 0; mode < nmodes; ++mode) {
    const int kx = mode % base.n_x, ky = mode / base.n_x;
    SpectralField2 probe(base);  // for mode arithmetic only
    if (probe.is_nyquist(kx, ky)) continue;
    const int m = probe.mode_m(kx), n = probe.mode_n(ky);
    const double a = std::hypot(double(m), double(n));

    // Green solve for Z1, Z2 against the spline of each coefficient
    std::array<std::vector<cd>, 2> Zl, dZl;
    for (int c = 0; c < 2; ++c) {
      std::vector<double> re(nl), im(nl);
      for (int iz = 0; iz < nl; ++iz) {
        const cd v = jh[c][iz].coeffs[mode];
        re[iz] = v.real();
        im[iz] = v.imag();
      }
      std::vector<double> Ire, dIre, Iim, dIim;
      green_apply(build_spline(re, g.hz()), a, L, Ire, dIre);
      green_apply(build_spline(im, g.hz()), a, L, Iim, dIim);
      Zl[c].resize(nl);
      dZl[c].resize(nl);
      const cd hm = (c == 0 ? h1m : h2m).coeffs[mode];
      const cd hp = (c == 0 ? h1p : h2p).coeffs[mode];
      for (int iz = 0; iz < nl; ++iz) {
        const double z = g.z(iz);
        Zl[c][iz] = cd(Ire[iz], Iim[iz]) + hm * sigma_minus(a, L, z) + hp * sigma_plus(a, L, z);
        dZl[c][iz] =
            cd(dIre[iz], dIim[iz]) + hm * dsigma_minus(a, L, z) + hp * dsigma_plus(a, L, z);
      }
    }

    for (int iz = 0; iz < nl; ++iz) {
      pot.Z[0][iz].coeffs[mode] = Zl[0][iz];
      pot.Z[1][iz].coeffs[mode] = Zl[1][iz];
      pot.dZ[0][iz].coeffs[mode] = dZl[0][iz];
      pot.dZ[1][iz].coeffs[mode] = dZl[1][iz];
      pot.d2Z[0][iz].coeffs[mode] = a * a * Zl[0][iz] - jh[0][iz].coeffs[mode];
      pot.d2Z[1][iz].coeffs[mode] = a * a * Zl[1][iz] - jh[1][iz].coeffs[mode];
      if (a > 0.0) {
        const cd im_i(0.0, double(m)), in_i(0.0, double(n));
        pot.Z[2][iz].coeffs[mode] =
            (jh[2][iz].coeffs[mode] - im_i * dZl[0][iz] - in_i * dZl[1][iz]) / (a * a);
        pot.dZ[2][iz].coeffs[mode] = -im_i * Zl[0][iz] - in_i * Zl[1][iz];
      }
    }
  }
  return pot;
}

void assemble_field(const VectorPotential& pot, double f_mean, double A1, double A2,
                    VectorField3& W, VectorField3& dWdz) {
  const SlabGrid3& g = pot.grid;
  const TorusGrid2& base = g.base;
  const int nl = g.levels();
  W = VectorField3(g);
  dWdz = VectorField3(g);

  SpectralField2 probe(base);
  for (int iz = 0; iz < nl; ++iz) {
    SpectralField2 w1(base), w2(base), w3(base), d1(base), d2(base), d3(base);
    for (int mode = 0; mode < base.size(); ++mode) {
      const int kx = mode % base.n_x, ky = mode / base.n_x;
      if (probe.is_nyquist(kx, ky)) continue;
      const cd im_i(0.0, double(probe.mode_m(kx))), in_i(0.0, double(probe.mode_n(ky)));
      const cd Z1 = pot.Z[0][iz].coeffs[mode], Z2 = pot.Z[1][iz].coeffs[mode],
               Z3 = pot.Z[2][iz].coeffs[mode];
      const cd dZ1 = pot.dZ[0][iz].coeffs[mode], dZ2 = pot.dZ[1][iz].coeffs[mode],
               dZ3 = pot.dZ[2][iz].coeffs[mode];
      const cd d2Z1 = pot.d2Z[0][iz].coeffs[mode], d2Z2 = pot.d2Z[1][iz].coeffs[mode];
      w1.coeffs[mode] = in_i * Z3 - dZ2;
      w2.coeffs[mode] = dZ1 - im_i * Z3;
      w3.coeffs[mode] = im_i * Z2 - in_i * Z1;
      d1.coeffs[mode] = in_i * dZ3 - d2Z2;
      d2.coeffs[mode] = d2Z1 - im_i * dZ3;
      d3.coeffs[mode] = im_i * dZ2 - in_i * dZ1;
    }
    W.comp[0].set_level(iz, from_spectral(w1));
    W.comp[1].set_level(iz, from_spectral(w2));
    W.comp[2].set_level(iz, from_spectral(w3));
    dWdz.comp[0].set_level(iz, from_spectral(d1));
    dWdz.comp[1].set_level(iz, from_spectral(d2));
    dWdz.comp[2].set_level(iz, from_spectral(d3));
  }

  // constant parts
  for (auto& v : W.comp[2].values) v += f_mean;
  for (auto& v : W.comp[0].values) v += A1;
  for (auto& v : W.comp[1].values) v += A2;
}

Fluxes measure_fluxes(const VectorField3& W) {
  const SlabGrid3& g = W.grid;
  const TorusGrid2& base = g.base;
  const int nl = g.levels();
  Fluxes F;
  std::vector<double> f1(nl, 0.0), f2(nl, 0.0);
  for (int iz = 0; iz < nl; ++iz) {
    double s1 = 0.0, s2 = 0.0;
    for (int iy = 0; iy < base.n_y; ++iy) s1 += W.comp[0].at(0, iy, iz);
    for (int ix = 0; ix < base.n_x; ++ix) s2 += W.comp[1].at(ix, 0, iz);
    f1[iz] = s1 * base.hy();
    f2[iz] = s2 * base.hx();
  }
  for (int iz = 0; iz < nl - 1; ++iz) {
    F.J1 += 0.5 * (f1[iz] + f1[iz + 1]) * g.hz();
    F.J2 += 0.5 * (f2[iz] + f2[iz + 1]) * g.hz();
  }
  return F;
}

namespace {

// Residuals recomputed from the assembled samples (spectral in x,y, analytic
// z-derivative arrays).
void fill_residuals(const VectorField3& j, const BoundaryData& data, DivCurlSolution& sol) {
  const SlabGrid3& g = sol.W.grid;
  const int nl = g.levels(), ns = g.base.size();
  double rc = 0.0, rd = 0.0;
  for (int iz = 0; iz < nl; ++iz) {
    const SpectralField2 s1 = to_spectral(sol.W.comp[0].level(iz));
    const SpectralField2 s2 = to_spectral(sol.W.comp[1].level(iz));
    const SpectralField2 s3 = to_spectral(sol.W.comp[2].level(iz));
    const ScalarField2 d2W3 = from_spectral(deriv_y(s3));
    const ScalarField2 d1W3 = from_spectral(deriv_x(s3));
    const ScalarField2 d1W2 = from_spectral(deriv_x(s2));
    const ScalarField2 d2W1 = from_spectral(deriv_y(s1));
    const ScalarField2 d1W1 = from_spectral(deriv_x(s1));
    const ScalarField2 d2W2 = from_spectral(deriv_y(s2));
    for (int i = 0; i < ns; ++i) {
      const size_t k = size_t(iz) * ns + i;
      const double c1 = d2W3.values[i] - sol.dWdz.comp[1].values[k] - j.comp[0].values[k];
      const double c2 = sol.dWdz.comp[0].values[k] - d1W3.values[i] - j.comp[1].values[k];
      const double c3 = d1W2.values[i] - d2W1.values[i] - j.comp[2].values[k];
      rc = std::max({rc, std::abs(c1), std::abs(c2), std::abs(c3)});
      rd = std::max(rd, std::abs(d1W1.values[i] + d2W2.values[i] +
                                 sol.dWdz.comp[2].values[k]));
    }
  }
  sol.res_curl = rc;
  sol.res_div = rd;
  double bm = 0.0, bp = 0.0;
  for (int i = 0; i < ns; ++i) {
    bm = std::max(bm, std::abs(sol.W.comp[2].values[i] - data.f_minus.values[i]));
    bp = std::max(bp, std::abs(sol.W.comp[2].values[size_t(nl - 1) * ns + i] -
                               data.f_plus.values[i]));
  }
  sol.res_bn_minus = bm;
  sol.res_bn_plus = bp;
}

DivCurlSolution solve_core(const VectorField3& j, const BoundaryData& data,
                           const DerivedBoundary& derived, const DivCurlOptions& opt) {
  DivCurlSolution sol;
  const VectorPotential pot = solve_vector_potential(j, derived, opt);
  assemble_field(pot, mean(data.f_minus), 0.0, 0.0, sol.W, sol.dWdz);
  return sol;
}

}  // namespace

DivCurlSolution divcurl_solve(const VectorField3& j, const BoundaryData& data,
                              const Fluxes& flux, const DivCurlOptions& opt) {
  DerivedBoundary derived;
  build_h(data, derived);
  DivCurlSolution sol = solve_core(j, data, derived, opt);
  const Fluxes have = measure_fluxes(sol.W);
  const double A1 = (flux.J1 - have.J1) / (kTwoPi * sol.W.grid.L);
  const double A2 = (flux.J2 - have.J2) / (kTwoPi * sol.W.grid.L);
  for (auto& v : sol.W.comp[0].values) v += A1;
  for (auto& v : sol.W.comp[1].values) v += A2;
  sol.realized = measure_fluxes(sol.W);
  fill_residuals(j, data, sol);
  return sol;
}

DivCurlSolution divcurl_solve_for_traces(const VectorField3& j, const BoundaryData& data,
                                         const DerivedBoundary& derived,
                                         const DivCurlOptions& opt) {
  DivCurlSolution sol = solve_core(j, data, derived, opt);
  const int ns = sol.W.grid.base.size();
  double t1 = 0.0, t2 = 0.0;
  for (int i = 0; i < ns; ++i) {
    t1 += sol.W.comp[0].values[i];
    t2 += sol.W.comp[1].values[i];
  }
  const double A1 = mean(data.g[0]) - t1 / ns;
  const double A2 = mean(data.g[1]) - t2 / ns;
  for (auto& v : sol.W.comp[0].values) v += A1;
  for (auto& v : sol.W.comp[1].values) v += A2;
  sol.realized = measure_fluxes(sol.W);
  fill_residuals(j, data, sol);
  return sol;
}

}  // namespace mhs
