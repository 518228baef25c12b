#include "mhs/boundary.hpp"

#include <cmath>

#include "mhs/errors.hpp"
#include "mhs/spectral.hpp"

namespace mhs {

namespace {

// Periodic x-antiderivative vanishing at x=0, acting on the x-mean-free part:
// h(x,y) = int_0^x [f - xmean(f)](s,y) ds. Exact on band-limited data.
ScalarField2 antiderivative_x(const ScalarField2& f) {
  SpectralField2 s = to_spectral(f);
  SpectralField2 g(f.grid);
  for (int ky = 0; ky < f.grid.n_y; ++ky)
    for (int kx = 0; kx < f.grid.n_x; ++kx) {
      const int idx = ky * f.grid.n_x + kx;
      const int m = s.mode_m(kx);
      if (m == 0 || s.is_nyquist(kx, ky)) continue;
      g.coeffs[idx] = s.coeffs[idx] / std::complex<double>(0.0, m);
    }
  ScalarField2 G = from_spectral(g);
  ScalarField2 out(f.grid);
  for (int iy = 0; iy < f.grid.n_y; ++iy) {
    const double g0 = G.at(0, iy);
    for (int ix = 0; ix < f.grid.n_x; ++ix) out.at(ix, iy) = G.at(ix, iy) - g0;
  }
  return out;
}

// h1 face function: -(Phi(y)-Phi(0)) where Phi is the y-antiderivative of the
// mean-free x-average of f. Constant in x.
ScalarField2 build_h1(const ScalarField2& f) {
  SpectralField2 s = to_spectral(f);
  const int ny = f.grid.n_y;
  // phi(y) = (1/2pi) int f dx has coefficients s(0,n)/(2pi) in 1-D convention;
  // work directly with the 2-D modes (m=0 column).
  SpectralField2 g(f.grid);
  for (int ky = 0; ky < ny; ++ky) {
    const int n = s.mode_n(ky);
    if (n == 0 || ky == ny / 2) continue;
    g.coeffs[size_t(ky) * f.grid.n_x] = s.coeff(0, n) / std::complex<double>(0.0, n);
  }
  ScalarField2 Phi = from_spectral(g);
  ScalarField2 out(f.grid);
  for (int iy = 0; iy < ny; ++iy) {
    const double v = -(Phi.at(0, iy) - Phi.at(0, 0));
    for (int ix = 0; ix < f.grid.n_x; ++ix) out.at(ix, iy) = v;
  }
  return out;
}

}  // namespace

void validate(const BoundaryData& data, const ValidateOptions& opt) {
  if (!(data.f_minus.grid == data.f_plus.grid) || !(data.f_minus.grid == data.g.grid))
    throw CompatibilityViolation("validate: boundary fields on mismatched grids");
  for (const auto* f : {&data.f_minus, &data.f_plus, &data.g[0], &data.g[1]})
    for (double v : f->values)
      if (!std::isfinite(v)) throw CompatibilityViolation("validate: non-finite boundary data");

  const double dm = std::abs(mean(data.f_minus) - mean(data.f_plus));
  const double scale = std::max({1.0, max_abs(data.f_minus), max_abs(data.f_plus)});
  if (dm > opt.mean_tol * scale)
    throw CompatibilityViolation("validate: mean(f_minus) != mean(f_plus), defect " +
                                 std::to_string(dm));

  double hnorm = 0.0;
  for (const auto* f : {&data.f_minus, &data.f_plus})
    hnorm = std::max(hnorm, holder_norm_estimate(*f, 2, opt.alpha));
  double gnorm = 0.0;
  for (int c = 0; c < 2; ++c)
    gnorm = std::max(gnorm, holder_norm_estimate(data.g[c], 2, opt.alpha));
  if (hnorm + gnorm > opt.M_max)
    throw SmallnessViolation("validate: Hoelder estimate " + std::to_string(hnorm + gnorm) +
                             " exceeds M_max " + std::to_string(opt.M_max));
}

void build_h(const BoundaryData& data, DerivedBoundary& out) {
  out.h2_minus = antiderivative_x(data.f_minus);
  out.h2_plus = antiderivative_x(data.f_plus);
  out.h1_minus = build_h1(data.f_minus);
  out.h1_plus = build_h1(data.f_plus);
}

void build_Z_script(const DerivedBoundary& h, double L, DerivedBoundary& out) {
  const TorusGrid2& g = h.h1_minus.grid;
  const SpectralField2 h1m = to_spectral(h.h1_minus), h1p = to_spectral(h.h1_plus);
  const SpectralField2 h2m = to_spectral(h.h2_minus), h2p = to_spectral(h.h2_plus);
  SpectralField2 z1(g), z2(g);
  for (int ky = 0; ky < g.n_y; ++ky)
    for (int kx = 0; kx < g.n_x; ++kx) {
      const int idx = ky * g.n_x + kx;
      if (z1.is_nyquist(kx, ky)) continue;
      const double m = z1.mode_m(kx), n = z1.mode_n(ky);
      const double r2 = m * m + n * n;
      const double a = std::sqrt(r2);
      // |xi| cosh(|xi|L)/sinh(|xi|L) and |xi|/sinh(|xi|L); 1/L limits at xi=0.
      double kminus, kplus;
      if (a == 0.0) {
        kminus = 1.0 / L;
        kplus = 1.0 / L;
      } else {
        const double e = std::exp(-2.0 * a * L);
        kminus = a * (1.0 + e) / (1.0 - e);
        kplus = 2.0 * a * std::exp(-a * L) / (1.0 - e);
      }
      // Brackets with the xi=0 convention: chi-terms vanish, the -1 survives.
      const double br_mn = a == 0.0 ? 0.0 : m * n / r2;
      const double br_nn = a == 0.0 ? -1.0 : n * n / r2 - 1.0;
      const double br_mm = a == 0.0 ? -1.0 : m * m / r2 - 1.0;
      z1.coeffs[idx] = -h1m.coeffs[idx] * br_mn * kminus + h1p.coeffs[idx] * br_mn * kplus -
                       h2m.coeffs[idx] * br_nn * kminus + h2p.coeffs[idx] * br_nn * kplus;
      z2.coeffs[idx] = h1m.coeffs[idx] * br_mm * kminus - h1p.coeffs[idx] * br_mm * kplus +
                       h2m.coeffs[idx] * br_mn * kminus - h2p.coeffs[idx] * br_mn * kplus;
    }
  out.Z1_script = from_spectral(z1);
  out.Z2_script = from_spectral(z2);
}

void build_G(const BoundaryData& data, double L, DerivedBoundary& out) {
  ScalarField2 gt1(data.g.grid), gt2(data.g.grid);
  for (int i = 0; i < data.g.grid.size(); ++i) {
    gt1.values[i] = data.g[0].values[i] - out.Z1_script.values[i];
    gt2.values[i] = data.g[1].values[i] - out.Z2_script.values[i];
  }
  out.G1 = t0_inverse(gt1, L);
  out.G2 = t0_inverse(gt2, L);
}

ScalarField2 j0_third(const VectorField2& g) {
  const ScalarField2 d1g2 = deriv_x(g[1]);
  const ScalarField2 d2g1 = deriv_y(g[0]);
  ScalarField2 out(g.grid);
  for (int i = 0; i < g.grid.size(); ++i) out.values[i] = d1g2.values[i] - d2g1.values[i];
  return out;
}

DerivedBoundary build_derived(const BoundaryData& data, double L) {
  DerivedBoundary d;
  build_h(data, d);
  build_Z_script(d, L, d);
  build_G(data, L, d);
  d.j0_3 = j0_third(data.g);
  return d;
}

}  // namespace mhs
