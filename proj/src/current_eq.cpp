#include "mhs/current_eq.hpp"

#include <cmath>

#include "mhs/errors.hpp"
#include "mhs/spectral.hpp"
#include "mhs/zgreen.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mhs {

namespace {

using cd = std::complex<double>;

// Gauss-Legendre rule on [0, L].
void gauss_legendre(int n, double L, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * t * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (t * p0 - p1) / (t * t - 1.0);
      const double dt = p0 / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = 0.5 * L * (1.0 - t);
    x[n - 1 - i] = 0.5 * L * (1.0 + t);
    w[i] = L / ((1.0 - t * t) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// sinh(a(L-s))/sinh(aL) in overflow-safe form; (L-s)/L at a=0.
double kernel_K(double a, double L, double s) {
  if (a == 0.0) return (L - s) / L;
  const double denom = 1.0 - std::exp(-2.0 * a * L);
  return (std::exp(-a * s) - std::exp(-a * (2.0 * L - s))) / denom;
}

// M(xi,s) = e^{-2|xi|L}(e^{|xi|s}-e^{-|xi|s})/(1-e^{-2|xi|L}); s/L at xi=0.
double kernel_M(double a, double L, double s) {
  if (a == 0.0) return s / L;
  const double denom = 1.0 - std::exp(-2.0 * a * L);
  return (std::exp(-a * (2.0 * L - s)) - std::exp(-a * (2.0 * L + s))) / denom;
}

// 4-point Lagrange interpolation of per-level values at height s.
struct ZInterp {
  int i0;            // first level of the stencil
  double w[4];
};

ZInterp make_zinterp(const SlabGrid3& g, double s) {
  ZInterp zi;
  const double u = s / g.hz();
  int p = std::min(std::max(int(std::floor(u)), 0), g.n_z - 1);
  int i0 = std::min(std::max(p - 1, 0), std::max(g.n_z - 3, 0));
  const int np = std::min(4, g.levels());
  if (g.levels() < 4) i0 = 0;
  zi.i0 = i0;
  const double t = u - i0;
  for (int k = 0; k < 4; ++k) zi.w[k] = 0.0;
  for (int k = 0; k < np; ++k) {
    double wk = 1.0;
    for (int l = 0; l < np; ++l)
      if (l != k) wk *= (t - l) / double(k - l);
    zi.w[k] = wk;
  }
  return zi;
}

// Phase tables e^{-i m x_i}, e^{-i n y_j} for the adjoint-form quadrature.
struct PhaseTables {
  std::vector<cd> ex;  // [kx * n_x + ix]
  std::vector<cd> ey;  // [ky * n_y + iy]
};

PhaseTables make_phase_tables(const TorusGrid2& g) {
  PhaseTables t;
  SpectralField2 probe(g);
  t.ex.resize(size_t(g.n_x) * g.n_x);
  t.ey.resize(size_t(g.n_y) * g.n_y);
  for (int kx = 0; kx < g.n_x; ++kx) {
    const int m = probe.mode_m(kx);
    for (int ix = 0; ix < g.n_x; ++ix)
      t.ex[size_t(kx) * g.n_x + ix] = std::polar(1.0, -m * g.x(ix));
  }
  for (int ky = 0; ky < g.n_y; ++ky) {
    const int n = probe.mode_n(ky);
    for (int iy = 0; iy < g.n_y; ++iy)
      t.ey[size_t(ky) * g.n_y + iy] = std::polar(1.0, -n * g.y(iy));
  }
  return t;
}

}  // namespace

ScalarField2 op_A_apply(const ScalarField3& theta) {
  const SlabGrid3& g = theta.grid;
  const int nl = g.levels();
  const double L = g.L, h = g.hz();
  std::vector<SpectralField2> th;
  th.reserve(nl);
  for (int iz = 0; iz < nl; ++iz) th.push_back(to_spectral(theta.level(iz)));

  SpectralField2 out(g.base);
  for (int mode = 0; mode < g.base.size(); ++mode) {
    const int kx = mode % g.base.n_x, ky = mode / g.base.n_x;
    if (out.is_nyquist(kx, ky)) continue;
    const double m = out.mode_m(kx), n = out.mode_n(ky);
    const double a = std::hypot(m, n);
    cd acc = 0.0;
    for (int iz = 0; iz < nl; ++iz) {
      const double w = (iz == 0 || iz == nl - 1) ? 0.5 : 1.0;
      acc += w * kernel_K(a, L, g.z(iz)) * th[iz].coeffs[mode];
    }
    out.coeffs[mode] = acc * h;
  }
  return from_spectral(out);
}

KernelCoeffs build_kernel_coeffs(const FlowData& flow, const CurrentOptions& opt) {
  const SlabGrid3& g = flow.grid;
  const TorusGrid2& base = g.base;
  const int ns = base.size();
  const double L = g.L;

  KernelCoeffs kc;
  kc.grid = base;
  kc.L = L;
  gauss_legendre(opt.n_s, L, kc.s_nodes, kc.s_weights);
  for (int k = 0; k < 4; ++k) kc.c[k].assign(size_t(ns) * ns, cd(0.0, 0.0));

  // Lambda and Theta at the quadrature heights (independent of the mode).
  const int nq = opt.n_s;
  std::vector<double> lx(size_t(nq) * ns), ly(size_t(nq) * ns), th(size_t(nq) * ns);
  for (int q = 0; q < nq; ++q) {
    const ZInterp zi = make_zinterp(g, kc.s_nodes[q]);
    for (int node = 0; node < ns; ++node) {
      double vx = 0.0, vy = 0.0, vt = 0.0;
      for (int k = 0; k < 4; ++k) {
        const int lev = std::min(zi.i0 + k, g.n_z);
        vx += zi.w[k] * flow.lambda_x[lev].values[node];
        vy += zi.w[k] * flow.lambda_y[lev].values[node];
        vt += zi.w[k] * flow.theta[lev].values[node];
      }
      lx[size_t(q) * ns + node] = vx;
      ly[size_t(q) * ns + node] = vy;
      th[size_t(q) * ns + node] = vt;
    }
  }

  SpectralField2 probe(base);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int mode = 0; mode < ns; ++mode) {
    const int kx = mode % base.n_x, ky = mode / base.n_x;
    if (probe.is_nyquist(kx, ky)) continue;
    const double m = probe.mode_m(kx), n = probe.mode_n(ky);
    const double a = std::hypot(m, n);
    std::vector<double> e1(nq), eM(nq);
    for (int q = 0; q < nq; ++q) {
      e1[q] = a == 0.0 ? 1.0 : std::exp(-a * kc.s_nodes[q]);
      eM[q] = kernel_M(a, L, kc.s_nodes[q]);
    }
    for (int node = 0; node < ns; ++node) {
      cd c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
      for (int q = 0; q < nq; ++q) {
        const size_t idx = size_t(q) * ns + node;
        const double phase = m * lx[idx] + n * ly[idx];
        const double theta_q = th[idx];
        const cd em1(std::cos(phase) - 1.0, -std::sin(phase));  // e^{-i xi.Lambda} - 1
        const cd fl = em1 * (1.0 + theta_q);
        const double w = kc.s_weights[q];
        c1 += w * e1[q] * fl;
        c2 += w * e1[q] * theta_q;
        c3 -= w * eM[q] * fl;
        c4 -= w * eM[q] * theta_q;
      }
      const size_t out = size_t(mode) * ns + node;
      kc.c[0][out] = c1;
      kc.c[1][out] = c2;
      kc.c[2][out] = c3;
      kc.c[3][out] = c4;
    }
  }

  // band-edge coefficient mass (tail diagnostic)
  double tail = 0.0;
  const int mx = base.n_x / 2 - 1, my = base.n_y / 2 - 1;
  for (int mode = 0; mode < ns; ++mode) {
    const int kx = mode % base.n_x, ky = mode / base.n_x;
    if (probe.is_nyquist(kx, ky)) continue;
    if (std::abs(probe.mode_m(kx)) != mx && std::abs(probe.mode_n(ky)) != my) continue;
    const double mnorm =
        t0_multiplier(std::hypot(double(probe.mode_m(kx)), double(probe.mode_n(ky))), L);
    for (int node = 0; node < ns; ++node) {
      const size_t idx = size_t(mode) * ns + node;
      tail = std::max(tail, (std::abs(kc.c[0][idx]) + std::abs(kc.c[1][idx]) +
                             std::abs(kc.c[2][idx]) + std::abs(kc.c[3][idx])) /
                                mnorm);
    }
  }
  kc.tail_bound = tail;
  return kc;
}

namespace {

ScalarField2 kappa_apply_impl(const KernelCoeffs& kc, const ScalarField2& u,
                              const std::array<bool, 4>& use) {
  const TorusGrid2& g = kc.grid;
  const int ns = g.size();
  const PhaseTables pt = make_phase_tables(g);

  SpectralField2 out(g);
  const double dA = g.cell_area();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int mode = 0; mode < ns; ++mode) {
    const int kx = mode % g.n_x, ky = mode / g.n_x;
    if (out.is_nyquist(kx, ky)) continue;
    const double m = out.mode_m(kx), n = out.mode_n(ky);
    cd acc = 0.0;
    for (int node = 0; node < ns; ++node) {
      const size_t idx = size_t(mode) * ns + node;
      cd ck = 0.0;
      for (int k = 0; k < 4; ++k)
        if (use[k]) ck += kc.c[k][idx];
      if (ck == cd(0.0, 0.0)) continue;
      const cd phase =
          pt.ex[size_t(kx) * g.n_x + (node % g.n_x)] * pt.ey[size_t(ky) * g.n_y + (node / g.n_x)];
      acc += ck * u.values[node] * phase;
    }
    out.coeffs[mode] = acc * dA / t0_multiplier(std::hypot(m, n), kc.L);
  }
  return from_spectral(out);
}

}  // namespace

ScalarField2 t_kappa_apply(int kappa, const KernelCoeffs& kc, const ScalarField2& u) {
  if (kappa < 1 || kappa > 4) throw SolverError("t_kappa_apply: kappa out of range");
  std::array<bool, 4> use{false, false, false, false};
  use[kappa - 1] = true;
  return kappa_apply_impl(kc, u, use);
}

ScalarField2 t_sum_apply(const KernelCoeffs& kc, const ScalarField2& u) {
  return kappa_apply_impl(kc, u, {true, true, true, true});
}

namespace {

// The two projection brackets applied to a pair of A-images, then T0^{-1}:
//   row 1: (m^2/|xi|^2 - 1) X1 + (mn/|xi|^2) X2     (enters the j0^1 equation)
//   row 2: (mn/|xi|^2) X1 + (n^2/|xi|^2 - 1) X2     (enters the j0^2 equation)
std::array<ScalarField2, 2> s_forms(const ScalarField2& A1, const ScalarField2& A2, double L) {
  const SpectralField2 a1 = to_spectral(A1), a2 = to_spectral(A2);
  SpectralField2 s1(A1.grid), s2(A1.grid);
  for (int ky = 0; ky < A1.grid.n_y; ++ky)
    for (int kx = 0; kx < A1.grid.n_x; ++kx) {
      const int idx = ky * A1.grid.n_x + kx;
      if (a1.is_nyquist(kx, ky)) continue;
      const double m = a1.mode_m(kx), n = a1.mode_n(ky);
      const double r2 = m * m + n * n;
      const double br_mn = r2 == 0.0 ? 0.0 : m * n / r2;
      const double br_mm = r2 == 0.0 ? -1.0 : m * m / r2 - 1.0;
      const double br_nn = r2 == 0.0 ? -1.0 : n * n / r2 - 1.0;
      const double minv = 1.0 / t0_multiplier(std::sqrt(r2), L);
      s2.coeffs[idx] = (br_mm * a1.coeffs[idx] + br_mn * a2.coeffs[idx]) * minv;
      s1.coeffs[idx] = (br_mn * a1.coeffs[idx] + br_nn * a2.coeffs[idx]) * minv;
    }
  return {from_spectral(s1), from_spectral(s2)};
}

ScalarField2 zero_mean(const ScalarField2& f) {
  ScalarField2 out = f;
  const double mu = mean(f);
  for (auto& v : out.values) v -= mu;
  return out;
}

struct SurfaceTraces {
  ScalarField2 b1, b2, b3, d1b3, d2b3, d3b3;
};

SurfaceTraces trace_b(const VectorField3& b) {
  SurfaceTraces t;
  t.b1 = b.comp[0].level(0);
  t.b2 = b.comp[1].level(0);
  t.b3 = b.comp[2].level(0);
  t.d1b3 = deriv_x(t.b3);
  t.d2b3 = deriv_y(t.b3);
  t.d3b3 = deriv_z_fd4(b.comp[2]).level(0);
  return t;
}

}  // namespace

std::array<ScalarField2, 2> op_S(const VectorField3& delta_j, double L) {
  const ScalarField2 A1 = op_A_apply(delta_j.comp[0]);
  const ScalarField2 A2 = op_A_apply(delta_j.comp[1]);
  auto rows = s_forms(A1, A2, L);
  return {rows[0], rows[1]};  // {S1, S2}
}

std::array<ScalarField2, 2> op_H_star(const VectorField3& b, const CurrentBoundary& j0) {
  const SurfaceTraces t = trace_b(b);
  const ScalarField2 d1u1 = deriv_x(j0.j0_1), d2u2 = deriv_y(j0.j0_2);
  ScalarField2 qstar(j0.j0_1.grid);
  for (int i = 0; i < qstar.grid.size(); ++i)
    qstar.values[i] = -t.d1b3.values[i] * j0.j0_1.values[i] -
                      t.d2b3.values[i] * j0.j0_2.values[i] -
                      t.b3.values[i] * (d1u1.values[i] + d2u2.values[i]);
  const SpectralField2 q = to_spectral(qstar);
  return {from_spectral(op_B_y(q)), from_spectral(op_B_x(q))};  // {H1*, H2*}
}

std::array<ScalarField2, 2> build_rhs(const VectorField3& b, const FlowData& flow,
                                      const BoundaryData& data, const DerivedBoundary& derived,
                                      const CurrentOptions& opt) {
  const double L = flow.grid.L;
  const TorusGrid2& g = data.g.grid;

  // p = b1 d1 j0^3 + b2 d2 j0^3 - d3b3 j0^3, traces at the inflow face
  const SurfaceTraces t = trace_b(b);
  const ScalarField2 d1j3 = deriv_x(derived.j0_3), d2j3 = deriv_y(derived.j0_3);
  ScalarField2 p(g);
  for (int i = 0; i < g.size(); ++i)
    p.values[i] = t.b1.values[i] * d1j3.values[i] + t.b2.values[i] * d2j3.values[i] -
                  t.d3b3.values[i] * derived.j0_3.values[i];
  const SpectralField2 ph = to_spectral(p);
  const ScalarField2 Bx_p = from_spectral(op_B_x(ph));
  const ScalarField2 By_p = from_spectral(op_B_y(ph));

  // transported perturbation of the known third component
  ScalarField2 zero(g);
  const VectorField3 dj3 = transport_delta(b, flow, {zero, zero, derived.j0_3}, opt.flow);
  const auto S = op_S(dj3, L);  // {S1-row, S2-row}

  // T0^{-1} B_x/B_y applied to j0^3
  const SpectralField2 j3 = to_spectral(derived.j0_3);
  const ScalarField2 TBx_j3 = t0_inverse(from_spectral(op_B_x(j3)), L);
  const ScalarField2 TBy_j3 = t0_inverse(from_spectral(op_B_y(j3)), L);

  ScalarField2 g1(g), g2(g);
  for (int i = 0; i < g.size(); ++i) {
    g1.values[i] = derived.G2.values[i] - TBx_j3.values[i] + Bx_p.values[i] + S[1].values[i];
    g2.values[i] = -derived.G1.values[i] - TBy_j3.values[i] + By_p.values[i] + S[0].values[i];
  }
  g1 = zero_mean(g1);
  g2 = zero_mean(g2);
  const double m1 = mean_product(derived.j0_3, data.g[0]);
  const double m2 = mean_product(derived.j0_3, data.g[1]);
  for (auto& v : g1.values) v += m1;
  for (auto& v : g2.values) v += m2;
  return {g1, g2};
}

std::array<ScalarField2, 2> upsilon_apply(const VectorField3& b, const FlowData& flow,
                                          const KernelCoeffs& kc, const BoundaryData& data,
                                          const std::array<ScalarField2, 2>& u,
                                          const CurrentOptions& opt) {
  const double L = flow.grid.L;
  const TorusGrid2& g = u[0].grid;

  const ScalarField2 T1 = t_sum_apply(kc, u[0]);
  const ScalarField2 T2 = t_sum_apply(kc, u[1]);
  const SpectralField2 t1 = to_spectral(T1), t2 = to_spectral(T2);

  ScalarField2 zero(g);
  const VectorField3 dj = transport_delta(b, flow, {u[0], u[1], zero}, opt.flow);
  const ScalarField2 A1 = op_A_apply(dj.comp[0]);
  const ScalarField2 A2 = op_A_apply(dj.comp[1]);
  const SpectralField2 a1 = to_spectral(A1), a2 = to_spectral(A2);

  CurrentBoundary j0u{u[0], u[1], zero};
  const auto H = op_H_star(b, j0u);

  SpectralField2 up1(g), up2(g);
  for (int ky = 0; ky < g.n_y; ++ky)
    for (int kx = 0; kx < g.n_x; ++kx) {
      const int idx = ky * g.n_x + kx;
      if (up1.is_nyquist(kx, ky)) continue;
      const double m = up1.mode_m(kx), n = up1.mode_n(ky);
      const double r2 = m * m + n * n;
      if (r2 == 0.0) continue;  // mean channel handled below
      const double br_mn = m * n / r2;
      const double br_mm = m * m / r2 - 1.0;
      const double br_nn = n * n / r2 - 1.0;
      const double minv = 1.0 / t0_multiplier(std::sqrt(r2), L);
      up1.coeffs[idx] = br_mm * (t1.coeffs[idx] + minv * a1.coeffs[idx]) +
                        br_mn * (t2.coeffs[idx] + minv * a2.coeffs[idx]);
      up2.coeffs[idx] = br_mn * (t1.coeffs[idx] + minv * a1.coeffs[idx]) +
                        br_nn * (t2.coeffs[idx] + minv * a2.coeffs[idx]);
    }
  ScalarField2 out1 = from_spectral(up1), out2 = from_spectral(up2);
  const double h1_mean = mean(H[0]), h2_mean = mean(H[1]);
  for (int i = 0; i < g.size(); ++i) {
    out1.values[i] += H[1].values[i] - h2_mean;
    out2.values[i] += H[0].values[i] - h1_mean;
  }
  const double mu1 = -mean_product(u[0], data.f_minus);
  const double mu2 = -mean_product(u[1], data.f_minus);
  for (auto& v : out1.values) v += mu1;
  for (auto& v : out2.values) v += mu2;
  return {out1, out2};
}

J0Result solve_j0(const VectorField3& b, const FlowData& flow, const KernelCoeffs& kc,
                  const BoundaryData& data, const DerivedBoundary& derived,
                  const CurrentOptions& opt) {
  const auto rhs = build_rhs(b, flow, data, derived, opt);
  std::array<ScalarField2, 2> u = rhs;
  J0Result res;
  double prev_delta = -1.0;
  int grow_count = 0;
  for (int it = 0; it < opt.max_neumann; ++it) {
    const auto Yu = upsilon_apply(b, flow, kc, data, u, opt);
    std::array<ScalarField2, 2> next = rhs;
    double delta = 0.0;
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < next[c].grid.size(); ++i) {
        next[c].values[i] += Yu[c].values[i];
        delta = std::max(delta, std::abs(next[c].values[i] - u[c].values[i]));
      }
    }
    if (opt.damping != 1.0) {
      for (int c = 0; c < 2; ++c)
        for (int i = 0; i < next[c].grid.size(); ++i)
          next[c].values[i] =
              (1.0 - opt.damping) * u[c].values[i] + opt.damping * next[c].values[i];
    }
    u = next;
    res.iterations = it + 1;
    res.final_delta = delta;
    if (prev_delta >= 0.0 && prev_delta > 0.0) {
      res.contraction = delta / prev_delta;
      if (delta > prev_delta) {
        if (++grow_count >= 3)
          throw NeumannDivergence("solve_j0: iterate growth for 3 consecutive steps "
                                  "(||Upsilon|| >= 1; data not small enough)");
      } else {
        grow_count = 0;
      }
    }
    if (delta < opt.j0_tol) break;
    prev_delta = delta;
  }
  if (res.final_delta >= opt.j0_tol && res.iterations >= opt.max_neumann)
    throw NeumannDivergence("solve_j0: no convergence within max_neumann iterations");
  res.j0 = CurrentBoundary{u[0], u[1], derived.j0_3};
  res.constraint_residual = constraint_residual(b, res.j0);
  return res;
}

Fluxes compute_fluxes(const CurrentBoundary& j0, const VectorField3& delta_j,
                      const BoundaryData& data, const DerivedBoundary& derived,
                      const KernelCoeffs& kc) {
  const double L = kc.L;
  const double piL2 = M_PI * L * L;
  double ts1 = mean(t_sum_apply(kc, j0.j0_1));
  double ts2 = mean(t_sum_apply(kc, j0.j0_2));
  const double Ad1 = 2.0 / L * mean(op_A_apply(delta_j.comp[0]));
  const double Ad2 = 2.0 / L * mean(op_A_apply(delta_j.comp[1]));
  Fluxes f;
  f.J1 = piL2 * (mean(derived.G1) + Ad2 + ts2 + mean_product(derived.j0_3, data.g[1]) -
                 mean_product(j0.j0_2, data.f_minus));
  f.J2 = piL2 * (mean(derived.G2) - Ad1 - ts1 - mean_product(derived.j0_3, data.g[0]) +
                 mean_product(j0.j0_1, data.f_minus));
  return f;
}

double constraint_residual(const VectorField3& b, const CurrentBoundary& j0) {
  const SurfaceTraces t = trace_b(b);
  const ScalarField2 d1u1 = deriv_x(j0.j0_1), d2u2 = deriv_y(j0.j0_2);
  const ScalarField2 d1j3 = deriv_x(j0.j0_3), d2j3 = deriv_y(j0.j0_3);
  double worst = 0.0;
  for (int i = 0; i < j0.j0_1.grid.size(); ++i) {
    const double div2 = d1u1.values[i] + d2u2.values[i];
    const double r = (1.0 + t.b3.values[i]) * div2 + t.d1b3.values[i] * j0.j0_1.values[i] +
                     t.d2b3.values[i] * j0.j0_2.values[i] + t.d3b3.values[i] * j0.j0_3.values[i] -
                     t.b1.values[i] * d1j3.values[i] - t.b2.values[i] * d2j3.values[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace mhs
