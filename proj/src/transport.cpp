#include "mhs/transport.hpp"

#include <cmath>
#include <optional>

#include "mhs/errors.hpp"
#include "mhs/spectral.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mhs {

namespace {

// ---------------------------------------------------------------------------
// Catmull-Rom bicubic interpolation with periodic wrap.
// ---------------------------------------------------------------------------
struct Stencil {
  int ix[4], iy[4];
  double wx[4], wy[4];
  double dwx[4], dwy[4];  // d/dx, d/dy weights
};

inline void cr_weights(double t, double w[4], double dw[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
  dw[0] = 0.5 * (-3 * t2 + 4 * t - 1);
  dw[1] = 0.5 * (9 * t2 - 10 * t);
  dw[2] = 0.5 * (-9 * t2 + 8 * t + 1);
  dw[3] = 0.5 * (3 * t2 - 2 * t);
}

inline Stencil make_stencil(const TorusGrid2& g, double x, double y) {
  Stencil s;
  const double ux = x / g.hx(), uy = y / g.hy();
  double fx = std::floor(ux), fy = std::floor(uy);
  const double tx = ux - fx, ty = uy - fy;
  const int i0 = int(fx), j0 = int(fy);
  for (int k = 0; k < 4; ++k) {
    s.ix[k] = ((i0 + k - 1) % g.n_x + g.n_x) % g.n_x;
    s.iy[k] = ((j0 + k - 1) % g.n_y + g.n_y) % g.n_y;
  }
  cr_weights(tx, s.wx, s.dwx);
  cr_weights(ty, s.wy, s.dwy);
  for (int k = 0; k < 4; ++k) {
    s.dwx[k] /= g.hx();
    s.dwy[k] /= g.hy();
  }
  return s;
}

inline double eval(const ScalarField2& f, const Stencil& s) {
  double acc = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    const double* base = f.values.data() + size_t(s.iy[b]) * f.grid.n_x;
    for (int a = 0; a < 4; ++a) row += s.wx[a] * base[s.ix[a]];
    acc += s.wy[b] * row;
  }
  return acc;
}

inline double eval_dx(const ScalarField2& f, const Stencil& s) {
  double acc = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    const double* base = f.values.data() + size_t(s.iy[b]) * f.grid.n_x;
    for (int a = 0; a < 4; ++a) row += s.dwx[a] * base[s.ix[a]];
    acc += s.wy[b] * row;
  }
  return acc;
}

inline double eval_dy(const ScalarField2& f, const Stencil& s) {
  double acc = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    const double* base = f.values.data() + size_t(s.iy[b]) * f.grid.n_x;
    for (int a = 0; a < 4; ++a) row += s.wx[a] * base[s.ix[a]];
    acc += s.dwy[b] * row;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Exact evaluation of the trigonometric interpolant of a surface field.
// ---------------------------------------------------------------------------
struct TrigField {
  TorusGrid2 grid;
  std::vector<std::complex<double>> c;  // FFT-layout coefficients

  explicit TrigField(const ScalarField2& f) : grid(f.grid), c(to_spectral(f).coeffs) {}

  // value and (optionally) gradient at (x,y)
  void eval(double x, double y, double* v, double* dx, double* dy) const {
    const int nx = grid.n_x, ny = grid.n_y;
    thread_local std::vector<std::complex<double>> px, py;
    px.assign(nx, {1.0, 0.0});
    py.assign(ny, {1.0, 0.0});
    const std::complex<double> ex(std::cos(x), std::sin(x)), exn = std::conj(ex);
    const std::complex<double> ey(std::cos(y), std::sin(y)), eyn = std::conj(ey);
    for (int k = 1; k <= nx / 2; ++k) px[k] = px[k - 1] * ex;
    for (int k = nx - 1; k > nx / 2; --k) px[k] = px[(k + 1) % nx] * exn;
    for (int k = 1; k <= ny / 2; ++k) py[k] = py[k - 1] * ey;
    for (int k = ny - 1; k > ny / 2; --k) py[k] = py[(k + 1) % ny] * eyn;
    std::complex<double> acc = 0.0, accx = 0.0, accy = 0.0;
    for (int ky = 0; ky < ny; ++ky) {
      const int n = ky <= ny / 2 ? ky : ky - ny;
      std::complex<double> row = 0.0, rowx = 0.0;
      const std::complex<double>* cr = c.data() + size_t(ky) * nx;
      for (int kx = 0; kx < nx; ++kx) {
        const int m = kx <= nx / 2 ? kx : kx - nx;
        const std::complex<double> term = cr[kx] * px[kx];
        row += term;
        rowx += term * std::complex<double>(0.0, m);
      }
      acc += row * py[ky];
      accx += rowx * py[ky];
      accy += row * py[ky] * std::complex<double>(0.0, n);
    }
    const double scale = 1.0 / (kTwoPi * kTwoPi);
    if (v) *v = acc.real() * scale;
    if (dx) *dx = accx.real() * scale;
    if (dy) *dy = accy.real() * scale;
  }
};

double wrap_pi(double d) {
  while (d > 0.5 * kTwoPi) d -= kTwoPi;
  while (d < -0.5 * kTwoPi) d += kTwoPi;
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Flow integration
// ---------------------------------------------------------------------------

FlowData integrate_flow(const VectorField3& b, const FlowOptions& opt) {
  const SlabGrid3& g = b.grid;
  const TorusGrid2& base = g.base;
  const int nl = g.levels();
  const int ns = base.size();

  double b3max = 0.0;
  for (double v : b.comp[2].values) {
    if (!std::isfinite(v)) throw StepFailure("integrate_flow: non-finite b");
    b3max = std::max(b3max, std::abs(v));
  }
  if (b3max >= 1.0 - opt.b3_margin)
    throw FieldTooLarge("integrate_flow: max|b3| = " + std::to_string(b3max) +
                        " too close to 1");

  // Per-level velocity v = (b1,b2)/(1+b3).
  std::vector<ScalarField2> v1(nl, ScalarField2(base)), v2(nl, ScalarField2(base));
  for (int iz = 0; iz < nl; ++iz)
    for (int i = 0; i < ns; ++i) {
      const size_t k = size_t(iz) * ns + i;
      const double denom = 1.0 + b.comp[2].values[k];
      v1[iz].values[i] = b.comp[0].values[k] / denom;
      v2[iz].values[i] = b.comp[1].values[k] / denom;
    }

  FlowData flow;
  flow.grid = g;
  flow.lambda_x.assign(nl, ScalarField2(base));
  flow.lambda_y.assign(nl, ScalarField2(base));
  flow.theta.assign(nl, ScalarField2(base));

  const double h = g.hz();
  // velocity at continuous z by linear blend of adjacent levels
  auto velocity = [&](double x, double y, int panel, double frac, double out[2]) {
    const Stencil s = make_stencil(base, x, y);
    const int i0 = std::min(panel, nl - 1);
    const int i1 = std::min(panel + 1, nl - 1);
    const double a0 = 1.0 - frac, a1 = frac;
    out[0] = a0 * eval(v1[i0], s) + a1 * eval(v1[i1], s);
    out[1] = a0 * eval(v2[i0], s) + a1 * eval(v2[i1], s);
  };

  bool failed = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int node = 0; node < ns; ++node) {
    const int ix = node % base.n_x, iy = node / base.n_x;
    double X = base.x(ix), Y = base.y(iy);
    flow.lambda_x[0].values[node] = 0.0;
    flow.lambda_y[0].values[node] = 0.0;
    for (int p = 0; p < g.n_z; ++p) {
      double k1[2], k2[2], k3[2], k4[2];
      velocity(X, Y, p, 0.0, k1);
      velocity(X + 0.5 * h * k1[0], Y + 0.5 * h * k1[1], p, 0.5, k2);
      velocity(X + 0.5 * h * k2[0], Y + 0.5 * h * k2[1], p, 0.5, k3);
      velocity(X + h * k3[0], Y + h * k3[1], p, 1.0, k4);
      X += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
      Y += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
      if (!std::isfinite(X) || !std::isfinite(Y)) {
        failed = true;
        break;
      }
      flow.lambda_x[p + 1].values[node] = X - base.x(ix);
      flow.lambda_y[p + 1].values[node] = Y - base.y(iy);
    }
  }
  if (failed) throw StepFailure("integrate_flow: non-finite characteristic state");

  // Theta = det(I + grad Lambda) - 1, spectral derivatives per level.
  for (int iz = 0; iz < nl; ++iz) {
    const SpectralField2 sx = to_spectral(flow.lambda_x[iz]);
    const SpectralField2 sy = to_spectral(flow.lambda_y[iz]);
    const ScalarField2 dxx = from_spectral(deriv_x(sx)), dyx = from_spectral(deriv_y(sx));
    const ScalarField2 dxy = from_spectral(deriv_x(sy)), dyy = from_spectral(deriv_y(sy));
    for (int i = 0; i < ns; ++i) {
      const double det = (1.0 + dxx.values[i]) * (1.0 + dyy.values[i]) -
                         dyx.values[i] * dxy.values[i];
      flow.theta[iz].values[i] = det - 1.0;
      if (!(det > 0.0))
        throw StepFailure("integrate_flow: flow Jacobian not positive (1+Theta <= 0)");
    }
  }
  return flow;
}

// ---------------------------------------------------------------------------
// Flow inversion
// ---------------------------------------------------------------------------

void invert_flow(FlowData& flow, const FlowOptions& opt, FlowEval eval_mode) {
  const TorusGrid2& base = flow.grid.base;
  const int nl = flow.levels();
  const int ns = base.size();
  flow.inv_x.assign(nl, ScalarField2(base));
  flow.inv_y.assign(nl, ScalarField2(base));

  for (int iz = 0; iz < nl; ++iz) {
    const ScalarField2& lx = flow.lambda_x[iz];
    const ScalarField2& ly = flow.lambda_y[iz];
    std::optional<TrigField> tlx, tly;
    if (eval_mode == FlowEval::Trig) {
      tlx.emplace(lx);
      tly.emplace(ly);
    }
    auto eval_map = [&](double x, double y, double l[2], double jac[4]) {
      if (eval_mode == FlowEval::Trig) {
        double v, dx, dy;
        tlx->eval(x, y, &v, &dx, &dy);
        l[0] = v;
        jac[0] = 1.0 + dx;
        jac[1] = dy;
        tly->eval(x, y, &v, &dx, &dy);
        l[1] = v;
        jac[2] = dx;
        jac[3] = 1.0 + dy;
      } else {
        const Stencil s = make_stencil(base, x, y);
        l[0] = eval(lx, s);
        l[1] = eval(ly, s);
        jac[0] = 1.0 + eval_dx(lx, s);
        jac[1] = eval_dy(lx, s);
        jac[2] = eval_dx(ly, s);
        jac[3] = 1.0 + eval_dy(ly, s);
      }
    };

    bool failed = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int node = 0; node < ns; ++node) {
      const double rx = base.x(node % base.n_x), ry = base.y(node / base.n_x);
      double l[2], jac[4];
      // seed eta = r - Lambda(r)
      eval_map(rx, ry, l, jac);
      double ex = rx - l[0], ey = ry - l[1];
      bool ok = false;
      for (int it = 0; it < opt.max_newton; ++it) {
        eval_map(ex, ey, l, jac);
        const double gx = wrap_pi(ex + l[0] - rx);
        const double gy = wrap_pi(ey + l[1] - ry);
        if (std::max(std::abs(gx), std::abs(gy)) < opt.flow_tol) {
          ok = true;
          break;
        }
        const double det = jac[0] * jac[3] - jac[1] * jac[2];
        ex -= (jac[3] * gx - jac[1] * gy) / det;
        ey -= (-jac[2] * gx + jac[0] * gy) / det;
      }
      if (!ok) failed = true;
      flow.inv_x[iz].values[node] = ex - rx;
      flow.inv_y[iz].values[node] = ey - ry;
    }
    if (failed)
      throw InversionFailure("invert_flow: Newton stalled at level " + std::to_string(iz));
  }
  flow.inverted = true;
}

// ---------------------------------------------------------------------------
// Transport along characteristics
// ---------------------------------------------------------------------------

namespace {

struct TransportFields {
  std::vector<ScalarField2> v1, v2;    // velocity per level
  std::vector<ScalarField2> a[3][3];   // A entries per level
};

TransportFields build_transport_fields(const VectorField3& b) {
  const SlabGrid3& g = b.grid;
  const TorusGrid2& base = g.base;
  const int nl = g.levels(), ns = base.size();
  TransportFields tf;
  tf.v1.assign(nl, ScalarField2(base));
  tf.v2.assign(nl, ScalarField2(base));
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < 3; ++j) tf.a[l][j].assign(nl, ScalarField2(base));

  std::array<ScalarField3, 3> dz;
  for (int c = 0; c < 3; ++c) dz[c] = deriv_z_fd4(b.comp[c]);

  for (int iz = 0; iz < nl; ++iz) {
    std::array<ScalarField2, 3> lev, dxl, dyl;
    for (int c = 0; c < 3; ++c) {
      lev[c] = b.comp[c].level(iz);
      const SpectralField2 s = to_spectral(lev[c]);
      dxl[c] = from_spectral(deriv_x(s));
      dyl[c] = from_spectral(deriv_y(s));
    }
    for (int i = 0; i < ns; ++i) {
      const double denom = 1.0 + lev[2].values[i];
      tf.v1[iz].values[i] = lev[0].values[i] / denom;
      tf.v2[iz].values[i] = lev[1].values[i] / denom;
      for (int l = 0; l < 3; ++l) {
        tf.a[l][0][iz].values[i] = dxl[l].values[i] / denom;
        tf.a[l][1][iz].values[i] = dyl[l].values[i] / denom;
        tf.a[l][2][iz].values[i] = dz[l].values[size_t(iz) * ns + i] / denom;
      }
    }
  }
  return tf;
}

// Integrates w along characteristics on every level. If `delta`, the state is
// w - j0 with source A*j0; otherwise plain w with w(0)=j0.
std::vector<std::array<ScalarField2, 3>> integrate_w(const VectorField3& b,
                                                     const std::array<ScalarField2, 3>& j0,
                                                     bool delta) {
  const SlabGrid3& g = b.grid;
  const TorusGrid2& base = g.base;
  const int nl = g.levels(), ns = base.size();
  const double h = g.hz();
  const TransportFields tf = build_transport_fields(b);

  std::vector<std::array<ScalarField2, 3>> w(nl);
  for (int iz = 0; iz < nl; ++iz) w[iz].fill(ScalarField2(base));

  bool failed = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int node = 0; node < ns; ++node) {
    const int ix = node % base.n_x, iy = node / base.n_x;
    double X = base.x(ix), Y = base.y(iy);
    const double j0c[3] = {j0[0].values[node], j0[1].values[node], j0[2].values[node]};
    double wv[3] = {delta ? 0.0 : j0c[0], delta ? 0.0 : j0c[1], delta ? 0.0 : j0c[2]};
    for (int c = 0; c < 3; ++c) w[0][c].values[node] = wv[c];

    // combined RHS for position and w
    auto rhs = [&](const double pos[2], const double ww[3], int panel, double frac,
                   double out[5]) {
      const Stencil s = make_stencil(base, pos[0], pos[1]);
      const int i0 = std::min(panel, nl - 1), i1 = std::min(panel + 1, nl - 1);
      const double a0 = 1.0 - frac, a1 = frac;
      out[0] = a0 * eval(tf.v1[i0], s) + a1 * eval(tf.v1[i1], s);
      out[1] = a0 * eval(tf.v2[i0], s) + a1 * eval(tf.v2[i1], s);
      double A[3][3];
      for (int l = 0; l < 3; ++l)
        for (int j = 0; j < 3; ++j)
          A[l][j] = a0 * eval(tf.a[l][j][i0], s) + a1 * eval(tf.a[l][j][i1], s);
      for (int l = 0; l < 3; ++l) {
        double acc = 0.0;
        for (int j = 0; j < 3; ++j)
          acc += A[l][j] * (ww[j] + (delta ? j0c[j] : 0.0));
        out[2 + l] = acc;
      }
    };

    for (int p = 0; p < g.n_z; ++p) {
      double s0[5] = {X, Y, wv[0], wv[1], wv[2]};
      double k1[5], k2[5], k3[5], k4[5], tmp[5];
      double pos[2] = {s0[0], s0[1]};
      rhs(pos, s0 + 2, p, 0.0, k1);
      for (int c = 0; c < 5; ++c) tmp[c] = s0[c] + 0.5 * h * k1[c];
      pos[0] = tmp[0]; pos[1] = tmp[1];
      rhs(pos, tmp + 2, p, 0.5, k2);
      for (int c = 0; c < 5; ++c) tmp[c] = s0[c] + 0.5 * h * k2[c];
      pos[0] = tmp[0]; pos[1] = tmp[1];
      rhs(pos, tmp + 2, p, 0.5, k3);
      for (int c = 0; c < 5; ++c) tmp[c] = s0[c] + h * k3[c];
      pos[0] = tmp[0]; pos[1] = tmp[1];
      rhs(pos, tmp + 2, p, 1.0, k4);
      for (int c = 0; c < 5; ++c)
        s0[c] += h / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
      X = s0[0];
      Y = s0[1];
      wv[0] = s0[2];
      wv[1] = s0[3];
      wv[2] = s0[4];
      if (!std::isfinite(wv[0]) || !std::isfinite(wv[1]) || !std::isfinite(wv[2])) {
        failed = true;
        break;
      }
      for (int c = 0; c < 3; ++c) w[p + 1][c].values[node] = wv[c];
    }
  }
  if (failed) throw StepFailure("transport: non-finite state");
  return w;
}

VectorField3 compose_with_inverse(const FlowData& flow,
                                  const std::vector<std::array<ScalarField2, 3>>& w) {
  const SlabGrid3& g = flow.grid;
  const TorusGrid2& base = g.base;
  const int nl = g.levels(), ns = base.size();
  VectorField3 out(g);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int iz = 0; iz < nl; ++iz) {
    for (int node = 0; node < ns; ++node) {
      const double ex = base.x(node % base.n_x) + flow.inv_x[iz].values[node];
      const double ey = base.y(node / base.n_x) + flow.inv_y[iz].values[node];
      const Stencil s = make_stencil(base, ex, ey);
      for (int c = 0; c < 3; ++c)
        out.comp[c].values[size_t(iz) * ns + node] = eval(w[iz][c], s);
    }
  }
  return out;
}

}  // namespace

VectorField3 transport_solve(const VectorField3& b, const FlowData& flow,
                             const std::array<ScalarField2, 3>& j0, const FlowOptions& opt) {
  if (!flow.inverted) throw SolverError("transport_solve: flow not inverted");
  (void)opt;
  return compose_with_inverse(flow, integrate_w(b, j0, false));
}

VectorField3 transport_delta(const VectorField3& b, const FlowData& flow,
                             const std::array<ScalarField2, 3>& j0, const FlowOptions& opt) {
  if (!flow.inverted) throw SolverError("transport_delta: flow not inverted");
  (void)opt;
  return compose_with_inverse(flow, integrate_w(b, j0, true));
}

ScalarField3 pullback_surface(const FlowData& flow, const ScalarField2& u, FlowEval eval_mode) {
  if (!flow.inverted) throw SolverError("pullback_surface: flow not inverted");
  const SlabGrid3& g = flow.grid;
  const TorusGrid2& base = g.base;
  const int nl = g.levels(), ns = base.size();
  ScalarField3 out(g);
  std::optional<TrigField> tu;
  if (eval_mode == FlowEval::Trig) tu.emplace(u);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int iz = 0; iz < nl; ++iz) {
    for (int node = 0; node < ns; ++node) {
      const double ex = base.x(node % base.n_x) + flow.inv_x[iz].values[node];
      const double ey = base.y(node / base.n_x) + flow.inv_y[iz].values[node];
      double v;
      if (eval_mode == FlowEval::Trig) {
        tu->eval(ex, ey, &v, nullptr, nullptr);
      } else {
        v = eval(u, make_stencil(base, ex, ey));
      }
      out.values[size_t(iz) * ns + node] = v;
    }
  }
  return out;
}

double check_div_transport(const VectorField3& j) {
  const SlabGrid3& g = j.grid;
  const int nl = g.levels(), ns = g.base.size();
  const ScalarField3 d3 = deriv_z_fd4(j.comp[2]);
  double worst = 0.0;
  for (int iz = 0; iz < nl; ++iz) {
    const ScalarField2 d1 = deriv_x(j.comp[0].level(iz));
    const ScalarField2 d2 = deriv_y(j.comp[1].level(iz));
    double m = 0.0;
    for (int i = 0; i < ns; ++i)
      m = std::max(m, std::abs(d1.values[i] + d2.values[i] + d3.values[size_t(iz) * ns + i]));
    worst = std::max(worst, m);
  }
  return worst;
}

}  // namespace mhs
