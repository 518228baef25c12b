#include "mhs/fixed_point.hpp"

#include <cmath>
#include <complex>

#include "mhs/errors.hpp"
#include "mhs/spectral.hpp"
#include "mhs/transport.hpp"

namespace mhs {

namespace {

using cd = std::complex<double>;

VectorField3 cross(const VectorField3& a, const VectorField3& b) {
  VectorField3 out(a.grid);
  const size_t n = a.comp[0].values.size();
  for (size_t i = 0; i < n; ++i) {
    const double a1 = a.comp[0].values[i], a2 = a.comp[1].values[i], a3 = a.comp[2].values[i];
    const double b1 = b.comp[0].values[i], b2 = b.comp[1].values[i], b3 = b.comp[2].values[i];
    out.comp[0].values[i] = a2 * b3 - a3 * b2;
    out.comp[1].values[i] = a3 * b1 - a1 * b3;
    out.comp[2].values[i] = a1 * b2 - a2 * b1;
  }
  return out;
}

// 1-D periodic antiderivative on [0,2pi): A_i = int_0^{x_i} v, including the
// linear part of the mean (naive DFT; rows are short).
std::vector<double> antiderivative_1d(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<cd> coeff(n, cd(0, 0));
  for (int k = 0; k < n; ++k) {
    cd acc = 0.0;
    for (int j = 0; j < n; ++j) acc += v[j] * std::polar(1.0, -kTwoPi * j * k / n);
    coeff[k] = acc / double(n);
  }
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double x = kTwoPi * i / n;
    cd acc = coeff[0] * x;
    for (int k = 1; k < n; ++k) {
      if (k == n / 2) continue;
      const int m = k <= n / 2 ? k : k - n;
      const cd ik(0.0, m);
      acc += coeff[k] * (std::polar(1.0, m * x) - 1.0) / ik;
    }
    out[i] = acc.real();
  }
  return out;
}

double curl_residual_fd(const VectorField3& F) {
  const SlabGrid3& g = F.grid;
  const int nl = g.levels(), ns = g.base.size();
  const ScalarField3 d3F1 = deriv_z_fd4(F.comp[0]);
  const ScalarField3 d3F2 = deriv_z_fd4(F.comp[1]);
  double worst = 0.0;
  for (int iz = 0; iz < nl; ++iz) {
    const SpectralField2 s1 = to_spectral(F.comp[0].level(iz));
    const SpectralField2 s2 = to_spectral(F.comp[1].level(iz));
    const SpectralField2 s3 = to_spectral(F.comp[2].level(iz));
    const ScalarField2 d2F3 = from_spectral(deriv_y(s3)), d1F3 = from_spectral(deriv_x(s3));
    const ScalarField2 d1F2 = from_spectral(deriv_x(s2)), d2F1 = from_spectral(deriv_y(s1));
    for (int i = 0; i < ns; ++i) {
      const size_t k = size_t(iz) * ns + i;
      worst = std::max({worst, std::abs(d2F3.values[i] - d3F2.values[k]),
                        std::abs(d3F1.values[k] - d1F3.values[i]),
                        std::abs(d1F2.values[i] - d2F1.values[i])});
    }
  }
  return worst;
}

}  // namespace

VectorField3 full_field(const VectorField3& b) {
  VectorField3 B = b;
  for (auto& v : B.comp[2].values) v += 1.0;
  return B;
}

VectorField3 gamma_step(const VectorField3& b, const BoundaryData& data,
                        const DerivedBoundary& derived, const SolverConfig& config,
                        SolverState* state, GammaStats* stats) {
  FlowOptions fopt;
  fopt.flow_tol = config.flow_tol;
  fopt.max_newton = config.max_newton;
  CurrentOptions copt;
  copt.n_s = config.n_s;
  copt.j0_tol = config.j0_tol;
  copt.max_neumann = config.max_neumann;
  copt.damping = config.damping;
  copt.flow = fopt;

  FlowData flow = integrate_flow(b, fopt);
  invert_flow(flow, fopt);
  const KernelCoeffs kc = build_kernel_coeffs(flow, copt);
  const J0Result j0res = solve_j0(b, flow, kc, data, derived, copt);
  VectorField3 j = transport_solve(b, flow, j0res.j0.as_array(), fopt);
  DivCurlSolution sol = divcurl_solve_for_traces(j, data, derived);

  if (stats) {
    stats->neumann_iterations = j0res.iterations;
    stats->neumann_contraction = j0res.contraction;
    stats->kernel_tail = kc.tail_bound;
    stats->j0_constraint_residual = j0res.constraint_residual;
  }
  if (state) {
    state->j = std::move(j);
    state->j0 = j0res.j0;
    state->flux = sol.realized;
    auto& norms = state->diagnostics.operator_norms;
    const VectorField3 dj = transport_delta(b, flow, j0res.j0.as_array(), fopt);
    for (int kappa = 1; kappa <= 4; ++kappa) {
      const double n1 = max_abs(t_kappa_apply(kappa, kc, j0res.j0.j0_1));
      const double n2 = max_abs(t_kappa_apply(kappa, kc, j0res.j0.j0_2));
      norms["T" + std::to_string(kappa)] = std::max(n1, n2);
    }
    const auto S = op_S(dj, config.L);
    const auto H = op_H_star(b, j0res.j0);
    norms["S"] = std::max(max_abs(S[0]), max_abs(S[1]));
    norms["H_star"] = std::max(max_abs(H[0]), max_abs(H[1]));
    norms["kernel_tail"] = kc.tail_bound;
    norms["j0_constraint_residual"] = j0res.constraint_residual;
    norms["neumann_contraction"] = j0res.contraction;
    norms["neumann_iterations"] = j0res.iterations;
    const Fluxes balance = compute_fluxes(j0res.j0, dj, data, derived, kc);
    norms["flux_balance_J1"] = balance.J1;
    norms["flux_balance_J2"] = balance.J2;
    norms["flux_defect_J1"] = std::abs(balance.J1 - sol.realized.J1);
    norms["flux_defect_J2"] = std::abs(balance.J2 - sol.realized.J2);
    norms["divcurl_res_curl"] = sol.res_curl;
    norms["divcurl_res_div"] = sol.res_div;
  }
  return std::move(sol.W);
}

SolverState solve(const BoundaryData& data, const SolverConfig& config) {
  config.validate();
  ValidateOptions vopt;
  vopt.M_max = config.M_max;
  vopt.alpha = config.alpha;
  validate(data, vopt);

  const TorusGrid2 base(config.n_x, config.n_y);
  if (!(data.f_minus.grid == base))
    throw ValidationError("solve: boundary data grid does not match config grid");
  const SlabGrid3 grid(base, config.n_z, config.L);
  const DerivedBoundary derived = build_derived(data, config.L);

  SolverState state;
  state.b = VectorField3(grid);
  VectorField3 b_prev(grid);
  double prev_delta = -1.0;
  double quotient = 0.0;
  bool converged = false;
  GammaStats stats;

  for (int it = 1; it <= config.max_outer; ++it) {
    SolverState step_state;
    const VectorField3 b_next = gamma_step(state.b, data, derived, config, &step_state, &stats);
    double delta = 0.0;
    for (int c = 0; c < 3; ++c)
      for (size_t i = 0; i < b_next.comp[c].values.size(); ++i)
        delta = std::max(delta,
                         std::abs(b_next.comp[c].values[i] - state.b.comp[c].values[i]));
    if (prev_delta > 0.0) quotient = delta / prev_delta;

    b_prev = state.b;
    state.b = b_next;
    state.j = std::move(step_state.j);
    state.j0 = std::move(step_state.j0);
    state.flux = step_state.flux;
    state.diagnostics.operator_norms = std::move(step_state.diagnostics.operator_norms);
    state.iterate = it;
    state.diagnostics.iterate_delta = delta;
    state.diagnostics.contraction_estimate = quotient;

    if (delta < config.fp_tol) {
      converged = true;
      break;
    }
    prev_delta = delta;
  }
  if (!converged)
    throw NonConvergence("solve: no fixed point within max_outer iterations; last contraction "
                         "estimate " + std::to_string(quotient));

  const VectorField3 B = full_field(state.b);
  state.p = pressure_reconstruct(B, state.j);
  const DiagnosticsReport residuals = verify(state, data, config);
  auto norms = std::move(state.diagnostics.operator_norms);
  const double it_delta = state.diagnostics.iterate_delta;
  const double contr = state.diagnostics.contraction_estimate;
  state.diagnostics = residuals;
  state.diagnostics.operator_norms = std::move(norms);
  state.diagnostics.iterate_delta = it_delta;
  state.diagnostics.contraction_estimate = contr;

  // Hoelder-style smallness report for b and for the final iterate step
  // (distance-capped seminorms; the convergence gate itself is the max norm)
  const double cap = 3.0 * std::max({grid.base.hx(), grid.base.hy(), grid.hz()});
  double hb = 0.0, hd = 0.0;
  for (int c = 0; c < 3; ++c) {
    hb = std::max(hb, holder_norm_estimate(state.b.comp[c], 1, config.alpha, cap));
    ScalarField3 diff(grid);
    for (size_t i = 0; i < diff.values.size(); ++i)
      diff.values[i] = state.b.comp[c].values[i] - b_prev.comp[c].values[i];
    hd = std::max(hd, holder_norm_estimate(diff, 1, config.alpha, cap));
  }
  state.diagnostics.operator_norms["holder_b"] = hb;
  state.diagnostics.holder_delta = hd;
  return state;
}

ScalarField3 pressure_reconstruct(const VectorField3& B, const VectorField3& j, double tol) {
  const SlabGrid3& g = B.grid;
  const TorusGrid2& base = g.base;
  const int nl = g.levels(), ns = base.size();
  const VectorField3 F = cross(j, B);

  const double scale = std::max(1.0, max_abs(F));
  const double curl_res = curl_residual_fd(F);
  if (curl_res > tol * scale)
    throw PathDependence("pressure_reconstruct: curl(j x B) residual " +
                         std::to_string(curl_res) + " exceeds tolerance");
  const double defect_x = std::abs(mean(F.comp[0].level(0)));
  const double defect_y = std::abs(mean(F.comp[1].level(0)));
  if (std::max(defect_x, defect_y) > tol * scale)
    throw PathDependence("pressure_reconstruct: periodicity defect of j x B at z=0");

  ScalarField3 p(g);
  // leg 1: along x at y=0, z=0
  std::vector<double> row(base.n_x);
  for (int ix = 0; ix < base.n_x; ++ix) row[ix] = F.comp[0].at(ix, 0, 0);
  const std::vector<double> P1 = antiderivative_1d(row);
  // leg 2: along y at z=0, for every x
  std::vector<std::vector<double>> P2(base.n_x);
  for (int ix = 0; ix < base.n_x; ++ix) {
    std::vector<double> col(base.n_y);
    for (int iy = 0; iy < base.n_y; ++iy) col[iy] = F.comp[1].at(ix, iy, 0);
    P2[ix] = antiderivative_1d(col);
  }
  // leg 3: trapezoid in z of F3
  for (int iy = 0; iy < base.n_y; ++iy)
    for (int ix = 0; ix < base.n_x; ++ix) {
      double acc = P1[ix] + P2[ix][iy];
      p.at(ix, iy, 0) = acc;
      for (int iz = 1; iz < nl; ++iz) {
        acc += 0.5 * g.hz() * (F.comp[2].at(ix, iy, iz - 1) + F.comp[2].at(ix, iy, iz));
        p.at(ix, iy, iz) = acc;
      }
    }
  (void)ns;
  return p;
}

DiagnosticsReport verify(const SolverState& state, const BoundaryData& data,
                         const SolverConfig& config) {
  (void)config;
  DiagnosticsReport rep;
  const VectorField3 B = full_field(state.b);
  const SlabGrid3& g = B.grid;
  const int nl = g.levels(), ns = g.base.size();

  const ScalarField3 d3B1 = deriv_z_fd4(B.comp[0]);
  const ScalarField3 d3B2 = deriv_z_fd4(B.comp[1]);
  const ScalarField3 d3B3 = deriv_z_fd4(B.comp[2]);
  const VectorField3 F = cross(state.j, B);
  const ScalarField3 d3p = deriv_z_fd4(state.p);

  double rc = 0.0, rd = 0.0, rf = 0.0;
  for (int iz = 0; iz < nl; ++iz) {
    const SpectralField2 s1 = to_spectral(B.comp[0].level(iz));
    const SpectralField2 s2 = to_spectral(B.comp[1].level(iz));
    const SpectralField2 s3 = to_spectral(B.comp[2].level(iz));
    const SpectralField2 sp = to_spectral(state.p.level(iz));
    const ScalarField2 d2B3 = from_spectral(deriv_y(s3)), d1B3 = from_spectral(deriv_x(s3));
    const ScalarField2 d1B2 = from_spectral(deriv_x(s2)), d2B1 = from_spectral(deriv_y(s1));
    const ScalarField2 d1B1 = from_spectral(deriv_x(s1)), d2B2 = from_spectral(deriv_y(s2));
    const ScalarField2 d1p = from_spectral(deriv_x(sp)), d2p = from_spectral(deriv_y(sp));
    for (int i = 0; i < ns; ++i) {
      const size_t k = size_t(iz) * ns + i;
      rc = std::max(
          {rc, std::abs(d2B3.values[i] - d3B2.values[k] - state.j.comp[0].values[k]),
           std::abs(d3B1.values[k] - d1B3.values[i] - state.j.comp[1].values[k]),
           std::abs(d1B2.values[i] - d2B1.values[i] - state.j.comp[2].values[k])});
      rd = std::max(rd, std::abs(d1B1.values[i] + d2B2.values[i] + d3B3.values[k]));
      rf = std::max({rf, std::abs(F.comp[0].values[k] - d1p.values[i]),
                     std::abs(F.comp[1].values[k] - d2p.values[i]),
                     std::abs(F.comp[2].values[k] - d3p.values[k])});
    }
  }
  rep.residual_curl = rc;
  rep.residual_div = rd;
  rep.residual_force = rf;

  double bn = 0.0, bt = 0.0;
  for (int i = 0; i < ns; ++i) {
    const size_t ktop = size_t(nl - 1) * ns + i;
    bn = std::max({bn, std::abs(B.comp[2].values[i] - 1.0 - data.f_minus.values[i]),
                   std::abs(B.comp[2].values[ktop] - 1.0 - data.f_plus.values[i])});
    bt = std::max({bt, std::abs(B.comp[0].values[i] - data.g[0].values[i]),
                   std::abs(B.comp[1].values[i] - data.g[1].values[i])});
  }
  rep.residual_bn = bn;
  rep.residual_btau = bt;
  rep.pressure_mean_defect_x = std::abs(mean(F.comp[0].level(0)));
  rep.pressure_mean_defect_y = std::abs(mean(F.comp[1].level(0)));
  rep.contraction_estimate = state.diagnostics.contraction_estimate;
  rep.iterate_delta = state.diagnostics.iterate_delta;
  rep.holder_delta = state.diagnostics.holder_delta;
  return rep;
}

}  // namespace mhs
