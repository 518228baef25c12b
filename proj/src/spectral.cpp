#include "mhs/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "mhs/errors.hpp"

namespace mhs {

namespace {

// Cached FFTW plans per grid size. Plan creation is not thread-safe; execution
// on caller-owned buffers via fftw_execute_dft is.
class Fft2 {
 public:
  static Fft2& get(const TorusGrid2& g) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, Fft2*> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(g.n_x, g.n_y);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, new Fft2(g)).first;
    return *it->second;
  }

  void forward(std::complex<double>* data) const {
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }
  void backward(std::complex<double>* data) const {
    fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }

 private:
  explicit Fft2(const TorusGrid2& g) {
    std::vector<std::complex<double>> buf(g.size());
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fwd_ = fftw_plan_dft_2d(g.n_y, g.n_x, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(g.n_y, g.n_x, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_plan fwd_;
  fftw_plan bwd_;
};

}  // namespace

SpectralField2 to_spectral(const ScalarField2& field) {
  SpectralField2 s(field.grid);
  for (int i = 0; i < field.grid.size(); ++i) s.coeffs[i] = field.values[i];
  Fft2::get(field.grid).forward(s.coeffs.data());
  const double scale = field.grid.cell_area();  // (2pi)^2 / (n_x n_y)
  for (auto& c : s.coeffs) c *= scale;
  return s;
}

ScalarField2 from_spectral(const SpectralField2& s) {
  std::vector<std::complex<double>> buf = s.coeffs;
  Fft2::get(s.grid).backward(buf.data());
  const double scale = 1.0 / (kTwoPi * kTwoPi);
  double max_re = 0.0, max_im = 0.0;
  for (auto& c : buf) {
    c *= scale;
    max_re = std::max(max_re, std::abs(c.real()));
    max_im = std::max(max_im, std::abs(c.imag()));
  }
  if (max_im > 1e-10 * std::max(max_re, 1e-280))
    throw SymmetryViolation("from_spectral: imaginary residue " + std::to_string(max_im) +
                            " exceeds 1e-10 relative (coefficients not conjugate-symmetric)");
  ScalarField2 f(s.grid);
  for (int i = 0; i < s.grid.size(); ++i) f.values[i] = buf[i].real();
  return f;
}

SpectralField2 apply_multiplier(const SpectralField2& s, const Multiplier& mu) {
  SpectralField2 out(s.grid);
  for (int ky = 0; ky < s.grid.n_y; ++ky) {
    for (int kx = 0; kx < s.grid.n_x; ++kx) {
      const int idx = ky * s.grid.n_x + kx;
      if (s.is_nyquist(kx, ky)) {
        out.coeffs[idx] = 0.0;
        continue;
      }
      out.coeffs[idx] = mu(s.mode_m(kx), s.mode_n(ky)) * s.coeffs[idx];
    }
  }
  return out;
}

namespace {
SpectralField2 odd_multiplier(const SpectralField2& s, int axis, int degree) {
  return apply_multiplier(s, [axis, degree](int m, int n) -> std::complex<double> {
    if (m == 0 && n == 0) return {0.0, 0.0};
    const double norm2 = double(m) * m + double(n) * n;
    const double denom = degree == 1 ? std::sqrt(norm2) : norm2;
    const double comp = axis == 0 ? m : n;
    return {0.0, -comp / denom};
  });
}
}  // namespace

SpectralField2 riesz_x(const SpectralField2& s) { return odd_multiplier(s, 0, 1); }
SpectralField2 riesz_y(const SpectralField2& s) { return odd_multiplier(s, 1, 1); }
SpectralField2 op_B_x(const SpectralField2& s) { return odd_multiplier(s, 0, 2); }
SpectralField2 op_B_y(const SpectralField2& s) { return odd_multiplier(s, 1, 2); }

SpectralField2 deriv_x(const SpectralField2& s) {
  return apply_multiplier(s, [](int m, int) { return std::complex<double>(0.0, m); });
}
SpectralField2 deriv_y(const SpectralField2& s) {
  return apply_multiplier(s, [](int, int n) { return std::complex<double>(0.0, n); });
}

double t0_multiplier(double xi_norm, double L) {
  if (xi_norm == 0.0) return 0.5 * L;
  return std::tanh(0.5 * xi_norm * L) / xi_norm;
}

namespace {
SpectralField2 t0_scaled(const SpectralField2& s, double L, bool inverse) {
  SpectralField2 out(s.grid);
  for (int ky = 0; ky < s.grid.n_y; ++ky) {
    for (int kx = 0; kx < s.grid.n_x; ++kx) {
      const int idx = ky * s.grid.n_x + kx;
      const double m = s.mode_m(kx), n = s.mode_n(ky);
      const double mult = t0_multiplier(std::hypot(m, n), L);
      out.coeffs[idx] = s.coeffs[idx] * (inverse ? 1.0 / mult : mult);
    }
  }
  return out;
}
}  // namespace

SpectralField2 t0_apply(const SpectralField2& s, double L) { return t0_scaled(s, L, false); }
SpectralField2 t0_inverse(const SpectralField2& s, double L) { return t0_scaled(s, L, true); }

ScalarField2 deriv_x(const ScalarField2& f) { return from_spectral(deriv_x(to_spectral(f))); }
ScalarField2 deriv_y(const ScalarField2& f) { return from_spectral(deriv_y(to_spectral(f))); }
ScalarField2 t0_inverse(const ScalarField2& f, double L) {
  return from_spectral(t0_inverse(to_spectral(f), L));
}

double mean(const ScalarField2& f) {
  double sum = 0.0;
  for (double v : f.values) sum += v;
  return sum / f.grid.size();
}

double mean_product(const ScalarField2& f, const ScalarField2& g) {
  double sum = 0.0;
  for (int i = 0; i < f.grid.size(); ++i) sum += f.values[i] * g.values[i];
  return sum / f.grid.size();
}

double spectral_energy(const SpectralField2& s) {
  double sum = 0.0;
  for (const auto& c : s.coeffs) sum += std::norm(c);
  return sum / (kTwoPi * kTwoPi);
}

ScalarField3 deriv_z_fd4(const ScalarField3& f) {
  ScalarField3 out(f.grid);
  const int nl = f.grid.levels();
  const int ns = f.grid.base.size();
  const double h = f.grid.hz();
  if (nl < 5) {  // low-order fallback for very coarse slabs
    for (int iz = 0; iz < nl; ++iz) {
      const int izm = std::max(iz - 1, 0), izp = std::min(iz + 1, nl - 1);
      const double denom = (izp - izm) * h;
      for (int i = 0; i < ns; ++i)
        out.values[size_t(iz) * ns + i] =
            (f.values[size_t(izp) * ns + i] - f.values[size_t(izm) * ns + i]) / denom;
    }
    return out;
  }
  auto v = [&](int iz, int i) { return f.values[size_t(iz) * ns + i]; };
  for (int iz = 0; iz < nl; ++iz) {
    for (int i = 0; i < ns; ++i) {
      double d;
      if (iz >= 2 && iz <= nl - 3) {
        d = (-v(iz + 2, i) + 8 * v(iz + 1, i) - 8 * v(iz - 1, i) + v(iz - 2, i)) / (12 * h);
      } else if (iz <= 1) {
        const int b = 0;
        const double f0 = v(b, i), f1 = v(b + 1, i), f2 = v(b + 2, i), f3 = v(b + 3, i),
                     f4 = v(b + 4, i);
        if (iz == 0)
          d = (-25 * f0 + 48 * f1 - 36 * f2 + 16 * f3 - 3 * f4) / (12 * h);
        else
          d = (-3 * f0 - 10 * f1 + 18 * f2 - 6 * f3 + f4) / (12 * h);
      } else {
        const int b = nl - 5;
        const double f0 = v(b, i), f1 = v(b + 1, i), f2 = v(b + 2, i), f3 = v(b + 3, i),
                     f4 = v(b + 4, i);
        if (iz == nl - 1)
          d = (25 * f4 - 48 * f3 + 36 * f2 - 16 * f1 + 3 * f0) / (12 * h);
        else
          d = (3 * f4 + 10 * f3 - 18 * f2 + 6 * f1 - f0) / (12 * h);
      }
      out.values[size_t(iz) * ns + i] = d;
    }
  }
  return out;
}

namespace {

// All spectral xy-derivatives of order exactly k (k <= 2).
std::vector<ScalarField2> xy_derivatives(const ScalarField2& f, int k) {
  if (k == 0) return {f};
  const SpectralField2 s = to_spectral(f);
  if (k == 1) return {from_spectral(deriv_x(s)), from_spectral(deriv_y(s))};
  return {from_spectral(deriv_x(deriv_x(s))), from_spectral(deriv_x(deriv_y(s))),
          from_spectral(deriv_y(deriv_y(s)))};
}

double torus_dist(double a, double b) {
  double d = std::abs(a - b);
  return std::min(d, kTwoPi - d);
}

double seminorm_alpha_2d(const std::vector<const ScalarField2*>& fields, double alpha,
                         double cap) {
  if (fields.empty()) return 0.0;
  const TorusGrid2& g = fields[0]->grid;
  double sup = 0.0;
  for (int jy = 0; jy < g.n_y; ++jy)
    for (int jx = 0; jx < g.n_x; ++jx)
      for (int iy = 0; iy <= jy; ++iy)
        for (int ix = 0; ix < g.n_x; ++ix) {
          if (iy == jy && ix >= jx) continue;
          const double dx = torus_dist(g.x(ix), g.x(jx));
          const double dy = torus_dist(g.y(iy), g.y(jy));
          const double r = std::hypot(dx, dy);
          if (r == 0.0 || (cap > 0.0 && r > cap)) continue;
          const double w = std::pow(r, -alpha);
          for (const ScalarField2* f : fields)
            sup = std::max(sup, std::abs(f->at(ix, iy) - f->at(jx, jy)) * w);
        }
  return sup;
}

}  // namespace

double holder_norm_estimate(const ScalarField2& f, int k, double alpha, double distance_cap) {
  double sup = 0.0;
  std::vector<ScalarField2> top;
  for (int order = 0; order <= k; ++order) {
    auto derivs = xy_derivatives(f, order);
    for (const auto& d : derivs) sup = std::max(sup, max_abs(d));
    if (order == k) top = std::move(derivs);
  }
  std::vector<const ScalarField2*> ptrs;
  for (const auto& d : top) ptrs.push_back(&d);
  double semi = 0.0;
  for (const ScalarField2* p : ptrs) semi += seminorm_alpha_2d({p}, alpha, distance_cap);
  return sup + semi;
}

double holder_norm_estimate(const ScalarField3& f, int k, double alpha, double distance_cap) {
  const SlabGrid3& g = f.grid;
  const int nl = g.levels();
  // Derivatives up to order k: spectral in x,y per level, FD4 in z.
  std::vector<ScalarField3> all_orders[3];
  all_orders[0] = {f};
  for (int order = 1; order <= k; ++order) {
    std::vector<ScalarField3> cur;
    for (const auto& prev : all_orders[order - 1]) {
      ScalarField3 dx(g), dy(g);
      for (int iz = 0; iz < nl; ++iz) {
        const SpectralField2 s = to_spectral(prev.level(iz));
        dx.set_level(iz, from_spectral(deriv_x(s)));
        dy.set_level(iz, from_spectral(deriv_y(s)));
      }
      cur.push_back(std::move(dx));
      cur.push_back(std::move(dy));
      cur.push_back(deriv_z_fd4(prev));
    }
    all_orders[order] = std::move(cur);
  }
  double sup = 0.0;
  for (int order = 0; order <= k; ++order)
    for (const auto& d : all_orders[order]) sup = std::max(sup, max_abs(d));

  double semi = 0.0;
  const double cap = distance_cap;
  for (const auto& d : all_orders[k]) {
    double s_d = 0.0;
    for (int jz = 0; jz < nl; ++jz)
      for (int iz = 0; iz <= jz; ++iz) {
        const double dz = g.z(jz) - g.z(iz);
        if (cap > 0.0 && dz > cap) continue;
        for (int jy = 0; jy < g.base.n_y; ++jy)
          for (int jx = 0; jx < g.base.n_x; ++jx)
            for (int iy = 0; iy < g.base.n_y; ++iy)
              for (int ix = 0; ix < g.base.n_x; ++ix) {
                if (iz == jz && (iy > jy || (iy == jy && ix >= jx))) continue;
                const double dx = torus_dist(g.base.x(ix), g.base.x(jx));
                const double dy = torus_dist(g.base.y(iy), g.base.y(jy));
                const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (r == 0.0 || (cap > 0.0 && r > cap)) continue;
                s_d = std::max(s_d, std::abs(d.at(ix, iy, iz) - d.at(jx, jy, jz)) *
                                        std::pow(r, -alpha));
              }
      }
    semi += s_d;
  }
  return sup + semi;
}

}  // namespace mhs
