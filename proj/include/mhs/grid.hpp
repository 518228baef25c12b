#pragma once

// Grids and field containers for the periodic slab T^2 x [0,L].
//
// Torus nodes are x_i = 2*pi*i/n_x, y_j = 2*pi*j/n_y. The slab has n_z
// panels in z, i.e. n_z+1 node levels z_k = k*L/n_z including both
// boundaries. 2-D data is stored row-major with x fastest:
// idx = iy*n_x + ix; 3-D adds the level as the slowest index.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mhs {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct TorusGrid2 {
  int n_x = 0;
  int n_y = 0;

  TorusGrid2() = default;
  TorusGrid2(int nx, int ny) : n_x(nx), n_y(ny) {
    if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0)
      throw std::invalid_argument("TorusGrid2: n_x, n_y must be even and >= 4");
  }

  int size() const { return n_x * n_y; }
  double x(int ix) const { return kTwoPi * ix / n_x; }
  double y(int iy) const { return kTwoPi * iy / n_y; }
  double hx() const { return kTwoPi / n_x; }
  double hy() const { return kTwoPi / n_y; }
  // Quadrature weight of one node (rectangle rule, spectrally accurate).
  double cell_area() const { return hx() * hy(); }

  bool operator==(const TorusGrid2&) const = default;
};

struct SlabGrid3 {
  TorusGrid2 base;
  int n_z = 0;  // number of z panels; n_z+1 node levels
  double L = 0.0;

  SlabGrid3() = default;
  SlabGrid3(TorusGrid2 b, int nz, double height) : base(b), n_z(nz), L(height) {
    if (nz < 1) throw std::invalid_argument("SlabGrid3: n_z must be >= 1");
    if (!(height > 0.0)) throw std::invalid_argument("SlabGrid3: L must be > 0");
  }

  int levels() const { return n_z + 1; }
  int size() const { return base.size() * levels(); }
  double z(int iz) const { return L * iz / n_z; }
  double hz() const { return L / n_z; }

  bool operator==(const SlabGrid3&) const = default;
};

struct ScalarField2 {
  TorusGrid2 grid;
  std::vector<double> values;

  ScalarField2() = default;
  explicit ScalarField2(TorusGrid2 g) : grid(g), values(g.size(), 0.0) {}

  double& at(int ix, int iy) { return values[static_cast<size_t>(iy) * grid.n_x + ix]; }
  double at(int ix, int iy) const { return values[static_cast<size_t>(iy) * grid.n_x + ix]; }
};

struct ScalarField3 {
  SlabGrid3 grid;
  std::vector<double> values;

  ScalarField3() = default;
  explicit ScalarField3(SlabGrid3 g) : grid(g), values(g.size(), 0.0) {}

  double& at(int ix, int iy, int iz) {
    return values[(static_cast<size_t>(iz) * grid.base.n_y + iy) * grid.base.n_x + ix];
  }
  double at(int ix, int iy, int iz) const {
    return values[(static_cast<size_t>(iz) * grid.base.n_y + iy) * grid.base.n_x + ix];
  }
  // View of one z level as a surface field.
  ScalarField2 level(int iz) const {
    ScalarField2 s(grid.base);
    const size_t off = static_cast<size_t>(iz) * grid.base.size();
    std::copy(values.begin() + off, values.begin() + off + grid.base.size(), s.values.begin());
    return s;
  }
  void set_level(int iz, const ScalarField2& s) {
    const size_t off = static_cast<size_t>(iz) * grid.base.size();
    std::copy(s.values.begin(), s.values.end(), values.begin() + off);
  }
};

template <int N>
struct VectorFieldN2 {
  TorusGrid2 grid;
  std::array<ScalarField2, N> comp;

  VectorFieldN2() = default;
  explicit VectorFieldN2(TorusGrid2 g) : grid(g) { comp.fill(ScalarField2(g)); }
  ScalarField2& operator[](int c) { return comp[c]; }
  const ScalarField2& operator[](int c) const { return comp[c]; }
};

using VectorField2 = VectorFieldN2<2>;

struct VectorField3 {
  SlabGrid3 grid;
  std::array<ScalarField3, 3> comp;

  VectorField3() = default;
  explicit VectorField3(SlabGrid3 g) : grid(g) { comp.fill(ScalarField3(g)); }
  ScalarField3& operator[](int c) { return comp[c]; }
  const ScalarField3& operator[](int c) const { return comp[c]; }
};

// Complex Fourier coefficients on the full lattice, FFT layout
// (k_y*n_x + k_x with k in [0,n)). Coefficient convention:
//   coeff(m,n) = integral of f(x,y) e^{-i(mx+ny)} over T^2,
// so coeff(0,0) = (2*pi)^2 * mean(f) and real fields are
// conjugate-symmetric: coeff(-m,-n) = conj(coeff(m,n)).
struct SpectralField2 {
  TorusGrid2 grid;
  std::vector<std::complex<double>> coeffs;

  SpectralField2() = default;
  explicit SpectralField2(TorusGrid2 g) : grid(g), coeffs(g.size(), {0.0, 0.0}) {}

  // FFT index of lattice mode (m,n); m in [-n_x/2, n_x/2), wrap-around.
  int index(int m, int n) const {
    const int kx = (m % grid.n_x + grid.n_x) % grid.n_x;
    const int ky = (n % grid.n_y + grid.n_y) % grid.n_y;
    return ky * grid.n_x + kx;
  }
  std::complex<double>& coeff(int m, int n) { return coeffs[index(m, n)]; }
  std::complex<double> coeff(int m, int n) const { return coeffs[index(m, n)]; }

  int mode_m(int kx) const { return kx <= grid.n_x / 2 ? kx : kx - grid.n_x; }
  int mode_n(int ky) const { return ky <= grid.n_y / 2 ? ky : ky - grid.n_y; }
  bool is_nyquist(int kx, int ky) const {
    return kx == grid.n_x / 2 || ky == grid.n_y / 2;
  }
};

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(const ScalarField2& f) { return max_abs(f.values); }
inline double max_abs(const ScalarField3& f) { return max_abs(f.values); }
inline double max_abs(const VectorField3& f) {
  return std::max({max_abs(f.comp[0]), max_abs(f.comp[1]), max_abs(f.comp[2])});
}

}  // namespace mhs
