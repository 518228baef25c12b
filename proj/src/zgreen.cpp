#include "mhs/zgreen.hpp"

#include <cmath>
#include <stdexcept>

namespace mhs {

namespace {

// Moments mu_k = int_0^h t^k e^{-a(h-t)} dt and nu_k = int_0^h t^k e^{-a t} dt,
// k = 0..3, series for small a*h, stable recursions otherwise.
// mu_k = k! sum_j (-a)^j h^{k+j+1}/(k+j+1)!   (series branch)
// nu_k =    sum_j (-a)^j h^{k+j+1}/(j! (k+j+1))
void panel_moments(double a, double h, double mu[4], double nu[4]) {
  const double ah = a * h;
  if (ah < 0.5) {
    for (int k = 0; k < 4; ++k) {
      double mu_sum = 0.0, nu_sum = 0.0;
      double aj = 1.0;       // (-a)^j
      double jfact = 1.0;    // j!
      double kjfact = k + 1.0;  // (k+j+1)!/k!, starts at k+1

      double hpow = std::pow(h, k + 1);   // h^{k+j+1}
      for (int j = 0; j < 40; ++j) {
        if (j > 0) {
          aj *= -a;
          jfact *= j;
          kjfact *= (k + j + 1);
          hpow *= h;
        }
        const double mt = aj * hpow / kjfact;
        const double nt = aj * hpow / (jfact * (k + j + 1));
        mu_sum += mt;
        nu_sum += nt;
        if (j > 2 && std::abs(mt) <= 1e-18 * std::abs(mu_sum) &&
            std::abs(nt) <= 1e-18 * std::abs(nu_sum))
          break;
      }
      mu[k] = mu_sum;
      nu[k] = nu_sum;
    }
    return;
  }
  const double e = std::exp(-ah);
  mu[0] = (1.0 - e) / a;
  nu[0] = mu[0];
  double hk = 1.0;
  for (int k = 1; k < 4; ++k) {
    hk *= h;
    mu[k] = (hk - k * mu[k - 1]) / a;
    nu[k] = (k * nu[k - 1] - hk * e) / a;
  }
}

}  // namespace

SplineZ build_spline(const std::vector<double>& values, double h) {
  const int n = static_cast<int>(values.size()) - 1;
  if (n < 1) throw std::invalid_argument("build_spline: need at least two nodes");
  SplineZ sp;
  sp.panels = n;
  sp.h = h;
  sp.y = values;
  std::vector<double> M(n + 1, 0.0);

  if (n >= 2) {
    std::vector<double> d(n + 1, 0.0);
    for (int i = 1; i < n; ++i)
      d[i] = 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
    if (n == 2) {
      M[1] = d[1] / 4.0;  // natural ends
    } else {
      // not-a-knot: M_1 and M_{n-1} decouple, interior rows are tridiagonal
      M[1] = d[1] / 6.0;
      M[n - 1] = d[n - 1] / 6.0;
      const int m = n - 3;  // unknowns M_2..M_{n-2}
      if (m == 1) {
        M[2] = (d[2] - M[1] - M[3]) / 4.0;
      } else if (m > 1) {
        std::vector<double> diag(m, 4.0), rhs(m);
        for (int i = 0; i < m; ++i) rhs[i] = d[i + 2];
        rhs[0] -= M[1];
        rhs[m - 1] -= M[n - 1];
        for (int i = 1; i < m; ++i) {  // Thomas
          const double w = 1.0 / diag[i - 1];
          diag[i] -= w;
          rhs[i] -= w * rhs[i - 1];
        }
        std::vector<double> x(m);
        x[m - 1] = rhs[m - 1] / diag[m - 1];
        for (int i = m - 2; i >= 0; --i) x[i] = (rhs[i] - x[i + 1]) / diag[i];
        for (int i = 0; i < m; ++i) M[i + 2] = x[i];
      }
      M[0] = 2.0 * M[1] - M[2];
      M[n] = 2.0 * M[n - 1] - M[n - 2];
    }
  }

  sp.c.resize(n);
  for (int i = 0; i < n; ++i) {
    const double yi = values[i], yi1 = values[i + 1];
    const double s = (yi1 - yi) / h - h * (2.0 * M[i] + M[i + 1]) / 6.0;
    sp.c[i] = {yi, s, 0.5 * M[i], (M[i + 1] - M[i]) / (6.0 * h)};
  }
  return sp;
}

void green_apply(const SplineZ& rho, double a, double L, std::vector<double>& I,
                 std::vector<double>& dI) {
  const int n = rho.panels;
  const double h = rho.h;
  I.assign(n + 1, 0.0);
  dI.assign(n + 1, 0.0);

  if (a == 0.0) {
    // G = z_<(L-z_>)/L
    std::vector<double> A(n + 1, 0.0), B(n + 1, 0.0);
    double eta[5];
    for (int k = 0; k < 5; ++k) eta[k] = std::pow(h, k + 1) / (k + 1);
    for (int i = 0; i < n; ++i) {
      const auto& c = rho.c[i];
      double m0 = 0.0, m1 = 0.0;  // int S, int t S over the panel
      for (int k = 0; k < 4; ++k) {
        m0 += c[k] * eta[k];
        m1 += c[k] * eta[k + 1];
      }
      const double zi = i * h;
      A[i + 1] = A[i] + zi * m0 + m1;
    }
    for (int i = n - 1; i >= 0; --i) {
      const auto& c = rho.c[i];
      double m0 = 0.0, m1 = 0.0;
      for (int k = 0; k < 4; ++k) {
        m0 += c[k] * eta[k];
        m1 += c[k] * eta[k + 1];
      }
      const double zi = i * h;
      B[i] = B[i + 1] + (L - zi) * m0 - m1;
    }
    for (int i = 0; i <= n; ++i) {
      const double z = i * h;
      I[i] = (L - z) / L * A[i] + z / L * B[i];
      dI[i] = (B[i] - A[i]) / L;
    }
    return;
  }

  double mu[4], nu[4];
  panel_moments(a, h, mu, nu);
  const double d = std::exp(-a * h);
  std::vector<double> P(n + 1, 0.0), R(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto& c = rho.c[i];
    double q = 0.0;
    for (int k = 0; k < 4; ++k) q += c[k] * mu[k];
    P[i + 1] = d * P[i] + q;
  }
  for (int i = n - 1; i >= 0; --i) {
    const auto& c = rho.c[i];
    double q = 0.0;
    for (int k = 0; k < 4; ++k) q += c[k] * nu[k];
    R[i] = d * R[i + 1] + q;
  }
  const double V = R[0], Pn = P[n];
  const double e2L = std::exp(-2.0 * a * L);
  const double denom = 1.0 - e2L;
  for (int i = 0; i <= n; ++i) {
    const double z = i * h;
    const double ez = std::exp(-a * z), eLz = std::exp(-a * (L - z));
    const double e2Lz = std::exp(-a * (2.0 * L - z)), eLpz = std::exp(-a * (L + z));
    I[i] = (P[i] + R[i] - ez * V - eLz * Pn + e2Lz * V - e2L * R[i] + eLpz * Pn - e2L * P[i]) /
           (2.0 * a * denom);
    dI[i] = ((R[i] - P[i]) * denom + (ez + e2Lz) * V - (eLz + eLpz) * Pn) / (2.0 * denom);
  }
}

double sigma_minus(double a, double L, double z) {
  if (a == 0.0) return (L - z) / L;
  const double denom = 1.0 - std::exp(-2.0 * a * L);
  return (std::exp(-a * z) - std::exp(-a * (2.0 * L - z))) / denom;
}

double sigma_plus(double a, double L, double z) {
  if (a == 0.0) return z / L;
  const double denom = 1.0 - std::exp(-2.0 * a * L);
  return (std::exp(-a * (L - z)) - std::exp(-a * (L + z))) / denom;
}

double dsigma_minus(double a, double L, double z) {
  if (a == 0.0) return -1.0 / L;
  const double denom = 1.0 - std::exp(-2.0 * a * L);
  return -a * (std::exp(-a * z) + std::exp(-a * (2.0 * L - z))) / denom;
}

double dsigma_plus(double a, double L, double z) {
  if (a == 0.0) return 1.0 / L;
  const double denom = 1.0 - std::exp(-2.0 * a * L);
  return a * (std::exp(-a * (L - z)) + std::exp(-a * (L + z))) / denom;
}

double bracket_B(double a, double L, double z) {
  if (a * L < 1e-6) return 0.5 * z * (L - z);
  return (1.0 - sigma_plus(a, L, z) - sigma_minus(a, L, z)) / (a * a);
}

double bracket_dB(double a, double L, double z) {
  if (a * L < 1e-6) return 0.5 * L - z;
  return -(dsigma_plus(a, L, z) + dsigma_minus(a, L, z)) / (a * a);
}

}  // namespace mhs
