#pragma once

#include <string>

namespace mhs {

// Flat key=value configuration; keys are exactly the field names.
struct SolverConfig {
  int n_x = 16;
  int n_y = 16;
  int n_z = 32;          // z panels (n_z+1 node levels)
  double L = 1.0;
  int n_s = 32;          // Gauss-Legendre nodes for kernel s-integrals
  int n_quad_z = 4;      // refinement factor for auxiliary z quadratures
  double fp_tol = 1e-10;
  double j0_tol = 1e-10;
  double flow_tol = 1e-10;
  int max_outer = 50;
  int max_neumann = 200;
  int max_newton = 50;
  double M_max = 0.1;
  double damping = 1.0;
  double alpha = 0.5;    // Hoelder exponent for diagnostics

  void validate() const;  // throws ValidationError
};

SolverConfig parse_config_text(const std::string& text);
SolverConfig load_config(const std::string& path);
std::string config_to_text(const SolverConfig& c);

}  // namespace mhs
