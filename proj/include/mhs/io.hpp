#pragma once

// cli_io support: closed-form expression evaluation for boundary data, the
// MHSF binary field format, CSV tables and the diagnostics JSON.

#include <string>
#include <vector>

#include "mhs/boundary.hpp"
#include "mhs/config.hpp"
#include "mhs/fixed_point.hpp"
#include "mhs/grid.hpp"

namespace mhs {

// Arithmetic expressions over x,y with sin/cos/exp, +-*/^, parentheses, pi.
// Throws ValidationError on parse failure.
double eval_expression(const std::string& expr, double x, double y);
ScalarField2 field_from_expression(const std::string& expr, const TorusGrid2& grid);

// CSV node table: first line "n_x,n_y", then n_x*n_y values row-major.
ScalarField2 field_from_csv(const std::string& path, const TorusGrid2& grid);

// Data-spec file: lines "f_minus = <expr>", "f_plus = ...", "g1 = ...",
// "g2 = ..."; a value of the form csv:<path> loads a table instead.
BoundaryData load_boundary_data(const std::string& path, const TorusGrid2& grid);

// MHSF field files: 64-byte header (magic "MHSF", version, n_x, n_y, n_z,
// component count, L) + row-major little-endian float64 per component.
void write_field(const std::string& path, const VectorField3& f);
void write_field(const std::string& path, const ScalarField3& f);
void write_field(const std::string& path, const ScalarField2& f);
VectorField3 read_field3(const std::string& path);
ScalarField3 read_scalar3(const std::string& path);
ScalarField2 read_scalar2(const std::string& path);

std::string diagnostics_to_json(const DiagnosticsReport& rep, const Fluxes& flux, int iterate,
                                bool converged);
DiagnosticsReport diagnostics_from_json(const std::string& text, Fluxes* flux = nullptr);

// Plain-text run summary.
std::string summary_text(const SolverState& state, bool converged);

// Optional CSV slice export (z level of one component) for plotting.
void write_slice_csv(const std::string& path, const ScalarField3& f, int iz);

}  // namespace mhs
