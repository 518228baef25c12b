#include "mhs/io.hpp"

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mhs/errors.hpp"
#include "mhs/spectral.hpp"

namespace mhs {

// ---------------------------------------------------------------------------
// Expression grammar: expr := term (('+'|'-') term)*; term := factor
// (('*'|'/') factor)*; factor := unary ('^' factor)?; unary := ('-'|'+')*
// primary; primary := number | 'x' | 'y' | 'pi' | func '(' expr ')' |
// '(' expr ')'.
// ---------------------------------------------------------------------------
namespace {

struct ExprParser {
  const std::string& s;
  size_t pos = 0;
  double x, y;

  explicit ExprParser(const std::string& str, double xv, double yv) : s(str), x(xv), y(yv) {}

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw ValidationError("expression: " + what + " at position " + std::to_string(pos) +
                          " in '" + s + "'");
  }

  double parse() {
    const double v = expr();
    skip();
    if (pos != s.size()) fail("trailing input");
    return v;
  }

  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }

  double term() {
    double v = factor();
    for (;;) {
      if (eat('*')) v *= factor();
      else if (eat('/')) v /= factor();
      else return v;
    }
  }

  double factor() {
    const double base = unary();
    if (eat('^')) return std::pow(base, factor());
    return base;
  }

  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return primary();
  }

  double primary() {
    skip();
    if (pos >= s.size()) fail("unexpected end");
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v;
      try {
        v = std::stod(s.substr(pos), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos += used;
      return v;
    }
    if (c == '(') {
      ++pos;
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t end = pos;
      while (end < s.size() && std::isalpha(static_cast<unsigned char>(s[end]))) ++end;
      const std::string name = s.substr(pos, end - pos);
      pos = end;
      if (name == "x") return x;
      if (name == "y") return y;
      if (name == "pi") return M_PI;
      if (name == "sin" || name == "cos" || name == "exp") {
        if (!eat('(')) fail("expected '(' after " + name);
        const double arg = expr();
        if (!eat(')')) fail("missing ')' after " + name);
        if (name == "sin") return std::sin(arg);
        if (name == "cos") return std::cos(arg);
        return std::exp(arg);
      }
      fail("unknown identifier '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

double eval_expression(const std::string& expr, double x, double y) {
  return ExprParser(expr, x, y).parse();
}

ScalarField2 field_from_expression(const std::string& expr, const TorusGrid2& grid) {
  ScalarField2 f(grid);
  for (int iy = 0; iy < grid.n_y; ++iy)
    for (int ix = 0; ix < grid.n_x; ++ix)
      f.at(ix, iy) = eval_expression(expr, grid.x(ix), grid.y(iy));
  return f;
}

ScalarField2 field_from_csv(const std::string& path, const TorusGrid2& grid) {
  std::ifstream in(path);
  if (!in) throw ValidationError("csv: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw ValidationError("csv: empty file " + path);
  for (char& c : header)
    if (c == ',') c = ' ';
  std::istringstream hs(header);
  int nx = 0, ny = 0;
  if (!(hs >> nx >> ny)) throw ValidationError("csv: bad header in " + path);
  if (nx != grid.n_x || ny != grid.n_y)
    throw ValidationError("csv: table is " + std::to_string(nx) + "x" + std::to_string(ny) +
                          ", expected " + std::to_string(grid.n_x) + "x" +
                          std::to_string(grid.n_y));
  ScalarField2 f(grid);
  std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (char& c : rest)
    if (c == ',') c = ' ';
  std::istringstream vs(rest);
  for (int i = 0; i < grid.size(); ++i)
    if (!(vs >> f.values[i])) throw ValidationError("csv: too few values in " + path);
  return f;
}

BoundaryData load_boundary_data(const std::string& path, const TorusGrid2& grid) {
  std::ifstream in(path);
  if (!in) throw ValidationError("data-spec: cannot open " + path);
  BoundaryData data;
  data.f_minus = ScalarField2(grid);
  data.f_plus = ScalarField2(grid);
  data.g = VectorField2(grid);
  bool seen[4] = {false, false, false, false};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = true;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
    if (blank) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("data-spec: malformed line " + std::to_string(lineno));
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    ScalarField2 field = val.rfind("csv:", 0) == 0 ? field_from_csv(val.substr(4), grid)
                                                   : field_from_expression(val, grid);
    if (key == "f_minus") {
      data.f_minus = std::move(field);
      seen[0] = true;
    } else if (key == "f_plus") {
      data.f_plus = std::move(field);
      seen[1] = true;
    } else if (key == "g1") {
      data.g[0] = std::move(field);
      seen[2] = true;
    } else if (key == "g2") {
      data.g[1] = std::move(field);
      seen[3] = true;
    } else {
      throw ValidationError("data-spec: unknown key '" + key + "'");
    }
  }
  if (!(seen[0] && seen[1] && seen[2] && seen[3]))
    throw ValidationError("data-spec: need f_minus, f_plus, g1 and g2");
  return data;
}

// ---------------------------------------------------------------------------
// MHSF binary format
// ---------------------------------------------------------------------------
namespace {

#pragma pack(push, 1)
struct MhsfHeader {
  char magic[4];       // "MHSF"
  uint32_t version;    // 1
  uint32_t n_x, n_y, n_z;  // n_z = panels; 0 for surface fields
  uint32_t n_comp;
  double L;            // 0 for surface fields
  char pad[64 - 4 - 4 * 5 - 8];
};
#pragma pack(pop)
static_assert(sizeof(MhsfHeader) == 64);

MhsfHeader make_header(int nx, int ny, int nz, int ncomp, double L) {
  MhsfHeader h{};
  std::memcpy(h.magic, "MHSF", 4);
  h.version = 1;
  h.n_x = nx;
  h.n_y = ny;
  h.n_z = nz;
  h.n_comp = ncomp;
  h.L = L;
  return h;
}

void write_payload(const std::string& path, const MhsfHeader& h,
                   const std::vector<const std::vector<double>*>& comps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError("write_field: cannot open " + path);
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  for (const auto* c : comps)
    out.write(reinterpret_cast<const char*>(c->data()),
              static_cast<std::streamsize>(c->size() * sizeof(double)));
  if (!out) throw SolverError("write_field: short write to " + path);
}

MhsfHeader read_header(std::ifstream& in, const std::string& path) {
  MhsfHeader h{};
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  if (!in || std::memcmp(h.magic, "MHSF", 4) != 0 || h.version != 1)
    throw ValidationError("read_field: " + path + " is not an MHSF v1 file");
  return h;
}

void read_values(std::ifstream& in, const std::string& path, std::vector<double>& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw ValidationError("read_field: truncated file " + path);
}

}  // namespace

void write_field(const std::string& path, const VectorField3& f) {
  const auto h = make_header(f.grid.base.n_x, f.grid.base.n_y, f.grid.n_z, 3, f.grid.L);
  write_payload(path, h, {&f.comp[0].values, &f.comp[1].values, &f.comp[2].values});
}

void write_field(const std::string& path, const ScalarField3& f) {
  const auto h = make_header(f.grid.base.n_x, f.grid.base.n_y, f.grid.n_z, 1, f.grid.L);
  write_payload(path, h, {&f.values});
}

void write_field(const std::string& path, const ScalarField2& f) {
  const auto h = make_header(f.grid.n_x, f.grid.n_y, 0, 1, 0.0);
  write_payload(path, h, {&f.values});
}

VectorField3 read_field3(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("read_field: cannot open " + path);
  const auto h = read_header(in, path);
  if (h.n_comp != 3 || h.n_z == 0)
    throw ValidationError("read_field: " + path + " is not a 3-component slab field");
  VectorField3 f(SlabGrid3(TorusGrid2(h.n_x, h.n_y), h.n_z, h.L));
  for (int c = 0; c < 3; ++c) read_values(in, path, f.comp[c].values);
  return f;
}

ScalarField3 read_scalar3(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("read_field: cannot open " + path);
  const auto h = read_header(in, path);
  if (h.n_comp != 1 || h.n_z == 0)
    throw ValidationError("read_field: " + path + " is not a scalar slab field");
  ScalarField3 f(SlabGrid3(TorusGrid2(h.n_x, h.n_y), h.n_z, h.L));
  read_values(in, path, f.values);
  return f;
}

ScalarField2 read_scalar2(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("read_field: cannot open " + path);
  const auto h = read_header(in, path);
  if (h.n_comp != 1 || h.n_z != 0)
    throw ValidationError("read_field: " + path + " is not a surface field");
  ScalarField2 f(TorusGrid2(h.n_x, h.n_y));
  read_values(in, path, f.values);
  return f;
}

// ---------------------------------------------------------------------------
// Diagnostics JSON
// ---------------------------------------------------------------------------

std::string diagnostics_to_json(const DiagnosticsReport& rep, const Fluxes& flux, int iterate,
                                bool converged) {
  nlohmann::ordered_json j;
  j["converged"] = converged;
  j["iterations"] = iterate;
  j["residuals"] = {
      {"curl", rep.residual_curl},
      {"div", rep.residual_div},
      {"bn", rep.residual_bn},
      {"btau", rep.residual_btau},
      {"force", rep.residual_force},
      {"pressure_mean_defect_x", rep.pressure_mean_defect_x},
      {"pressure_mean_defect_y", rep.pressure_mean_defect_y},
  };
  j["run"] = {
      {"contraction_estimate", rep.contraction_estimate},
      {"iterate_delta", rep.iterate_delta},
      {"holder_delta", rep.holder_delta},
  };
  j["fluxes"] = {{"J1", flux.J1}, {"J2", flux.J2}};
  nlohmann::ordered_json norms;
  for (const auto& [k, v] : rep.operator_norms) norms[k] = v;
  j["operator_norms"] = norms;
  j["timestamp"] = static_cast<long long>(std::time(nullptr));
  return j.dump(2) + "\n";
}

DiagnosticsReport diagnostics_from_json(const std::string& text, Fluxes* flux) {
  const auto j = nlohmann::json::parse(text);
  DiagnosticsReport rep;
  const auto& r = j.at("residuals");
  rep.residual_curl = r.at("curl").get<double>();
  rep.residual_div = r.at("div").get<double>();
  rep.residual_bn = r.at("bn").get<double>();
  rep.residual_btau = r.at("btau").get<double>();
  rep.residual_force = r.at("force").get<double>();
  rep.pressure_mean_defect_x = r.at("pressure_mean_defect_x").get<double>();
  rep.pressure_mean_defect_y = r.at("pressure_mean_defect_y").get<double>();
  const auto& run = j.at("run");
  rep.contraction_estimate = run.at("contraction_estimate").get<double>();
  rep.iterate_delta = run.at("iterate_delta").get<double>();
  rep.holder_delta = run.at("holder_delta").get<double>();
  if (j.contains("operator_norms"))
    for (const auto& [k, v] : j.at("operator_norms").items())
      rep.operator_norms[k] = v.get<double>();
  if (flux) {
    flux->J1 = j.at("fluxes").at("J1").get<double>();
    flux->J2 = j.at("fluxes").at("J2").get<double>();
  }
  return rep;
}

std::string summary_text(const SolverState& state, bool converged) {
  std::ostringstream out;
  out.precision(6);
  out << std::scientific;
  out << "MHS slab solve: " << (converged ? "converged" : "NOT converged") << " after "
      << state.iterate << " outer iteration(s)\n";
  const auto& d = state.diagnostics;
  out << "  residual  curl(B)-j      : " << d.residual_curl << "\n";
  out << "  residual  div B          : " << d.residual_div << "\n";
  out << "  residual  B.n - (1+f)    : " << d.residual_bn << "\n";
  out << "  residual  B_tau - g      : " << d.residual_btau << "\n";
  out << "  residual  jxB - grad p   : " << d.residual_force << "\n";
  out << "  pressure mean defects    : " << d.pressure_mean_defect_x << ", "
      << d.pressure_mean_defect_y << "\n";
  out << "  contraction estimate     : " << d.contraction_estimate << "\n";
  out << "  last iterate delta       : " << d.iterate_delta << "\n";
  out << "  fluxes (J1, J2)          : " << state.flux.J1 << ", " << state.flux.J2 << "\n";
  return out.str();
}

void write_slice_csv(const std::string& path, const ScalarField3& f, int iz) {
  std::ofstream out(path);
  if (!out) throw SolverError("write_slice_csv: cannot open " + path);
  out.precision(17);
  out << f.grid.base.n_x << "," << f.grid.base.n_y << "\n";
  for (int iy = 0; iy < f.grid.base.n_y; ++iy) {
    for (int ix = 0; ix < f.grid.base.n_x; ++ix) {
      out << f.at(ix, iy, iz);
      out << (ix + 1 == f.grid.base.n_x ? '\n' : ',');
    }
  }
}

}  // namespace mhs
