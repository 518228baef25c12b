#include "mhs/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "mhs/errors.hpp"

namespace mhs {

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("config: " + what); };
  if (n_x < 4 || n_y < 4 || n_x % 2 || n_y % 2) fail("n_x, n_y must be even and >= 4");
  if (n_z < 1) fail("n_z must be >= 1");
  if (!(L > 0.0)) fail("L must be > 0");
  if (n_s < 2) fail("n_s must be >= 2");
  if (n_quad_z < 1) fail("n_quad_z must be >= 1");
  for (double t : {fp_tol, j0_tol, flow_tol})
    if (!(t > 0.0)) fail("tolerances must be > 0");
  if (max_outer < 1 || max_neumann < 1 || max_newton < 1) fail("iteration caps must be >= 1");
  if (!(M_max > 0.0)) fail("M_max must be > 0");
  if (!(damping > 0.0) || damping > 1.0) fail("damping must be in (0,1]");
  if (!(alpha > 0.0) || !(alpha < 1.0)) fail("alpha must be in (0,1)");
}

SolverConfig parse_config_text(const std::string& text) {
  SolverConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = true;
      for (char ch : line)
        if (!isspace(static_cast<unsigned char>(ch))) blank = false;
      if (blank) continue;
      throw ValidationError("config: malformed line " + std::to_string(lineno));
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "n_x") c.n_x = std::stoi(val);
      else if (key == "n_y") c.n_y = std::stoi(val);
      else if (key == "n_z") c.n_z = std::stoi(val);
      else if (key == "L") c.L = std::stod(val);
      else if (key == "n_s") c.n_s = std::stoi(val);
      else if (key == "n_quad_z") c.n_quad_z = std::stoi(val);
      else if (key == "fp_tol") c.fp_tol = std::stod(val);
      else if (key == "j0_tol") c.j0_tol = std::stod(val);
      else if (key == "flow_tol") c.flow_tol = std::stod(val);
      else if (key == "max_outer") c.max_outer = std::stoi(val);
      else if (key == "max_neumann") c.max_neumann = std::stoi(val);
      else if (key == "max_newton") c.max_newton = std::stoi(val);
      else if (key == "M_max") c.M_max = std::stod(val);
      else if (key == "damping") c.damping = std::stod(val);
      else if (key == "alpha") c.alpha = std::stod(val);
      else throw ValidationError("config: unknown key '" + key + "'");
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError("config: bad value for '" + key + "'");
    }
  }
  c.validate();
  return c;
}

SolverConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_text(const SolverConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "n_x = " << c.n_x << "\nn_y = " << c.n_y << "\nn_z = " << c.n_z << "\nL = " << c.L
      << "\nn_s = " << c.n_s << "\nn_quad_z = " << c.n_quad_z << "\nfp_tol = " << c.fp_tol
      << "\nj0_tol = " << c.j0_tol << "\nflow_tol = " << c.flow_tol
      << "\nmax_outer = " << c.max_outer << "\nmax_neumann = " << c.max_neumann
      << "\nmax_newton = " << c.max_newton << "\nM_max = " << c.M_max
      << "\ndamping = " << c.damping << "\nalpha = " << c.alpha << "\n";
  return out.str();
}

}  // namespace mhs
