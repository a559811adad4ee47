#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sphmean/common.hpp"
#include "sphmean/harmonics.hpp"
#include "sphmean/range.hpp"
#include "sphmean/transform.hpp"

namespace sphmean {

/// Separable perturbation pushed into synthesized data: t^a (2-t)^b Y_{m,l}
/// at a relative amplitude. Used to build data off the range on purpose.
struct PerturbationSpec {
  int m = 0;
  int l = 1;
  double a = 2.0;
  double b = 2.0;
  double relative = 0.0;
};

/// Everything a run needs, parsed from `key = value` lines. Unknown keys are
/// rejected so typos fail loudly. Repeated `bump`, `shell` and `perturbation`
/// keys accumulate in order.
struct RunConfig {
  int dimension = 2;
  std::uint64_t seed = 20260815;
  int sphere_resolution = 512;
  int direction_resolution = 512;
  int t_resolution = 1024;
  double t_max = 2.0;
  int m_max = 8;
  int zero_count = 20;
  int moment_poly_k_max = 3;
  double tolerance_condition3 = 1e-6;
  double tolerance_condition2 = 1e-6;
  double tolerance_moment = 1e-8;
  double tolerance_scale = 1.0;
  double vanish_lo = 0.1;
  double vanish_hi = 0.5;
  int vanish_count = 10;
  double sup_samples_per_unit = 4.0;
  int lemma_m_max = 5;
  double lemma_v_max = 30.0;
  int lemma_samples = 10000;
  double lemma_r_max = 50.0;
  std::vector<BumpTerm> bumps;
  std::vector<ShellTerm> shells;
  std::vector<PerturbationSpec> perturbations;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty())
    throw config_error(where + ": not a number: '" + s + "'");
  return v;
}

inline long long parse_int(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || s.empty())
    throw config_error(where + ": not an integer: '" + s + "'");
  return v;
}

inline std::vector<std::string> split_fields(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string f;
  while (iss >> f) out.push_back(f);
  return out;
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  if (c.dimension != 2 && c.dimension != 3)
    throw config_error("config: dimension must be 2 or 3");
  if (c.sphere_resolution < 1 || c.direction_resolution < 1)
    throw config_error("config: sphere resolutions must be >= 1");
  if (c.t_resolution < 2) throw config_error("config: t_resolution must be >= 2");
  if (c.t_max <= 0.0) throw config_error("config: t_max must be positive");
  if (c.m_max < 0) throw config_error("config: m_max must be >= 0");
  if (c.sphere_resolution < 4 * c.m_max)
    throw config_error("config: sphere_resolution must be >= 4*m_max for alias-free projection");
  if (c.zero_count < 1) throw config_error("config: zero_count must be >= 1");
  if (c.moment_poly_k_max < 0) throw config_error("config: moment_poly_k_max must be >= 0");
  if (!(c.vanish_lo > 0.0 && c.vanish_hi > c.vanish_lo && c.vanish_count >= 4))
    throw config_error("config: vanishing window must satisfy 0 < lo < hi, count >= 4");
  if (c.tolerance_scale <= 0.0) throw config_error("config: tolerance_scale must be positive");
  if (c.lemma_m_max < 1 || c.lemma_samples < 1 || c.lemma_v_max <= 0.0 || c.lemma_r_max <= 0.0)
    throw config_error("config: lemma sweep parameters must be positive");
  for (const auto& p : c.perturbations) {
    validate_index(HarmonicIndex{c.dimension, p.m, p.l});
    if (p.a < 2.0 || p.b < 2.0)
      throw config_error("config: perturbation exponents must be >= 2");
    if (p.relative < 0.0) throw config_error("config: perturbation amplitude must be >= 0");
  }
  Phantom f{c.dimension, c.bumps, c.shells};
  validate_support(f);
}

inline RunConfig parse_config(std::istream& in, const std::string& context) {
  RunConfig c;
  std::string line;
  int line_no = 0;
  auto where = [&]() { return context + ":" + std::to_string(line_no); };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error(where() + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "dimension") c.dimension = static_cast<int>(detail::parse_int(value, where()));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(detail::parse_int(value, where()));
    else if (key == "sphere_resolution") c.sphere_resolution = static_cast<int>(detail::parse_int(value, where()));
    else if (key == "direction_resolution") c.direction_resolution = static_cast<int>(detail::parse_int(value, where()));
    else if (key == "t_resolution") c.t_resolution = static_cast<int>(detail::parse_int(value, where()));
    else if (key == "t_max") c.t_max = detail::parse_double(value, where());
    else if (key == "m_max") c.m_max = static_cast<int>(detail::parse_int(value, where()));
    else if (key == "zero_count") c.zero_count = static_cast<int>(detail::parse_int(value, where()));
    else if (key == "moment_poly_k_max") c.moment_poly_k_max = static_cast<int>(detail::parse_int(value, where()));
    else if (key == "tolerance_condition3") c.tolerance_condition3 = detail::parse_double(value, where());
    else if (key == "tolerance_condition2") c.tolerance_condition2 = detail::parse_double(value, where());
    else if (key == "tolerance_moment") c.tolerance_moment = detail::parse_double(value, where());
    else if (key == "tolerance_scale") c.tolerance_scale = detail::parse_double(value, where());
    else if (key == "vanish_lo") c.vanish_lo = detail::parse_double(value, where());
    else if (key == "vanish_hi") c.vanish_hi = detail::parse_double(value, where());
    else if (key == "vanish_count") c.vanish_count = static_cast<int>(detail::parse_int(value, where()));
    else if (key == "sup_samples_per_unit") c.sup_samples_per_unit = detail::parse_double(value, where());
    else if (key == "lemma_m_max") c.lemma_m_max = static_cast<int>(detail::parse_int(value, where()));
    else if (key == "lemma_v_max") c.lemma_v_max = detail::parse_double(value, where());
    else if (key == "lemma_samples") c.lemma_samples = static_cast<int>(detail::parse_int(value, where()));
    else if (key == "lemma_r_max") c.lemma_r_max = detail::parse_double(value, where());
    else if (key == "bump") {
      const auto f = detail::split_fields(value);
      if (f.size() != 5)
        throw config_error(where() + ": bump needs 'cx cy cz radius amplitude'");
      BumpTerm b;
      b.center = {detail::parse_double(f[0], where()), detail::parse_double(f[1], where()),
                  detail::parse_double(f[2], where())};
      b.radius = detail::parse_double(f[3], where());
      b.amplitude = detail::parse_double(f[4], where());
      c.bumps.push_back(b);
    } else if (key == "shell") {
      const auto f = detail::split_fields(value);
      if (f.size() != 5)
        throw config_error(where() + ": shell needs 'radial_center width amplitude m l'");
      ShellTerm s;
      s.radial_center = detail::parse_double(f[0], where());
      s.width = detail::parse_double(f[1], where());
      s.amplitude = detail::parse_double(f[2], where());
      s.m = static_cast<int>(detail::parse_int(f[3], where()));
      s.l = static_cast<int>(detail::parse_int(f[4], where()));
      c.shells.push_back(s);
    } else if (key == "perturbation") {
      const auto f = detail::split_fields(value);
      if (f.size() != 5)
        throw config_error(where() + ": perturbation needs 'm l a b relative'");
      PerturbationSpec p;
      p.m = static_cast<int>(detail::parse_int(f[0], where()));
      p.l = static_cast<int>(detail::parse_int(f[1], where()));
      p.a = detail::parse_double(f[2], where());
      p.b = detail::parse_double(f[3], where());
      p.relative = detail::parse_double(f[4], where());
      c.perturbations.push_back(p);
    } else {
      throw config_error(where() + ": unknown key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

/// Serialization is the exact inverse of parse_config: fixed key order, 17
/// significant digits, so parse(write(c)) reproduces c bit for bit.
inline void write_config(std::ostream& out, const RunConfig& c) {
  using detail::fmt17;
  out << "dimension = " << c.dimension << "\n";
  out << "seed = " << c.seed << "\n";
  out << "sphere_resolution = " << c.sphere_resolution << "\n";
  out << "direction_resolution = " << c.direction_resolution << "\n";
  out << "t_resolution = " << c.t_resolution << "\n";
  out << "t_max = " << fmt17(c.t_max) << "\n";
  out << "m_max = " << c.m_max << "\n";
  out << "zero_count = " << c.zero_count << "\n";
  out << "moment_poly_k_max = " << c.moment_poly_k_max << "\n";
  out << "tolerance_condition3 = " << fmt17(c.tolerance_condition3) << "\n";
  out << "tolerance_condition2 = " << fmt17(c.tolerance_condition2) << "\n";
  out << "tolerance_moment = " << fmt17(c.tolerance_moment) << "\n";
  out << "tolerance_scale = " << fmt17(c.tolerance_scale) << "\n";
  out << "vanish_lo = " << fmt17(c.vanish_lo) << "\n";
  out << "vanish_hi = " << fmt17(c.vanish_hi) << "\n";
  out << "vanish_count = " << c.vanish_count << "\n";
  out << "sup_samples_per_unit = " << fmt17(c.sup_samples_per_unit) << "\n";
  out << "lemma_m_max = " << c.lemma_m_max << "\n";
  out << "lemma_v_max = " << fmt17(c.lemma_v_max) << "\n";
  out << "lemma_samples = " << c.lemma_samples << "\n";
  out << "lemma_r_max = " << fmt17(c.lemma_r_max) << "\n";
  for (const auto& b : c.bumps)
    out << "bump = " << fmt17(b.center[0]) << " " << fmt17(b.center[1]) << " "
        << fmt17(b.center[2]) << " " << fmt17(b.radius) << " " << fmt17(b.amplitude) << "\n";
  for (const auto& s : c.shells)
    out << "shell = " << fmt17(s.radial_center) << " " << fmt17(s.width) << " "
        << fmt17(s.amplitude) << " " << s.m << " " << s.l << "\n";
  for (const auto& p : c.perturbations)
    out << "perturbation = " << p.m << " " << p.l << " " << fmt17(p.a) << " " << fmt17(p.b)
        << " " << fmt17(p.relative) << "\n";
}

inline Phantom make_phantom(const RunConfig& c) {
  return Phantom{c.dimension, c.bumps, c.shells};
}

inline CheckOptions make_check_options(const RunConfig& c) {
  CheckOptions o;
  o.m_max = c.m_max;
  o.zero_count = c.zero_count;
  o.moment_poly_k_max = c.moment_poly_k_max;
  o.tol = {c.tolerance_condition3, c.tolerance_condition2, c.tolerance_moment,
           c.tolerance_scale};
  o.vanish = {c.vanish_lo, c.vanish_hi, c.vanish_count};
  o.sup_samples_per_unit = c.sup_samples_per_unit;
  return o;
}

/// Synthesized data for the config: forward transform of the phantom plus any
/// perturbation terms.
inline DataGrid make_data(const RunConfig& c) {
  const SphereQuadrature centers = sphere_quadrature(c.dimension, c.sphere_resolution);
  const SphereQuadrature dirs = sphere_quadrature(c.dimension, c.direction_resolution);
  DataGrid g = forward(make_phantom(c), centers, c.t_resolution, dirs, c.t_max);
  for (const auto& p : c.perturbations)
    if (p.relative > 0.0) g = make_negative_control(g, p.m, p.l, p.a, p.b, p.relative);
  return g;
}

}  // namespace sphmean
