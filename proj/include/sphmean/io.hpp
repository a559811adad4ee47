#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sphmean/config.hpp"
#include "sphmean/range.hpp"
#include "sphmean/spectral.hpp"
#include "sphmean/transform.hpp"

namespace sphmean {

using nlohmann::json;

/// Grid CSV layout: one row per (centre, radius) sample,
///   index,x,y[,z],t,value
/// with 17 significant digits throughout (values round-trip exactly).
inline void write_grid_csv(std::ostream& out, const DataGrid& g) {
  using detail::fmt17;
  out << (g.n == 2 ? "index,x,y,t,value\n" : "index,x,y,z,t,value\n");
  for (int i = 0; i < g.centers.size(); ++i) {
    const Point& p = g.centers.nodes[i];
    for (int j = 0; j < g.t_count; ++j) {
      out << i << ',' << fmt17(p[0]) << ',' << fmt17(p[1]);
      if (g.n == 3) out << ',' << fmt17(p[2]);
      out << ',' << fmt17(g.t(j)) << ',' << fmt17(g.value(i, j)) << '\n';
    }
  }
}

inline void write_grid_meta(std::ostream& out, const DataGrid& g) {
  json meta;
  meta["dimension"] = g.n;
  meta["sphere_resolution"] = g.centers.resolution;
  meta["node_count"] = g.centers.size();
  meta["t_count"] = g.t_count;
  meta["t_max"] = g.t_max;
  meta["value_count"] = g.values.size();
  meta["max_abs"] = max_abs(g);
  out << meta.dump(2) << "\n";
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

/// Reads values back into a grid laid out on `centers` x the meta's t grid.
/// Coordinates in the file are checked against the quadrature so a grid
/// written under a different configuration is rejected instead of silently
/// misinterpreted.
inline DataGrid read_grid_csv(std::istream& csv, std::istream& meta_stream,
                              const SphereQuadrature& centers, const std::string& context) {
  json meta;
  try {
    meta = json::parse(meta_stream);
  } catch (const json::exception& e) {
    throw config_error(context + ".meta: " + e.what());
  }
  DataGrid g;
  g.n = meta.value("dimension", 0);
  g.t_count = meta.value("t_count", 0);
  g.t_max = meta.value("t_max", 0.0);
  if (g.n != centers.n)
    throw config_error(context + ": grid dimension does not match the configuration");
  if (meta.value("sphere_resolution", -1) != centers.resolution ||
      meta.value("node_count", -1) != centers.size())
    throw config_error(context + ": grid centres do not match the configuration");
  if (g.t_count < 2 || g.t_max <= 0.0) throw config_error(context + ": corrupt meta");
  g.centers = centers;
  g.values.assign(static_cast<std::size_t>(centers.size()) * g.t_count, 0.0);

  std::string line;
  int line_no = 0;
  auto where = [&]() { return context + ":" + std::to_string(line_no); };
  if (!std::getline(csv, line)) throw config_error(context + ": empty grid file");
  ++line_no;
  const int coord_fields = g.n;
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(line);
    if (static_cast<int>(f.size()) != coord_fields + 3)
      throw config_error(where() + ": expected " + std::to_string(coord_fields + 3) +
                         " fields");
    const long long i = detail::parse_int(f[0], where());
    if (i < 0 || i >= centers.size()) throw config_error(where() + ": node index out of range");
    for (int a = 0; a < coord_fields; ++a) {
      const double c = detail::parse_double(f[1 + a], where());
      if (std::abs(c - centers.nodes[i][a]) > 1e-12)
        throw config_error(where() + ": node coordinate mismatch against the configuration");
    }
    const double t = detail::parse_double(f[coord_fields + 1], where());
    const int j = static_cast<int>(std::lround(t / g.t_max * (g.t_count - 1)));
    if (j < 0 || j >= g.t_count || std::abs(g.t(j) - t) > 1e-12)
      throw config_error(where() + ": t sample off the declared grid");
    g.value(static_cast<int>(i), j) = detail::parse_double(f[coord_fields + 2], where());
    ++rows;
  }
  if (rows != g.values.size())
    throw config_error(context + ": row count " + std::to_string(rows) +
                       " does not cover the declared grid (" +
                       std::to_string(g.values.size()) + ")");
  return g;
}

/// Channel profiles, one row per (m,l,t): m,l,t_or_lambda,value.
inline void write_coefficients_csv(std::ostream& out,
                                   const std::vector<HarmonicCoefficient>& coeffs) {
  using detail::fmt17;
  out << "m,l,t_or_lambda,value\n";
  for (const auto& c : coeffs)
    for (int j = 0; j < c.t_count; ++j)
      out << c.idx.m << ',' << c.idx.l << ',' << fmt17(c.t(j)) << ',' << fmt17(c.samples[j])
          << '\n';
}

/// Spectral samples on a shared lambda grid, same layout with lambda in the
/// third column.
inline void write_spectral_csv(std::ostream& out,
                               const std::vector<HarmonicCoefficient>& coeffs,
                               double lambda_max, int count) {
  using detail::fmt17;
  if (count < 2) throw config_error("write_spectral_csv: need at least 2 samples");
  out << "m,l,t_or_lambda,value\n";
  for (const auto& c : coeffs) {
    for (int s = 0; s < count; ++s) {
      const double lambda = lambda_max * s / (count - 1);
      out << c.idx.m << ',' << c.idx.l << ',' << fmt17(lambda) << ','
          << fmt17(fourier_bessel(c, lambda)) << '\n';
    }
  }
}

inline json report_to_json(const RangeReport& r) {
  json out;
  out["verdict"] = r.pass ? "PASS" : "FAIL";
  out["dimension"] = r.n;
  out["m_max"] = r.options.m_max;
  out["zero_count"] = r.options.zero_count;
  out["data_norm"] = r.norm;
  out["tolerances"] = {{"condition3", r.options.tol.condition3},
                       {"condition2", r.options.tol.condition2},
                       {"moment", r.options.tol.moment},
                       {"scale", r.options.tol.scale}};
  out["channels"] = json::array();
  for (const auto& ch : r.channels) {
    json c;
    c["m"] = ch.idx.m;
    c["l"] = ch.idx.l;
    c["channel_norm"] = ch.channel_norm;
    c["degenerate"] = ch.degenerate;
    c["condition3"] = {{"lambdas", ch.cond3.lambdas},
                       {"raw", ch.cond3.raw},
                       {"residuals", ch.cond3.residuals},
                       {"sup", ch.cond3.sup},
                       {"pass", ch.pass3}};
    c["condition2"] = {{"integrals", ch.cond2_raw},
                       {"residuals", ch.cond2},
                       {"pass", ch.pass2}};
    c["moments"] = {{"residuals", ch.moments}, {"pass", ch.pass_moments}};
    c["vanishing_order"] = {{"slope", ch.vanish.slope},
                            {"reliable", ch.vanish.reliable},
                            {"points_used", ch.vanish.points_used},
                            {"expected", 2.0 * ch.idx.m}};
    out["channels"].push_back(std::move(c));
  }
  out["moment_polynomials"] = json::array();
  for (const auto& mp : r.moment_polys) {
    json m;
    m["k"] = mp.k;
    m["norm"] = mp.norm;
    m["degenerate"] = mp.degenerate;
    m["high_degree_residuals"] = mp.high_degree_residuals;
    m["parity_notes"] = json::array();
    for (const auto& [idx, v] : mp.parity_notes)
      m["parity_notes"].push_back({{"m", idx.m}, {"l", idx.l}, {"value", v}});
    m["coefficients"] = json::array();
    for (const auto& [idx, v] : mp.coefficients)
      m["coefficients"].push_back({{"m", idx.m}, {"l", idx.l}, {"value", v}});
    out["moment_polynomials"].push_back(std::move(m));
  }
  return out;
}

inline void print_report_table(std::ostream& out, const RangeReport& r) {
  auto vmax = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  out << "range check: n=" << r.n << " m_max=" << r.options.m_max
      << " zeros=" << r.options.zero_count << " |g|=" << detail::fmt17(r.norm) << "\n";
  out << "  m  l        cond3_max        cond2_max      moments_max   slope  state\n";
  char buf[160];
  for (const auto& ch : r.channels) {
    const char* state = ch.degenerate ? "empty"
                        : (ch.pass3 && ch.pass2 && ch.pass_moments) ? "ok"
                                                                    : "FAIL";
    std::snprintf(buf, sizeof buf, "%3d %2d %16.9e %16.9e %16.9e %7.2f  %s\n", ch.idx.m,
                  ch.idx.l, vmax(ch.cond3.residuals), vmax(ch.cond2), vmax(ch.moments),
                  ch.vanish.reliable ? ch.vanish.slope : 0.0, state);
    out << buf;
  }
  for (const auto& mp : r.moment_polys) {
    std::snprintf(buf, sizeof buf,
                  "  moment polynomial k=%d: high-degree max %.9e over %zu coefficients%s\n",
                  mp.k, vmax(mp.high_degree_residuals), mp.high_degree_residuals.size(),
                  mp.degenerate ? " (empty)" : "");
    out << buf;
  }
  out << "verdict: " << (r.pass ? "PASS" : "FAIL") << "\n";
}

}  // namespace sphmean
