// Command line driver: forward transform, spectral decomposition, range
// verification and the supporting-lemma self checks, wired to a key=value
// configuration file. Exit codes: 0 success / PASS, 1 a verification verdict
// failed, 2 configuration or IO problem.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sphmean/config.hpp"
#include "sphmean/io.hpp"
#include "sphmean/oracles.hpp"
#include "sphmean/range.hpp"
#include "sphmean/specfun.hpp"
#include "sphmean/spectral.hpp"
#include "sphmean/transform.hpp"

namespace fs = std::filesystem;
using namespace sphmean;

namespace {

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  return parse_config(in, path);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path.string());
  return out;
}

DataGrid load_grid(const fs::path& dir, const RunConfig& cfg) {
  std::ifstream csv(dir / "grid.csv");
  if (!csv) throw config_error("cannot open " + (dir / "grid.csv").string());
  std::ifstream meta(dir / "grid.meta");
  if (!meta) throw config_error("cannot open " + (dir / "grid.meta").string());
  const SphereQuadrature centers = sphere_quadrature(cfg.dimension, cfg.sphere_resolution);
  return read_grid_csv(csv, meta, centers, (dir / "grid.csv").string());
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string grid_dir;  // empty: synthesize from the config
  int t_resolution = -1;
  int sphere_resolution = -1;
  int direction_resolution = -1;
  int m_max = -1;
  int zeros = -1;
  double tolerance_scale = -1.0;
};

RunConfig resolve_config(const CommonArgs& a) {
  RunConfig cfg = load_config(a.config_path);
  if (a.t_resolution > 0) cfg.t_resolution = a.t_resolution;
  if (a.sphere_resolution > 0) cfg.sphere_resolution = a.sphere_resolution;
  if (a.direction_resolution > 0) cfg.direction_resolution = a.direction_resolution;
  if (a.m_max >= 0) cfg.m_max = a.m_max;
  if (a.zeros > 0) cfg.zero_count = a.zeros;
  if (a.tolerance_scale > 0.0) cfg.tolerance_scale = a.tolerance_scale;
  validate(cfg);
  return cfg;
}

DataGrid obtain_grid(const CommonArgs& a, const RunConfig& cfg) {
  if (!a.grid_dir.empty()) return load_grid(a.grid_dir, cfg);
  return make_data(cfg);
}

int cmd_forward(const CommonArgs& a) {
  const RunConfig cfg = resolve_config(a);
  fs::create_directories(a.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const DataGrid g = make_data(cfg);
  const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
  {
    auto out = open_out(fs::path(a.out_dir) / "grid.csv");
    write_grid_csv(out, g);
  }
  {
    auto out = open_out(fs::path(a.out_dir) / "grid.meta");
    write_grid_meta(out, g);
  }
  {
    auto out = open_out(fs::path(a.out_dir) / "config.echo");
    write_config(out, cfg);
  }
  std::cout << "forward: " << g.centers.size() << " centres x " << g.t_count
            << " radii, support gap " << detail::fmt17(support_gap(make_phantom(cfg)))
            << ", max |g| = " << detail::fmt17(max_abs(g)) << " (" << dt.count() << " s)\n"
            << "wrote " << (fs::path(a.out_dir) / "grid.csv").string() << "\n";
  return 0;
}

int cmd_decompose(const CommonArgs& a, double lambda_max, int lambda_count) {
  const RunConfig cfg = resolve_config(a);
  fs::create_directories(a.out_dir);
  const DataGrid g = obtain_grid(a, cfg);
  const std::vector<HarmonicCoefficient> coeffs = decompose(g, cfg.m_max);
  if (lambda_max <= 0.0)
    lambda_max = std::min(40.0, 0.5 * max_resolved_lambda(g.t_count, g.t_max));
  {
    auto out = open_out(fs::path(a.out_dir) / "coefficients.csv");
    write_coefficients_csv(out, coeffs);
  }
  {
    auto out = open_out(fs::path(a.out_dir) / "spectral.csv");
    write_spectral_csv(out, coeffs, lambda_max, lambda_count);
  }
  std::cout << "decompose: " << coeffs.size() << " channels (m <= " << cfg.m_max << "), "
            << "spectral samples on [0, " << detail::fmt17(lambda_max) << "]\n"
            << "wrote " << (fs::path(a.out_dir) / "coefficients.csv").string() << ", "
            << (fs::path(a.out_dir) / "spectral.csv").string() << "\n";
  return 0;
}

int cmd_check(const CommonArgs& a) {
  const RunConfig cfg = resolve_config(a);
  fs::create_directories(a.out_dir);
  const DataGrid g = obtain_grid(a, cfg);
  const RangeReport report = check_range(g, make_check_options(cfg));
  {
    auto out = open_out(fs::path(a.out_dir) / "report.json");
    out << report_to_json(report).dump(2) << "\n";
  }
  print_report_table(std::cout, report);
  std::cout << "wrote " << (fs::path(a.out_dir) / "report.json").string() << "\n";
  return report.pass ? 0 : 1;
}

json lemma_entry(const std::string& name, bool pass) {
  json j;
  j["name"] = name;
  j["pass"] = pass;
  return j;
}

int cmd_verify_lemmas(const CommonArgs& a, double inject_c_scale) {
  const RunConfig cfg = resolve_config(a);
  fs::create_directories(a.out_dir);
  json lemmas = json::array();
  bool all_pass = true;
  auto emit = [&](const json& j) {
    all_pass = all_pass && j["pass"].get<bool>();
    std::cout << (j["pass"].get<bool>() ? "PASS " : "FAIL ") << j["name"].get<std::string>();
    if (j.contains("detail")) std::cout << "  (" << j["detail"].get<std::string>() << ")";
    std::cout << "\n";
    lemmas.push_back(j);
  };

  // Scaled modulus |J_nu| sqrt|z| e^{-|Im z|} bounded below off the excluded sets.
  {
    json j = lemma_entry("bessel-lower-bound", true);
    j["orders"] = json::array();
    double min_margin = std::numeric_limits<double>::max();
    for (int m = 0; m <= cfg.lemma_m_max; ++m) {
      const double nu = bessel_order(cfg.dimension, m);
      LowerBoundSweep sweep;
      sweep.r_max = cfg.lemma_r_max;
      sweep.sample_count = cfg.lemma_samples;
      sweep.seed = cfg.seed + m;
      const LowerBoundResult r = lower_bound_margin(nu, sweep);
      min_margin = std::min(min_margin, r.margin);
      j["orders"].push_back({{"nu", nu},
                             {"margin", r.margin},
                             {"argmin_re", r.argmin.real()},
                             {"argmin_im", r.argmin.imag()},
                             {"admissible", r.admissible},
                             {"rejected", r.rejected}});
      if (r.margin <= 0.0) j["pass"] = false;
    }
    j["detail"] = "min margin " + detail::fmt17(min_margin);
    emit(j);
  }

  // Weighted cosine average against the normalized Bessel kernel.
  {
    json j = lemma_entry("sonine-identity", true);
    std::vector<double> v;
    for (double x = 0.0; x <= cfg.lemma_v_max; x += 0.5) v.push_back(x);
    double worst = 0.0;
    for (int m = 1; m <= cfg.lemma_m_max; ++m)
      worst = std::max(worst, sonine_max_deviation(m, cfg.dimension, v));
    j["max_deviation"] = worst;
    j["pass"] = worst < 1e-8;
    j["detail"] = "max deviation " + detail::fmt17(worst);
    emit(j);
  }

  // Lap |y|^{2k} = 2k(2k+n-2) |y|^{2k-2}, confirmed at second order in h.
  {
    json j = lemma_entry("laplacian-power", true);
    j["orders"] = json::array();
    const std::vector<Point> pts = {{0.31, 0.4, cfg.dimension == 3 ? 0.22 : 0.0},
                                    {-0.62, 0.21, cfg.dimension == 3 ? -0.4 : 0.0},
                                    {0.05, -0.83, cfg.dimension == 3 ? 0.3 : 0.0},
                                    {1.1, 0.6, cfg.dimension == 3 ? -0.7 : 0.0}};
    for (int k = 1; k <= std::max(2, cfg.lemma_m_max); ++k) {
      const auto coarse = laplacian_power_check(cfg.dimension, k, pts, 0.01);
      const auto fine = laplacian_power_check(cfg.dimension, k, pts, 0.005);
      const double ratio = fine.max_deviation > 0.0 ? coarse.max_deviation / fine.max_deviation
                                                    : 4.0;
      // A wrong constant saturates the relative deviation near |c~/c - 1| and
      // flattens the ratio; the halving window is the detector, the cap only
      // rules out an O(1) floor.
      bool ok = fine.max_deviation < 1e-2;
      if (k <= 2) {
        // quadratic/quartic cases: the stencil error is pure h^2 or exactly 0
        ok = ok && (k == 1 ? fine.max_deviation < 1e-9 : ratio > 3.5 && ratio < 4.5);
      } else {
        ok = ok && ratio > 3.0 && ratio < 5.0;
      }
      j["orders"].push_back({{"k", k},
                             {"constant", fine.constant},
                             {"deviation_h_fine", fine.max_deviation},
                             {"richardson_ratio", ratio}});
      if (!ok) j["pass"] = false;
    }
    j["detail"] = "second-order confirmation over k <= " +
                  std::to_string(std::max(2, cfg.lemma_m_max));
    emit(j);
  }

  // Anti-triangular moment map: structure, invertibility, and agreement with
  // the cartesian evaluation of the iterated Laplacian.
  {
    json j = lemma_entry("triangular-moments", true);
    j["orders"] = json::array();
    TriangularOptions opt;
    opt.c_scale = inject_c_scale;
    const TestProfile bump;
    double worst_map = 0.0, worst_rec = 0.0;
    for (int m = 1; m <= cfg.lemma_m_max; ++m) {
      const TriangularResult r = triangular_system_check(m, cfg.dimension, bump, opt);
      worst_map = std::max(worst_map, r.map_deviation);
      worst_rec = std::max(worst_rec, r.recovery_deviation);
      const bool ok = r.structure_deviation == 0.0 && r.min_antidiagonal > 0.0 &&
                      r.map_deviation < 1e-10 && r.recovery_deviation < 1e-8;
      j["orders"].push_back({{"m", m},
                             {"map_deviation", r.map_deviation},
                             {"recovery_deviation", r.recovery_deviation},
                             {"min_antidiagonal", r.min_antidiagonal}});
      if (!ok) j["pass"] = false;
    }
    j["detail"] = "max map deviation " + detail::fmt17(worst_map);
    if (inject_c_scale != 1.0) j["injected_c_scale"] = inject_c_scale;
    emit(j);
  }

  // Profiles with m vanishing moments built through the same map.
  {
    json j = lemma_entry("null-moments", true);
    j["orders"] = json::array();
    double worst = 0.0;
    for (int m = 1; m <= cfg.lemma_m_max; ++m) {
      const TestProfile h = null_moment_profile(m, cfg.dimension);
      double scale = std::abs(radial_moment(h, m, cfg.dimension));
      double dev = 0.0;
      for (int k = 0; k < m; ++k) {
        const double mu = radial_moment(h, k, cfg.dimension);
        scale = std::max(scale, std::abs(mu));
        dev = std::max(dev, std::abs(mu));
      }
      const double rel = scale > 0.0 ? dev / scale : dev;
      worst = std::max(worst, rel);
      j["orders"].push_back({{"m", m}, {"relative_residual", rel}});
      if (rel >= 1e-8) j["pass"] = false;
    }
    j["detail"] = "max relative residual " + detail::fmt17(worst);
    emit(j);
  }

  // Low moments of a degree-2 channel vanish; finite differences at 0 agree
  // with the series route on the first surviving moment.
  {
    json j = lemma_entry("derivative-vanishing", true);
    // Always runs on the plane transform. The leading series constants divide
    // by 4^j j! (p+1)_j, so forward quadrature noise shows up in the low
    // coefficients amplified by ~64x; only the circle rule reaches the
    // required noise floor at tolerable cost, and the identity chain being
    // confirmed does not depend on the dimension.
    const int n = 2;
    Phantom f;
    f.n = n;
    f.shells.push_back({0.55, 0.25, 1.0, 2, 1});
    const SphereQuadrature centers = sphere_quadrature(n, 64);
    const SphereQuadrature dirs = sphere_quadrature(n, 1536);
    const DataGrid g = forward(f, centers, 513, dirs);
    const std::vector<HarmonicCoefficient> coeffs = decompose(g, 2);
    const HarmonicCoefficient* chan = nullptr;
    for (const auto& c : coeffs)
      if (c.idx.m == 2 && c.idx.l == 1) chan = &c;
    if (!chan) throw std::runtime_error("derivative-vanishing: channel (2,1) missing");
    const std::vector<double> taylor = taylor_coefficients(*chan, 4);
    double scale = 0.0;
    for (double t : taylor) scale = std::max(scale, std::abs(t));
    const double low = std::max(std::abs(taylor[0]), std::abs(taylor[1])) / scale;
    const DerivativeVanishingResult fd = derivative_vanishing_check(*chan, 2, 0.05);
    const double p = 0.5 * n - 1.0;
    const double m2_taylor = taylor[2] / bessel_j_norm_coefficient(p, 2);
    const double m2_fd = fd.moment_estimates[1];
    const double agree = std::abs(m2_fd - m2_taylor) / std::abs(m2_taylor);
    j["low_order_residual"] = low;
    j["fd_vs_series"] = agree;
    j["checked_on"] = "plane transform";
    j["pass"] = low < 1e-8 && agree < 0.1;
    j["detail"] = "low-order residual " + detail::fmt17(low) + ", fd/series gap " +
                  detail::fmt17(agree) + ", plane transform";
    emit(j);
  }

  {
    auto out = open_out(fs::path(a.out_dir) / "lemmas.json");
    json root;
    root["verdict"] = all_pass ? "PASS" : "FAIL";
    root["lemmas"] = lemmas;
    out << root.dump(2) << "\n";
  }
  std::cout << "verdict: " << (all_pass ? "PASS" : "FAIL") << "\n"
            << "wrote " << (fs::path(a.out_dir) / "lemmas.json").string() << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spherical mean transform toolkit: forward data synthesis, "
               "Fourier-Bessel decomposition and range verification"};
  app.require_subcommand(1);

  CommonArgs args;
  double lambda_max = -1.0;
  int lambda_count = 400;
  double inject_c_scale = 1.0;

  auto add_common = [&](CLI::App* sub, bool with_grid) {
    sub->add_option("--config", args.config_path, "configuration file")->required();
    sub->add_option("--out", args.out_dir, "output directory (default: out)");
    if (with_grid)
      sub->add_option("--grid", args.grid_dir,
                      "directory holding grid.csv/grid.meta from a forward run; "
                      "omitted: synthesize from the config");
    sub->add_option("--t-resolution", args.t_resolution, "override t_resolution");
    sub->add_option("--sphere-resolution", args.sphere_resolution,
                    "override sphere_resolution");
    sub->add_option("--direction-resolution", args.direction_resolution,
                    "override direction_resolution");
    sub->add_option("--m-max", args.m_max, "override m_max");
    sub->add_option("--zeros", args.zeros, "override zero_count");
    sub->add_option("--tolerance-scale", args.tolerance_scale, "override tolerance_scale");
  };

  CLI::App* fwd = app.add_subcommand("forward", "synthesize spherical mean data");
  add_common(fwd, false);

  CLI::App* dec = app.add_subcommand("decompose", "project data onto harmonic channels");
  add_common(dec, true);
  dec->add_option("--lambda-max", lambda_max, "spectral sample range (default: automatic)");
  dec->add_option("--lambda-count", lambda_count, "spectral sample count");

  CLI::App* chk = app.add_subcommand("check", "verify the range conditions");
  add_common(chk, true);

  CLI::App* lem = app.add_subcommand("verify-lemmas", "run the supporting identity checks");
  add_common(lem, false);
  lem->add_option("--inject-c-scale", inject_c_scale,
                  "fault injection: scale the triangular map constants (self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fwd->parsed()) return cmd_forward(args);
    if (dec->parsed()) return cmd_decompose(args, lambda_max, lambda_count);
    if (chk->parsed()) return cmd_check(args);
    if (lem->parsed()) return cmd_verify_lemmas(args, inject_c_scale);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
