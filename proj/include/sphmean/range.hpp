#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sphmean/common.hpp"
#include "sphmean/spectral.hpp"
#include "sphmean/specfun.hpp"
#include "sphmean/transform.hpp"

namespace sphmean {

struct Tolerances {
  double condition3 = 1e-6;
  double condition2 = 1e-6;
  double moment = 1e-8;
  double scale = 1.0;  // multiplies every tolerance; the CLI exposes it
};

/// Dirichlet eigenfunction of the unit ball attached to channel (m,l) and the
/// k-th positive zero lambda of J_{m+n/2-1}:
///   psi(x) = |x|^{1-n/2} J_{m+n/2-1}(lambda |x|) Y_{m,l}(x/|x|).
/// boundary_factor is its outward normal derivative scale on |x| = 1,
/// lambda J'_{nu}(lambda), the weight appearing in the orthogonality test.
struct Eigenfunction {
  HarmonicIndex idx;
  int k = 1;
  double lambda = 0.0;
  double boundary_factor = 0.0;
};

inline Eigenfunction make_eigenfunction(const HarmonicIndex& idx, const ZeroTable& zeros,
                                        int k) {
  validate_index(idx);
  const double nu = bessel_order(idx.n, idx.m);
  if (std::abs(zeros.nu - nu) > 1e-12)
    throw config_error("make_eigenfunction: zero table order " + std::to_string(zeros.nu) +
                       " does not match channel order " + std::to_string(nu));
  Eigenfunction e;
  e.idx = idx;
  e.k = k;
  e.lambda = zeros.zero(k);
  if (std::abs(bessel_j(nu, e.lambda)) > 1e-10)
    throw std::runtime_error("make_eigenfunction: table entry is not a zero");
  e.boundary_factor = e.lambda * bessel_j_prime(nu, e.lambda);
  return e;
}

/// L^2 norm of the data for the measure dsigma(x) t^{n-1} dt.
inline double data_norm(const DataGrid& g) {
  const std::vector<double> wt = trapezoid_weights(g.t_count, 0.0, g.t_max);
  double acc = 0.0;
  for (int i = 0; i < g.centers.size(); ++i) {
    double row = 0.0;
    for (int j = 0; j < g.t_count; ++j)
      row += wt[j] * g.value(i, j) * g.value(i, j) * std::pow(g.t(j), g.n - 1);
    acc += g.centers.weights[i] * row;
  }
  return std::sqrt(acc);
}

/// Condition on the spectral side: ghat_{m,l} must vanish at every positive
/// zero of J_{m+n/2-1}. Residuals are |ghat(lambda_k)| divided by the sup of
/// |ghat| over [0, lambda_K] (sampled densely), so they are scale invariant.
struct Condition3Result {
  std::vector<double> lambdas;
  std::vector<double> raw;        // |ghat(lambda_k)|
  std::vector<double> residuals;  // raw / sup
  double sup = 0.0;
  bool degenerate = false;  // channel carries no data; residuals forced to 0
};

inline Condition3Result check_condition3(const SpectralFunction& f, const ZeroTable& zeros,
                                         int K, double sup_samples_per_unit = 4.0) {
  const double nu = bessel_order(f.coef.idx.n, f.coef.idx.m);
  if (std::abs(zeros.nu - nu) > 1e-12)
    throw config_error("check_condition3: zero table order does not match the channel");
  if (K < 1 || K > zeros.count())
    throw config_error("check_condition3: zero table has " + std::to_string(zeros.count()) +
                       " entries, need " + std::to_string(K));
  Condition3Result r;
  const double lambda_top = zeros.zero(K);
  const int sup_n = std::max(64, static_cast<int>(sup_samples_per_unit * lambda_top));
  for (int s = 0; s <= sup_n; ++s)
    r.sup = std::max(r.sup, std::abs(f(lambda_top * s / sup_n)));
  for (int k = 1; k <= K; ++k) {
    r.lambdas.push_back(zeros.zero(k));
    r.raw.push_back(std::abs(f(zeros.zero(k))));
    r.residuals.push_back(r.sup > 0.0 ? r.raw.back() / r.sup : 0.0);
  }
  if (r.sup == 0.0) r.degenerate = true;
  return r;
}

/// Condition in physical variables: the data integrated against the normal
/// derivative weight of one eigenfunction,
///   I = lambda J'_nu(lambda) sum_i w_i Y(x_i) sum_j wt_j g(x_i,t_j) j_{n/2-1}(lambda t_j) t_j^{n-1},
/// evaluated as a direct double sum over the grid (summing over t first), a
/// deliberately different path from decompose-then-transform.
struct Condition2Result {
  double integral = 0.0;    // signed value of I
  double normalized = 0.0;  // |I| / ||g||
};

inline Condition2Result check_condition2(const DataGrid& g, const Eigenfunction& eig,
                                         double norm_hint = -1.0) {
  if (g.n != eig.idx.n) throw config_error("check_condition2: dimension mismatch");
  const double p = 0.5 * g.n - 1.0;
  const std::vector<double> wt = trapezoid_weights(g.t_count, 0.0, g.t_max);
  std::vector<double> kernel(g.t_count);
  for (int j = 0; j < g.t_count; ++j) {
    const double t = g.t(j);
    kernel[j] = wt[j] * bessel_j_norm(p, eig.lambda * t) * std::pow(t, g.n - 1);
  }
  double acc = 0.0;
  for (int i = 0; i < g.centers.size(); ++i) {
    double inner = 0.0;
    for (int j = 0; j < g.t_count; ++j) inner += kernel[j] * g.value(i, j);
    acc += g.centers.weights[i] * eval_harmonic(eig.idx, g.centers.nodes[i]) * inner;
  }
  Condition2Result r;
  r.integral = eig.boundary_factor * acc;
  const double nrm = norm_hint >= 0.0 ? norm_hint : data_norm(g);
  r.normalized = nrm > 0.0 ? std::abs(r.integral) / nrm : 0.0;
  return r;
}

/// Moment conditions along one channel: int_0^{t_max} t^{2k+n-1} g_{m,l}(t) dt
/// must vanish whenever m > 2k. Returns normalized residuals for
/// k = 0 .. floor((m-1)/2), capped at k_max when k_max >= 0.
inline std::vector<double> check_moments(const HarmonicCoefficient& c, int k_max = -1) {
  int k_hi = (c.idx.m - 1) / 2;
  if (k_max >= 0) k_hi = std::min(k_hi, k_max);
  std::vector<double> out;
  if (c.idx.m == 0) return out;
  const double nrm = channel_norm(c);
  const std::vector<double> w = trapezoid_weights(c.t_count, 0.0, c.t_max);
  for (int k = 0; k <= k_hi; ++k) {
    double moment = 0.0;
    for (int j = 0; j < c.t_count; ++j)
      moment += w[j] * c.samples[j] * std::pow(c.t(j), 2 * k + c.idx.n - 1);
    out.push_back(nrm > 0.0 ? std::abs(moment) / nrm : 0.0);
  }
  return out;
}

/// Harmonic content of the k-th radial moment M_k(x) = int t^{2k+n-1} g(x,t) dt.
/// For range data M_k is (the restriction of) a polynomial of degree <= 2k, so
/// every coefficient of degree m > 2k must vanish. Lower-degree coefficients
/// whose parity differs from 2k are reported for inspection but never failed.
struct MomentPolynomialResult {
  int k = 0;
  double norm = 0.0;  // L^2 norm of M_k over the sphere
  std::vector<std::pair<HarmonicIndex, double>> coefficients;
  std::vector<double> high_degree_residuals;  // |coef| / norm for m > 2k
  std::vector<std::pair<HarmonicIndex, double>> parity_notes;
  bool degenerate = false;
};

inline MomentPolynomialResult moment_polynomial_check(const DataGrid& g, int k, int m_max) {
  if (k < 0) throw config_error("moment_polynomial_check: k must be >= 0");
  if (g.centers.resolution < 4 * m_max)
    throw config_error("moment_polynomial_check: centre resolution below 4*m_max");
  MomentPolynomialResult r;
  r.k = k;
  const std::vector<double> wt = trapezoid_weights(g.t_count, 0.0, g.t_max);
  std::vector<double> mk(g.centers.size());
  for (int i = 0; i < g.centers.size(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < g.t_count; ++j)
      acc += wt[j] * g.value(i, j) * std::pow(g.t(j), 2 * k + g.n - 1);
    mk[i] = acc;
  }
  double norm2 = 0.0;
  for (int i = 0; i < g.centers.size(); ++i) norm2 += g.centers.weights[i] * mk[i] * mk[i];
  r.norm = std::sqrt(norm2);
  if (r.norm == 0.0) {
    r.degenerate = true;
    return r;
  }
  for (int m = 0; m <= m_max; ++m) {
    for (int l = 1; l <= harmonic_dim(g.n, m); ++l) {
      const HarmonicIndex idx{g.n, m, l};
      double coef = 0.0;
      for (int i = 0; i < g.centers.size(); ++i)
        coef += g.centers.weights[i] * mk[i] * eval_harmonic(idx, g.centers.nodes[i]);
      r.coefficients.emplace_back(idx, coef);
      if (m > 2 * k) {
        r.high_degree_residuals.push_back(std::abs(coef) / r.norm);
      } else if ((2 * k - m) % 2 == 1 && std::abs(coef) > 1e-12 * r.norm) {
        r.parity_notes.emplace_back(idx, coef);
      }
    }
  }
  return r;
}

/// Slope of log|ghat| against log(lambda) over a geometric window near 0,
/// estimating the order of the zero at lambda = 0 (2m for range data in the
/// degree-m channel). Samples under the noise floor (1e-12 of the spectral
/// sup) are dropped; too few surviving points marks the estimate unreliable
/// rather than producing a meaningless fit.
struct VanishWindow {
  double lo = 0.1;
  double hi = 0.5;
  int count = 10;
};

struct VanishingOrderResult {
  double slope = 0.0;
  bool reliable = false;
  int points_used = 0;
  double scale = 0.0;
  double floor = 0.0;
};

inline VanishingOrderResult vanishing_order(const SpectralFunction& f,
                                            const VanishWindow& w = {}) {
  if (!(w.lo > 0.0 && w.hi > w.lo && w.count >= 4))
    throw config_error("vanishing_order: window must satisfy 0 < lo < hi, count >= 4");
  VanishingOrderResult r;
  const double scan_top = std::max(5.0, 2.0 * w.hi);
  for (int s = 0; s <= 64; ++s)
    r.scale = std::max(r.scale, std::abs(f(scan_top * s / 64.0)));
  r.floor = 1e-12 * r.scale;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < w.count; ++i) {
    const double lambda = w.lo * std::pow(w.hi / w.lo, static_cast<double>(i) / (w.count - 1));
    const double v = std::abs(f(lambda));
    if (v <= r.floor) continue;
    const double lx = std::log(lambda), ly = std::log(v);
    ++r.points_used;
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  if (r.points_used >= 4) {
    const double det = r.points_used * sxx - sx * sx;
    r.slope = (r.points_used * sxy - sx * sy) / det;
    r.reliable = true;
  }
  return r;
}

/// Data plus one separable term t^a (2-t)^b Y_{m,l} that no transform of a
/// supported function can produce (its spectral coefficient is not of the
/// required form). Amplitude is `relative` times max|g| at the profile peak.
/// Exponents >= 2 keep the perturbed data C^1 at both ends of [0, 2].
inline DataGrid make_negative_control(const DataGrid& g, int m, int l, double a, double b,
                                      double relative) {
  if (a < 2.0 || b < 2.0)
    throw config_error("make_negative_control: exponents must be >= 2");
  if (relative <= 0.0) throw config_error("make_negative_control: relative amplitude <= 0");
  const double t_peak = g.t_max * a / (a + b);
  const double peak = std::pow(t_peak, a) * std::pow(g.t_max - t_peak, b);
  const double base = max_abs(g);
  const double amp = relative * (base > 0.0 ? base : 1.0) / peak;
  DataGrid out = g;
  const DataGrid term = synthesize_separable(
      g.centers, g.t_count,
      [&](double t) { return amp * std::pow(t, a) * std::pow(g.t_max - t, b); },
      HarmonicIndex{g.n, m, l}, g.t_max);
  accumulate(out, term);
  return out;
}

/// Full range verdict over all channels up to m_max.
struct CheckOptions {
  int m_max = 8;
  int zero_count = 20;       // zeros per channel (K)
  int moment_poly_k_max = 3; // M_k expansions reported for k = 0..this
  Tolerances tol;
  VanishWindow vanish;
  double sup_samples_per_unit = 4.0;
  bool with_condition2 = true;
  bool with_vanishing = true;
};

struct ChannelReport {
  HarmonicIndex idx;
  double channel_norm = 0.0;
  bool degenerate = false;
  Condition3Result cond3;
  std::vector<double> cond2;      // normalized residuals, one per zero
  std::vector<double> cond2_raw;  // signed integrals
  std::vector<double> moments;
  VanishingOrderResult vanish;
  bool pass3 = true, pass2 = true, pass_moments = true;
};

struct RangeReport {
  int n = 2;
  CheckOptions options;
  double norm = 0.0;  // ||g||
  std::vector<ChannelReport> channels;
  std::vector<MomentPolynomialResult> moment_polys;
  bool pass = true;
};

inline RangeReport check_range(const DataGrid& g, const CheckOptions& opt = {}) {
  RangeReport report;
  report.n = g.n;
  report.options = opt;
  report.norm = data_norm(g);
  const std::vector<HarmonicCoefficient> coeffs = decompose(g, opt.m_max);

  // Shared zero tables per Bessel order (l channels of one degree reuse them).
  std::vector<ZeroTable> tables(opt.m_max + 1);
  for (int m = 0; m <= opt.m_max; ++m)
    tables[m] = bessel_zeros(bessel_order(g.n, m), opt.zero_count);

  const double tol3 = opt.tol.condition3 * opt.tol.scale;
  const double tol2 = opt.tol.condition2 * opt.tol.scale;
  const double tol_m = opt.tol.moment * opt.tol.scale;

  for (const HarmonicCoefficient& c : coeffs) {
    ChannelReport ch;
    ch.idx = c.idx;
    ch.channel_norm = channel_norm(c);
    const SpectralFunction f{c};
    ch.cond3 = check_condition3(f, tables[c.idx.m], opt.zero_count, opt.sup_samples_per_unit);
    ch.moments = check_moments(c);
    if (opt.with_vanishing && c.idx.m >= 1) ch.vanish = vanishing_order(f, opt.vanish);
    if (opt.with_condition2) {
      for (int k = 1; k <= opt.zero_count; ++k) {
        const Eigenfunction eig = make_eigenfunction(c.idx, tables[c.idx.m], k);
        const Condition2Result r2 = check_condition2(g, eig, report.norm);
        ch.cond2.push_back(r2.normalized);
        ch.cond2_raw.push_back(r2.integral);
      }
    }
    report.channels.push_back(std::move(ch));
  }

  // A channel whose spectral sup is negligible against the largest channel
  // carries no information; its normalized residuals are noise over noise.
  double global_sup = 0.0;
  for (const auto& ch : report.channels) global_sup = std::max(global_sup, ch.cond3.sup);
  for (auto& ch : report.channels) {
    ch.degenerate = ch.cond3.sup <= 1e-12 * global_sup;
    if (ch.degenerate) {
      std::fill(ch.cond3.residuals.begin(), ch.cond3.residuals.end(), 0.0);
      std::fill(ch.moments.begin(), ch.moments.end(), 0.0);
      ch.cond3.degenerate = true;
      ch.vanish.reliable = false;
      continue;
    }
    for (double r : ch.cond3.residuals) ch.pass3 = ch.pass3 && r < tol3;
    for (double r : ch.cond2) ch.pass2 = ch.pass2 && r < tol2;
    for (double r : ch.moments) ch.pass_moments = ch.pass_moments && r < tol_m;
    report.pass = report.pass && ch.pass3 && ch.pass2 && ch.pass_moments;
  }

  for (int k = 0; k <= opt.moment_poly_k_max; ++k)
    report.moment_polys.push_back(moment_polynomial_check(g, k, opt.m_max));

  return report;
}

}  // namespace sphmean
