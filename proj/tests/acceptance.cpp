// Acceptance gate: nine numbered checks covering the toolkit at its
// documented operating point (n=2, bump at (0.3,0) with radius 0.4, m up to 8,
// 20 zeros per channel). Prints one verdict line per check and exits nonzero
// if any fails. Pinned to one worker thread so the runtime figures mean
// something.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sphmean/oracles.hpp"
#include "sphmean/range.hpp"
#include "support/reference.hpp"

using namespace sphmean;

namespace {

std::string fmt(const char* pattern, ...) {
  va_list args;
  va_start(args, pattern);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

double vec_max(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// ---------------------------------------------------------------------------
// Quadruple precision series oracle. The ascending series loses ~e^x quad ulps
// to cancellation, which still leaves ~1e-13 absolute accuracy at x = 50 for
// every order swept below. Built from scratch here: no library code, no
// libquadmath calls.

using quad = __float128;

quad q_abs(quad x) { return x < 0 ? -x : x; }

quad q_sqrt(quad a) {
  quad y = std::sqrt(static_cast<double>(a));
  for (int i = 0; i < 3; ++i) y = 0.5 * (y + a / y);
  return y;
}

const quad kPi =
    static_cast<quad>(3.141592653589793) + static_cast<quad>(1.2246467991473532e-16);

// J_nu(x) for nu = nu2/2, nu2 a nonnegative integer.
double bessel_series_quad(int nu2, double x) {
  const int m = nu2 / 2;
  const bool half = nu2 % 2 != 0;
  if (x == 0.0) return nu2 == 0 ? 1.0 : 0.0;
  const quad xq = x;
  const quad arg = 0.25 * xq * xq;
  const quad nu = half ? quad(m) + 0.5 : quad(m);
  quad term = 1.0, sum = 1.0;
  for (int k = 1; k <= 2000; ++k) {
    term *= -arg / (quad(k) * (nu + quad(k)));
    sum += term;
    if (k > x && q_abs(term) <= 1e-40 * q_abs(sum)) break;
  }
  quad pre = 1.0;  // (x/2)^nu
  for (int i = 0; i < m; ++i) pre *= 0.5 * xq;
  quad gamma = 1.0;  // Gamma(nu + 1)
  if (half) {
    pre *= q_sqrt(0.5 * xq);
    quad dfac = 1.0;  // (2m+1)!!
    for (int i = 1; i <= m; ++i) dfac *= 2 * i + 1;
    quad pow2 = 1.0;
    for (int i = 0; i <= m; ++i) pow2 *= 2.0;
    gamma = q_sqrt(kPi) * dfac / pow2;
  } else {
    for (int i = 2; i <= m; ++i) gamma *= i;
  }
  return static_cast<double>(pre * sum / gamma);
}

// First `count` positive zeros of a sign-changing function by scan + bisection.
template <class F>
std::vector<double> zeros_by_bisection(F&& f, int count) {
  std::vector<double> out;
  double x = 0.5;
  double fx = f(x);
  while (static_cast<int>(out.size()) < count) {
    const double y = x + 0.05;
    const double fy = f(y);
    if ((fx > 0.0) != (fy > 0.0)) out.push_back(ref::bisect(f, x, y, 1e-13));
    x = y;
    fx = fy;
    if (x > 80.0) throw std::runtime_error("zeros_by_bisection: ran past the scan window");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared pipeline: forward data for the standard phantom, full range check,
// and the residual sets the stability check compares across grids.

struct PipelineRun {
  DataGrid data;
  RangeReport rep;
  std::vector<double> cond3;       // every (channel, zero) normalized residual
  std::vector<double> cond2_diff;  // | |I_k| - |bf_k| |ghat(lambda_k)| |
  std::vector<double> moments;     // every residual with 2k < m
  std::vector<std::pair<int, double>> slopes;  // (m, slope), data channels m <= 3
  double seconds = 0.0;
};

PipelineRun run_pipeline(int center_res, int t_count, int dir_res) {
  const auto t0 = std::chrono::steady_clock::now();
  Phantom f;
  f.n = 2;
  f.bumps.push_back({{0.3, 0.0, 0.0}, 0.4, 1.0});
  PipelineRun out;
  out.data =
      forward(f, sphere_quadrature(2, center_res), t_count, sphere_quadrature(2, dir_res));
  CheckOptions opt;  // m_max 8, 20 zeros per channel, production tolerances
  opt.moment_poly_k_max = 2;
  out.rep = check_range(out.data, opt);
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& ch : out.rep.channels) {
    const double nu = bessel_order(2, ch.idx.m);
    for (double r : ch.cond3.residuals) out.cond3.push_back(r);
    for (std::size_t k = 0; k < ch.cond2_raw.size(); ++k) {
      const double lambda = ch.cond3.lambdas[k];
      const double bf = lambda * bessel_j_prime(nu, lambda);
      out.cond2_diff.push_back(
          std::abs(std::abs(ch.cond2_raw[k]) - std::abs(bf) * ch.cond3.raw[k]));
    }
    for (double r : ch.moments) out.moments.push_back(r);
    if (ch.idx.m >= 1 && ch.idx.m <= 3 && !ch.degenerate)
      out.slopes.emplace_back(ch.idx.m, ch.vanish.slope);
  }
  return out;
}

struct NegativeResult {
  double cond3_max = 0.0;
  double moment_max = 0.0;
};

// Separable t^a (2-t)^b term injected into one channel at 0.5% of max |g|.
NegativeResult negative_case(const DataGrid& g, int m, int l, double a, double b) {
  const DataGrid bad = make_negative_control(g, m, l, a, b, 5e-3);
  CheckOptions opt;
  opt.with_condition2 = false;
  opt.with_vanishing = false;
  opt.moment_poly_k_max = 0;
  const RangeReport rep = check_range(bad, opt);
  NegativeResult r;
  for (const auto& ch : rep.channels) {
    r.cond3_max = std::max(r.cond3_max, vec_max(ch.cond3.residuals));
    r.moment_max = std::max(r.moment_max, vec_max(ch.moments));
  }
  return r;
}

// Stability rule for one paired residual: agree to 10%, or both sit at or
// below the tolerance that judges them. Noise-floor residuals shrink under
// refinement; that is convergence, not instability, so the tolerance acts as
// the comparison floor.
bool stable_pair(double r, double rp, double tol) {
  return r <= std::max(1.1 * rp, tol) && rp <= std::max(1.1 * r, tol);
}

int count_unstable(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  if (a.size() != b.size()) return static_cast<int>(std::max(a.size(), b.size()));
  int bad = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!stable_pair(a[i], b[i], tol)) ++bad;
  return bad;
}

}  // namespace

int main() {
  setenv("SPHMEAN_THREADS", "1", 1);
  int failures = 0;
  auto verdict = [&](int id, bool pass, const std::string& detail) {
    std::printf("%s %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  };

  // Checks 1-4 share one pipeline at the operating point; check 9 repeats it
  // with T and the sphere resolution doubled. 768 directions hold the forward
  // quadrature noise under the moment tolerance; the direction count is not
  // part of the doubling.
  const PipelineRun base = run_pipeline(512, 1024, 768);

  {
    const double worst = vec_max(base.cond3);
    verdict(1, worst < 1e-6 && base.seconds < 120.0,
            fmt("condition (3) on range data: max normalized residual %.3g over %zu "
                "channel-zero pairs (limit 1e-06), pipeline %.1f s (limit 120)",
                worst, base.cond3.size(), base.seconds));
  }

  {
    const double worst = vec_max(base.cond2_diff);
    verdict(2, worst < 1e-10,
            fmt("condition (2) reduces to condition (3): max un-normalized disagreement "
                "%.3g across all (m,l,k) (limit 1e-10)",
                worst));
  }

  const NegativeResult neg[3] = {
      negative_case(base.data, 3, 1, 3.0, 3.0),
      negative_case(base.data, 5, 2, 2.0, 4.0),
      negative_case(base.data, 2, 2, 4.0, 2.5),
  };
  {
    const double worst = vec_max(base.moments);
    bool neg_ok = true;
    double neg_min = std::numeric_limits<double>::max();
    for (const auto& r : neg) {
      neg_ok = neg_ok && r.cond3_max > 1e-3 && r.moment_max > 1e-3;
      neg_min = std::min({neg_min, r.cond3_max, r.moment_max});
    }
    verdict(3, worst < 1e-8 && neg_ok,
            fmt("moment conditions: max residual with 2k < m is %.3g (limit 1e-08); "
                "3 negative controls all rejected, smallest flagged residual %.3g "
                "(must exceed 1e-03)",
                worst, neg_min));
  }

  {
    bool ok = base.slopes.size() == 3;
    double worst_gap = 0.0;
    for (const auto& [m, slope] : base.slopes) {
      worst_gap = std::max(worst_gap, std::abs(slope - 2.0 * m));
      ok = ok && std::abs(slope - 2.0 * m) <= 0.3;
    }
    verdict(4, ok,
            fmt("vanishing order at lambda=0: slopes %.3f/%.3f/%.3f for m=1/2/3, max "
                "gap from 2m is %.3f (limit 0.3)",
                base.slopes.size() > 0 ? base.slopes[0].second : 0.0,
                base.slopes.size() > 1 ? base.slopes[1].second : 0.0,
                base.slopes.size() > 2 ? base.slopes[2].second : 0.0, worst_gap));
  }

  {
    bool ok = true;
    double ratios[2][2] = {};
    for (int n : {2, 3}) {
      Phantom f;
      f.n = n;
      f.bumps.push_back({{0.3, 0.0, 0.0}, 0.4, 1.0});
      const std::vector<Point> probes =
          n == 2 ? std::vector<Point>{{1.0, 0.15, 0.0}, {0.62, -0.45, 0.0}}
                 : std::vector<Point>{{0.95, 0.1, 0.2}, {0.55, -0.4, 0.3}};
      const std::vector<double> radii = {0.65, 1.05};
      const SphereQuadrature dirs = sphere_quadrature(n, n == 2 ? 1024 : 512);
      // The n=3 phantom needs a finer ladder before the h^4 term lets go of
      // the ratio; its direction count keeps the quadrature noise below the
      // smallest residual.
      const double h0 = n == 2 ? 0.04 : 0.02;
      const double r1 = darboux_residual(f, probes, radii, h0, dirs);
      const double r2 = darboux_residual(f, probes, radii, 0.5 * h0, dirs);
      const double r3 = darboux_residual(f, probes, radii, 0.25 * h0, dirs);
      ratios[n - 2][0] = r1 / r2;
      ratios[n - 2][1] = r2 / r3;
      for (double q : {r1 / r2, r2 / r3}) ok = ok && q >= 3.5 && q <= 4.5;
    }
    verdict(5, ok,
            fmt("Darboux residual is O(h^2): halving ratios n=2 %.2f/%.2f, n=3 %.2f/%.2f "
                "(each within 4 +/- 0.5)",
                ratios[0][0], ratios[0][1], ratios[1][0], ratios[1][1]));
  }

  {
    std::vector<double> v;
    for (double x = -30.0; x <= 30.0 + 1e-9; x += 0.5) v.push_back(x);
    double worst = 0.0;
    for (int n : {2, 3})
      for (int m = 1; m <= 5; ++m) worst = std::max(worst, sonine_max_deviation(m, n, v));
    verdict(6, worst < 1e-8,
            fmt("Sonine identity: max relative deviation %.3g over m=1..5, n=2,3, "
                "|v| <= 30 (limit 1e-08)",
                worst));
  }

  {
    const double floor = 0.2;  // frozen from the first recorded sweep
    double min_margin = std::numeric_limits<double>::max();
    int total = 0;
    for (double nu : {0.0, 1.0, 2.0, 2.5}) {
      LowerBoundSweep sweep;
      sweep.r_max = 50.0;
      sweep.sample_count = 10000;
      const LowerBoundResult r = lower_bound_margin(nu, sweep);
      min_margin = std::min(min_margin, r.margin);
      total += r.admissible;
    }
    verdict(7, min_margin > 0.0 && min_margin >= floor,
            fmt("scaled Bessel modulus lower bound: min margin %.4f over %d admissible "
                "samples, |z| <= 50, nu in {0,1,2,5/2} (positive, regression floor %.2f)",
                min_margin, total, floor));
  }

  {
    double worst_val = 0.0;
    for (int nu2 = 0; nu2 <= 17; ++nu2) {
      const int m = nu2 / 2;
      const bool half = nu2 % 2 != 0;
      for (double x = 0.0; x <= 50.0 + 1e-9; x += 0.13) {
        double want;
        if (half && x >= m + 1.0)
          want = ref::bessel_half(m, x);  // closed sin/cos forms, stable upward
        else
          want = bessel_series_quad(nu2, x);
        const double got = bessel_j(0.5 * nu2, x);
        worst_val = std::max(worst_val,
                             std::abs(got - want) / std::max(1.0, std::abs(want)));
      }
    }
    double worst_zero = 0.0;
    const std::vector<double> oracle0 =
        zeros_by_bisection([](double x) { return ref::bessel_integral(0, x); }, 20);
    const std::vector<double> oracle1 =
        zeros_by_bisection([](double x) { return ref::bessel_integral(1, x); }, 20);
    const std::vector<double> oracle15 = zeros_by_bisection(
        [](double x) {
          const long double xl = x;  // same zeros as J_{3/2}
          return static_cast<double>(std::sin(xl) - xl * std::cos(xl));
        },
        20);
    const std::vector<std::pair<double, const std::vector<double>*>> zero_cases = {
        {0.0, &oracle0}, {1.0, &oracle1}, {1.5, &oracle15}};
    for (const auto& [nu, oracle] : zero_cases) {
      const ZeroTable table = bessel_zeros(nu, 20);
      for (int k = 1; k <= 20; ++k)
        worst_zero = std::max(worst_zero, std::abs(table.zero(k) - (*oracle)[k - 1]));
    }
    verdict(8, worst_val <= 1e-10 && worst_zero <= 1e-10,
            fmt("bessel_j vs quadruple series / closed forms on [0,50]: max deviation "
                "%.3g; first 20 zeros of J_0, J_1, J_3/2 vs bisection: max gap %.3g "
                "(limits 1e-10)",
                worst_val, worst_zero));
  }

  {
    const PipelineRun dbl = run_pipeline(1024, 2048, 768);
    const NegativeResult neg_dbl[3] = {
        negative_case(dbl.data, 3, 1, 3.0, 3.0),
        negative_case(dbl.data, 5, 2, 2.0, 4.0),
        negative_case(dbl.data, 2, 2, 4.0, 2.5),
    };
    int bad = 0;
    bad += count_unstable(base.cond3, dbl.cond3, 1e-6);
    bad += count_unstable(base.cond2_diff, dbl.cond2_diff, 1e-10);
    bad += count_unstable(base.moments, dbl.moments, 1e-8);
    for (int i = 0; i < 3; ++i) {
      if (!stable_pair(neg[i].cond3_max, neg_dbl[i].cond3_max, 1e-3)) ++bad;
      if (!stable_pair(neg[i].moment_max, neg_dbl[i].moment_max, 1e-3)) ++bad;
    }
    bool slopes_ok = base.slopes.size() == dbl.slopes.size();
    double worst_slope_shift = 0.0;
    if (slopes_ok)
      for (std::size_t i = 0; i < base.slopes.size(); ++i) {
        const double s = std::abs(base.slopes[i].second);
        const double sp = std::abs(dbl.slopes[i].second);
        worst_slope_shift = std::max(worst_slope_shift,
                                     std::abs(s - sp) / std::max(s, sp));
        slopes_ok = slopes_ok && stable_pair(s, sp, 0.0);
      }
    const std::size_t pairs = base.cond3.size() + base.cond2_diff.size() +
                              base.moments.size() + 6 + base.slopes.size();
    verdict(9, bad == 0 && slopes_ok,
            fmt("stability under T and sphere-resolution doubling: %d of %zu residual "
                "pairs moved beyond 10%% of max(value, tolerance); max slope shift "
                "%.2f%%; doubled pipeline %.1f s",
                bad + (slopes_ok ? 0 : 1), pairs, 100.0 * worst_slope_shift,
                dbl.seconds));
  }

  std::printf("acceptance: %d/9 passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
