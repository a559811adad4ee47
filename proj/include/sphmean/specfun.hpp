#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphmean/common.hpp"

namespace sphmean {

/// Order of the Bessel factor attached to the degree-m harmonic channel in
/// dimension n: nu = m + n/2 - 1.
inline double bessel_order(int n, int m) {
  if (n != 2 && n != 3) throw config_error("bessel_order: dimension must be 2 or 3");
  if (m < 0) throw std::domain_error("bessel_order: negative degree");
  return m + 0.5 * n - 1.0;
}

namespace detail {

inline double mag(double x) { return std::abs(x); }
inline double mag(const std::complex<double>& z) { return std::abs(z); }

/// Ascending series J_nu(z) = (z/2)^nu / Gamma(nu+1) * sum_k (-z^2/4)^k / (k! (nu+1)_k).
/// Terms alternate and grow before they shrink, so convergence is only tested
/// once k has passed |z|/2; the loss to cancellation is ~eps * I_nu(|z|) / |J_nu(z)|,
/// which stays below ~1e-10 of the envelope for |z| <= max(12, nu).
template <class Scalar>
Scalar bessel_j_series(double nu, Scalar z) {
  if (mag(z) == 0.0) return nu == 0.0 ? Scalar(1) : Scalar(0);
  const Scalar q = 0.25 * z * z;
  Scalar term(1), sum(1);
  const int k_min = static_cast<int>(mag(z) / 2.0) + 2;
  for (int k = 1; k <= 600; ++k) {
    term *= -q / (k * (nu + k));
    sum += term;
    if (k >= k_min && mag(term) <= 1e-18 * mag(sum)) {
      const Scalar prefactor = std::exp(nu * std::log(0.5 * z) - std::lgamma(nu + 1.0));
      return prefactor * sum;
    }
  }
  throw std::runtime_error("bessel_j_series: no convergence at |z|=" + std::to_string(mag(z)));
}

/// Hankel large-argument expansion,
///   J_nu(z) = sqrt(2/(pi z)) [cos(w) P(nu,z) - sin(w) Q(nu,z)],
///   w = z - nu pi/2 - pi/4,
/// with P/Q summed adaptively: stop at the smallest term (the expansion is
/// asymptotic, so terms eventually grow). The smallest term at |z| = 12 is
/// ~e^{-2|z|} ~ 4e-11 of the envelope, matching the series error at the switch.
/// Requires 4 nu^2 not too large against |z|; callers keep nu <= 2.5 here and
/// reach higher orders through the forward recurrence below.
template <class Scalar>
Scalar bessel_j_asymptotic(double nu, Scalar z) {
  const double mu = 4.0 * nu * nu;
  Scalar p_sum(1), q_sum(0);
  Scalar zk(1);
  double a = 1.0;
  double last_mag = std::numeric_limits<double>::max();
  const double r = mag(z);
  for (int k = 1; k <= 40; ++k) {
    const double f = 2.0 * k - 1.0;
    a *= (mu - f * f) / (8.0 * k);
    const double t_mag = std::abs(a) / std::pow(r, k);
    if (t_mag >= last_mag) break;  // divergence onset
    zk /= z;
    const Scalar term = a * zk;
    if (k % 2 == 0) {
      p_sum += (k % 4 == 0) ? term : -term;
    } else {
      q_sum += (k % 4 == 1) ? term : -term;
    }
    if (t_mag < 1e-18) break;
    if (a == 0.0) break;  // half-integer orders terminate exactly
    last_mag = t_mag;
  }
  const Scalar w = z - Scalar((0.5 * nu + 0.25) * pi);
  return std::sqrt(2.0 / (pi * z)) * (std::cos(w) * p_sum - std::sin(w) * q_sum);
}

/// Forward order recurrence J_{p+1}(z) = (2p/z) J_p(z) - J_{p-1}(z), seeded by
/// the asymptotic expansion at the fractional part of nu. Only called with
/// |z| > nu, where the upward direction is stable (orders stay below the
/// turning point).
template <class Scalar>
Scalar bessel_j_recurrence(double nu, Scalar z) {
  const double f = nu - std::floor(nu);
  Scalar jm = bessel_j_asymptotic(f, z);
  if (nu == f) return jm;
  Scalar j = bessel_j_asymptotic(f + 1.0, z);
  const int steps = static_cast<int>(std::lround(nu - f)) - 1;
  for (int s = 0; s < steps; ++s) {
    const double p = f + 1.0 + s;
    const Scalar next = (2.0 * p / z) * j - jm;
    jm = j;
    j = next;
  }
  return j;
}

/// Dispatch for Re z >= 0. Branch switch at |z| = max(12, nu): below it the
/// series cancellation is acceptable, above it the asymptotic forms apply.
template <class Scalar>
Scalar bessel_j_right_half(double nu, Scalar z) {
  const double r = mag(z);
  if (r == 0.0) return nu == 0.0 ? Scalar(1) : Scalar(0);
  if (r <= std::max(12.0, nu)) return bessel_j_series(nu, z);
  if (nu <= 2.5) return bessel_j_asymptotic(nu, z);
  return bessel_j_recurrence(nu, z);
}

inline bool is_integer(double x) { return std::rint(x) == x; }

}  // namespace detail

/// Bessel function of the first kind, real argument. Orders nu >= 0.
/// Negative x is allowed only for integer nu (where J_n(-x) = (-1)^n J_n(x));
/// otherwise the point sits on the branch cut and is rejected.
inline double bessel_j(double nu, double x) {
  if (nu < 0.0 || !std::isfinite(nu)) throw std::domain_error("bessel_j: order must be >= 0");
  if (!std::isfinite(x)) throw std::domain_error("bessel_j: non-finite argument");
  if (x < 0.0) {
    if (!detail::is_integer(nu))
      throw std::domain_error("bessel_j: negative argument with non-integer order");
    const double v = detail::bessel_j_right_half(nu, -x);
    return (static_cast<long long>(nu) % 2 == 0) ? v : -v;
  }
  return detail::bessel_j_right_half(nu, x);
}

/// Complex argument. The principal branch is used; for Re z < 0 the value is
/// continued with J_nu(e^{+-i pi} w) = e^{+-i pi nu} J_nu(w), the sign chosen
/// by the half-plane of Im z.
inline std::complex<double> bessel_j(double nu, std::complex<double> z) {
  if (nu < 0.0 || !std::isfinite(nu)) throw std::domain_error("bessel_j: order must be >= 0");
  if (z.imag() == 0.0) return std::complex<double>(bessel_j(nu, z.real()), 0.0);
  if (z.real() < 0.0) {
    const std::complex<double> w = -z;
    const std::complex<double> phase =
        std::exp(std::complex<double>(0.0, (z.imag() > 0.0 ? pi : -pi) * nu));
    return phase * detail::bessel_j_right_half(nu, w);
  }
  return detail::bessel_j_right_half(nu, z);
}

/// Normalized Bessel function j_p(x) = 2^p Gamma(p+1) J_p(x) / x^p, the even
/// entire function with j_p(0) = 1. Its zeros coincide with the positive
/// zeros of J_p.
inline double bessel_j_norm(double p, double x) {
  if (p < 0.0) throw std::domain_error("bessel_j_norm: order must be >= 0");
  x = std::abs(x);  // even in x
  if (x <= std::max(12.0, p)) {
    // Series without the (x/2)^p prefactor: sum_k (-x^2/4)^k / (k! (p+1)_k).
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    const int k_min = static_cast<int>(x / 2.0) + 2;
    for (int k = 1; k <= 600; ++k) {
      term *= -q / (k * (p + k));
      sum += term;
      if (k >= k_min && std::abs(term) <= 1e-18 * std::abs(sum)) return sum;
    }
    throw std::runtime_error("bessel_j_norm: no convergence");
  }
  const double scale = std::exp(p * std::log(2.0) + std::lgamma(p + 1.0) - p * std::log(x));
  return scale * bessel_j(p, x);
}

/// Coefficient of x^{2k} in the series of j_p: (-1)^k / (4^k k! (p+1)_k).
inline double bessel_j_norm_coefficient(double p, int k) {
  if (k < 0) throw std::domain_error("bessel_j_norm_coefficient: negative index");
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c *= -1.0 / (4.0 * i * (p + i));
  return c;
}

inline double bessel_j_prime(double nu, double x) {
  if (nu == 0.0) return -bessel_j(1.0, x);
  if (nu < 1.0) {
    // J_{nu-1} would need a negative order; use J'_nu = (nu/x) J_nu - J_{nu+1}.
    if (x == 0.0) throw std::domain_error("bessel_j_prime: singular at 0 for order < 1");
    return nu / std::abs(x) * bessel_j(nu, x) - bessel_j(nu + 1.0, x);
  }
  return 0.5 * (bessel_j(nu - 1.0, x) - bessel_j(nu + 1.0, x));
}

/// Positive zeros of J_nu in increasing order, 1-based access.
struct ZeroTable {
  double nu = 0.0;
  std::vector<double> zeros;
  int count() const { return static_cast<int>(zeros.size()); }
  double zero(int k) const {
    if (k < 1 || k > count())
      throw std::out_of_range("ZeroTable: zero index " + std::to_string(k));
    return zeros[static_cast<std::size_t>(k) - 1];
  }
  double back() const { return zeros.empty() ? 0.0 : zeros.back(); }
};

namespace detail {

/// McMahon large-zero approximation. Reliable as a Newton start once clamped
/// into a sign-change bracket; on its own it mis-indexes low zeros at large nu.
inline double mcmahon_guess(double nu, int k) {
  const double b = (k + 0.5 * nu - 0.25) * pi;
  const double mu = 4.0 * nu * nu;
  return b - (mu - 1.0) / (8.0 * b);
}

/// Polish one bracketed zero: Newton from the McMahon guess projected into the
/// bracket, with the bracket maintained from the residual sign so a wayward
/// step falls back to bisection. Converged when the Newton step drops below
/// 1e-12 (absolute).
inline double refine_zero(double nu, double a, double b, int index) {
  double fa = bessel_j(nu, a);
  double x = mcmahon_guess(nu, index);
  if (!(x > a && x < b)) x = 0.5 * (a + b);
  bool converged = false;
  for (int iter = 0; iter < 50 && !converged; ++iter) {
    const double f = bessel_j(nu, x);
    if ((f > 0.0) == (fa > 0.0)) {
      a = x;
      fa = f;
    } else {
      b = x;
    }
    const double fp = bessel_j_prime(nu, x);
    double next = (fp != 0.0) ? x - f / fp : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    converged = std::abs(next - x) <= 1e-12;
    x = next;
  }
  if (!converged) {
    // Bisection fallback; the bracket is guaranteed, so this cannot fail.
    while (b - a > 1e-13) {
      const double m = 0.5 * (a + b);
      const double fm = bessel_j(nu, m);
      if ((fm > 0.0) == (fa > 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    x = 0.5 * (a + b);
  }
  // Certification: a sign change across a width-1e-8 bracket centred on x.
  const double lo = bessel_j(nu, x - 5e-9);
  const double hi = bessel_j(nu, x + 5e-9);
  if ((lo > 0.0) == (hi > 0.0))
    throw std::runtime_error("bessel_zeros: could not certify zero " + std::to_string(index) +
                             " of order " + std::to_string(nu));
  return x;
}

}  // namespace detail

/// First `count` positive zeros of J_nu. Brackets come from a sign-change scan
/// with step pi/8 starting just above nu (J_nu has no positive zeros below nu),
/// which cannot skip a zero since consecutive zeros are at least pi apart...
/// in fact their gaps exceed pi for nu > 1/2 and approach pi from below for
/// nu < 1/2, still far wider than the scan step.
inline ZeroTable bessel_zeros(double nu, int count) {
  if (nu < 0.0) throw std::domain_error("bessel_zeros: order must be >= 0");
  if (count < 0) throw std::domain_error("bessel_zeros: negative count");
  ZeroTable table;
  table.nu = nu;
  table.zeros.reserve(count);
  const double step = pi / 8.0;
  double x0 = std::max(nu + 0.05, 0.3);
  double f0 = bessel_j(nu, x0);
  while (table.count() < count) {
    const double x1 = x0 + step;
    const double f1 = bessel_j(nu, x1);
    if (f0 == 0.0) {
      table.zeros.push_back(detail::refine_zero(nu, x0 - 1e-6, x0 + 1e-6, table.count() + 1));
    } else if ((f0 > 0.0) != (f1 > 0.0)) {
      table.zeros.push_back(detail::refine_zero(nu, x0, x1, table.count() + 1));
    }
    x0 = x1;
    f0 = f1;
    if (x0 > nu + 16.0 * (count + 4)) throw std::runtime_error("bessel_zeros: scan overran");
  }
  return table;
}

/// All positive zeros of J_nu up to lambda_max.
inline ZeroTable bessel_zeros_up_to(double nu, double lambda_max) {
  if (lambda_max <= 0.0) return ZeroTable{nu, {}};
  // Zeros are spaced at least ~pi apart, so this count always reaches past lambda_max.
  const int safe = static_cast<int>(lambda_max / pi) + 2;
  ZeroTable all = bessel_zeros(nu, safe);
  ZeroTable out;
  out.nu = nu;
  for (double z : all.zeros)
    if (z <= lambda_max) out.zeros.push_back(z);
  return out;
}

/// Spherical Bessel function j_l(x) (closed sin/cos forms propagated through
/// the three-term recurrence). Upward from j_0, j_1 when x is past the order
/// (the classical closed-form direction); downward Miller normalization when
/// x < l + 2, where the upward direction would amplify the irregular solution.
inline double spherical_bessel_j(int l, double x) {
  if (l < 0) throw std::domain_error("spherical_bessel_j: negative order");
  if (x < 0.0) throw std::domain_error("spherical_bessel_j: negative argument");
  if (x == 0.0) return l == 0 ? 1.0 : 0.0;
  if (l == 0) return std::sin(x) / x;
  if (x >= l + 2.0) {
    double jm = std::sin(x) / x;
    double j = std::sin(x) / (x * x) - std::cos(x) / x;
    for (int k = 1; k < l; ++k) {
      const double next = (2.0 * k + 1.0) / x * j - jm;
      jm = j;
      j = next;
    }
    return j;
  }
  const int start = l + 24 + static_cast<int>(x);
  double up = 0.0, u = 1e-280, target = 0.0;
  for (int k = start; k >= 1; --k) {
    const double um = (2.0 * k + 1.0) / x * u - up;
    up = u;
    u = um;
    if (k - 1 == l) target = u;
    if (std::abs(u) > 1e260) {  // rescale to dodge overflow
      up /= 1e260;
      u /= 1e260;
      target /= 1e260;
    }
  }
  // After the loop u estimates j_0 and up estimates j_1; normalize against
  // whichever closed form is larger (they cannot both be near a zero).
  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  return std::abs(j0) >= std::abs(j1) ? target * j0 / u : target * j1 / up;
}

/// J_{m+1/2}(x) through the spherical closed forms; reference path for the
/// half-integer orders that appear in dimension 3.
inline double bessel_j_half_integer(int m, double x) {
  if (x == 0.0) return 0.0;
  return std::sqrt(2.0 * x / pi) * spherical_bessel_j(m, x);
}

/// Admissible region and Monte Carlo sweep for the scaled lower-bound witness
///   |J_nu(z)| sqrt(|z|) e^{-|Im z|}
/// which stays bounded away from zero once a neighbourhood of the origin and
/// small disks around the asymptotic cosine zeros w_k = pi(k + (2 nu + 3)/4)
/// are removed.
struct LowerBoundSweep {
  double r_max = 50.0;
  double origin_radius = -1.0;  // < 0: use the default 3 + nu
  double disk_radius = pi / 6.0;
  double clearance = 0.0;  // extra stand-off added to both exclusions
  int sample_count = 10000;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  bool real_axis_only = false;
};

/// Default origin exclusion. 3 + nu covers the zero-free region, but low zeros
/// of J_nu drift by (4 nu^2 - 1)/(8 z) from the asymptotic cosine centres; any
/// zero drifting past 0.25 would leave admissible points hugging it, so the
/// disk is grown to swallow such zeros entirely. For large orders this can
/// exhaust |z| <= r_max, which the sweep reports as a configuration error.
inline double lower_bound_origin_radius(double nu, const LowerBoundSweep& sweep) {
  if (sweep.origin_radius >= 0.0) return sweep.origin_radius;
  double r = 3.0 + nu;
  const ZeroTable zeros = bessel_zeros_up_to(nu, sweep.r_max + 1.0);
  for (int k = 1; k <= zeros.count(); ++k) {
    const double z = zeros.zero(k);
    const double j = std::max(0.0, std::round(z / pi - 0.25 * (2.0 * nu + 3.0)));
    const double c = pi * (j + 0.25 * (2.0 * nu + 3.0));
    if (std::abs(z - c) > 0.25) r = std::max(r, z + sweep.disk_radius);
  }
  return r;
}

inline bool lower_bound_admissible(double nu, std::complex<double> z,
                                   const LowerBoundSweep& sweep) {
  const double r = std::abs(z);
  if (r > sweep.r_max) return false;
  if (r < lower_bound_origin_radius(nu, sweep) + sweep.clearance) return false;
  if (!detail::is_integer(nu) && z.imag() == 0.0 && z.real() < 0.0) return false;  // branch cut
  const double guard = sweep.disk_radius + sweep.clearance;
  for (int k = 0;; ++k) {
    const double c = pi * (k + 0.25 * (2.0 * nu + 3.0));
    if (c > sweep.r_max + guard) break;
    if (std::abs(z - std::complex<double>(c, 0.0)) < guard) return false;
    if (std::abs(z + std::complex<double>(c, 0.0)) < guard) return false;
  }
  return true;
}

struct LowerBoundResult {
  double margin = 0.0;
  std::complex<double> argmin;
  int admissible = 0;
  int rejected = 0;
};

/// Minimum of the scaled witness over `sample_count` admissible samples drawn
/// uniformly from the disk |z| <= r_max (or the positive real segment when
/// real_axis_only). Sampling uses raw 53-bit draws from mt19937_64 so the
/// stream is identical across platforms for a fixed seed.
inline LowerBoundResult lower_bound_margin(double nu, const LowerBoundSweep& sweep) {
  if (sweep.sample_count < 1) throw config_error("lower_bound_margin: sample_count must be >= 1");
  std::mt19937_64 rng(sweep.seed);
  auto unit = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
  LowerBoundResult result;
  result.margin = std::numeric_limits<double>::max();
  LowerBoundSweep resolved = sweep;  // pin the origin radius once
  resolved.origin_radius = lower_bound_origin_radius(nu, sweep);
  const double r0 = resolved.origin_radius;
  if (r0 + sweep.clearance >= sweep.r_max)
    throw config_error("lower_bound_margin: admissible region is empty (raise r_max)");
  const long cap = 200L * sweep.sample_count;
  for (long draws = 0; result.admissible < sweep.sample_count; ++draws) {
    if (draws >= cap)
      throw config_error("lower_bound_margin: admissible region too small for sample count");
    std::complex<double> z;
    if (sweep.real_axis_only) {
      z = {r0 + sweep.clearance + (sweep.r_max - r0 - sweep.clearance) * unit(), 0.0};
    } else {
      const double rad = sweep.r_max * std::sqrt(unit());
      const double ang = 2.0 * pi * unit();
      z = std::polar(rad, ang);
    }
    if (!lower_bound_admissible(nu, z, resolved)) {
      ++result.rejected;
      continue;
    }
    ++result.admissible;
    const double w =
        std::abs(bessel_j(nu, z)) * std::sqrt(std::abs(z)) * std::exp(-std::abs(z.imag()));
    if (w < result.margin) {
      result.margin = w;
      result.argmin = z;
    }
  }
  return result;
}

}  // namespace sphmean
