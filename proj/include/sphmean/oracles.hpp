#pragma once

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sphmean/common.hpp"
#include "sphmean/quadrature.hpp"
#include "sphmean/specfun.hpp"
#include "sphmean/spectral.hpp"
#include "sphmean/transform.hpp"

namespace sphmean {

/// Even radial test profile h(r) = (sum_i beta_i r^{2i}) exp(-1/(1-r^2)) on
/// [0,1), zero outside. Smooth with all derivatives vanishing at r = 1.
struct TestProfile {
  std::vector<double> poly_even{1.0};

  double eval(double r) const {
    const double w = bump_profile(r);
    if (w == 0.0) return 0.0;
    double p = 0.0;
    const double r2 = r * r;
    for (std::size_t i = poly_even.size(); i-- > 0;) p = p * r2 + poly_even[i];
    return p * w;
  }
};

/// Moment of the radial extension over R^n: int_{R^n} |y|^{2k} h(|y|) dy
///   = sigma_{n-1} int_0^1 r^{2k+n-1} h(r) dr.
inline double radial_moment(const TestProfile& h, int k, int n, int gl_order = 160) {
  if (n != 2 && n != 3) throw config_error("radial_moment: dimension must be 2 or 3");
  if (gl_order < 64) throw config_error("radial_moment: quadrature order below 64");
  const double sigma = (n == 2) ? 2.0 * pi : 4.0 * pi;
  const Quadrature1D q = gauss_legendre(gl_order, 0.0, 1.0);
  double acc = 0.0;
  for (int i = 0; i < q.size(); ++i)
    acc += q.weights[i] * std::pow(q.nodes[i], 2 * k + n - 1) * h.eval(q.nodes[i]);
  return sigma * acc;
}

namespace detail {

/// Sparse polynomial in (y1,y2,y3); exponents in a map keyed by the multi-index.
struct MultiPoly {
  std::map<std::array<int, 3>, double> terms;

  void add(const std::array<int, 3>& e, double c) {
    if (c == 0.0) return;
    auto [it, fresh] = terms.emplace(e, c);
    if (!fresh && (it->second += c) == 0.0) terms.erase(it);
  }

  MultiPoly derivative(int axis) const {
    MultiPoly d;
    for (const auto& [e, c] : terms) {
      if (e[axis] == 0) continue;
      std::array<int, 3> f = e;
      --f[axis];
      d.add(f, c * e[axis]);
    }
    return d;
  }

  MultiPoly laplacian(int dims) const {
    MultiPoly out;
    for (int a = 0; a < dims; ++a) {
      const MultiPoly second = derivative(a).derivative(a);
      for (const auto& [e, c] : second.terms) out.add(e, c);
    }
    return out;
  }

  MultiPoly times(const MultiPoly& o) const {
    MultiPoly out;
    for (const auto& [e, c] : terms)
      for (const auto& [f, d] : o.terms)
        out.add({e[0] + f[0], e[1] + f[1], e[2] + f[2]}, c * d);
    return out;
  }
};

/// (1 - |y|^2)^p in `dims` variables, expanded.
inline MultiPoly one_minus_r2_pow(int dims, int p) {
  MultiPoly base;
  base.add({0, 0, 0}, 1.0);
  MultiPoly r2;
  for (int a = 0; a < dims; ++a) {
    std::array<int, 3> e{0, 0, 0};
    e[a] = 2;
    r2.add(e, -1.0);
  }
  for (const auto& [e, c] : r2.terms) base.add(e, c);  // base = 1 - |y|^2
  MultiPoly out;
  out.add({0, 0, 0}, 1.0);
  for (int i = 0; i < p; ++i) out = out.times(base);
  return out;
}

/// int_{S^{n-1}} theta^e dsigma (unnormalized measure); zero unless every
/// exponent is even, else 2 prod Gamma((e_i+1)/2) / Gamma((|e|+n)/2).
inline double angular_monomial_integral(int n, const std::array<int, 3>& e) {
  if (n == 2 && e[2] != 0) throw std::domain_error("angular integral: e3 > 0 in dimension 2");
  int total = 0;
  for (int a = 0; a < n; ++a) {
    if (e[a] % 2 == 1) return 0.0;
    total += e[a];
  }
  double log_num = 0.0;
  for (int a = 0; a < n; ++a) log_num += std::lgamma(0.5 * (e[a] + 1.0));
  return 2.0 * std::exp(log_num - std::lgamma(0.5 * (total + n)));
}

/// int_{R^n} P(y) h(|y|) dy by splitting every monomial into an angular factor
/// and a radial moment.
inline double integrate_against_radial(const MultiPoly& poly, const TestProfile& h, int n,
                                       int gl_order = 160) {
  const Quadrature1D q = gauss_legendre(gl_order, 0.0, 1.0);
  std::map<int, double> radial;  // total degree -> int r^{deg+n-1} h dr
  double acc = 0.0;
  for (const auto& [e, c] : poly.terms) {
    const double ang = angular_monomial_integral(n, e);
    if (ang == 0.0) continue;
    const int deg = e[0] + e[1] + e[2];
    auto it = radial.find(deg);
    if (it == radial.end()) {
      double r = 0.0;
      for (int i = 0; i < q.size(); ++i)
        r += q.weights[i] * std::pow(q.nodes[i], deg + n - 1) * h.eval(q.nodes[i]);
      it = radial.emplace(deg, r).first;
    }
    acc += c * ang * it->second;
  }
  return acc;
}

inline double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b *= static_cast<double>(n - k + i) / i;
  return b;
}

}  // namespace detail

/// Identity behind the plane-wave average: for nu = m + n/2 - 1 and
/// 2 alpha = 2m + n - 2 (an integer in both dimensions),
///   int_0^pi cos(v cos psi) sin^{2 alpha}(psi) dpsi
///     / int_0^pi sin^{2 alpha}(psi) dpsi  =  j_nu(v).
/// Returns the worst deviation over the samples, relative to the common
/// normalization (both sides equal 1 at v = 0).
inline double sonine_max_deviation(int m, int n, std::span<const double> v_samples,
                                   int gl_order = 192) {
  if (m < 1) throw std::domain_error("sonine_max_deviation: degree must be >= 1");
  if (n != 2 && n != 3) throw config_error("sonine_max_deviation: dimension must be 2 or 3");
  if (gl_order < 64) throw config_error("sonine_max_deviation: quadrature order below 64");
  const int two_alpha = 2 * m + n - 2;
  const double nu = bessel_order(n, m);
  const Quadrature1D q = gauss_legendre(gl_order, 0.0, pi);
  std::vector<double> weight(q.size());
  double denom = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    weight[i] = q.weights[i] * std::pow(std::sin(q.nodes[i]), two_alpha);
    denom += weight[i];
  }
  double worst = 0.0;
  for (double v : v_samples) {
    double num = 0.0;
    for (int i = 0; i < q.size(); ++i) num += weight[i] * std::cos(v * std::cos(q.nodes[i]));
    worst = std::max(worst, std::abs(num / denom - bessel_j_norm(nu, std::abs(v))));
  }
  return worst;
}

/// Constant in Lap |y|^{2k} = c_k |y|^{2k-2}.
inline double laplacian_power_constant(int k, int n) {
  return 2.0 * k * (2.0 * k + n - 2.0);
}

struct LaplacianPowerResult {
  double constant = 0.0;       // the closed-form c_k
  double max_deviation = 0.0;  // worst |FD/c_k |y|^{2k-2} - 1| over the samples
};

/// Finite-difference confirmation of the radial power identity. Second-order
/// central differences; the deviation shrinks like h^2 (exactly zero in exact
/// arithmetic for k = 1, where the power is quadratic).
inline LaplacianPowerResult laplacian_power_check(int n, int k, std::span<const Point> samples,
                                                  double h) {
  if (k < 1) throw std::domain_error("laplacian_power_check: k must be >= 1");
  if (n != 2 && n != 3) throw config_error("laplacian_power_check: dimension must be 2 or 3");
  if (h <= 0.0) throw config_error("laplacian_power_check: step must be positive");
  LaplacianPowerResult r;
  r.constant = laplacian_power_constant(k, n);
  auto f = [k](const Point& y) { return std::pow(dot(y, y), k); };
  for (const Point& y : samples) {
    const double r2 = dot(y, y);
    if (r2 == 0.0) throw std::domain_error("laplacian_power_check: sample at the origin");
    double lap = 0.0;
    const double f0 = f(y);
    for (int a = 0; a < n; ++a) {
      Point yp = y, ym = y;
      yp[a] += h;
      ym[a] -= h;
      lap += (f(yp) - 2.0 * f0 + f(ym)) / (h * h);
    }
    const double exact = r.constant * std::pow(r2, k - 1);
    r.max_deviation = std::max(r.max_deviation, std::abs(lap / exact - 1.0));
  }
  return r;
}

struct TriangularOptions {
  double c_scale = 1.0;  // test hook: scales every c_i in the matrix only
  int gl_order = 160;
};

/// The moment map behind the polynomial conditions. With u = |y|^2,
///   int Lap^j [(1-u)^{m-1}] h(|y|) dy = sum_k A[j][k] mu_k,
///   A[j][k] = binom(m-1, k+j) (-1)^{k+j} c_{k+j} c_{k+j-1} ... c_{k+1},
/// where mu_k is the 2k-th radial moment and c_i = 2i(2i+n-2). The matrix is
/// anti-triangular (rows j, columns k vanish for k+j > m-1) with nonzero
/// anti-diagonal, hence invertible. The left side is evaluated independently:
/// the polynomial (1-|y|^2)^{m-1} is expanded in cartesian monomials and
/// differentiated term by term, never invoking the c_i formula, so a scaled
/// matrix (c_scale != 1) is detected as a mismatch.
struct TriangularResult {
  std::vector<std::vector<double>> matrix;
  std::vector<double> mu;         // radial moments mu_0 .. mu_{m-1}
  std::vector<double> lhs;        // independent values of the j-th row integral
  double structure_deviation = 0.0;  // entries that should vanish, relative
  double min_antidiagonal = 0.0;
  double map_deviation = 0.0;        // worst |A mu - lhs| over the row scale
  double recovery_deviation = 0.0;   // moments recovered by back-substitution
};

inline TriangularResult triangular_system_check(int m, int n, const TestProfile& profile,
                                                const TriangularOptions& opt = {}) {
  if (m < 1) throw std::domain_error("triangular_system_check: m must be >= 1");
  if (n != 2 && n != 3) throw config_error("triangular_system_check: dimension must be 2 or 3");
  TriangularResult r;
  r.matrix.assign(m, std::vector<double>(m, 0.0));
  for (int j = 0; j < m; ++j)
    for (int k = 0; k + j <= m - 1; ++k) {
      double prod = 1.0;
      for (int i = k + 1; i <= k + j; ++i) prod *= opt.c_scale * laplacian_power_constant(i, n);
      const double sign = ((k + j) % 2 == 0) ? 1.0 : -1.0;
      r.matrix[j][k] = detail::binomial(m - 1, k + j) * sign * prod;
    }

  r.mu.resize(m);
  for (int k = 0; k < m; ++k) r.mu[k] = radial_moment(profile, k, n, opt.gl_order);

  r.lhs.resize(m);
  detail::MultiPoly poly = detail::one_minus_r2_pow(n, m - 1);
  for (int j = 0; j < m; ++j) {
    r.lhs[j] = detail::integrate_against_radial(poly, profile, n, opt.gl_order);
    poly = poly.laplacian(n);
  }

  r.min_antidiagonal = std::abs(r.matrix[0][m - 1]);
  double max_entry = 0.0;
  for (int j = 0; j < m; ++j) {
    r.min_antidiagonal = std::min(r.min_antidiagonal, std::abs(r.matrix[j][m - 1 - j]));
    for (int k = 0; k < m; ++k) {
      max_entry = std::max(max_entry, std::abs(r.matrix[j][k]));
      if (k + j > m - 1)
        r.structure_deviation = std::max(r.structure_deviation, std::abs(r.matrix[j][k]));
    }
  }
  if (max_entry > 0.0) r.structure_deviation /= max_entry;

  double row_scale = 0.0;
  for (int j = 0; j < m; ++j) {
    double rhs = 0.0, scale = 0.0;
    for (int k = 0; k < m; ++k) {
      rhs += r.matrix[j][k] * r.mu[k];
      scale += std::abs(r.matrix[j][k] * r.mu[k]);
    }
    row_scale = std::max(row_scale, scale);
    r.map_deviation = std::max(r.map_deviation, std::abs(rhs - r.lhs[j]));
  }
  if (row_scale > 0.0) r.map_deviation /= row_scale;

  // Invertibility in action: recover the moments from the row values by
  // back-substitution along the anti-diagonal (row j determines mu_{m-1-j}).
  std::vector<double> rec(m, 0.0);
  double rec_dev = 0.0, mu_scale = 0.0;
  for (int k = 0; k < m; ++k) mu_scale = std::max(mu_scale, std::abs(r.mu[k]));
  for (int j = m - 1; j >= 0; --j) {
    const int k = m - 1 - j;
    double acc = r.lhs[j];
    for (int kk = 0; kk < k; ++kk) acc -= r.matrix[j][kk] * rec[kk];
    rec[k] = acc / r.matrix[j][k];
    rec_dev = std::max(rec_dev, std::abs(rec[k] - r.mu[k]));
  }
  r.recovery_deviation = mu_scale > 0.0 ? rec_dev / mu_scale : rec_dev;
  return r;
}

/// Profile whose first m radial moments vanish: h(r) = (sum beta_i r^{2i}) w(r)
/// with beta_m = 1 and beta_0..beta_{m-1} solved from the moment equations.
/// Feeding it the triangular map sends the whole moment vector to zero.
inline TestProfile null_moment_profile(int m, int n, int gl_order = 160) {
  if (m < 1) throw std::domain_error("null_moment_profile: m must be >= 1");
  const Quadrature1D q = gauss_legendre(gl_order, 0.0, 1.0);
  // G[k][i] = int r^{2(k+i)+n-1} w(r) dr for the plain bump w.
  const TestProfile w;
  auto g_entry = [&](int k, int i) {
    double acc = 0.0;
    for (int s = 0; s < q.size(); ++s)
      acc += q.weights[s] * std::pow(q.nodes[s], 2 * (k + i) + n - 1) * w.eval(q.nodes[s]);
    return acc;
  };
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1));
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) a[k][i] = g_entry(k, i);
    a[k][m] = -g_entry(k, m);  // right-hand side, beta_m = 1
  }
  // Gaussian elimination with partial pivoting on the m x m system.
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int row = col + 1; row < m; ++row)
      if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
    std::swap(a[col], a[piv]);
    if (a[col][col] == 0.0) throw std::runtime_error("null_moment_profile: singular system");
    for (int row = col + 1; row < m; ++row) {
      const double f = a[row][col] / a[col][col];
      for (int c2 = col; c2 <= m; ++c2) a[row][c2] -= f * a[col][c2];
    }
  }
  TestProfile out;
  out.poly_even.assign(m + 1, 0.0);
  out.poly_even[m] = 1.0;
  for (int row = m - 1; row >= 0; --row) {
    double acc = a[row][m];
    for (int c2 = row + 1; c2 < m; ++c2) acc -= a[row][c2] * out.poly_even[c2];
    out.poly_even[row] = acc / a[row][row];
  }
  return out;
}

struct DerivativeVanishingResult {
  double h = 0.0;
  std::vector<double> derivatives;      // FD estimates of d^{2q} ghat / d lambda^{2q} at 0
  std::vector<double> moment_estimates; // derivatives mapped back to radial moments
};

/// Even-order derivatives of ghat at lambda = 0 by central differences on the
/// even extension, mapped to moment estimates through
///   ghat^{(2q)}(0) = (2q)! C_q(p) M_q.
/// An independent, lower-accuracy route to the same moments as
/// taylor_coefficients; agreement validates both.
inline DerivativeVanishingResult derivative_vanishing_check(const HarmonicCoefficient& c,
                                                            int q_max, double h) {
  if (q_max < 1) throw std::domain_error("derivative_vanishing_check: q_max must be >= 1");
  if (h <= 0.0) throw config_error("derivative_vanishing_check: step must be positive");
  const double p = 0.5 * c.idx.n - 1.0;
  DerivativeVanishingResult r;
  r.h = h;
  std::vector<double> cache(q_max + 1);
  for (int i = 0; i <= q_max; ++i) cache[i] = fourier_bessel(c, i * h);
  double factorial = 1.0;  // (2q)!
  for (int q = 1; q <= q_max; ++q) {
    factorial *= (2.0 * q) * (2.0 * q - 1.0);
    double acc = 0.0;
    for (int i = -q; i <= q; ++i) {
      const double coef = detail::binomial(2 * q, q + i) * (((q + i) % 2 == 0) ? 1.0 : -1.0);
      acc += coef * cache[std::abs(i)];
    }
    const double d = acc / std::pow(h, 2 * q);
    r.derivatives.push_back(d);
    r.moment_estimates.push_back(d / (factorial * bessel_j_norm_coefficient(p, q)));
  }
  return r;
}

}  // namespace sphmean
