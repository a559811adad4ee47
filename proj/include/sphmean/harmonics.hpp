#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sphmean/common.hpp"
#include "sphmean/quadrature.hpp"

namespace sphmean {

/// Number of linearly independent spherical harmonics of degree m on S^{n-1}.
inline int harmonic_dim(int n, int m) {
  if (n != 2 && n != 3) throw config_error("harmonic_dim: dimension must be 2 or 3");
  if (m < 0) throw std::domain_error("harmonic_dim: negative degree");
  if (n == 2) return m == 0 ? 1 : 2;
  return 2 * m + 1;
}

/// Harmonic label: degree m >= 0 and 1-based index l within the degree.
struct HarmonicIndex {
  int n = 2;
  int m = 0;
  int l = 1;
};

inline void validate_index(const HarmonicIndex& idx) {
  const int d = harmonic_dim(idx.n, idx.m);  // validates n and m
  if (idx.l < 1 || idx.l > d)
    throw std::out_of_range("harmonic index l=" + std::to_string(idx.l) + " outside 1.." +
                            std::to_string(d) + " for degree " + std::to_string(idx.m));
}

namespace detail {

/// Fully normalized associated Legendre function Pbar_m^k(t), scaled so that
/// int_{-1}^{1} Pbar_m^k(t)^2 dt = 2 for every (m,k), without the
/// Condon-Shortley sign. `u` is sin(theta) >= 0, passed separately because the
/// caller knows it more accurately than sqrt(1-t^2) near the poles.
inline double legendre_normalized(int m, int k, double t, double u) {
  double pkk = 1.0;  // Pbar_k^k
  for (int i = 1; i <= k; ++i) pkk *= u * std::sqrt((2.0 * i + 1.0) / (2.0 * i));
  if (m == k) return pkk;
  double prev = pkk;
  double cur = std::sqrt(2.0 * k + 3.0) * t * pkk;  // Pbar_{k+1}^k
  for (int i = k + 2; i <= m; ++i) {
    const double a = std::sqrt((2.0 * i - 1.0) * (2.0 * i + 1.0) /
                               (static_cast<double>(i - k) * (i + k)));
    const double b = std::sqrt((2.0 * i + 1.0) * (i - k - 1.0) * (i + k - 1.0) /
                               ((2.0 * i - 3.0) * (i - k) * (i + k)));
    const double next = a * t * cur - b * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace detail

/// Real spherical harmonic Y_{m,l} evaluated at a unit vector. The family is
/// orthonormal for the normalized (total mass 1) surface measure:
///   n=2: {1, sqrt2 cos(m phi), sqrt2 sin(m phi)},
///   n=3: fully normalized Legendre basis with sqrt2 on the k>0 sectors.
inline double eval_harmonic(const HarmonicIndex& idx, const Point& v) {
  validate_index(idx);
  if (idx.n == 2) {
    if (idx.m == 0) return 1.0;
    const double phi = std::atan2(v[1], v[0]);
    const double s = std::sqrt(2.0);
    return idx.l == 1 ? s * std::cos(idx.m * phi) : s * std::sin(idx.m * phi);
  }
  const double t = v[2];
  const double u = std::hypot(v[0], v[1]);
  if (idx.m == 0) return 1.0;
  // l = 1 is the zonal function; afterwards (cos, sin) pairs of increasing k.
  const int k = idx.l / 2;
  const double p = detail::legendre_normalized(idx.m, k, t, u);
  if (k == 0) return p;
  const double phi = std::atan2(v[1], v[0]);
  const double angular = (idx.l % 2 == 0) ? std::cos(k * phi) : std::sin(k * phi);
  return std::sqrt(2.0) * p * angular;
}

/// Quadrature on S^{n-1} whose weights sum to 1 (normalized surface measure).
/// n=2: `resolution` equispaced angles, exact for trigonometric polynomials of
/// degree < resolution. n=3: Gauss-Legendre in the polar direction crossed
/// with equispaced azimuths, exact for harmonics up to degree resolution/2.
/// Products of harmonics of degree <= m integrate exactly when
/// resolution >= 4m + 1 in either dimension; decomposition routines require
/// resolution >= 4 m_max.
struct SphereQuadrature {
  int n = 2;
  int resolution = 0;
  std::vector<Point> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

inline SphereQuadrature sphere_quadrature(int n, int resolution) {
  if (n != 2 && n != 3) throw config_error("sphere_quadrature: dimension must be 2 or 3");
  if (resolution < 1) throw config_error("sphere_quadrature: resolution must be >= 1");
  SphereQuadrature q;
  q.n = n;
  q.resolution = resolution;
  if (n == 2) {
    q.nodes.reserve(resolution);
    q.weights.assign(resolution, 1.0 / resolution);
    for (int i = 0; i < resolution; ++i) {
      const double a = 2.0 * pi * i / resolution;
      q.nodes.push_back({std::cos(a), std::sin(a), 0.0});
    }
    return q;
  }
  const int polar = (resolution + 1) / 2;
  const Quadrature1D gl = gauss_legendre(polar);  // nodes are cos(theta)
  q.nodes.reserve(static_cast<std::size_t>(polar) * resolution);
  q.weights.reserve(q.nodes.capacity());
  for (int i = 0; i < polar; ++i) {
    const double ct = gl.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double w = gl.weights[i] * 0.5 / resolution;
    for (int j = 0; j < resolution; ++j) {
      const double a = 2.0 * pi * j / resolution;
      q.nodes.push_back({st * std::cos(a), st * std::sin(a), ct});
      q.weights.push_back(w);
    }
  }
  return q;
}

}  // namespace sphmean
