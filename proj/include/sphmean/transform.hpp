#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sphmean/common.hpp"
#include "sphmean/harmonics.hpp"

namespace sphmean {

/// Radial bump exp(-1/(1-u^2)) on |u| < 1, extended by zero. All derivatives
/// vanish at |u| = 1, so phantoms built from it are smooth and compactly
/// supported.
inline double bump_profile(double u) {
  const double s = 1.0 - u * u;
  if (s <= 0.0) return 0.0;
  return std::exp(-1.0 / s);
}

/// Translated radial bump: amplitude * exp(-1/(1 - |x-c|^2/r^2)).
struct BumpTerm {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.5;
  double amplitude = 1.0;
};

/// Annular profile times a single harmonic:
///   amplitude * exp(-1/(1 - u^2)) * Y_{m,l}(x/|x|),  u = (|x| - radial_center)/width.
/// Produces data concentrated in one harmonic channel.
struct ShellTerm {
  double radial_center = 0.5;
  double width = 0.2;
  double amplitude = 1.0;
  int m = 0;
  int l = 1;
};

struct Phantom {
  int n = 2;
  std::vector<BumpTerm> bumps;
  std::vector<ShellTerm> shells;
};

/// Distance from the support of the phantom to the unit sphere. Positive for
/// any valid phantom.
inline double support_gap(const Phantom& f) {
  double reach = 0.0;
  for (const auto& b : f.bumps) reach = std::max(reach, norm(b.center) + b.radius);
  for (const auto& s : f.shells) reach = std::max(reach, s.radial_center + s.width);
  return 1.0 - reach;
}

/// Every term must live strictly inside the open unit ball; the transform and
/// the range theory both assume supp f is compact in B.
inline void validate_support(const Phantom& f) {
  if (f.n != 2 && f.n != 3) throw config_error("phantom: dimension must be 2 or 3");
  for (const auto& b : f.bumps) {
    if (b.radius <= 0.0) throw config_error("phantom: bump radius must be positive");
    if (f.n == 2 && b.center[2] != 0.0)
      throw config_error("phantom: z component of a centre must be 0 in dimension 2");
    if (norm(b.center) + b.radius > 1.0 - 1e-12)
      throw config_error("phantom: bump at distance " + std::to_string(norm(b.center)) +
                         " with radius " + std::to_string(b.radius) +
                         " is not supported inside the unit ball");
  }
  for (const auto& s : f.shells) {
    if (s.width <= 0.0) throw config_error("phantom: shell width must be positive");
    if (s.radial_center <= s.width)
      throw config_error("phantom: shell must stay away from the origin (centre > width)");
    if (s.radial_center + s.width > 1.0 - 1e-12)
      throw config_error("phantom: shell is not supported inside the unit ball");
    validate_index(HarmonicIndex{f.n, s.m, s.l});
  }
}

inline double eval_phantom(const Phantom& f, const Point& x) {
  double v = 0.0;
  for (const auto& b : f.bumps) {
    const double dx = x[0] - b.center[0];
    const double dy = x[1] - b.center[1];
    const double dz = x[2] - b.center[2];
    const double d2 = dx * dx + dy * dy + dz * dz;
    const double s = 1.0 - d2 / (b.radius * b.radius);
    if (s > 0.0) v += b.amplitude * std::exp(-1.0 / s);
  }
  for (const auto& s : f.shells) {
    const double r = norm(x);
    const double u = (r - s.radial_center) / s.width;
    if (std::abs(u) < 1.0 && r > 0.0) {
      const Point dir{x[0] / r, x[1] / r, x[2] / r};
      v += s.amplitude * bump_profile(u) * eval_harmonic({f.n, s.m, s.l}, dir);
    }
  }
  return v;
}

/// Mean of f over the sphere of radius t centred at x, with respect to the
/// normalized surface measure (the direction quadrature weights sum to 1).
inline double spherical_mean(const Phantom& f, const Point& x, double t,
                             const SphereQuadrature& directions) {
  double acc = 0.0;
  for (int d = 0; d < directions.size(); ++d)
    acc += directions.weights[d] * eval_phantom(f, axpy(t, directions.nodes[d], x));
  return acc;
}

/// Samples of g(x,t) on centre nodes x in S^{n-1} and an equispaced t grid
/// covering [0, t_max]. Row-major: value(i,j) = g(node i, t_j).
struct DataGrid {
  int n = 2;
  SphereQuadrature centers;
  int t_count = 0;
  double t_max = 2.0;
  std::vector<double> values;

  double t(int j) const { return t_max * j / (t_count - 1); }
  double& value(int i, int j) { return values[static_cast<std::size_t>(i) * t_count + j]; }
  double value(int i, int j) const { return values[static_cast<std::size_t>(i) * t_count + j]; }
};

inline double max_abs(const DataGrid& g) {
  double m = 0.0;
  for (double v : g.values) m = std::max(m, std::abs(v));
  return m;
}

/// Forward transform: spherical means for every centre and radius. For a
/// phantom with support gap d > 0 the data vanishes for t < d and for
/// t > 2 - d, so g is smooth and compactly supported in (0, 2).
inline DataGrid forward(const Phantom& f, const SphereQuadrature& centers, int t_count,
                        const SphereQuadrature& directions, double t_max = 2.0) {
  validate_support(f);
  if (centers.n != f.n || directions.n != f.n)
    throw config_error("forward: dimension mismatch between phantom and quadratures");
  if (t_count < 2) throw config_error("forward: t_count must be >= 2");
  DataGrid g;
  g.n = f.n;
  g.centers = centers;
  g.t_count = t_count;
  g.t_max = t_max;
  g.values.assign(static_cast<std::size_t>(centers.size()) * t_count, 0.0);
  parallel_for(centers.size(), [&](std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i < i1; ++i)
      for (int j = 0; j < t_count; ++j)
        g.value(static_cast<int>(i), j) =
            spherical_mean(f, centers.nodes[i], g.t(j), directions);
  });
  return g;
}

/// Grid with separable values psi(t) Y_{m,l}(x); used for synthetic channels
/// and perturbations that sit outside the range.
inline DataGrid synthesize_separable(const SphereQuadrature& centers, int t_count,
                                     const std::function<double(double)>& psi,
                                     const HarmonicIndex& idx, double t_max = 2.0) {
  validate_index(idx);
  if (centers.n != idx.n) throw config_error("synthesize_separable: dimension mismatch");
  if (t_count < 2) throw config_error("synthesize_separable: t_count must be >= 2");
  DataGrid g;
  g.n = idx.n;
  g.centers = centers;
  g.t_count = t_count;
  g.t_max = t_max;
  g.values.resize(static_cast<std::size_t>(centers.size()) * t_count);
  std::vector<double> profile(t_count);
  for (int j = 0; j < t_count; ++j) profile[j] = psi(g.t(j));
  for (int i = 0; i < centers.size(); ++i) {
    const double y = eval_harmonic(idx, centers.nodes[i]);
    for (int j = 0; j < t_count; ++j) g.value(i, j) = profile[j] * y;
  }
  return g;
}

inline void accumulate(DataGrid& g, const DataGrid& h, double factor = 1.0) {
  if (g.values.size() != h.values.size() || g.t_count != h.t_count)
    throw config_error("accumulate: grid shape mismatch");
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] += factor * h.values[i];
}

/// Largest deviation of the computed means from the Darboux equation
///   d_tt u + (n-1)/t d_t u = Lap_x u
/// over the given probe points and radii, using second-order central
/// differences with step h in both t and x. Probes need not lie on the sphere;
/// radii must stay h away from t = 0.
inline double darboux_residual(const Phantom& f, std::span<const Point> probes,
                               std::span<const double> radii, double h,
                               const SphereQuadrature& directions) {
  validate_support(f);
  if (h <= 0.0) throw config_error("darboux_residual: step must be positive");
  for (double t : radii)
    if (t - h <= 0.0) throw config_error("darboux_residual: radius too close to t=0 for step");
  double worst = 0.0;
  for (const Point& x : probes) {
    for (double t : radii) {
      const double u0 = spherical_mean(f, x, t, directions);
      const double up = spherical_mean(f, x, t + h, directions);
      const double um = spherical_mean(f, x, t - h, directions);
      const double utt = (up - 2.0 * u0 + um) / (h * h);
      const double ut = (up - um) / (2.0 * h);
      double lap = 0.0;
      for (int axis = 0; axis < f.n; ++axis) {
        Point xp = x, xm = x;
        xp[axis] += h;
        xm[axis] -= h;
        lap += (spherical_mean(f, xp, t, directions) - 2.0 * u0 +
                spherical_mean(f, xm, t, directions)) /
               (h * h);
      }
      worst = std::max(worst, std::abs(utt + (f.n - 1) / t * ut - lap));
    }
  }
  return worst;
}

}  // namespace sphmean
