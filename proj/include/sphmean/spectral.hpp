#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sphmean/common.hpp"
#include "sphmean/quadrature.hpp"
#include "sphmean/specfun.hpp"
#include "sphmean/transform.hpp"

namespace sphmean {

/// Radial profile g_{m,l}(t) of one harmonic channel, sampled on the data's
/// t grid.
struct HarmonicCoefficient {
  HarmonicIndex idx;
  int t_count = 0;
  double t_max = 2.0;
  std::vector<double> samples;

  double t(int j) const { return t_max * j / (t_count - 1); }
};

/// Project the grid onto every harmonic with degree <= m_max:
///   g_{m,l}(t_j) = sum_i w_i g(x_i, t_j) Y_{m,l}(x_i).
/// Requires centre resolution >= 4 m_max so that products of harmonics up to
/// degree m_max are integrated exactly and the projection does not alias.
inline std::vector<HarmonicCoefficient> decompose(const DataGrid& grid, int m_max) {
  if (m_max < 0) throw config_error("decompose: m_max must be >= 0");
  if (grid.centers.resolution < 4 * m_max)
    throw config_error("decompose: centre resolution " +
                       std::to_string(grid.centers.resolution) + " is below 4*m_max = " +
                       std::to_string(4 * m_max));
  std::vector<HarmonicCoefficient> out;
  for (int m = 0; m <= m_max; ++m)
    for (int l = 1; l <= harmonic_dim(grid.n, m); ++l) {
      HarmonicCoefficient c;
      c.idx = {grid.n, m, l};
      c.t_count = grid.t_count;
      c.t_max = grid.t_max;
      c.samples.assign(grid.t_count, 0.0);
      out.push_back(std::move(c));
    }
  parallel_for(out.size(), [&](std::size_t c0, std::size_t c1) {
    for (std::size_t c = c0; c < c1; ++c) {
      HarmonicCoefficient& coef = out[c];
      for (int i = 0; i < grid.centers.size(); ++i) {
        const double wy =
            grid.centers.weights[i] * eval_harmonic(coef.idx, grid.centers.nodes[i]);
        if (wy == 0.0) continue;
        for (int j = 0; j < grid.t_count; ++j) coef.samples[j] += wy * grid.value(i, j);
      }
    }
  });
  return out;
}

/// L^2 norm of the channel profile for the measure t^{n-1} dt.
inline double channel_norm(const HarmonicCoefficient& c) {
  const std::vector<double> w = trapezoid_weights(c.t_count, 0.0, c.t_max);
  double acc = 0.0;
  for (int j = 0; j < c.t_count; ++j)
    acc += w[j] * c.samples[j] * c.samples[j] * std::pow(c.t(j), c.idx.n - 1);
  return std::sqrt(acc);
}

/// Largest spectral parameter the t grid can resolve: the trapezoid rule needs
/// at least 10 samples per period of the oscillating kernel, i.e.
/// t_count >= 10 lambda t_max / (2 pi).
inline double max_resolved_lambda(int t_count, double t_max) {
  return 2.0 * pi * t_count / (10.0 * t_max);
}

/// Hankel-type spectral coefficient
///   ghat(lambda) = int_0^{t_max} g_{m,l}(t) j_{n/2-1}(lambda t) t^{n-1} dt,
/// an even entire function of lambda. Evaluation beyond the resolvable band is
/// a configuration error rather than a silent inaccuracy.
inline double fourier_bessel(const HarmonicCoefficient& c, double lambda) {
  lambda = std::abs(lambda);
  if (lambda > max_resolved_lambda(c.t_count, c.t_max))
    throw config_error("fourier_bessel: lambda " + std::to_string(lambda) +
                       " exceeds the resolved band " +
                       std::to_string(max_resolved_lambda(c.t_count, c.t_max)) +
                       "; raise t_resolution");
  const double p = 0.5 * c.idx.n - 1.0;
  const std::vector<double> w = trapezoid_weights(c.t_count, 0.0, c.t_max);
  double acc = 0.0;
  for (int j = 0; j < c.t_count; ++j) {
    const double t = c.t(j);
    acc += w[j] * c.samples[j] * bessel_j_norm(p, lambda * t) * std::pow(t, c.idx.n - 1);
  }
  return acc;
}

/// Callable wrapper so range checks can treat a channel as lambda -> ghat(lambda).
struct SpectralFunction {
  HarmonicCoefficient coef;
  double operator()(double lambda) const { return fourier_bessel(coef, lambda); }
};

/// Taylor coefficients of ghat at lambda = 0 up to degree 2K, derived from the
/// kernel series: ghat(lambda) = sum_k C_k(p) M_k lambda^{2k} with radial
/// moments M_k = int t^{2k+n-1} g_{m,l}(t) dt. Returns the K+1 even-degree
/// coefficients C_k M_k.
inline std::vector<double> taylor_coefficients(const HarmonicCoefficient& c, int K) {
  if (K < 0) throw config_error("taylor_coefficients: K must be >= 0");
  const double p = 0.5 * c.idx.n - 1.0;
  const std::vector<double> w = trapezoid_weights(c.t_count, 0.0, c.t_max);
  std::vector<double> out(K + 1);
  double ck = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) ck *= -1.0 / (4.0 * k * (p + k));
    double moment = 0.0;
    for (int j = 0; j < c.t_count; ++j)
      moment += w[j] * c.samples[j] * std::pow(c.t(j), 2 * k + c.idx.n - 1);
    out[k] = ck * moment;
  }
  return out;
}

struct RatioSample {
  double lambda = 0.0;
  double value = 0.0;
};

struct RatioResult {
  std::vector<RatioSample> samples;
  std::vector<double> rejected;  // lambdas too close to a kernel zero
  double max_abs = 0.0;
};

/// Pointwise quotient H(lambda) = ghat(lambda) / j_{m+n/2-1}(lambda). For range
/// data the quotient extends holomorphically across the kernel zeros, so away
/// from them the samples stay bounded; requested lambdas within `margin` of a
/// zero of J_{m+n/2-1} are reported as rejected instead of evaluated.
inline RatioResult ratio_H(const HarmonicCoefficient& c, std::span<const double> lambdas,
                           const ZeroTable& zeros, double margin = 0.1) {
  const double nu = bessel_order(c.idx.n, c.idx.m);
  if (std::abs(zeros.nu - nu) > 1e-12)
    throw config_error("ratio_H: zero table order does not match the channel");
  RatioResult result;
  for (double lambda : lambdas) {
    const double l = std::abs(lambda);
    if (zeros.count() == 0 || zeros.back() < l + margin)
      throw config_error("ratio_H: zero table does not cover requested lambdas");
    bool near = false;
    for (double z : zeros.zeros) {
      if (std::abs(l - z) < margin) {
        near = true;
        break;
      }
      if (z > l + margin) break;
    }
    if (near) {
      result.rejected.push_back(lambda);
      continue;
    }
    const double value = fourier_bessel(c, l) / bessel_j_norm(nu, l);
    result.samples.push_back({lambda, value});
    result.max_abs = std::max(result.max_abs, std::abs(value));
  }
  return result;
}

}  // namespace sphmean
