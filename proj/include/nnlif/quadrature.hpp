#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "nnlif/params.hpp"

namespace nnlif {

// Trapezoid rule on uniformly spaced samples.
inline double trapz(std::span<const double> y, double h) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * h;
}

// Trapezoid rule on (possibly non-uniform) sample pairs.
inline double trapz(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < x.size(); ++i)
    s += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  return s;
}

// Adaptive trapezoid with Richardson check: doubles the resolution until
// two consecutive estimates agree to rel_tol, then extrapolates.
inline double adaptive_trapz(const std::function<double(double)>& f, double lo,
                             double hi, double rel_tol = 1e-12,
                             int n0 = 64, int max_doublings = 16) {
  if (hi <= lo) return 0.0;
  int n = n0;
  double h = (hi - lo) / n;
  double prev = 0.0;
  {
    double s = 0.5 * (f(lo) + f(hi));
    for (int i = 1; i < n; ++i) s += f(lo + i * h);
    prev = s * h;
  }
  for (int d = 0; d < max_doublings; ++d) {
    double mid_sum = 0.0;
    for (int i = 0; i < n; ++i) mid_sum += f(lo + (i + 0.5) * h);
    double cur = 0.5 * prev + 0.5 * h * mid_sum;
    n *= 2;
    h *= 0.5;
    if (!std::isfinite(cur)) throw NumericError("adaptive_trapz: non-finite integrand");
    if (std::abs(cur - prev) <= rel_tol * (std::abs(cur) + 1e-300))
      return (4.0 * cur - prev) / 3.0;
    prev = cur;
  }
  return prev;
}

// Piecewise-linear interpolation of samples (xs strictly increasing).
inline double lerp_series(std::span<const double> xs, std::span<const double> ys,
                          double x) {
  if (xs.empty()) throw NumericError("lerp_series: empty series");
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  size_t lo = 0, hi = xs.size() - 1;
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    (xs[mid] <= x ? lo : hi) = mid;
  }
  double t = (x - xs[lo]) / (xs[lo + 1] - xs[lo]);
  return ys[lo] + t * (ys[lo + 1] - ys[lo]);
}

} // namespace nnlif
