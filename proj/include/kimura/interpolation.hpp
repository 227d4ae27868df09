#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kimura/errors.hpp"

namespace kimura {

namespace detail {

inline std::size_t bracket(std::span<const double> x, double t) {
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t i = static_cast<std::size_t>(std::distance(x.begin(), it));
  if (i == 0) return 0;
  return std::min(i - 1, x.size() - 2);
}

}  // namespace detail

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson slopes).
/// Monotone data give a monotone interpolant; linear data are reproduced exactly.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2) throw InputError("MonotoneCubic: need >= 2 matching samples");
    const std::size_t n = x_.size();
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = x_[i + 1] - x_[i];
      if (!(h > 0.0)) throw InputError("MonotoneCubic: abscissae must be strictly increasing");
      delta[i] = (y_[i + 1] - y_[i]) / h;
    }
    slope_.assign(n, 0.0);
    slope_[0] = delta[0];
    slope_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) continue;
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      const double w1 = 2.0 * h1 + h0;
      const double w2 = h1 + 2.0 * h0;
      slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }

  double operator()(double t) const {
    const std::size_t i = detail::bracket(x_, t);
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
  }

 private:
  std::vector<double> x_, y_, slope_;
};

/// Four-point Lagrange interpolation from samples on a (possibly nonuniform)
/// increasing grid; falls back to the nearest end stencil at the edges.
inline double lagrange4(std::span<const double> x, std::span<const double> y, double t) {
  const std::size_t n = x.size();
  if (n < 4) throw InputError("lagrange4: need at least 4 samples");
  const std::size_t i = detail::bracket(x, t);
  std::size_t start = i >= 1 ? i - 1 : 0;
  start = std::min(start, n - 4);
  double sum = 0.0;
  for (std::size_t k = start; k < start + 4; ++k) {
    double basis = 1.0;
    for (std::size_t m = start; m < start + 4; ++m)
      if (m != k) basis *= (t - x[m]) / (x[k] - x[m]);
    sum += basis * y[k];
  }
  return sum;
}

/// Value at `at` of the polynomial through the points (x[k], y[k]).
inline double polynomial_extrapolate(std::span<const double> x, std::span<const double> y, double at) {
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double basis = 1.0;
    for (std::size_t m = 0; m < x.size(); ++m)
      if (m != k) basis *= (at - x[m]) / (x[k] - x[m]);
    sum += basis * y[k];
  }
  return sum;
}

}  // namespace kimura
