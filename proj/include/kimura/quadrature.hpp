#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "kimura/errors.hpp"

namespace kimura::quad {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Newton iteration on P_n started from the Chebyshev-like guess
/// cos(pi (i - 1/4) / (n + 1/2)); converges to roundoff in a handful of steps.
inline GaussRule gauss_legendre(std::size_t n) {
  GaussRule rule{std::vector<double>(n), std::vector<double>(n)};
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * static_cast<double>(k) - 1.0) * z * p2 - (static_cast<double>(k) - 1.0) * p3) /
             static_cast<double>(k);
      }
      dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

inline const GaussRule& gauss_legendre_10() {
  static const GaussRule rule = gauss_legendre(10);
  return rule;
}

template <class Func>
double apply_rule(const GaussRule& rule, const Func& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

struct AdaptiveResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

/// Adaptive 10-point Gauss-Legendre: an interval is accepted when the
/// single-panel estimate agrees with the two half-panel estimates to within
/// its share of abs_tol. Throws NumericalError naming the offending
/// subinterval when max_depth is reached.
template <class Func>
AdaptiveResult integrate(const Func& f, double a, double b, double abs_tol = 1e-12, int max_depth = 40) {
  const GaussRule& rule = gauss_legendre_10();
  AdaptiveResult result;
  if (a == b) return result;

  struct Panel {
    double lo, hi, whole;
    int depth;
  };
  std::vector<Panel> stack;
  stack.push_back({a, b, apply_rule(rule, f, a, b), 0});
  result.evaluations += rule.nodes.size();
  const double length = std::abs(b - a);
  const double scale = std::abs(stack.back().whole);

  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.lo + p.hi);
    const double left = apply_rule(rule, f, p.lo, mid);
    const double right = apply_rule(rule, f, mid, p.hi);
    result.evaluations += 2 * rule.nodes.size();
    const double err = std::abs(left + right - p.whole);
    const double share = abs_tol * std::abs(p.hi - p.lo) / length;
    if (err <= share || err <= 1e-15 * std::max(std::abs(left + right), scale)) {
      result.value += left + right;
      result.error_estimate += err;
      continue;
    }
    if (p.depth >= max_depth) {
      std::ostringstream msg;
      msg << "adaptive quadrature did not converge on [" << p.lo << ", " << p.hi << "] (error estimate " << err
          << ")";
      throw NumericalError(msg.str());
    }
    stack.push_back({p.lo, mid, left, p.depth + 1});
    stack.push_back({mid, p.hi, right, p.depth + 1});
  }
  return result;
}

/// Composite trapezoid rule for samples on a uniform grid with spacing h.
inline double trapezoid(std::span<const double> y, double h) {
  if (y.size() < 2) return 0.0;
  double sum = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) sum += y[i];
  return sum * h;
}

/// Trapezoid rule with Gregory end corrections (fourth order for smooth
/// integrands). Falls back to the plain trapezoid below 8 samples.
inline double gregory(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 8) return trapezoid(y, h);
  constexpr double w[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  double sum = 0.0;
  for (std::size_t i = 3; i + 3 < n; ++i) sum += y[i];
  for (std::size_t k = 0; k < 3; ++k) sum += w[k] * (y[k] + y[n - 1 - k]);
  return sum * h;
}

/// Composite trapezoid rule for samples on an arbitrary increasing grid.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return sum;
}

}  // namespace kimura::quad
