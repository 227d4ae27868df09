#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kimura/errors.hpp"
#include "kimura/interpolation.hpp"
#include "kimura/model.hpp"
#include "kimura/quadrature.hpp"

namespace kimura {

/// Fixation probability psi sampled on a grid of [0, 1]:
///   psi(x) = c^{-1} int_0^x exp(-int_0^s Xi) ds,   c = int_0^1 exp(-int_0^s Xi) ds.
/// psi(0) = 0 and psi(1) = 1 exactly. Off-grid queries use a monotone cubic.
class FixationProfile {
 public:
  FixationProfile(std::vector<double> grid, std::vector<double> values, double c,
                  std::vector<double> xi_integral = {})
      : grid_(std::move(grid)),
        values_(std::move(values)),
        c_(c),
        xi_integral_(std::move(xi_integral)),
        interp_(grid_, values_) {}

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double c() const { return c_; }

  /// int_0^x Xi at the grid points (empty for hand-built profiles).
  const std::vector<double>& xi_integral() const { return xi_integral_; }

  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return interp_(x);
  }

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
  double c_;
  std::vector<double> xi_integral_;
  MonotoneCubic interp_;
};

/// Nested quadrature on a caller-supplied grid. The grid must be strictly
/// increasing with grid.front() == 0 and grid.back() == 1.
inline FixationProfile fixation_profile_on(const CoefficientModel& model, std::vector<double> grid,
                                           double abs_tol = 1e-10) {
  if (grid.size() < 3) throw InputError("fixation_profile: need at least 3 grid points");
  if (grid.front() != 0.0 || grid.back() != 1.0) throw InputError("fixation_profile: grid must span [0,1]");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InputError("fixation_profile: grid must be strictly increasing");

  const std::vector<double> inner = cumulative_integral_xi(model, grid, 1e-3 * abs_tol);
  const double cell_tol = 1e-3 * abs_tol / static_cast<double>(grid.size());

  std::vector<double> cumulative(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double lo = grid[i - 1];
    const double base = inner[i - 1];
    auto integrand = [&](double s) {
      const double partial = quad::integrate([&model](double r) { return model.xi(r); }, lo, s, 1e-3 * cell_tol).value;
      return std::exp(-(base + partial));
    };
    cumulative[i] = cumulative[i - 1] + quad::integrate(integrand, lo, grid[i], cell_tol).value;
  }
  const double c = cumulative.back();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = cumulative[i] / c;
  values.front() = 0.0;
  values.back() = 1.0;
  return FixationProfile(std::move(grid), std::move(values), c, inner);
}

/// psi on n_points uniformly spaced points of [0, 1] (n_points >= 3).
inline FixationProfile fixation_profile(const CoefficientModel& model, std::size_t n_points,
                                        double abs_tol = 1e-10) {
  if (n_points < 3) throw InputError("fixation_profile: n_points must be >= 3");
  std::vector<double> grid(n_points);
  for (std::size_t i = 0; i < n_points; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(n_points - 1);
  grid.back() = 1.0;
  return fixation_profile_on(model, std::move(grid), abs_tol);
}

/// c = int_0^1 exp(-int_0^s Xi) ds by a single adaptive outer integral whose
/// integrand integrates Xi from 0 each time. Slower than the cumulative path
/// used by fixation_profile, and independent of it.
inline double normalization_constant(const CoefficientModel& model, double abs_tol = 1e-11) {
  auto integrand = [&model](double s) { return std::exp(-model.integral_xi(s, 1e-14)); };
  return quad::integrate(integrand, 0.0, 1.0, abs_tol).value;
}

/// max over interior nodes of |F psi'' + G psi'| with three-point differences
/// (valid on nonuniform grids).
inline double backward_residual(const CoefficientModel& model, std::span<const double> grid,
                                std::span<const double> values) {
  if (grid.size() != values.size() || grid.size() < 3) throw InputError("backward_residual: bad sample arrays");
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double hl = grid[i] - grid[i - 1];
    const double hr = grid[i + 1] - grid[i];
    const double d1 = (values[i + 1] * hl * hl - values[i - 1] * hr * hr + values[i] * (hr * hr - hl * hl)) /
                      (hl * hr * (hl + hr));
    const double d2 = 2.0 * (values[i + 1] * hl + values[i - 1] * hr - values[i] * (hl + hr)) / (hl * hr * (hl + hr));
    const double x = grid[i];
    worst = std::max(worst, std::abs(model.diffusion(x) * d2 + model.drift(x) * d1));
  }
  return worst;
}

inline double backward_residual(const CoefficientModel& model, const FixationProfile& profile) {
  return backward_residual(model, profile.grid(), profile.values());
}

}  // namespace kimura
