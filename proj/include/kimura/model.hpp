#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "kimura/errors.hpp"
#include "kimura/polynomial.hpp"
#include "kimura/quadrature.hpp"

namespace kimura {

/// Pointwise values of the scalar fields derived from the coefficient model.
struct Fields {
  double F;      // diffusion x(1-x)Psi
  double G;      // drift x(1-x)Pi
  double Xi;     // Pi / Psi
  double theta;  // spectral weight 1 / (Psi x (1-x))
  double V;      // potential (2 Xi' + Xi^2) / 4
};

/// Coefficients of  p_t = (F p)_xx - (G p)_x  in factored form
/// F = x(1-x) Psi,  G = x(1-x) Pi,  with Psi > 0 on [0, 1].
///
/// Immutable after construction. Positivity of Psi is checked on a uniform
/// grid of kPositivityGrid points plus both endpoints.
class CoefficientModel {
 public:
  static constexpr std::size_t kPositivityGrid = 10000;

  CoefficientModel(Polynomial psi, Polynomial pi) : psi_(std::move(psi)), pi_(std::move(pi)) {
    double min_psi = std::min(psi_(0.0), psi_(1.0));
    double where = psi_(0.0) <= psi_(1.0) ? 0.0 : 1.0;
    for (std::size_t i = 0; i < kPositivityGrid; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(kPositivityGrid - 1);
      const double v = psi_(x);
      if (v < min_psi) {
        min_psi = v;
        where = x;
      }
    }
    if (!(min_psi > 0.0) || !std::isfinite(min_psi)) {
      std::ostringstream msg;
      msg << "psi positivity violated: Psi(" << where << ") = " << min_psi << " <= 0 on [0,1]";
      throw InputError(msg.str());
    }
    for (double c : pi_.coefficients())
      if (!std::isfinite(c)) throw InputError("pi coefficients must be finite");
    dpsi_ = psi_.derivative();
    dpi_ = pi_.derivative();
  }

  const Polynomial& psi() const { return psi_; }
  const Polynomial& pi() const { return pi_; }

  double xi(double x) const { return pi_(x) / psi_(x); }

  double xi_prime(double x) const {
    const double p = psi_(x);
    return (dpi_(x) * p - pi_(x) * dpsi_(x)) / (p * p);
  }

  /// Derived fields at an interior point. Throws InputError outside (0, 1).
  Fields evaluate(double x) const {
    if (!(x > 0.0 && x < 1.0)) {
      std::ostringstream msg;
      msg << "evaluate_fields: x = " << x << " outside (0,1); theta is undefined at the endpoints";
      throw InputError(msg.str());
    }
    const double p = psi_(x);
    const double w = x * (1.0 - x);
    const double xi_val = pi_(x) / p;
    return {w * p, w * pi_(x), xi_val, 1.0 / (p * w), 0.25 * (2.0 * xi_prime(x) + xi_val * xi_val)};
  }

  /// F and G are also defined at the endpoints, where both vanish.
  double diffusion(double x) const { return x * (1.0 - x) * psi_(x); }
  double drift(double x) const { return x * (1.0 - x) * pi_(x); }

  /// Integral of Xi over [0, x] by adaptive Gauss-Legendre.
  double integral_xi(double x, double abs_tol = 1e-12) const {
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("integral_xi: x must lie in [0,1]");
    return quad::integrate([this](double s) { return xi(s); }, 0.0, x, abs_tol).value;
  }

  /// Xi is identically zero (neutral drift).
  bool is_neutral() const {
    for (double c : pi_.coefficients())
      if (c != 0.0) return false;
    return true;
  }

 private:
  Polynomial psi_, pi_, dpsi_, dpi_;
};

/// Kimura model with frequency-dependent selection: Psi = 1, Pi = eta x + beta.
inline CoefficientModel make_kimura(double eta, double beta) {
  return CoefficientModel(Polynomial({1.0}), Polynomial({beta, eta}));
}

/// Cumulative integral of Xi sampled on an increasing grid starting at 0,
/// assembled cell by cell so each adaptive call only spans one grid cell.
inline std::vector<double> cumulative_integral_xi(const CoefficientModel& model, std::span<const double> grid,
                                                  double abs_tol = 1e-12) {
  std::vector<double> out(grid.size(), 0.0);
  if (grid.empty()) return out;
  if (grid.front() != 0.0) out[0] = model.integral_xi(grid.front(), abs_tol);
  const double per_cell = abs_tol / static_cast<double>(std::max<std::size_t>(grid.size(), 1));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    out[i] = out[i - 1] +
             quad::integrate([&model](double s) { return model.xi(s); }, grid[i - 1], grid[i], per_cell).value;
  }
  return out;
}

}  // namespace kimura
