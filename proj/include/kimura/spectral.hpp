#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "kimura/errors.hpp"
#include "kimura/interpolation.hpp"
#include "kimura/model.hpp"
#include "kimura/quadrature.hpp"
#include "kimura/tridiagonal.hpp"

namespace kimura {

/// Lowest eigenpairs of  -phi'' + V phi = lambda theta phi,  phi(0) = phi(1) = 0,
/// together with the transformed eigenfunctions
///   q_j = exp(int_0^x Xi / 2) phi_j / (x (1-x) Psi)
/// and their integrals Q_j. Immutable once built.
struct SpectralBasis {
  std::size_t n_interior = 0;
  double h = 0.0;
  std::vector<double> interior_grid;  // x_i = i h, i = 1..n
  std::vector<double> closed_grid;    // 0, x_1, ..., x_n, 1

  std::vector<double> eigenvalues;      // Richardson-refined
  std::vector<double> raw_eigenvalues;  // on the n-point grid
  std::vector<std::vector<double>> phi;  // refined interior samples, int phi_i phi_j theta dx = delta_ij
  std::vector<std::vector<double>> phi_discrete;  // unrefined eigenvectors, trapezoid-orthonormal
  std::vector<std::vector<double>> phi_fine;  // modes on the 2n+1 point grid; released by the transform

  // Filled by transform_eigenfunctions.
  bool transformed = false;
  std::vector<double> xi_integral;  // int_0^x Xi on closed_grid
  std::vector<std::vector<double>> q;  // closed_grid samples
  std::vector<double> Q;
  std::vector<bool> extrapolation_unstable;
  double psi_left = 1.0;   // Psi(0)
  double psi_right = 1.0;  // Psi(1)

  std::size_t modes() const { return eigenvalues.size(); }

  /// phi_j at an arbitrary point of [0, 1], with phi_j(0) = phi_j(1) = 0.
  double phi_at(std::size_t j, double x) const {
    std::vector<double> y(closed_grid.size(), 0.0);
    std::copy(phi[j].begin(), phi[j].end(), y.begin() + 1);
    return lagrange4(closed_grid, y, x);
  }
};

namespace detail {

inline std::vector<double> uniform_interior(std::size_t n) {
  std::vector<double> x(n);
  const double h = 1.0 / static_cast<double>(n + 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1) * h;
  return x;
}

/// Symmetric form M^{-1/2} K M^{-1/2} of the generalized problem; sqrt(theta)
/// at the nodes is returned through theta_sqrt.
inline tridiag::Symmetric assemble_operator(const CoefficientModel& model, std::size_t n,
                                            std::vector<double>* theta_sqrt = nullptr) {
  const double h = 1.0 / static_cast<double>(n + 1);
  const double inv_h2 = 1.0 / (h * h);
  std::vector<double> st(n);
  tridiag::Symmetric a;
  a.diag.resize(n);
  a.off.resize(n ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Fields f = model.evaluate(static_cast<double>(i + 1) * h);
    st[i] = std::sqrt(f.theta);
    a.diag[i] = (2.0 * inv_h2 + f.V) / f.theta;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) a.off[i] = -inv_h2 / (st[i] * st[i + 1]);
  if (theta_sqrt) *theta_sqrt = std::move(st);
  return a;
}

}  // namespace detail

/// Second-order finite differences on n_grid interior points, lowest n_modes
/// eigenvalues by Sturm bisection, eigenvectors by inverse iteration. The same
/// modes are computed on the grid of spacing h/2 and eigenvalues and
/// eigenvector samples are refined with one Richardson step.
inline SpectralBasis solve_eigenproblem(const CoefficientModel& model, std::size_t n_modes, std::size_t n_grid) {
  if (n_grid < 64) throw InputError("solve_eigenproblem: n_grid must be >= 64");
  if (n_modes == 0 || n_modes > n_grid / 8) {
    std::ostringstream msg;
    msg << "solve_eigenproblem: resolution guard violated (n_modes = " << n_modes << " must be in [1, n_grid/8 = "
        << n_grid / 8 << "])";
    throw InputError(msg.str());
  }

  SpectralBasis basis;
  basis.n_interior = n_grid;
  basis.h = 1.0 / static_cast<double>(n_grid + 1);
  basis.interior_grid = detail::uniform_interior(n_grid);
  basis.closed_grid.reserve(n_grid + 2);
  basis.closed_grid.push_back(0.0);
  basis.closed_grid.insert(basis.closed_grid.end(), basis.interior_grid.begin(), basis.interior_grid.end());
  basis.closed_grid.push_back(1.0);

  const std::size_t n_fine = 2 * n_grid + 1;
  std::vector<double> theta_sqrt, theta_sqrt_fine;
  const tridiag::Symmetric coarse = detail::assemble_operator(model, n_grid, &theta_sqrt);
  const tridiag::Symmetric fine = detail::assemble_operator(model, n_fine, &theta_sqrt_fine);

  // y = M^{1/2} phi, so the trapezoid norm h sum theta phi^2 is h |y|^2.
  auto to_phi = [](std::vector<double> y, std::span<const double> ts, double h) {
    if (y[0] < 0.0)
      for (double& v : y) v = -v;
    const double norm = 1.0 / std::sqrt(h);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= norm / ts[i];
    return y;
  };
  for (std::size_t j = 0; j < n_modes; ++j) {
    const double lam_h = tridiag::eigenvalue_bisect(coarse, j);
    const double lam_h2 = tridiag::eigenvalue_bisect(fine, j);
    basis.raw_eigenvalues.push_back(lam_h);
    basis.eigenvalues.push_back((4.0 * lam_h2 - lam_h) / 3.0);

    std::vector<double> pc = to_phi(tridiag::eigenvector_inverse_iteration(coarse, lam_h), theta_sqrt, basis.h);
    std::vector<double> pf =
        to_phi(tridiag::eigenvector_inverse_iteration(fine, lam_h2), theta_sqrt_fine, 0.5 * basis.h);
    basis.phi_discrete.push_back(pc);
    // Coarse node i sits on fine node 2i+1.
    for (std::size_t i = 0; i < n_grid; ++i) pc[i] = (4.0 * pf[2 * i + 1] - pc[i]) / 3.0;
    basis.phi.push_back(std::move(pc));
    basis.phi_fine.push_back(std::move(pf));
  }
  if (!(basis.eigenvalues[0] > 0.0)) {
    std::ostringstream msg;
    msg << "solve_eigenproblem: computed lambda_0 = " << basis.eigenvalues[0]
        << " is not positive; discretization failure";
    throw NumericalError(msg.str());
  }
  for (std::size_t j = 1; j < n_modes; ++j)
    if (!(basis.eigenvalues[j] > basis.eigenvalues[j - 1]))
      throw NumericalError("solve_eigenproblem: eigenvalues not strictly increasing");
  return basis;
}

/// Fills q_j, Q_j and the endpoint values q_j(0), q_j(1). phi_j vanishes
/// linearly at both ends, so the endpoint values extrapolate phi_j/x and
/// phi_j/(1-x) from the first interior nodes (5-point value). A mode is flagged
/// when the 3- and 4-point extrapolants differ by more than 1e-3 relative.
/// Q_j uses the end-corrected trapezoid rule.
inline SpectralBasis transform_eigenfunctions(const CoefficientModel& model, SpectralBasis basis) {
  const std::size_t n = basis.n_interior;
  basis.xi_integral = cumulative_integral_xi(model, basis.closed_grid);
  basis.psi_left = model.psi()(0.0);
  basis.psi_right = model.psi()(1.0);
  const double right_factor = std::exp(0.5 * basis.xi_integral.back());
  basis.q.clear();
  basis.Q.clear();
  basis.extrapolation_unstable.clear();

  constexpr std::size_t kStencil = 5;
  std::array<double, kStencil> xl{}, xr{};
  for (std::size_t k = 0; k < kStencil; ++k) {
    xl[k] = basis.interior_grid[k];
    xr[k] = basis.interior_grid[n - 1 - k];
  }
  for (std::size_t j = 0; j < basis.modes(); ++j) {
    const auto& phi = basis.phi[j];
    std::vector<double> qj(n + 2);
    for (std::size_t i = 0; i < n; ++i)
      qj[i + 1] = std::exp(0.5 * basis.xi_integral[i + 1]) * phi[i] / model.diffusion(basis.interior_grid[i]);

    std::array<double, kStencil> gl{}, gr{};
    for (std::size_t k = 0; k < kStencil; ++k) {
      gl[k] = phi[k] / xl[k];
      gr[k] = phi[n - 1 - k] / (1.0 - xr[k]);
    }
    auto extrapolate = [](const auto& x, const auto& g, std::size_t points, double at) {
      return polynomial_extrapolate(std::span(x).first(points), std::span(g).first(points), at);
    };
    const double left = extrapolate(xl, gl, kStencil, 0.0);
    const double right = extrapolate(xr, gr, kStencil, 1.0);
    const double l3 = extrapolate(xl, gl, 3, 0.0), l4 = extrapolate(xl, gl, 4, 0.0);
    const double r3 = extrapolate(xr, gr, 3, 1.0), r4 = extrapolate(xr, gr, 4, 1.0);
    basis.extrapolation_unstable.push_back(std::abs(l3 - l4) > 1e-3 * std::abs(l4) ||
                                           std::abs(r3 - r4) > 1e-3 * std::abs(r4));

    qj.front() = left / basis.psi_left;
    qj.back() = right_factor * right / basis.psi_right;
    basis.Q.push_back(quad::gregory(qj, basis.h));
    basis.q.push_back(std::move(qj));
  }
  basis.phi_fine.clear();
  basis.phi_fine.shrink_to_fit();
  basis.transformed = true;
  return basis;
}

/// Convenience: eigenproblem followed by the transform.
inline SpectralBasis build_basis(const CoefficientModel& model, std::size_t n_modes, std::size_t n_grid) {
  return transform_eigenfunctions(model, solve_eigenproblem(model, n_modes, n_grid));
}

/// Largest deviation of the theta-weighted Gram matrix from the identity.
/// With refined = false the unrefined eigenvectors are paired under the
/// trapezoid rule, the discrete inner product they are orthonormal in. With
/// refined = true the refined samples are paired under the end-corrected rule,
/// which measures how well they approximate the continuous eigenfunctions.
inline double orthonormality_error(const CoefficientModel& model, const SpectralBasis& basis, bool refined = false) {
  const auto& vectors = refined ? basis.phi : basis.phi_discrete;
  std::vector<double> theta(basis.n_interior);
  for (std::size_t i = 0; i < basis.n_interior; ++i) theta[i] = model.evaluate(basis.interior_grid[i]).theta;
  double worst = 0.0;
  // theta phi_a phi_b vanishes at both ends.
  std::vector<double> integrand(basis.n_interior + 2, 0.0);
  for (std::size_t a = 0; a < vectors.size(); ++a)
    for (std::size_t b = a; b < vectors.size(); ++b) {
      for (std::size_t i = 0; i < basis.n_interior; ++i) integrand[i + 1] = vectors[a][i] * vectors[b][i] * theta[i];
      const double s = refined ? quad::gregory(integrand, basis.h) : quad::trapezoid(integrand, basis.h);
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

/// Interior sign changes of a sample vector, ignoring entries below
/// rel_floor times its max norm.
inline std::size_t sign_changes(std::span<const double> v, double rel_floor = 1e-10) {
  double peak = 0.0;
  for (double e : v) peak = std::max(peak, std::abs(e));
  std::size_t count = 0;
  int last = 0;
  for (double e : v) {
    if (std::abs(e) <= rel_floor * peak) continue;
    const int s = e > 0.0 ? 1 : -1;
    if (last != 0 && s != last) ++count;
    last = s;
  }
  return count;
}

/// Relative defect of  Q_j lambda_j = Psi(0) q_j(0) + Psi(1) q_j(1),
/// scaled by Psi(0)|q_j(0)| + Psi(1)|q_j(1)|.
inline std::vector<double> identity_residuals(const SpectralBasis& basis) {
  if (!basis.transformed) throw InputError("identity_residuals: basis has not been transformed");
  std::vector<double> out;
  for (std::size_t j = 0; j < basis.modes(); ++j) {
    const double l = basis.psi_left * basis.q[j].front();
    const double r = basis.psi_right * basis.q[j].back();
    const double scale = std::abs(l) + std::abs(r);
    out.push_back(std::abs(basis.Q[j] * basis.eigenvalues[j] - (l + r)) / scale);
  }
  return out;
}

struct GrowthFit {
  double K_estimate = 0.0;
  std::vector<std::size_t> indices;  // modes used in the fit
  std::vector<double> residuals;     // lambda_j / j^2 - K
};

/// Least-squares line lambda_j = K j^2 + c over the top half of the resolved modes.
inline GrowthFit eigenvalue_growth(const SpectralBasis& basis) {
  const std::size_t m = basis.modes();
  if (m < 16) throw InputError("eigenvalue_growth: need at least 16 modes");
  GrowthFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t j = m / 2; j < m; ++j) {
    const double x = static_cast<double>(j) * static_cast<double>(j);
    const double y = basis.eigenvalues[j];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    fit.indices.push_back(j);
  }
  const double cnt = static_cast<double>(fit.indices.size());
  fit.K_estimate = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  for (std::size_t j : fit.indices)
    fit.residuals.push_back(basis.eigenvalues[j] / (static_cast<double>(j) * static_cast<double>(j)) - fit.K_estimate);
  return fit;
}

/// Liouville-Green phase S(x) = int_0^x sqrt(theta), evaluated through x = sin^2(u)
/// which removes the endpoint singularity: S = int_0^{asin sqrt x} 2 / sqrt(Psi(sin^2 u)) du.
inline double lg_phase(const CoefficientModel& model, double x) {
  const double top = std::asin(std::sqrt(std::clamp(x, 0.0, 1.0)));
  auto integrand = [&model](double u) {
    const double s = std::sin(u);
    return 2.0 / std::sqrt(model.psi()(s * s));
  };
  return quad::integrate(integrand, 0.0, top, 1e-13).value;
}

/// Asymptotic slope pi^2 / (int_0^1 sqrt(theta))^2 of lambda_j against j^2.
inline double weyl_constant(const CoefficientModel& model) {
  const double total = lg_phase(model, 1.0);
  return std::numbers::pi * std::numbers::pi / (total * total);
}

struct BesselComparison {
  std::size_t mode = 0;
  double sup_error = 0.0;      // sup over (0, 1/2] of |phi_j - phi_hat_j|
  double phi_sup = 0.0;        // sup of |phi_j| on the same range
  double amplitude = 0.0;      // A_{0,j}
};

/// Compares phi_j with the Bessel-type comparison function
///   phi_hat_j = A (2 S sqrt(theta))^{-1/2} S J_1(sqrt(lambda_j) S),   S = int_0^x sqrt(theta),
/// with A fixed by ||phi_hat_j||_{L^2(theta)} = 1 over (0, 1), evaluated in closed form
///   A^{-2} = (1 / (2 lambda)) int_0^{z1} z J_1(z)^2 dz,   z1 = sqrt(lambda) S(1).
inline BesselComparison bessel_comparison(const CoefficientModel& model, const SpectralBasis& basis, std::size_t j) {
  if (j >= basis.modes()) throw InputError("bessel_comparison: mode index outside basis");
  if (j < 4) throw InputError("bessel_comparison: mode index must be >= 4 (asymptotic regime)");
  const double lambda = basis.eigenvalues[j];
  const double root = std::sqrt(lambda);
  const double z1 = root * lg_phase(model, 1.0);
  const double j0 = std::cyl_bessel_j(0.0, z1);
  const double j1 = std::cyl_bessel_j(1.0, z1);
  const double j2 = std::cyl_bessel_j(2.0, z1);
  const double moment = 0.5 * z1 * z1 * (j1 * j1 - j0 * j2);
  const double amplitude = std::sqrt(2.0 * lambda / moment);

  BesselComparison out;
  out.mode = j;
  out.amplitude = amplitude;
  double phase = 0.0;
  double prev_x = 0.0;
  for (std::size_t i = 0; i < basis.n_interior; ++i) {
    const double x = basis.interior_grid[i];
    if (x > 0.5) break;
    // Increment the phase cell by cell in the u = asin(sqrt x) variable.
    const double u0 = std::asin(std::sqrt(prev_x));
    const double u1 = std::asin(std::sqrt(x));
    phase += quad::integrate(
                 [&model](double u) {
                   const double s = std::sin(u);
                   return 2.0 / std::sqrt(model.psi()(s * s));
                 },
                 u0, u1, 1e-14)
                 .value;
    prev_x = x;
    const double sqrt_theta = std::sqrt(model.evaluate(x).theta);
    const double hat = amplitude * phase * std::cyl_bessel_j(1.0, root * phase) / std::sqrt(2.0 * phase * sqrt_theta);
    out.sup_error = std::max(out.sup_error, std::abs(basis.phi[j][i] - hat));
    out.phi_sup = std::max(out.phi_sup, std::abs(basis.phi[j][i]));
  }
  return out;
}

/// Per-mode quantities whose boundedness the asymptotic estimates predict.
struct AsymptoticProfile {
  std::vector<double> phi_sup;             // ||phi_j||_inf
  std::vector<double> q_sup_scaled;        // ||q_j||_inf lambda_j^{-3/4}
  std::vector<double> Q_scaled;            // |Q_j| lambda_j^{1/4}
};

inline AsymptoticProfile asymptotic_profile(const SpectralBasis& basis) {
  if (!basis.transformed) throw InputError("asymptotic_profile: basis has not been transformed");
  AsymptoticProfile out;
  for (std::size_t j = 0; j < basis.modes(); ++j) {
    double ps = 0.0, qs = 0.0;
    for (double v : basis.phi[j]) ps = std::max(ps, std::abs(v));
    for (double v : basis.q[j]) qs = std::max(qs, std::abs(v));
    const double lam = basis.eigenvalues[j];
    out.phi_sup.push_back(ps);
    out.q_sup_scaled.push_back(qs * std::pow(lam, -0.75));
    out.Q_scaled.push_back(std::abs(basis.Q[j]) * std::pow(lam, 0.25));
  }
  return out;
}

/// Least-squares slope of log v against log(j + 1) over the entries above
/// rel_floor times the largest (j is the position in the sequence). Entries
/// that vanish by symmetry are skipped. Near zero for bounded sequences.
inline double loglog_slope(std::span<const double> v, double rel_floor = 1e-8) {
  double peak = 0.0;
  for (double e : v) peak = std::max(peak, e);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!(v[j] > rel_floor * peak)) continue;
    const double x = std::log(static_cast<double>(j + 1));
    const double y = std::log(v[j]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace kimura
