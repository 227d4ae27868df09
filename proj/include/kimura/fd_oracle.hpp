#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "kimura/errors.hpp"
#include "kimura/evolution.hpp"
#include "kimura/initial_measure.hpp"
#include "kimura/interpolation.hpp"
#include "kimura/model.hpp"
#include "kimura/quadrature.hpp"
#include "kimura/tridiagonal.hpp"

namespace kimura {

/// Snapshot of the finite-volume solution: cell averages on centers (i + 1/2) h
/// plus the masses absorbed at each end.
struct FdState {
  double t = 0.0;
  std::vector<double> q;
  double a = 0.0;
  double b = 0.0;
  double mass_drift = 0.0;  // largest |a + b + h sum q - initial| seen so far

  double h() const { return 1.0 / static_cast<double>(q.size()); }
  double interior_mass() const {
    double s = 0.0;
    for (double v : q) s += v;
    return s * h();
  }
};

struct FdOptions {
  std::size_t n_cells = 1024;
  double dt = 0.0;                    // 0 selects dt = h
  std::size_t startup_half_steps = 4;  // backward Euler half steps before Crank-Nicolson
  double negativity_tolerance = 1e-6;  // relative to the initial mass
};

namespace detail {

/// Semi-discrete operator dq/dt = L q for the conservative form
///   q_t = d/dx (Phi),  Phi = (F q)_x - G q,
/// with Phi(0) = Psi(0) q(0) and Phi(1) = -Psi(1) q(1) at the end faces and q
/// extrapolated linearly from the two nearest centers.
struct FdOperator {
  tridiag::Matrix L;
  double left_q0 = 0.0, left_q1 = 0.0;    // a' = left_q0 q_0 + left_q1 q_1
  double right_q0 = 0.0, right_q1 = 0.0;  // b' = right_q0 q_{n-1} + right_q1 q_{n-2}

  double left_rate(std::span<const double> q) const { return left_q0 * q[0] + left_q1 * q[1]; }
  double right_rate(std::span<const double> q) const {
    const std::size_t n = q.size();
    return right_q0 * q[n - 1] + right_q1 * q[n - 2];
  }
};

inline FdOperator fd_operator(const CoefficientModel& model, std::size_t n) {
  const double h = 1.0 / static_cast<double>(n);
  std::vector<double> F(n);
  for (std::size_t i = 0; i < n; ++i) F[i] = model.diffusion((static_cast<double>(i) + 0.5) * h);

  // Face i + 1/2 between cells i and i + 1: Phi = c_lo q_i + c_hi q_{i+1}.
  std::vector<double> c_lo(n - 1), c_hi(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double G = model.drift(static_cast<double>(i + 1) * h);
    c_lo[i] = -F[i] / h - 0.5 * G;
    c_hi[i] = F[i + 1] / h - 0.5 * G;
  }

  FdOperator op;
  op.L = tridiag::Matrix(n);
  const double psi0 = model.psi()(0.0);
  const double psi1 = model.psi()(1.0);
  op.left_q0 = 1.5 * psi0;
  op.left_q1 = -0.5 * psi0;
  op.right_q0 = 1.5 * psi1;
  op.right_q1 = -0.5 * psi1;

  // h dq_i/dt = Phi_{i+1/2} - Phi_{i-1/2}.
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n) {
      op.L.diag[i] += c_lo[i] / h;
      op.L.upper[i] += c_hi[i] / h;
    }
    if (i > 0) {
      op.L.diag[i] -= c_hi[i - 1] / h;
      op.L.lower[i - 1] -= c_lo[i - 1] / h;
    }
  }
  op.L.diag[0] -= op.left_q0 / h;
  op.L.upper[0] -= op.left_q1 / h;
  op.L.diag[n - 1] -= op.right_q0 / h;
  op.L.lower[n - 2] -= op.right_q1 / h;
  return op;
}

/// (I - w L) for the implicit half of a step.
inline tridiag::Matrix shifted_identity(const tridiag::Matrix& L, double w) {
  tridiag::Matrix m = L;
  for (double& v : m.lower) v *= -w;
  for (double& v : m.upper) v *= -w;
  for (double& v : m.diag) v = 1.0 - w * v;
  return m;
}

/// Cell averages of the initial data; interior atoms are split between the two
/// cells whose centers bracket them, which keeps mass and first moment.
inline std::vector<double> deposit_initial(const InitialMeasure& init, std::size_t n) {
  const double h = 1.0 / static_cast<double>(n);
  const quad::GaussRule& rule = quad::gauss_legendre_10();
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) * h;
    q[i] = quad::apply_rule(rule, [&init](double x) { return density_at(init.density, x); }, lo, lo + h) / h;
  }
  for (const Atom& atom : init.atoms) {
    const double s = atom.x / h - 0.5;
    if (s <= 0.0) {
      q.front() += atom.mass / h;
    } else if (s >= static_cast<double>(n - 1)) {
      q.back() += atom.mass / h;
    } else {
      const std::size_t i = static_cast<std::size_t>(s);
      const double w = s - static_cast<double>(i);
      q[i] += (1.0 - w) * atom.mass / h;
      q[i + 1] += w * atom.mass / h;
    }
  }
  return q;
}

}  // namespace detail

/// Finite-volume reference solution at the requested output times. Crank-Nicolson
/// in time after a few backward Euler half steps that damp the stiff modes
/// excited by rough data. The boundary rates are integrated with the same
/// weights as the interior update, so a + b + h sum q is conserved to roundoff.
inline std::vector<FdState> evolve_fd(const CoefficientModel& model, const InitialMeasure& init,
                                      std::span<const double> output_times, const FdOptions& opts = {}) {
  init.validate();
  const std::size_t n = opts.n_cells;
  if (n < 128) throw InputError("evolve_fd: n_cells must be >= 128");
  const double h = 1.0 / static_cast<double>(n);
  const double dt_max = opts.dt > 0.0 ? opts.dt : h;
  if (dt_max > h * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "evolve_fd: step-size guard violated (dt = " << dt_max << " > h = " << h << ")";
    throw InputError(msg.str());
  }
  for (std::size_t k = 0; k < output_times.size(); ++k) {
    if (!(output_times[k] >= 0.0) || (k > 0 && !(output_times[k] > output_times[k - 1])))
      throw InputError("evolve_fd: output times must be nonnegative and strictly increasing");
  }

  const detail::FdOperator op = detail::fd_operator(model, n);
  FdState state;
  state.q = detail::deposit_initial(init, n);
  state.a = init.a0;
  state.b = init.b0;
  const double initial = state.a + state.b + state.interior_mass();
  const double negative_floor = -opts.negativity_tolerance * std::abs(initial);

  auto check = [&](FdState& s) {
    s.mass_drift = std::max(s.mass_drift, std::abs(s.a + s.b + s.interior_mass() - initial));
    const auto it = std::min_element(s.q.begin(), s.q.end());
    if (*it < negative_floor) {
      std::ostringstream msg;
      msg << "evolve_fd: negative density " << *it << " in cell " << (it - s.q.begin()) << " at t = " << s.t;
      throw NumericalError(msg.str());
    }
  };

  auto backward_euler = [&](double dt) {
    const tridiag::LU lu(detail::shifted_identity(op.L, dt));
    state.q = lu.solve(std::move(state.q));
    state.a += dt * op.left_rate(state.q);
    state.b += dt * op.right_rate(state.q);
    state.t += dt;
  };

  std::size_t startup_left = opts.startup_half_steps;
  std::vector<FdState> out;
  for (double target : output_times) {
    while (state.t < target) {
      const double remaining = target - state.t;
      if (remaining <= 1e-14 * std::max(1.0, target)) break;
      if (startup_left > 0) {
        const double dt = std::min(0.5 * dt_max, remaining);
        backward_euler(dt);
        --startup_left;
        check(state);
        continue;
      }
      const std::size_t steps = static_cast<std::size_t>(std::ceil(remaining / dt_max - 1e-9));
      const double dt = remaining / static_cast<double>(steps);
      const tridiag::LU lu(detail::shifted_identity(op.L, 0.5 * dt));
      for (std::size_t k = 0; k < steps; ++k) {
        const double rate_a = op.left_rate(state.q);
        const double rate_b = op.right_rate(state.q);
        std::vector<double> rhs = op.L.apply(state.q);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = state.q[i] + 0.5 * dt * rhs[i];
        state.q = lu.solve(std::move(rhs));
        state.a += 0.5 * dt * (rate_a + op.left_rate(state.q));
        state.b += 0.5 * dt * (rate_b + op.right_rate(state.q));
        state.t = (k + 1 == steps) ? target : state.t + dt;
        check(state);
      }
    }
    state.t = target;
    out.push_back(state);
  }
  return out;
}

struct FdComparison {
  double t = 0.0;
  double q_l1_diff = 0.0;
  double a_diff = 0.0;
  double b_diff = 0.0;
};

/// L1 gap between the FD cell averages and the spectral density interpolated to
/// the cell centers, and the differences of the boundary masses, per time.
inline std::vector<FdComparison> compare_with_spectral(const SpectralBasis& basis, std::span<const FdState> fd,
                                                       std::span<const SolutionMeasure> spectral) {
  if (fd.size() != spectral.size()) throw InputError("compare_with_spectral: sequences differ in length");
  std::vector<FdComparison> out;
  for (std::size_t k = 0; k < fd.size(); ++k) {
    if (std::abs(fd[k].t - spectral[k].t) > 1e-12 * std::max(1.0, fd[k].t))
      throw InputError("compare_with_spectral: output times do not match");
    FdComparison c;
    c.t = fd[k].t;
    const double h = fd[k].h();
    double l1 = 0.0;
    for (std::size_t i = 0; i < fd[k].q.size(); ++i) {
      const double x = (static_cast<double>(i) + 0.5) * h;
      l1 += std::abs(fd[k].q[i] - lagrange4(basis.closed_grid, spectral[k].q_samples, x));
    }
    c.q_l1_diff = l1 * h;
    c.a_diff = std::abs(fd[k].a - spectral[k].a);
    c.b_diff = std::abs(fd[k].b - spectral[k].b);
    out.push_back(c);
  }
  return out;
}

}  // namespace kimura
