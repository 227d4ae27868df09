#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "kimura/errors.hpp"
#include "kimura/fixation.hpp"
#include "kimura/initial_measure.hpp"
#include "kimura/model.hpp"
#include "kimura/quadrature.hpp"
#include "kimura/spectral.hpp"

namespace kimura {

/// Projections w_hat(j) = (w0, phi_j) of the transformed initial data.
struct SpectralCoefficients {
  std::vector<double> what;
};

/// p(t) = q(t, .) + a(t) delta_0 + b(t) delta_1 at one time. At t = 0 the
/// interior atoms of the initial data are carried separately.
struct SolutionMeasure {
  double t = 0.0;
  std::vector<double> q_samples;  // on the closed spectral grid
  double a = 0.0;
  double b = 0.0;
  std::vector<Atom> atoms;
  double truncation_error = 0.0;
};

/// Long-time boundary masses and the data they derive from.
struct LimitMasses {
  double a_inf = 0.0;
  double b_inf = 0.0;
  double a0 = 0.0;
  double b0 = 0.0;
  double total_mass = 0.0;
};

/// Initial density sampled on the closed grid of the basis.
inline std::vector<double> sample_density(const SpectralBasis& basis, const InitialMeasure& init) {
  std::vector<double> out(basis.closed_grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = density_at(init.density, basis.closed_grid[i]);
  return out;
}

/// w_hat(j) = int q0 exp(-int_0^x Xi / 2) phi_j dx + sum_k m_k exp(-int_0^{x_k} Xi / 2) phi_j(x_k).
/// The theta weight cancels the x(1-x)Psi factor of the transform, which keeps
/// the pairing bounded for point masses.
inline SpectralCoefficients project_initial(const CoefficientModel& model, const SpectralBasis& basis,
                                            const InitialMeasure& init) {
  if (!basis.transformed) throw InputError("project_initial: basis has not been transformed");
  const std::vector<double> q0 = sample_density(basis, init);
  std::vector<double> weight(q0.size());
  for (std::size_t i = 0; i < q0.size(); ++i) weight[i] = q0[i] * std::exp(-0.5 * basis.xi_integral[i]);

  std::vector<double> atom_factor;
  for (const Atom& atom : init.atoms) {
    if (!(atom.x > basis.closed_grid.front() && atom.x < basis.closed_grid.back())) {
      std::ostringstream msg;
      msg << "project_initial: atom at " << atom.x << " lies outside the grid support";
      throw InputError(msg.str());
    }
    atom_factor.push_back(atom.mass * std::exp(-0.5 * model.integral_xi(atom.x)));
  }

  SpectralCoefficients coeffs;
  std::vector<double> integrand(q0.size(), 0.0);
  for (std::size_t j = 0; j < basis.modes(); ++j) {
    for (std::size_t i = 0; i < basis.n_interior; ++i) integrand[i + 1] = weight[i + 1] * basis.phi[j][i];
    double value = quad::gregory(integrand, basis.h);
    for (std::size_t k = 0; k < init.atoms.size(); ++k) value += atom_factor[k] * basis.phi_at(j, init.atoms[k].x);
    coeffs.what.push_back(value);
  }
  return coeffs;
}

struct QEvaluation {
  std::vector<double> samples;
  double truncation_error = 0.0;
  bool truncation_warning = false;
};

/// q(t, x) = sum_j w_hat(j) q_j(x) exp(-lambda_j t) for t > 0. The truncation
/// estimate is the size of the last resolved term; the warning fires above
/// 1e-6 times reference_mass.
inline QEvaluation evaluate_q(const SpectralBasis& basis, const SpectralCoefficients& coeffs, double t,
                              double reference_mass = 1.0) {
  if (!(t > 0.0)) throw InputError("evaluate_q: t must be > 0 (use the initial density at t = 0)");
  QEvaluation out;
  out.samples.assign(basis.closed_grid.size(), 0.0);
  const std::size_t m = std::min(basis.modes(), coeffs.what.size());
  for (std::size_t j = 0; j < m; ++j) {
    const double c = coeffs.what[j] * std::exp(-basis.eigenvalues[j] * t);
    if (c == 0.0) continue;
    const auto& qj = basis.q[j];
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += c * qj[i];
  }
  if (m > 0) {
    double qmax = 0.0;
    for (double v : basis.q[m - 1]) qmax = std::max(qmax, std::abs(v));
    out.truncation_error = std::exp(-basis.eigenvalues[m - 1] * t) * std::abs(coeffs.what[m - 1]) * qmax;
  }
  out.truncation_warning = out.truncation_error > 1e-6 * std::abs(reference_mass);
  return out;
}

/// b_inf = b0 + int psi q0 + sum_k m_k psi(x_k),  a_inf = total - b_inf.
inline LimitMasses limit_masses(const SpectralBasis& basis, const FixationProfile& fixation,
                                const InitialMeasure& init) {
  LimitMasses out;
  out.a0 = init.a0;
  out.b0 = init.b0;
  const std::vector<double> q0 = sample_density(basis, init);
  std::vector<double> weighted(q0.size());
  for (std::size_t i = 0; i < q0.size(); ++i) weighted[i] = q0[i] * fixation(basis.closed_grid[i]);
  double b = init.b0 + quad::gregory(weighted, basis.h);
  double interior = quad::gregory(q0, basis.h);
  for (const Atom& atom : init.atoms) {
    b += atom.mass * fixation(atom.x);
    interior += atom.mass;
  }
  out.total_mass = init.a0 + init.b0 + interior;
  out.b_inf = b;
  out.a_inf = out.total_mass - b;
  return out;
}

struct BoundaryMasses {
  double a = 0.0;
  double b = 0.0;
  // Remainders of the term-wise series for a_inf - a0 and b_inf - b0 beyond
  // the resolved modes; zero up to discretization for smooth data.
  double series_tail_a = 0.0;
  double series_tail_b = 0.0;
};

/// a(t) = a0 + Psi(0) int_0^t q(s, 0) ds integrated term by term:
///   a(t) = a_inf - Psi(0) sum_j w_hat(j) q_j(0) exp(-lambda_j t) / lambda_j,
/// and symmetrically for b with Psi(1), q_j(1). The constant is the full sum
/// a0 + Psi(0) sum_j w_hat(j) q_j(0) / lambda_j = a_inf, which converges only
/// like m^{-1/2} for point-mass data, so it is taken from the limit masses and
/// the truncated remainder is reported.
inline BoundaryMasses boundary_masses(const SpectralBasis& basis, const SpectralCoefficients& coeffs,
                                      const LimitMasses& limits, double t) {
  if (!(t >= 0.0)) throw InputError("boundary_masses: t must be >= 0");
  BoundaryMasses out;
  double full_a = 0.0, full_b = 0.0, transient_a = 0.0, transient_b = 0.0;
  const std::size_t m = std::min(basis.modes(), coeffs.what.size());
  for (std::size_t j = 0; j < m; ++j) {
    const double lam = basis.eigenvalues[j];
    const double fa = basis.psi_left * coeffs.what[j] * basis.q[j].front() / lam;
    const double fb = basis.psi_right * coeffs.what[j] * basis.q[j].back() / lam;
    full_a += fa;
    full_b += fb;
    const double decay = std::exp(-lam * t);
    transient_a += fa * decay;
    transient_b += fb * decay;
  }
  out.series_tail_a = (limits.a_inf - limits.a0) - full_a;
  out.series_tail_b = (limits.b_inf - limits.b0) - full_b;
  if (t == 0.0) {
    out.a = limits.a0;
    out.b = limits.b0;
  } else {
    out.a = limits.a_inf - transient_a;
    out.b = limits.b_inf - transient_b;
  }
  return out;
}

/// a and b from the term-wise series as written, truncated at the resolved
/// modes. Exact for finitely many modes; slowly convergent for atoms.
inline BoundaryMasses boundary_masses_truncated_series(const SpectralBasis& basis, const SpectralCoefficients& coeffs,
                                                       const LimitMasses& limits, double t) {
  BoundaryMasses out{limits.a0, limits.b0, 0.0, 0.0};
  const std::size_t m = std::min(basis.modes(), coeffs.what.size());
  for (std::size_t j = 0; j < m; ++j) {
    const double lam = basis.eigenvalues[j];
    const double growth = -std::expm1(-lam * t) / lam;
    out.a += basis.psi_left * coeffs.what[j] * basis.q[j].front() * growth;
    out.b += basis.psi_right * coeffs.what[j] * basis.q[j].back() * growth;
  }
  return out;
}

/// Pairing of a solution with a function given on the closed grid plus its
/// endpoint values: int q f + a f(0) + b f(1) + sum_k m_k f(x_k).
template <class F>
double pair_with(const SpectralBasis& basis, const SolutionMeasure& sol, const F& f) {
  std::vector<double> integrand(sol.q_samples.size());
  for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] = sol.q_samples[i] * f(basis.closed_grid[i]);
  double value = quad::gregory(integrand, basis.h) + sol.a * f(0.0) + sol.b * f(1.0);
  for (const Atom& atom : sol.atoms) value += atom.mass * f(atom.x);
  return value;
}

struct MassCrossCheck {
  double a_route2 = 0.0;
  double b_route2 = 0.0;
  double discrepancy = 0.0;
};

/// a(t) = a_inf - int (1 - psi) q(t, x) dx,  b(t) = b_inf - int psi q(t, x) dx,
/// compared against the series route.
inline MassCrossCheck mass_cross_check(const SpectralBasis& basis, const FixationProfile& fixation,
                                       const LimitMasses& limits, const SolutionMeasure& sol) {
  if (!(sol.t > 0.0)) throw InputError("mass_cross_check: t must be > 0");
  std::vector<double> psi_q(sol.q_samples.size()), rest_q(sol.q_samples.size());
  for (std::size_t i = 0; i < psi_q.size(); ++i) {
    const double psi = fixation(basis.closed_grid[i]);
    psi_q[i] = psi * sol.q_samples[i];
    rest_q[i] = (1.0 - psi) * sol.q_samples[i];
  }
  MassCrossCheck out;
  out.a_route2 = limits.a_inf - quad::gregory(rest_q, basis.h);
  out.b_route2 = limits.b_inf - quad::gregory(psi_q, basis.h);
  out.discrepancy = std::max(std::abs(out.a_route2 - sol.a), std::abs(out.b_route2 - sol.b));
  return out;
}

struct ConservationResiduals {
  double mass_drift = 0.0;
  double psi_mass_drift = 0.0;
};

/// max_t |a + b + int q - total| and max_t |b + int psi q - b_inf| over the sequence.
inline ConservationResiduals conservation_residuals(const SpectralBasis& basis, const FixationProfile& fixation,
                                                    const LimitMasses& limits,
                                                    std::span<const SolutionMeasure> solutions) {
  if (solutions.size() < 2) throw InputError("conservation_residuals: need solutions at >= 2 times");
  ConservationResiduals out;
  for (const SolutionMeasure& sol : solutions) {
    const double mass = pair_with(basis, sol, [](double) { return 1.0; });
    const double psi_mass = pair_with(basis, sol, [&fixation](double x) { return fixation(x); });
    out.mass_drift = std::max(out.mass_drift, std::abs(mass - limits.total_mass));
    out.psi_mass_drift = std::max(out.psi_mass_drift, std::abs(psi_mass - limits.b_inf));
  }
  return out;
}

/// int |q| over the closed grid.
inline double q_l1(const SpectralBasis& basis, std::span<const double> q) {
  std::vector<double> abs_q(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) abs_q[i] = std::abs(q[i]);
  return quad::gregory(abs_q, basis.h);
}

struct DecayDiagnostics {
  double C_inf = 0.0;               // Q_0 w_hat(0)
  std::vector<double> scaled_l1;    // exp(lambda_0 t) ||q(t)||_1
  std::vector<double> l1;           // ||q(t)||_1
  double slope = 0.0;               // least-squares slope of log ||q||_1 against t
  bool degenerate = false;          // w_hat(0) vanishes; decay governed by lambda_1
};

inline DecayDiagnostics decay_diagnostics(const SpectralBasis& basis, const SpectralCoefficients& coeffs,
                                          std::span<const double> times) {
  if (times.size() < 2) throw InputError("decay_diagnostics: need at least 2 times");
  DecayDiagnostics out;
  const double lam0 = basis.eigenvalues[0];
  out.C_inf = basis.Q[0] * coeffs.what[0];
  double peak = 0.0;
  for (double w : coeffs.what) peak = std::max(peak, std::abs(w));
  out.degenerate = std::abs(coeffs.what[0]) <= 1e-9 * peak;

  double st = 0, sy = 0, stt = 0, sty = 0;
  for (double t : times) {
    const double l1 = q_l1(basis, evaluate_q(basis, coeffs, t).samples);
    out.l1.push_back(l1);
    out.scaled_l1.push_back(std::exp(lam0 * t) * l1);
    const double y = std::log(l1);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double n = static_cast<double>(times.size());
  out.slope = (n * sty - st * sy) / (n * stt - st * st);
  return out;
}

/// ||w||_s = (sum_j w_hat(j)^2 lambda_j^s)^{1/2} over the resolved modes.
inline double ds_norm(const SpectralCoefficients& coeffs, const SpectralBasis& basis, double s) {
  if (!(s >= 0.0)) throw InputError("ds_norm: s must be >= 0");
  double sum = 0.0;
  const std::size_t m = std::min(basis.modes(), coeffs.what.size());
  for (std::size_t j = 0; j < m; ++j) sum += coeffs.what[j] * coeffs.what[j] * std::pow(basis.eigenvalues[j], s);
  return std::sqrt(sum);
}

struct DecayConstant {
  double value = 0.0;       // ||beta_s(0, .)||_2 over the resolved modes
  double tail_bound = 0.0;  // bound on the contribution of the unresolved modes
};

/// C_{0,s} = ||beta_s(0, .)||_2 = (sum_j Q_j^2 lambda_j^{-s})^{1/2}. The tail
/// uses |Q_j| <= C lambda_j^{-1/4} with C the largest resolved |Q_j| lambda_j^{1/4}
/// and lambda_j ~ K j^2, giving C^2 K^{-1/2-s} m^{-2s} / (2s).
inline DecayConstant decay_constant(const SpectralBasis& basis, double s) {
  if (!(s > 0.0)) throw InputError("decay_constant: s must be > 0");
  DecayConstant out;
  double sum = 0.0, c_max = 0.0;
  for (std::size_t j = 0; j < basis.modes(); ++j) {
    const double lam = basis.eigenvalues[j];
    sum += basis.Q[j] * basis.Q[j] * std::pow(lam, -s);
    c_max = std::max(c_max, std::abs(basis.Q[j]) * std::pow(lam, 0.25));
  }
  out.value = std::sqrt(sum);
  const double m = static_cast<double>(basis.modes());
  const double K = basis.eigenvalues.back() / (m * m);
  out.tail_bound = std::sqrt(c_max * c_max * std::pow(K, -0.5 - s) * std::pow(m - 1.0, -2.0 * s) / (2.0 * s));
  return out;
}

struct RadonDistance {
  double value = 0.0;
  double q_l1 = 0.0;
  bool negative_gap = false;  // a > a_inf or b > b_inf beyond roundoff
};

/// (a_inf - a) + (b_inf - b) + ||q||_1, the total variation distance to
/// a_inf delta_0 + b_inf delta_1 when the gaps are nonnegative.
inline RadonDistance radon_distance_to_limit(const SpectralBasis& basis, const SolutionMeasure& sol,
                                             const LimitMasses& limits) {
  RadonDistance out;
  out.q_l1 = q_l1(basis, sol.q_samples);
  for (const Atom& atom : sol.atoms) out.q_l1 += atom.mass;
  const double gap_a = limits.a_inf - sol.a;
  const double gap_b = limits.b_inf - sol.b;
  const double slack = 1e-12 * std::max(1.0, std::abs(limits.total_mass));
  out.negative_gap = gap_a < -slack || gap_b < -slack;
  out.value = gap_a + gap_b + out.q_l1;
  return out;
}

/// Assembled spectral solution for one model and one initial measure.
class SpectralSolver {
 public:
  SpectralSolver(CoefficientModel model, InitialMeasure init, std::size_t n_modes, std::size_t n_grid,
                 bool allow_signed = false)
      : model_(std::move(model)),
        init_(std::move(init)),
        basis_((init_.validate(allow_signed), build_basis(model_, n_modes, n_grid))),
        fixation_(fixation_profile_on(model_, basis_.closed_grid)),
        coeffs_(project_initial(model_, basis_, init_)),
        limits_(limit_masses(basis_, fixation_, init_)) {}

  const CoefficientModel& model() const { return model_; }
  const InitialMeasure& initial() const { return init_; }
  const SpectralBasis& basis() const { return basis_; }
  const FixationProfile& fixation() const { return fixation_; }
  const SpectralCoefficients& coefficients() const { return coeffs_; }
  const LimitMasses& limits() const { return limits_; }

  SolutionMeasure at(double t) const {
    if (!(t >= 0.0)) throw InputError("SpectralSolver::at: t must be >= 0");
    SolutionMeasure sol;
    sol.t = t;
    if (t == 0.0) {
      sol.q_samples = sample_density(basis_, init_);
      sol.atoms = init_.atoms;
    } else {
      QEvaluation q = evaluate_q(basis_, coeffs_, t, limits_.total_mass);
      sol.q_samples = std::move(q.samples);
      sol.truncation_error = q.truncation_error;
    }
    const BoundaryMasses ab = boundary_masses(basis_, coeffs_, limits_, t);
    sol.a = ab.a;
    sol.b = ab.b;
    return sol;
  }

  std::vector<SolutionMeasure> at(std::span<const double> times) const {
    std::vector<SolutionMeasure> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(at(t));
    return out;
  }

 private:
  CoefficientModel model_;
  InitialMeasure init_;
  SpectralBasis basis_;
  FixationProfile fixation_;
  SpectralCoefficients coeffs_;
  LimitMasses limits_;
};

}  // namespace kimura
