#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kimura/errors.hpp"
#include "kimura/evolution.hpp"
#include "kimura/quadrature.hpp"

namespace kimura {

/// zeta(t) = exp(-1 / (1 - r^2)), r = (t - center) / half_width, on [0, inf).
/// A center of 0 gives a test function with zeta(0) != 0.
struct TimeBump {
  std::string name;
  double center = 0.5;
  double half_width = 0.4;

  double value(double t) const {
    const double r = (t - center) / half_width;
    return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
  }
  double derivative(double t) const {
    const double r = (t - center) / half_width;
    if (!(std::abs(r) < 1.0)) return 0.0;
    const double s = 1.0 - r * r;
    return -2.0 * r / (s * s) * std::exp(-1.0 / s) / half_width;
  }
  double lower() const { return std::max(0.0, center - half_width); }
  double upper() const { return center + half_width; }
};

/// chi(x) together with the backward operator applied to it, F chi'' + G chi'.
struct SpaceFactor {
  std::string name;
  std::function<double(double)> chi;
  std::function<double(double)> generator;
};

inline std::vector<TimeBump> default_time_bumps() {
  return {{"interior", 0.5, 0.4}, {"late", 1.2, 0.9}, {"origin", 0.0, 1.0}};
}

/// chi in {1, psi, x(1-x), x^2(1-x)}. psi is annihilated by the backward operator.
inline std::vector<SpaceFactor> default_space_factors(const CoefficientModel& model, const FixationProfile& fixation) {
  std::vector<SpaceFactor> out;
  out.push_back({"one", [](double) { return 1.0; }, [](double) { return 0.0; }});
  out.push_back({"psi", [fixation](double x) { return fixation(x); }, [](double) { return 0.0; }});
  out.push_back({"x(1-x)", [](double x) { return x * (1.0 - x); },
                 [model](double x) { return -2.0 * model.diffusion(x) + (1.0 - 2.0 * x) * model.drift(x); }});
  out.push_back({"x^2(1-x)", [](double x) { return x * x * (1.0 - x); },
                 [model](double x) { return (2.0 - 6.0 * x) * model.diffusion(x) + (2.0 * x - 3.0 * x * x) * model.drift(x); }});
  return out;
}

struct WeakFormResidual {
  std::string time_factor;
  std::string space_factor;
  double residual = 0.0;
};

/// For phi(t, x) = zeta(t) chi(x) returns
///   | int <p(t), chi> zeta'(t) dt + int <p(t), L chi> zeta(t) dt + zeta(0) <p0, chi> |,
/// where <p, f> = int q f + a f(0) + b f(1). Time integrals use composite
/// 10-point Gauss-Legendre on `panels` panels, so t = 0 is never sampled.
inline std::vector<WeakFormResidual> verify_weak_form(const SpectralSolver& solver, const std::vector<TimeBump>& bumps,
                                                      const std::vector<SpaceFactor>& factors,
                                                      std::size_t panels = 32) {
  if (panels == 0) throw InputError("verify_weak_form: need at least one time panel");
  const SpectralBasis& basis = solver.basis();
  const quad::GaussRule& rule = quad::gauss_legendre_10();
  const SolutionMeasure initial = solver.at(0.0);

  std::vector<WeakFormResidual> out;
  for (const TimeBump& bump : bumps) {
    const double lo = bump.lower();
    const double hi = bump.upper();
    const double width = (hi - lo) / static_cast<double>(panels);
    std::vector<double> acc(factors.size(), 0.0);
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = lo + static_cast<double>(p) * width;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double t = a + 0.5 * width * (1.0 + rule.nodes[k]);
        const double w = 0.5 * width * rule.weights[k];
        const SolutionMeasure sol = solver.at(t);
        const double z = bump.value(t);
        const double dz = bump.derivative(t);
        for (std::size_t f = 0; f < factors.size(); ++f) {
          const double paired = pair_with(basis, sol, factors[f].chi);
          const double generated = pair_with(basis, sol, factors[f].generator);
          acc[f] += w * (dz * paired + z * generated);
        }
      }
    }
    for (std::size_t f = 0; f < factors.size(); ++f) {
      const double start = bump.value(0.0) * pair_with(basis, initial, factors[f].chi);
      out.push_back({bump.name, factors[f].name, std::abs(acc[f] + start)});
    }
  }
  return out;
}

}  // namespace kimura
