// Acceptance gate: one PASS/FAIL line per criterion. Run all criteria, or a
// single one with `acceptance <n>`. Exit status is nonzero if any run criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "kimura/kimura.hpp"

namespace {

using kimura::InitialMeasure;
using kimura::SpectralSolver;

// Tolerances, pinned.
constexpr double kEigenRel = 1e-6;
constexpr double kEigenSeconds = 30.0;
constexpr double kNeutralPsi = 1e-10;
constexpr double kSelectionPsi = 1e-9;
constexpr double kConservation = 1e-5;  // times the initial mass
constexpr double kRoute = 1e-5;
constexpr double kLimitGap = 1e-4;
constexpr double kFdGap = 1e-3;
constexpr double kFdRatioLo = 3.0;  // "shrinks about 4x when h is halved"
constexpr double kFdRatioHi = 5.0;
constexpr double kSlopeRel = 0.01;
constexpr double kScaledRel = 1e-3;
constexpr double kRadon = 1e-8;
constexpr double kTrendSlope = 0.05;
constexpr double kIdentityRel = 1e-4;
constexpr double kGrowthK = 0.1;
constexpr double kWeakForm = 1e-5;
constexpr double kDegenerateSlopeRel = 0.02;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Scenario {
  const char* name;
  kimura::CoefficientModel model;
  InitialMeasure init;
};

InitialMeasure uniform() {
  InitialMeasure m;
  m.density = kimura::UniformDensity{1.0};
  return m;
}

InitialMeasure atom(double x) {
  InitialMeasure m;
  m.atoms = {{x, 1.0}};
  return m;
}

InitialMeasure bump() {
  InitialMeasure m;
  m.density = kimura::BumpDensity{0.4, 0.2, 1.0};
  return m;
}

// The three demo scenarios (demos/*.json) at the default resolution.
std::vector<Scenario> demos() {
  return {{"neutral/uniform", kimura::make_kimura(0, 0), uniform()},
          {"neutral/atom@1/4", kimura::make_kimura(0, 0), atom(0.25)},
          {"selection(1,-0.5)/bump", kimura::make_kimura(1, -0.5), bump()}};
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

const std::vector<double> kTimes = {0.1, 0.5, 1.0, 2.0};

Outcome neutral_eigenvalues() {
  const auto start = std::chrono::steady_clock::now();
  const auto basis = kimura::solve_eigenproblem(kimura::make_kimura(0, 0), 10, 4096);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double worst = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double exact = (j + 1.0) * (j + 2.0);
    worst = std::max(worst, std::abs(basis.eigenvalues[j] - exact) / exact);
  }
  const bool ok = worst <= kEigenRel && seconds < kEigenSeconds && basis.eigenvalues[0] > 0.0;
  return {ok, "max rel err " + sci(worst) + " (<= " + sci(kEigenRel) + "), " + sci(seconds) + " s"};
}

Outcome fixation_probability() {
  const auto neutral = kimura::fixation_profile(kimura::make_kimura(0, 0), 1025);
  double n_err = 0.0;
  for (std::size_t i = 0; i < neutral.grid().size(); ++i)
    n_err = std::max(n_err, std::abs(neutral.values()[i] - neutral.grid()[i]));
  double s_err = 0.0;
  for (double beta : {-2.0, 1.0, 5.0}) {
    const auto p = kimura::fixation_profile(kimura::make_kimura(0, beta), 1025);
    for (std::size_t i = 0; i < p.grid().size(); ++i) {
      const double exact = std::expm1(-beta * p.grid()[i]) / std::expm1(-beta);
      s_err = std::max(s_err, std::abs(p.values()[i] - exact));
    }
  }
  return {n_err <= kNeutralPsi && s_err <= kSelectionPsi,
          "neutral " + sci(n_err) + ", constant selection " + sci(s_err)};
}

Outcome conservation() {
  bool ok = true;
  std::ostringstream d;
  for (const auto& sc : demos()) {
    const SpectralSolver s(sc.model, sc.init, 64, 2048);
    const auto cr = kimura::conservation_residuals(s.basis(), s.fixation(), s.limits(), s.at(kTimes));
    const double limit = kConservation * s.limits().total_mass;
    ok = ok && cr.mass_drift <= limit && cr.psi_mass_drift <= limit;
    d << sc.name << " " << sci(cr.mass_drift) << "/" << sci(cr.psi_mass_drift) << "; ";
  }
  return {ok, d.str()};
}

Outcome route_agreement() {
  bool ok = true;
  std::ostringstream d;
  for (const auto& sc : demos()) {
    const SpectralSolver s(sc.model, sc.init, 64, 2048);
    double worst = 0.0;
    for (const auto& sol : s.at(kTimes))
      worst = std::max(worst, kimura::mass_cross_check(s.basis(), s.fixation(), s.limits(), sol).discrepancy);
    ok = ok && worst <= kRoute;
    d << sc.name << " routes " << sci(worst) << "; ";
  }
  // Point mass at x0 = 1/4: distance to (1 - psi(x0), psi(x0)) at t = 6 / lambda_0.
  const double x0 = 0.25;
  const SpectralSolver s(kimura::make_kimura(0, 0), atom(x0), 64, 2048);
  const double t = 6.0 / s.basis().eigenvalues[0];
  const auto sol = s.at(t);
  const auto cross = kimura::mass_cross_check(s.basis(), s.fixation(), s.limits(), sol);
  const double psi = s.fixation()(x0);
  const double gap = std::max({std::abs(sol.a - (1 - psi)), std::abs(sol.b - psi), std::abs(cross.a_route2 - (1 - psi)),
                               std::abs(cross.b_route2 - psi)});
  ok = ok && gap <= kLimitGap;
  d << "delta_{1/4} gap to limit at t=6/lambda_0: " << sci(gap) << " (<= " << sci(kLimitGap) << ")";
  return {ok, d.str()};
}

Outcome spectral_vs_fd() {
  bool ok = true;
  std::ostringstream d;
  const std::vector<double> times = {0.1, 1.0};
  for (const auto& sc : demos()) {
    const SpectralSolver s(sc.model, sc.init, 64, 2048);
    const auto sp = s.at(times);
    kimura::FdOptions fine{1024}, coarse{512};
    const auto cf = kimura::compare_with_spectral(s.basis(), kimura::evolve_fd(sc.model, sc.init, times, fine), sp);
    const auto cc = kimura::compare_with_spectral(s.basis(), kimura::evolve_fd(sc.model, sc.init, times, coarse), sp);
    double gap = 0.0, dab = 0.0, rmin = 1e300, rmax = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      gap = std::max(gap, cf[k].q_l1_diff);
      dab = std::max({dab, cf[k].a_diff, cf[k].b_diff});
      const double r = cc[k].q_l1_diff / cf[k].q_l1_diff;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    ok = ok && gap <= kFdGap && dab <= kFdGap && rmin >= kFdRatioLo && rmax <= kFdRatioHi;
    d << sc.name << " L1 " << sci(gap) << " dab " << sci(dab) << " ratio [" << sci(rmin) << "," << sci(rmax) << "]; ";
  }
  return {ok, d.str()};
}

Outcome exponential_convergence() {
  bool ok = true;
  std::ostringstream d;
  for (const auto& sc : demos()) {
    const SpectralSolver s(sc.model, sc.init, 64, 2048);
    const double lam0 = s.basis().eigenvalues[0];
    std::vector<double> window;
    for (int k = 0; k <= 4; ++k) window.push_back((2.0 + k) / lam0);
    const auto fit = kimura::decay_diagnostics(s.basis(), s.coefficients(), window);
    const std::vector<double> at3 = {2.5, 3.0};
    const auto d3 = kimura::decay_diagnostics(s.basis(), s.coefficients(), at3);
    const double slope_err = std::abs(fit.slope + lam0) / lam0;
    const double scaled_err = std::abs(d3.scaled_l1[1] - d3.C_inf) / std::abs(d3.C_inf);
    double radon = 0.0;
    for (const auto& sol : s.at(kTimes)) {
      const auto rd = kimura::radon_distance_to_limit(s.basis(), sol, s.limits());
      radon = std::max(radon, std::abs(rd.value - 2 * rd.q_l1));
    }
    ok = ok && slope_err <= kSlopeRel && scaled_err <= kScaledRel && radon <= kRadon;
    d << sc.name << " slope " << sci(fit.slope) << " (lambda_0 " << sci(lam0) << "), C_inf rel " << sci(scaled_err)
      << ", radon " << sci(radon) << "; ";
  }
  return {ok, d.str()};
}

Outcome asymptotic_estimates() {
  bool ok = true;
  std::ostringstream d;
  for (const auto& model : {kimura::make_kimura(0, 0), kimura::make_kimura(1, -0.5)}) {
    const auto basis = kimura::build_basis(model, 33, 4096);
    const auto prof = kimura::asymptotic_profile(basis);
    const auto res = kimura::identity_residuals(basis);
    double id = 0.0, phimax = 0.0, qmax = 0.0;
    for (std::size_t j = 0; j < basis.modes(); ++j) {
      id = std::max(id, res[j]);
      phimax = std::max(phimax, prof.phi_sup[j]);
      qmax = std::max(qmax, prof.Q_scaled[j]);
    }
    const double s_phi = kimura::loglog_slope(prof.phi_sup);
    const double s_q = kimura::loglog_slope(prof.q_sup_scaled);
    const double s_Q = kimura::loglog_slope(prof.Q_scaled);
    ok = ok && s_phi <= kTrendSlope && s_q <= kTrendSlope && s_Q <= kTrendSlope && id <= kIdentityRel;
    d << (model.is_neutral() ? "neutral" : "selection") << ": max|phi| " << sci(phimax) << " slope " << sci(s_phi)
      << ", max|Q|l^1/4 " << sci(qmax) << " slope " << sci(s_Q) << ", |q|l^-3/4 slope " << sci(s_q) << ", identity "
      << sci(id);
    if (model.is_neutral()) {
      const double K = kimura::eigenvalue_growth(basis).K_estimate;
      ok = ok && std::abs(K - 1.0) <= kGrowthK;
      d << ", K " << sci(K);
    }
    d << "; ";
  }
  return {ok, d.str()};
}

Outcome bessel() {
  const auto model = kimura::make_kimura(0, 0);
  const auto basis = kimura::build_basis(model, 17, 4096);
  const double e4 = kimura::bessel_comparison(model, basis, 4).sup_error;
  const double e8 = kimura::bessel_comparison(model, basis, 8).sup_error;
  const double e16 = kimura::bessel_comparison(model, basis, 16).sup_error;
  return {e8 < e4 && e16 < e8, "sup errors " + sci(e4) + ", " + sci(e8) + ", " + sci(e16)};
}

Outcome weak_form() {
  InitialMeasure init = uniform();  // q_0 is constant: single-mode data
  const SpectralSolver s(kimura::make_kimura(0, 0), init, 64, 2048);
  double worst = 0.0;
  for (const auto& r : kimura::verify_weak_form(s, kimura::default_time_bumps(),
                                                kimura::default_space_factors(s.model(), s.fixation())))
    worst = std::max(worst, r.residual);
  return {worst <= kWeakForm, "max residual " + sci(worst) + " over 12 test functions"};
}

Outcome degenerate_inputs() {
  InitialMeasure ends;
  ends.a0 = 0.25;
  ends.b0 = 0.75;
  const SpectralSolver s(kimura::make_kimura(1, -0.5), ends, 64, 2048);
  bool constant = true;
  for (const auto& sol : s.at(std::vector<double>{0.0, 0.1, 1.0, 10.0})) {
    constant = constant && sol.a == 0.25 && sol.b == 0.75;
    for (double q : sol.q_samples) constant = constant && q == 0.0;
  }

  // Odd signed density 1 - 2x: w_hat(0) = 0 for the neutral model.
  InitialMeasure odd;
  std::vector<double> x, v;
  for (int i = 0; i <= 1000; ++i) {
    x.push_back(i / 1000.0);
    v.push_back(1.0 - 2.0 * x.back());
  }
  odd.density = kimura::SampledDensity{x, v};
  const SpectralSolver o(kimura::make_kimura(0, 0), odd, 64, 2048, true);
  const double lam1 = o.basis().eigenvalues[1];
  std::vector<double> window;
  for (int k = 0; k <= 4; ++k) window.push_back((2.0 + k) / lam1);
  const auto fit = kimura::decay_diagnostics(o.basis(), o.coefficients(), window);
  const double err = std::abs(fit.slope + lam1) / lam1;
  return {constant && fit.degenerate && err <= kDegenerateSlopeRel,
          std::string("boundary-only constant: ") + (constant ? "yes" : "no") + ", odd-data slope " + sci(fit.slope) +
              " vs -lambda_1 " + sci(-lam1)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"neutral eigenvalues", neutral_eigenvalues},
      {"fixation probability", fixation_probability},
      {"conservation laws", conservation},
      {"boundary-mass routes and limits", route_agreement},
      {"spectral vs finite volume", spectral_vs_fd},
      {"exponential convergence", exponential_convergence},
      {"asymptotic estimates", asymptotic_estimates},
      {"Bessel comparison", bessel},
      {"weak-form residual", weak_form},
      {"degenerate inputs", degenerate_inputs},
  };
  std::size_t only = 0;
  if (argc > 1) {
    only = static_cast<std::size_t>(std::strtoul(argv[1], nullptr, 10));
    if (only < 1 || only > criteria.size()) {
      std::fprintf(stderr, "usage: %s [criterion 1..%zu]\n", argv[0], criteria.size());
      return 1;
    }
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && only != i + 1) continue;
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%02zu] %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, r.detail.c_str());
    std::fflush(stdout);
    failures += r.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
