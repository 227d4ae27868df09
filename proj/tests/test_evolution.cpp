#include <catch_amalgamated.hpp>

#include "kimura/evolution.hpp"
#include "kimura/weak_form.hpp"
#include "neutral_oracle.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using kimura::InitialMeasure;
using kimura::SpectralSolver;

namespace {

const std::vector<double> kTimes = {0.0, 0.1, 0.5, 1.0, 2.0};

InitialMeasure uniform(double h = 1.0) {
  InitialMeasure m;
  m.density = kimura::UniformDensity{h};
  return m;
}

InitialMeasure atom(double x, double mass = 1.0) {
  InitialMeasure m;
  m.atoms = {{x, mass}};
  return m;
}

InitialMeasure bump() {
  InitialMeasure m;
  m.density = kimura::BumpDensity{0.4, 0.2, 1.0};
  return m;
}

}  // namespace

TEST_CASE("projection of the first transformed eigenfunction is a unit vector") {
  for (const auto& model : {kimura::make_kimura(0, 0), kimura::make_kimura(1, -0.5)}) {
    const auto basis = kimura::build_basis(model, 16, 2048);
    InitialMeasure init;
    init.density = kimura::SampledDensity{basis.closed_grid, basis.q[0]};
    const auto coeffs = kimura::project_initial(model, basis, init);
    CHECK_THAT(coeffs.what[0], WithinAbs(1.0, 1e-6));
    for (std::size_t j = 1; j < coeffs.what.size(); ++j) CHECK_THAT(coeffs.what[j], WithinAbs(0.0, 1e-6));
  }
}

TEST_CASE("boundary atoms alone project to zero and stay constant") {
  InitialMeasure init;
  init.a0 = 0.3;
  init.b0 = 0.45;
  const SpectralSolver s(kimura::make_kimura(1, -0.5), init, 16, 512);
  for (double w : s.coefficients().what) CHECK(w == 0.0);
  const auto sols = s.at(kTimes);
  for (const auto& sol : sols) {
    CHECK(sol.a == 0.3);
    CHECK(sol.b == 0.45);
  }
  const auto cr = kimura::conservation_residuals(s.basis(), s.fixation(), s.limits(), sols);
  CHECK(cr.mass_drift == 0.0);
  CHECK(cr.psi_mass_drift == 0.0);
}

TEST_CASE("atom at the symmetry point excites only even modes") {
  const SpectralSolver s(kimura::make_kimura(0, 0), atom(0.5), 16, 2047);
  for (std::size_t j = 0; j < 16; ++j) {
    const double expected = oracle::neutral_mode(static_cast<int>(j)).q(0.5) * 0.25;
    CHECK_THAT(s.coefficients().what[j], WithinAbs(expected, 1e-7));
    if (j % 2 == 1) CHECK_THAT(s.coefficients().what[j], WithinAbs(0.0, 1e-10));
  }
}

TEST_CASE("neutral point-mass solution matches the exact series") {
  const double x0 = 0.25;
  const oracle::NeutralAtom exact(x0, 12);
  const SpectralSolver s(kimura::make_kimura(0, 0), atom(x0), 64, 2048);
  for (double t : {0.5, 1.0, 2.0}) {
    const auto sol = s.at(t);
    for (std::size_t i = 0; i < sol.q_samples.size(); i += 64)
      CHECK_THAT(sol.q_samples[i], WithinAbs(exact.q(t, s.basis().closed_grid[i]), 1e-7));
    CHECK_THAT(sol.a, WithinAbs(exact.a(t), 1e-7));
    CHECK_THAT(sol.b, WithinAbs(exact.b(t), 1e-7));
  }
}

TEST_CASE("limit masses") {
  const SpectralSolver u(kimura::make_kimura(0, 0), uniform(), 16, 1024);
  CHECK_THAT(u.limits().a_inf, WithinAbs(0.5, 1e-10));
  CHECK_THAT(u.limits().b_inf, WithinAbs(0.5, 1e-10));

  InitialMeasure left;
  left.a0 = 1.0;
  const SpectralSolver l(kimura::make_kimura(1, -0.5), left, 16, 512);
  CHECK(l.limits().a_inf == 1.0);
  CHECK(l.limits().b_inf == 0.0);

  const SpectralSolver a(kimura::make_kimura(0, 5), atom(0.3), 16, 1024);
  CHECK_THAT(a.limits().b_inf, WithinAbs(std::expm1(-1.5) / std::expm1(-5.0), 1e-9));
  CHECK_THAT(a.limits().a_inf + a.limits().b_inf, WithinAbs(1.0, 1e-15));
}

TEST_CASE("single-mode evolution") {
  const auto model = kimura::make_kimura(0, 0);
  const SpectralSolver s(model, uniform(std::sqrt(6.0)), 32, 2048);
  const auto& basis = s.basis();
  const auto q = kimura::evaluate_q(basis, s.coefficients(), 1.0);
  for (std::size_t i = 0; i < q.samples.size(); i += 101)
    CHECK_THAT(q.samples[i], WithinRel(basis.q[0][i] * s.coefficients().what[0] * std::exp(-basis.eigenvalues[0]), 1e-6));
  CHECK_THAT(kimura::q_l1(basis, q.samples), WithinRel(basis.Q[0] * s.coefficients().what[0] * std::exp(-2.0), 1e-8));
  CHECK_FALSE(q.truncation_warning);
  CHECK_THROWS_AS(kimura::evaluate_q(basis, s.coefficients(), 0.0), kimura::InputError);

  const auto sols = s.at(std::vector<double>{0.1, 0.5, 1.0, 2.0});
  const auto cr = kimura::conservation_residuals(basis, s.fixation(), s.limits(), sols);
  CHECK(cr.mass_drift <= 1e-6 * s.limits().total_mass);
  CHECK(cr.psi_mass_drift <= 1e-6 * s.limits().total_mass);
  CHECK(kimura::mass_cross_check(basis, s.fixation(), s.limits(), s.at(1.0)).discrepancy <= 1e-6);
}

TEST_CASE("conservation, route agreement, positivity and monotonicity") {
  struct Case {
    const char* name;
    kimura::CoefficientModel model;
    InitialMeasure init;
  };
  const std::vector<Case> cases = {{"neutral/uniform", kimura::make_kimura(0, 0), uniform()},
                                   {"neutral/atom", kimura::make_kimura(0, 0), atom(0.25)},
                                   {"selection/bump", kimura::make_kimura(1, -0.5), bump()}};
  for (const auto& c : cases) {
    INFO(c.name);
    const SpectralSolver s(c.model, c.init, 64, 2048);
    const double mass = s.limits().total_mass;
    const auto sols = s.at(kTimes);
    const auto cr = kimura::conservation_residuals(s.basis(), s.fixation(), s.limits(), sols);
    CHECK(cr.mass_drift <= 1e-5 * mass);
    CHECK(cr.psi_mass_drift <= 1e-5 * mass);
    for (std::size_t k = 1; k < sols.size(); ++k) {
      CHECK(kimura::mass_cross_check(s.basis(), s.fixation(), s.limits(), sols[k]).discrepancy <= 1e-5);
      CHECK(sols[k].a >= sols[k - 1].a);
      CHECK(sols[k].b >= sols[k - 1].b);
      CHECK(*std::min_element(sols[k].q_samples.begin(), sols[k].q_samples.end()) >= -1e-8 * mass);
    }
    CHECK(sols[0].a == c.init.a0);
    CHECK(sols[0].b == c.init.b0);
  }
}

TEST_CASE("truncated series route and its tail") {
  // Smooth data: the literal series closes on the limit masses.
  const SpectralSolver s(kimura::make_kimura(1, -0.5), bump(), 64, 2048);
  const auto lit = kimura::boundary_masses_truncated_series(s.basis(), s.coefficients(), s.limits(), 1.0);
  const auto split = kimura::boundary_masses(s.basis(), s.coefficients(), s.limits(), 1.0);
  CHECK_THAT(lit.a, WithinAbs(split.a, 2e-4));
  CHECK(std::abs(split.series_tail_a) < 2e-4);
  // Point mass: the tail of sum_j w_j q_j(0) / lambda_j decays slowly.
  const SpectralSolver p(kimura::make_kimura(0, 0), atom(0.25), 64, 2048);
  const auto tail = kimura::boundary_masses(p.basis(), p.coefficients(), p.limits(), 1.0);
  CHECK(std::abs(tail.series_tail_a) > 1e-3);
}

TEST_CASE("decay diagnostics") {
  const auto model = kimura::make_kimura(0, 0);
  const SpectralSolver s(model, uniform(std::sqrt(6.0)), 32, 2048);
  const std::vector<double> times = {0.5, 1.0, 1.5};
  const auto d = kimura::decay_diagnostics(s.basis(), s.coefficients(), times);
  CHECK_THAT(d.slope, WithinAbs(-2.0, 1e-6));
  for (double v : d.scaled_l1) CHECK_THAT(v, WithinRel(d.C_inf, 1e-8));
  CHECK_FALSE(d.degenerate);

  kimura::SpectralCoefficients odd;
  odd.what.assign(32, 0.0);
  odd.what[1] = 1.0;
  odd.what[3] = 0.5;
  const std::vector<double> late = {2.0 / 6, 4.0 / 6, 1.0};
  const auto o = kimura::decay_diagnostics(s.basis(), odd, late);
  CHECK(o.degenerate);
  CHECK_THAT(o.slope, WithinRel(-6.0, 0.02));
}

TEST_CASE("D_s norm and decay constant") {
  const auto basis = kimura::build_basis(kimura::make_kimura(0, 0), 32, 2048);
  kimura::SpectralCoefficients c;
  c.what.assign(32, 0.0);
  c.what[0] = 1.0;
  CHECK_THAT(kimura::ds_norm(c, basis, 3.0), WithinRel(std::pow(2.0, 1.5), 1e-8));
  c.what[1] = 1.0;
  CHECK_THAT(kimura::ds_norm(c, basis, 1.0), WithinRel(std::sqrt(8.0), 1e-8));
  CHECK_THAT(kimura::ds_norm(c, basis, 0.0), WithinRel(std::sqrt(2.0), 1e-14));
  CHECK_THROWS_AS(kimura::ds_norm(c, basis, -1.0), kimura::InputError);

  // sum_j Q_j^2 / lambda_j over 12 modes from the polynomial oracle.
  const auto small = kimura::build_basis(kimura::make_kimura(0, 0), 12, 2048);
  double sum = 0.0;
  for (int j = 0; j < 12; ++j) {
    const auto m = oracle::neutral_mode(j);
    sum += std::pow(oracle::integral(m), 2) / m.lambda;
  }
  const auto c0 = kimura::decay_constant(small, 1.0);
  CHECK_THAT(c0.value, WithinRel(std::sqrt(sum), 1e-7));
  CHECK(c0.tail_bound > 0.0);
  CHECK(kimura::decay_constant(basis, 1.0).tail_bound < c0.tail_bound);
}

TEST_CASE("Radon distance equals twice the interior mass and obeys the bound") {
  for (const auto& init : {uniform(), atom(0.25), bump()}) {
    const SpectralSolver s(kimura::make_kimura(0, 0), init, 64, 2048);
    const auto c0 = kimura::decay_constant(s.basis(), 1.0);
    const double ds = kimura::ds_norm(s.coefficients(), s.basis(), 1.0);
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
      const auto rd = kimura::radon_distance_to_limit(s.basis(), s.at(t), s.limits());
      CHECK_THAT(rd.value, WithinAbs(2 * rd.q_l1, 1e-8));
      CHECK_FALSE(rd.negative_gap);
      CHECK(rd.value <= 2 * c0.value * ds * std::exp(-s.basis().eigenvalues[0] * t));
    }
  }
}

TEST_CASE("weak-form residuals vanish for the solution and not for a wrong generator") {
  const SpectralSolver s(kimura::make_kimura(0, 0), uniform(), 32, 1024);
  const auto res = kimura::verify_weak_form(s, kimura::default_time_bumps(),
                                            kimura::default_space_factors(s.model(), s.fixation()));
  CHECK(res.size() == 12);
  for (const auto& r : res) {
    INFO(r.time_factor << " " << r.space_factor);
    CHECK(r.residual <= 1e-5);
  }
  const std::vector<kimura::SpaceFactor> wrong = {
      {"x(1-x) without generator", [](double x) { return x * (1 - x); }, [](double) { return 0.0; }}};
  const auto bad = kimura::verify_weak_form(s, kimura::default_time_bumps(), wrong);
  for (const auto& r : bad) CHECK(r.residual > 1e-3);
}

TEST_CASE("initial measure validation") {
  const auto m = kimura::make_kimura(0, 0);
  CHECK_THROWS_AS(SpectralSolver(m, atom(1.0), 8, 256), kimura::InputError);
  CHECK_THROWS_AS(SpectralSolver(m, atom(0.5, -1.0), 8, 256), kimura::InputError);
  CHECK_THROWS_AS(SpectralSolver(m, uniform(-1.0), 8, 256), kimura::InputError);
  CHECK_THROWS_AS(SpectralSolver(m, InitialMeasure{}, 8, 256), kimura::InputError);
  InitialMeasure wide;
  wide.density = kimura::BumpDensity{0.1, 0.2, 1.0};
  CHECK_THROWS_AS(SpectralSolver(m, wide, 8, 256), kimura::InputError);
  CHECK_THAT(kimura::density_mass(kimura::BumpDensity{0.5, 0.1, 2.0}), WithinAbs(2.0, 0.0));
  const auto b = kimura::BumpDensity{0.5, 0.1, 2.0};
  CHECK_THAT(kimura::quad::integrate([&](double x) { return kimura::density_at(b, x); }, 0.4, 0.6, 1e-13).value,
             WithinAbs(2.0, 1e-10));
}
