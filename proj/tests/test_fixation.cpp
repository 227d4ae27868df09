#include <catch_amalgamated.hpp>

#include "kimura/fixation.hpp"

using Catch::Matchers::WithinAbs;
using kimura::CoefficientModel;
using kimura::Polynomial;

namespace {

/// psi for constant Xi = beta: (1 - exp(-beta x)) / (1 - exp(-beta)).
double constant_selection(double beta, double x) { return std::expm1(-beta * x) / std::expm1(-beta); }

}  // namespace

TEST_CASE("neutral fixation probability is the identity") {
  const auto p = kimura::fixation_profile(kimura::make_kimura(0, 0), 101);
  for (std::size_t i = 0; i < p.grid().size(); ++i) CHECK_THAT(p.values()[i], WithinAbs(p.grid()[i], 1e-10));
  CHECK_THAT(p.c(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("constant selection matches the closed form") {
  const auto one = kimura::fixation_profile(kimura::make_kimura(0, 1), 3);
  CHECK_THAT(one.values()[1], WithinAbs(0.6224593312018546, 1e-10));
  for (double beta : {-2.0, 1.0, 5.0}) {
    const auto p = kimura::fixation_profile(kimura::make_kimura(0, beta), 257);
    for (std::size_t i = 0; i < p.grid().size(); ++i)
      CHECK_THAT(p.values()[i], WithinAbs(constant_selection(beta, p.grid()[i]), 1e-10));
    CHECK_THAT(p.c(), WithinAbs(-std::expm1(-beta) / beta, 1e-11));
  }
}

TEST_CASE("profile invariants") {
  const CoefficientModel m(Polynomial({1.0, 0.5, -0.3}), Polynomial({-1.0, 4.0}));
  const auto p = kimura::fixation_profile(m, 200);
  CHECK(p.values().front() == 0.0);
  CHECK(p.values().back() == 1.0);
  for (std::size_t i = 1; i < p.values().size(); ++i) CHECK(p.values()[i] > p.values()[i - 1]);
  for (double x : {0.0013, 0.25, 0.5, 0.999}) {
    CHECK(p(x) >= 0.0);
    CHECK(p(x) <= 1.0);
  }
  CHECK(p(-1.0) == 0.0);
  CHECK(p(2.0) == 1.0);
  CHECK_THAT(kimura::normalization_constant(m), WithinAbs(p.c(), 1e-10));
}

TEST_CASE("psi is invariant under a common rescaling of Psi and Pi") {
  const CoefficientModel a(Polynomial({1.0, 0.5}), Polynomial({-1.0, 2.0}));
  const CoefficientModel b(Polynomial({3.0, 1.5}), Polynomial({-3.0, 6.0}));
  const auto pa = kimura::fixation_profile(a, 65);
  const auto pb = kimura::fixation_profile(b, 65);
  for (std::size_t i = 0; i < pa.values().size(); ++i) CHECK_THAT(pa.values()[i], WithinAbs(pb.values()[i], 1e-12));
}

TEST_CASE("off-grid queries interpolate accurately") {
  const auto p = kimura::fixation_profile(kimura::make_kimura(0, 5), 513);
  for (double x : {0.0101, 0.3333, 0.77777}) CHECK_THAT(p(x), WithinAbs(constant_selection(5, x), 1e-7));
}

TEST_CASE("backward residual") {
  const auto neutral = kimura::make_kimura(0, 0);
  CHECK(kimura::backward_residual(neutral, kimura::fixation_profile(neutral, 2048)) <= 1e-6);

  // psi~ = x^2 is not stationary: |F psi''| = 2 x (1 - x), largest at x = 1/2.
  std::vector<double> grid, sq;
  for (int k = 0; k <= 100; ++k) {
    grid.push_back(k / 100.0);
    sq.push_back(grid.back() * grid.back());
  }
  CHECK_THAT(kimura::backward_residual(neutral, grid, sq), WithinAbs(0.5, 1e-12));

  // Second order: halving h quarters the residual.
  const auto sel = kimura::make_kimura(0, 1);
  const double coarse = kimura::backward_residual(sel, kimura::fixation_profile(sel, 65));
  const double fine = kimura::backward_residual(sel, kimura::fixation_profile(sel, 129));
  CHECK(coarse / fine > 3.5);
  CHECK(coarse / fine < 4.5);
}

TEST_CASE("fixation_profile input errors") {
  const auto m = kimura::make_kimura(0, 0);
  CHECK_THROWS_AS(kimura::fixation_profile(m, 2), kimura::InputError);
  CHECK_THROWS_AS(kimura::fixation_profile_on(m, {0.0, 0.6, 0.5, 1.0}), kimura::InputError);
  CHECK_THROWS_AS(kimura::fixation_profile_on(m, {0.1, 0.5, 1.0}), kimura::InputError);
}
