#include <catch_amalgamated.hpp>

#include <random>

#include "kimura/model.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using kimura::CoefficientModel;
using kimura::Polynomial;

TEST_CASE("make_kimura builds Psi = 1 and Pi = eta x + beta") {
  const auto neutral = kimura::make_kimura(0, 0);
  CHECK(neutral.psi().coefficients() == std::vector<double>{1.0});
  CHECK(neutral.is_neutral());
  const auto f = neutral.evaluate(0.3);
  CHECK_THAT(f.F, WithinAbs(0.3 * 0.7, 1e-15));
  CHECK(f.G == 0.0);

  const auto g = kimura::make_kimura(0, 1).evaluate(0.3);
  CHECK_THAT(g.G, WithinAbs(0.3 * 0.7, 1e-15));
  const auto h = kimura::make_kimura(1, 0).evaluate(0.3);
  CHECK_THAT(h.G, WithinAbs(0.09 * 0.7, 1e-15));

  CHECK(kimura::make_kimura(2, -1).xi(0.5) == 0.0);
}

TEST_CASE("evaluate_fields for the neutral model") {
  const auto m = kimura::make_kimura(0, 0);
  const auto f = m.evaluate(0.5);
  CHECK(f.F == 0.25);
  CHECK(f.G == 0.0);
  CHECK(f.Xi == 0.0);
  CHECK(f.theta == 4.0);
  CHECK(f.V == 0.0);
  for (double x : {1e-4, 1e-6, 1e-8}) CHECK_THAT(m.evaluate(x).theta * x, WithinRel(1.0, 2 * x));
}

TEST_CASE("constant Xi gives V = 1/4") {
  const auto m = kimura::make_kimura(0, 1);
  for (double x : {0.1, 0.5, 0.9}) CHECK_THAT(m.evaluate(x).V, WithinAbs(0.25, 1e-15));
}

TEST_CASE("evaluate_fields rejects the endpoints") {
  const auto m = kimura::make_kimura(0, 0);
  CHECK_THROWS_AS(m.evaluate(0.0), kimura::InputError);
  CHECK_THROWS_AS(m.evaluate(1.0), kimura::InputError);
  CHECK_THROWS_AS(m.evaluate(-0.5), kimura::InputError);
}

TEST_CASE("Xi' from the quotient rule matches a centered difference") {
  const CoefficientModel m(Polynomial({2.0, -0.5, 0.3}), Polynomial({0.4, 1.0, -2.0}));
  for (double x : {0.1, 0.37, 0.8}) {
    const double h = 1e-5;
    const double fd = (m.xi(x + h) - m.xi(x - h)) / (2 * h);
    CHECK_THAT(m.xi_prime(x), WithinAbs(fd, 1e-8));
    const double V = 0.25 * (2 * fd + m.xi(x) * m.xi(x));
    CHECK_THAT(m.evaluate(x).V, WithinAbs(V, 1e-8));
  }
}

TEST_CASE("F = x(1-x) Psi and Xi Psi = Pi at random points") {
  const CoefficientModel m(Polynomial({1.5, -0.7, 0.4}), Polynomial({-0.3, 2.0, 0.5}));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-9, 1.0 - 1e-9);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng);
    const auto f = m.evaluate(x);
    const double psi = m.psi()(x);
    CHECK_THAT(f.F, WithinRel(x * (1 - x) * psi, 1e-15));
    CHECK_THAT(f.Xi * psi, WithinAbs(m.pi()(x), 4e-16 * (1 + std::abs(m.pi()(x)))));
  }
}

TEST_CASE("integral_xi") {
  CHECK(kimura::make_kimura(0, 0).integral_xi(1.0) == 0.0);
  CHECK_THAT(kimura::make_kimura(0, 1).integral_xi(0.3), WithinAbs(0.3, 1e-12));
  CHECK_THAT(kimura::make_kimura(2, 0).integral_xi(1.0), WithinAbs(1.0, 1e-12));
  // Xi = 1 / (1 + x):  log(1 + x).
  const CoefficientModel m(Polynomial({1.0, 1.0}), Polynomial({1.0}));
  CHECK_THAT(m.integral_xi(0.6), WithinAbs(std::log(1.6), 1e-12));
  CHECK_THROWS_AS(m.integral_xi(1.5), kimura::InputError);
}

TEST_CASE("integral_xi is monotone when Xi >= 0") {
  const auto m = kimura::make_kimura(3, 0.2);
  double prev = -1.0;
  for (int k = 0; k <= 50; ++k) {
    const double v = m.integral_xi(k / 50.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("cumulative_integral_xi agrees with direct integration") {
  const CoefficientModel m(Polynomial({1.0, 0.5}), Polynomial({-1.0, 3.0}));
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(k / 20.0);
  const auto cum = kimura::cumulative_integral_xi(m, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK_THAT(cum[i], WithinAbs(m.integral_xi(grid[i]), 1e-12));
}

TEST_CASE("Psi positivity is validated") {
  CHECK_THROWS_WITH(CoefficientModel(Polynomial({-2.0, 1.0}), Polynomial({0.0})),
                    Catch::Matchers::ContainsSubstring("psi positivity"));
  // Dips below zero only between the endpoints.
  CHECK_THROWS_AS(CoefficientModel(Polynomial({0.1, -1.0, 1.0}), Polynomial({0.0})), kimura::InputError);
  CHECK_THROWS_AS(CoefficientModel(Polynomial({0.0, 1.0}), Polynomial({0.0})), kimura::InputError);
  CHECK_NOTHROW(CoefficientModel(Polynomial({0.3, -1.0, 1.0}), Polynomial({0.0})));
}
