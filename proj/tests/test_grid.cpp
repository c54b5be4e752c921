#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kvwave/grid.hpp"
#include "oracles.hpp"

using namespace kvwave;

namespace {

Field random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = n(rng);
  return f;
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g(1.0, 9);
  CHECK(g.h(0) == doctest::Approx(0.1));
  CHECK(g.size() == 9);
  CHECK(g.coord(0, 0) == doctest::Approx(0.1));
  const Grid g2(2.0, 1.0, 19, 9);
  CHECK(g2.size() == 171);
  CHECK(g2.cell_measure() == doctest::Approx(0.01));
  CHECK(g2.h_min() == doctest::Approx(0.1));
  CHECK_THROWS_AS(Grid(1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(Grid(-1.0, 5), std::invalid_argument);
}

TEST_CASE("laplacian examples") {
  const Grid g(1.0, 3);
  const Field zero(g);
  const Field lz = laplacian_apply(zero);
  for (std::size_t i = 0; i < lz.size(); ++i) CHECK(lz[i] == 0.0);

  const Field f(g, {0.0, 1.0, 0.0});
  const Field lf = laplacian_apply(f);
  CHECK(lf[0] == doctest::Approx(16.0).epsilon(1e-15));
  CHECK(lf[1] == doctest::Approx(-32.0).epsilon(1e-15));
  CHECK(lf[2] == doctest::Approx(16.0).epsilon(1e-15));

  const Grid other(1.0, 4);
  CHECK_THROWS_AS(require_same_grid(f, Field(other)), std::invalid_argument);
}

TEST_CASE("sine is a discrete eigenfunction") {
  const int n = 99;
  const Grid g(oracle::pi, n);
  const Field s = sample(g, [](double x, double) { return std::sin(x); });
  const Field ls = laplacian_apply(s);
  const double mu = oracle::discrete_eigenvalue_1d(1, oracle::pi, n);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::fabs(ls[i] + mu * s[i]) <= 1e-12);
  // <-Lap s, s> = mu * sum sin^2 * h = mu * pi / 2 on the uniform grid
  CHECK(grad_norm_sq(s) == doctest::Approx(mu * oracle::pi / 2.0).epsilon(1e-12));
}

TEST_CASE("2D sine modes") {
  const Grid g(1.0, 2.0, 31, 47);
  const Field s =
      sample(g, [](double x, double y) { return std::sin(2 * oracle::pi * x) * std::sin(oracle::pi * y / 2.0); });
  const double mu = oracle::discrete_eigenvalue_1d(2, 1.0, 31) + oracle::discrete_eigenvalue_1d(1, 2.0, 47);
  const Field ls = laplacian_apply(s);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::fabs(ls[i] + mu * s[i]) <= 1e-10);
}

TEST_CASE("Dirichlet form") {
  std::mt19937_64 rng(5);
  const Grid g(2.0, 40);
  CHECK(grad_norm_sq(Field(g)) == 0.0);
  const Field f = random_field(g, rng);
  Field f2(g);
  for (std::size_t i = 0; i < f.size(); ++i) f2[i] = 2.0 * f[i];
  CHECK(grad_norm_sq(f2) == 4.0 * grad_norm_sq(f));
  CHECK(grad_norm_sq(f) > 0.0);
  CHECK(grad_inner(f, f) == doctest::Approx(grad_norm_sq(f)).epsilon(1e-14));
}

TEST_CASE("summation by parts and symmetry") {
  std::mt19937_64 rng(9);
  for (const Grid& g : {Grid(1.0, 50), Grid(1.0, 1.5, 12, 17)}) {
    for (int k = 0; k < 20; ++k) {
      const Field f = random_field(g, rng);
      const Field h = random_field(g, rng);
      const Field lf = laplacian_apply(f);
      const Field lh = laplacian_apply(h);
      const double sbp = -l2_inner(lf, f);
      CHECK(std::fabs(sbp - grad_norm_sq(f)) <= 1e-12 * std::fabs(sbp));
      const double a = l2_inner(lf, h), b = l2_inner(f, lh);
      CHECK(std::fabs(a - b) <= 1e-12 * (std::fabs(a) + 1.0));
    }
  }
}

TEST_CASE("inner products and norms") {
  const Grid g(1.0, 9);
  Field one(g);
  for (std::size_t i = 0; i < one.size(); ++i) one[i] = 1.0;
  CHECK(l2_inner(one, one) == doctest::Approx(0.9).epsilon(1e-14));
  const Field zero(g);
  for (double q : {1.0, 2.0, 3.5, double(INFINITY)}) CHECK(lp_norm(zero, q) == 0.0);
  CHECK_THROWS_AS(lp_norm(one, 0.5), std::invalid_argument);
  CHECK(lp_norm(one, INFINITY) == 1.0);

  std::mt19937_64 rng(1);
  const Grid big(3.0, 77);
  for (int k = 0; k < 50; ++k) {
    const Field f = random_field(big, rng);
    const Field h = random_field(big, rng);
    CHECK(std::fabs(l2_inner(f, h)) <= lp_norm(f, 2.0) * lp_norm(h, 2.0) * (1.0 + 1e-14));
    CHECK(lp_norm(f, 2.0) * lp_norm(f, 2.0) == doctest::Approx(l2_inner(f, f)).epsilon(1e-13));
  }
  Field bad(g);
  bad[3] = NAN;
  CHECK(max_norm(bad.values()) == INFINITY);
}

TEST_CASE("shifted Laplacian solves") {
  std::mt19937_64 rng(21);
  const double alpha = 1e6, beta = 500.0;
  SUBCASE("tridiagonal") {
    const Grid g(oracle::pi, 99);
    const ShiftedLaplacianSolver solver(g, alpha, beta);
    const Field x = random_field(g, rng);
    const Field lx = laplacian_apply(x);
    Field rhs(g);
    for (std::size_t i = 0; i < x.size(); ++i) rhs[i] = alpha * x[i] - beta * lx[i];
    Field y(g);
    solver.solve(rhs.values(), y.values());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::fabs(y[i] - x[i]) <= 1e-12);
  }
  SUBCASE("conjugate gradient agrees with tridiagonal") {
    const Grid g(1.0, 60);
    LinearSolverConfig cg;
    cg.kind = LinearSolverConfig::Kind::conjugate_gradient;
    const ShiftedLaplacianSolver a(g, alpha, beta), b(g, alpha, beta, cg);
    const Field rhs = random_field(g, rng);
    Field x(g), y(g);
    a.solve(rhs.values(), x.values());
    b.solve(rhs.values(), y.values());
    CHECK(b.last_iterations() > 0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::fabs(x[i] - y[i]) <= 1e-10 * (1.0 + std::fabs(x[i])));
  }
  SUBCASE("2D conjugate gradient") {
    const Grid g(1.0, 1.0, 20, 25);
    const ShiftedLaplacianSolver solver(g, alpha, beta);
    const Field x = random_field(g, rng);
    const Field lx = laplacian_apply(x);
    Field rhs(g);
    for (std::size_t i = 0; i < x.size(); ++i) rhs[i] = alpha * x[i] - beta * lx[i];
    Field y(g);
    solver.solve(rhs.values(), y.values());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::fabs(y[i] - x[i]) <= 1e-9);
  }
  SUBCASE("non-convergence reports iterations") {
    const Grid g(1.0, 1.0, 30, 30);
    LinearSolverConfig cfg;
    cfg.max_iterations = 2;
    const ShiftedLaplacianSolver solver(g, 0.0, 1.0, cfg);
    const Field rhs = random_field(g, rng);
    Field y(g);
    CHECK_THROWS_WITH_AS(solver.solve(rhs.values(), y.values()), doctest::Contains("2"),
                         std::runtime_error);
  }
}

TEST_CASE("Poincare constant") {
  SUBCASE("(0, pi)") {
    const Grid g(oracle::pi, 199);
    const double exact = 1.0 / std::sqrt(oracle::discrete_eigenvalue_1d(1, oracle::pi, 199));
    CHECK(std::fabs(poincare_constant(g) - exact) <= 1e-10);
    CHECK(std::fabs(poincare_constant(g) - 1.0) <= 1e-4);
  }
  SUBCASE("(0, 1)") {
    const Grid g(1.0, 199);
    const double exact = 1.0 / std::sqrt(oracle::discrete_eigenvalue_1d(1, 1.0, 199));
    CHECK(std::fabs(poincare_constant(g) - exact) <= 1e-10);
    CHECK(std::fabs(poincare_constant(g) - 1.0 / oracle::pi) <= 1e-4);
  }
  SUBCASE("unit square") {
    const Grid g(1.0, 1.0, 39, 39);
    const double lam = 2.0 * oracle::discrete_eigenvalue_1d(1, 1.0, 39);
    CHECK(poincare_constant(g) == doctest::Approx(1.0 / std::sqrt(lam)).epsilon(1e-10));
    CHECK(std::fabs(poincare_constant(g) - 1.0 / (oracle::pi * std::sqrt(2.0))) <= 1e-3);
  }
  SUBCASE("inequality holds on random fields") {
    std::mt19937_64 rng(2);
    const Grid g(1.0, 40);
    const double cp = poincare_constant(g);
    for (int k = 0; k < 1000; ++k) {
      const Field f = random_field(g, rng);
      CHECK(lp_norm(f, 2.0) <= cp * std::sqrt(grad_norm_sq(f)) * (1.0 + 1e-12));
    }
    const Field ground = sample(g, [](double x, double) { return std::sin(oracle::pi * x); });
    CHECK(lp_norm(ground, 2.0) == doctest::Approx(cp * std::sqrt(grad_norm_sq(ground))).epsilon(1e-10));
  }
}
