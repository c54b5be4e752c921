#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "kvwave/model.hpp"

using namespace kvwave;

TEST_CASE("stiffness law examples") {
  CHECK(kirchhoff_M(0.0, Material{1.0, 0.5, 1.0}) == 1.0);
  CHECK(kirchhoff_M(2.0, Material{1.0, 0.5, 2.0}) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(kirchhoff_M(1.0, Material{2.0, 0.0, 1.0}) == 2.0);
  CHECK_THROWS_AS(kirchhoff_M(-1e-3, Material{}), std::domain_error);
}

TEST_CASE("stiffness law is nondecreasing and bounded below by m0") {
  const Material mat{0.7, 0.3, 1.5};
  double prev = kirchhoff_M(0.0, mat);
  for (int i = 1; i <= 1000; ++i) {
    const double m = kirchhoff_M(0.01 * i, mat);
    CHECK(m >= prev);
    CHECK(m >= mat.m0);
    prev = m;
  }
}

TEST_CASE("material validation") {
  CHECK_NOTHROW(Material{1.0, 0.1, 1.0}.validate());
  try {
    Material{0.0, 0.1, 1.0}.validate();
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("(A1)") != std::string::npos);
  }
  CHECK_THROWS_AS((Material{1.0, -0.1, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Material{1.0, 0.1, 0.5}.validate()), std::invalid_argument);
}

TEST_CASE("exponent admissibility") {
  CHECK(admissible_p(1, 3.0));
  CHECK(admissible_p(2, -0.5));
  CHECK(admissible_p(3, 0.0));
  CHECK_FALSE(admissible_p(3, 1.0));
  CHECK_FALSE(admissible_p(1, -1.0));
  CHECK_FALSE(admissible_p(4, -0.4));  // (3-4)/(4-2) = -0.5
  CHECK(admissible_p(4, -0.5));

  Coupling c;
  c.p = -1.5;
  try {
    c.validate();
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("-1 < p") != std::string::npos);
  }
  c = Coupling{};
  c.n = 3;
  c.p = 1.0;
  try {
    c.validate();
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("(3-n)/(n-2) = 0") != std::string::npos);
  }
}

TEST_CASE("coupling examples") {
  const Coupling c{1.0, 1.0, 0.0, 1};
  CHECK(coupling_f1(0, 0, c) == 0.0);
  CHECK(coupling_f1(1, 1, c) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(coupling_f1(1, 0, c) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(coupling_f2(0, 0, c) == 0.0);
  CHECK(coupling_f2(1, 1, c) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(coupling_f2(0, 1, c) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(coupling_F(0, 0, c) == 0.0);
  CHECK(coupling_F(1, 1, c) == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(coupling_F(1, -1, c) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("negative exponent extends by zero at the origin") {
  const Coupling c{1.0, 1.0, -0.5, 1};
  CHECK(coupling_f1(0.0, 0.3, c) == doctest::Approx(std::pow(0.3, 2.0)).epsilon(1e-14));
  CHECK(std::isfinite(coupling_f2(0.3, 0.0, c)));
  CHECK(coupling_f1(0.0, 0.0, c) == 0.0);
  CHECK(signed_pow(0.0, 0.5) == 0.0);
  CHECK(signed_pow(-8.0, 1.0 / 3.0) == doctest::Approx(-2.0));
}

TEST_CASE("Euler identity u f1 + v f2 = 2(p+2) F") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::uniform_int_distribution<int> pick(0, 9);
  for (double p : {-0.5, 0.0, 1.0, 2.0, 2.5}) {
    const Coupling c{1.0, 1.0, p, 1};
    for (int i = 0; i < 1000; ++i) {
      double u = val(rng), v = val(rng);
      const int k = pick(rng);
      if (k == 0) u = 0.0;
      if (k == 1) v = 0.0;
      if (k == 2) v = -u;
      const double lhs = u * coupling_f1(u, v, c) + v * coupling_f2(u, v, c);
      const double rhs = 2.0 * (p + 2.0) * coupling_F(u, v, c);
      const double scale = std::fabs(u * coupling_f1(u, v, c)) + std::fabs(v * coupling_f2(u, v, c));
      CHECK(std::fabs(lhs - rhs) <= 1e-12 * scale + 1e-300);
    }
  }
}

TEST_CASE("2(p+2) F is a potential for (f1, f2)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> val(-1.5, 1.5);
  const double h = 1e-6;
  for (double p : {-0.5, 0.0, 1.0, 2.0}) {
    const Coupling c{1.0, 1.0, p, 1};
    for (int i = 0; i < 200; ++i) {
      const double u = val(rng), v = val(rng);
      if (std::fabs(u) < 0.05 || std::fabs(v) < 0.05 || std::fabs(u + v) < 0.05) continue;
      const double du = (coupling_F(u + h, v, c) - coupling_F(u - h, v, c)) / (2 * h);
      const double dv = (coupling_F(u, v + h, c) - coupling_F(u, v - h, c)) / (2 * h);
      CHECK(du == doctest::Approx(coupling_f1(u, v, c)).epsilon(1e-5));
      CHECK(dv == doctest::Approx(coupling_f2(u, v, c)).epsilon(1e-5));
    }
  }
}

TEST_CASE("component symmetry") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  for (double p : {0.0, 0.5, 1.0}) {
    const Coupling c{0.7, 1.3, p, 2};
    for (int i = 0; i < 500; ++i) {
      const double u = val(rng), v = val(rng);
      CHECK(coupling_f1(u, v, c) == coupling_f2(v, u, c));
      CHECK(coupling_F(u, v, c) == coupling_F(v, u, c));
      CHECK(coupling_F(u, v, c) >= 0.0);
    }
  }
}

TEST_CASE("non-finite input propagates") {
  const Coupling c{1.0, 1.0, 1.0, 1};
  CHECK_FALSE(std::isfinite(coupling_f1(NAN, 1.0, c)));
  CHECK_FALSE(std::isfinite(coupling_F(INFINITY, 1.0, c)));
}
