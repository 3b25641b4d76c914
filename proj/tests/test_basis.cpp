#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dfk/basis.hpp"
#include "dfk/errors.hpp"

using namespace dfk;

TEST_SUITE("basis") {

TEST_CASE("polynomial_count matches binomial formula") {
  CHECK(polynomial_count(2, 6) == 28);
  CHECK(polynomial_count(1, 6) == 7);
  CHECK(polynomial_count(2, 0) == 1);
  CHECK(polynomial_count(4, 3) == 35);
  CHECK(polynomial_count(4, 4) == 70);
  CHECK(polynomial_count(3, 2) == 10);
}

TEST_CASE("graded order starts 1, p1, p2, p1^2, p1 p2, p2^2") {
  auto b = polynomial_basis(2, 6);
  REQUIRE(b.m == 28);
  auto exp_at = [&](std::size_t i, std::size_t j) { return b.exponents[i * 2 + j]; };
  // grade 0
  CHECK(exp_at(0, 0) == 0); CHECK(exp_at(0, 1) == 0);
  // grade 1: p1 then p2
  CHECK(exp_at(1, 0) == 1); CHECK(exp_at(1, 1) == 0);
  CHECK(exp_at(2, 0) == 0); CHECK(exp_at(2, 1) == 1);
  // grade 2: p1^2, p1 p2, p2^2
  CHECK(exp_at(3, 0) == 2); CHECK(exp_at(3, 1) == 0);
  CHECK(exp_at(4, 0) == 1); CHECK(exp_at(4, 1) == 1);
  CHECK(exp_at(5, 0) == 0); CHECK(exp_at(5, 1) == 2);
  // last function is the pure power of the trailing coordinate
  CHECK(exp_at(27, 0) == 0); CHECK(exp_at(27, 1) == 6);
}

TEST_CASE("evaluate computes monomials exactly") {
  auto b = polynomial_basis(2, 2);
  const double p[] = {2.0, -3.0};
  double out[6];
  b.evaluate(p, out);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 2.0);
  CHECK(out[2] == -3.0);
  CHECK(out[3] == 4.0);
  CHECK(out[4] == -6.0);
  CHECK(out[5] == 9.0);
}

TEST_CASE("lipschitz bound for p1^2 on [-2,2]^2 is 4") {
  auto b = polynomial_basis(2, 2);
  auto k = b.lipschitz_on_box({-2.0, -2.0}, {2.0, 2.0});
  CHECK(k[0] == 0.0);        // constant
  CHECK(k[1] == 1.0);        // p1
  CHECK(k[2] == 1.0);        // p2
  CHECK(k[3] == 4.0);        // p1^2: sup |2 p1| = 4
  CHECK(k[4] == 4.0);        // p1 p2: |p2| + |p1| <= 4 at the corner
  CHECK(k[5] == 4.0);        // p2^2
}

TEST_CASE("lipschitz bound dominates finite differences inside the box") {
  auto b = polynomial_basis(2, 4);
  std::vector<double> lo = {-1.5, -0.5}, hi = {1.0, 2.0};
  auto k = b.lipschitz_on_box(lo, hi);
  std::vector<double> fa(b.m), fb(b.m);
  // Deterministic lattice of point pairs.
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int i2 = 0; i2 < 5; ++i2)
        for (int j2 = 0; j2 < 5; ++j2) {
          double a[2] = {lo[0] + (hi[0] - lo[0]) * i / 4.0,
                         lo[1] + (hi[1] - lo[1]) * j / 4.0};
          double c[2] = {lo[0] + (hi[0] - lo[0]) * i2 / 4.0,
                         lo[1] + (hi[1] - lo[1]) * j2 / 4.0};
          b.evaluate(a, fa.data());
          b.evaluate(c, fb.data());
          const double dist = std::max(std::fabs(a[0] - c[0]), std::fabs(a[1] - c[1]));
          for (std::size_t f = 0; f < b.m; ++f)
            CHECK(std::fabs(fa[f] - fb[f]) <= k[f] * dist + 1e-12);
        }
}

TEST_CASE("gaussian family evaluates and bounds slope") {
  auto b = gaussian_basis(1, {0.0, 1.0}, {0.5, 0.5});
  double out[2];
  const double p = 0.5;
  b.evaluate(&p, out);
  CHECK(out[0] == doctest::Approx(std::exp(-0.25 / (2 * 0.25))));
  CHECK(out[1] == out[0]);
  auto k = b.lipschitz_on_box({-2.0}, {2.0});
  // Max slope of exp(-p^2/(2 w^2)) is 1/(w sqrt(e)).
  CHECK(k[0] == doctest::Approx(1.0 / (0.5 * std::sqrt(std::exp(1.0)))));
  // Bound must dominate a dense finite-difference scan.
  double worst = 0.0;
  for (int i = 0; i < 400; ++i) {
    double a = -2.0 + i * 0.01, c = a + 0.01;
    double fa, fc;
    b.evaluate(&a, &fa);
    b.evaluate(&c, &fc);
    worst = std::max(worst, std::fabs(fa - fc) / 0.01);
  }
  CHECK(worst <= k[0] + 1e-9);
}

TEST_CASE("serialize round-trips both families") {
  auto poly = polynomial_basis(2, 6);
  std::stringstream ss;
  poly.serialize(ss);
  auto poly2 = BasisSet::deserialize(ss);
  CHECK(poly2 == poly);

  auto gauss = gaussian_basis(2, {0.25, -1.0, 0.125, 2.0}, {0.7071, 1.5});
  std::stringstream sg;
  gauss.serialize(sg);
  auto gauss2 = BasisSet::deserialize(sg);
  CHECK(gauss2 == gauss);
}

TEST_CASE("invalid construction is rejected") {
  CHECK_THROWS_AS(polynomial_basis(0, 3), ConfigError);
  CHECK_THROWS_AS(gaussian_basis(2, {0.0, 0.0}, {0.0}), ConfigError);
  CHECK_THROWS_AS(gaussian_basis(2, {0.0}, {1.0}), ConfigError);
}

}  // TEST_SUITE
