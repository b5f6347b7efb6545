#include <cmath>

#include "doctest.h"
#include "gbi/dist.hpp"
#include "gbi/error.hpp"
#include "gbi/maxent.hpp"

using namespace gbi;

TEST_CASE("no constraints gives the uniform distribution on the support") {
  std::vector<bool> support(8, true);
  support[3] = false;
  const auto r = max_entropy(3, {}, support, {});
  CHECK(r.converged);
  for (std::size_t a = 0; a < 8; ++a) CHECK(r.atoms[a] == doctest::Approx(a == 3 ? 0.0 : 1.0 / 7));
}

TEST_CASE("marginal constraints give the product distribution") {
  const std::vector<ConjunctionConstraint> c{{0b001, 0.3}, {0b010, 0.6}, {0b100, 0.85}};
  const auto r = max_entropy(3, c, std::vector<bool>(8, true), {});
  REQUIRE(r.converged);
  for (AtomIndex a = 0; a < 8; ++a) {
    const double want = (a & 1 ? 0.3 : 0.7) * (a & 2 ? 0.6 : 0.4) * (a & 4 ? 0.85 : 0.15);
    CHECK(r.atoms[a] == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("all pairs fixed: triple conjunction matches the one-dimensional entropy maximum") {
  // Atoms are affine in t = Pr(abc); the reference root of dH/dt was found
  // with Brent's method.
  const std::vector<ConjunctionConstraint> c{{0b001, 0.5},  {0b010, 0.4},  {0b011, 0.25},
                                             {0b100, 0.55}, {0b101, 0.3},  {0b110, 0.28}};
  const auto r = max_entropy(3, c, std::vector<bool>(8, true), {});
  REQUIRE(r.converged);
  CHECK(std::abs(r.atoms[7] - 0.17943698319400372) < 1e-9);
}

TEST_CASE("an empty support is infeasible") {
  CHECK_THROWS_AS(max_entropy(2, {}, std::vector<bool>(4, false), {}), Error);
  CHECK_THROWS_AS(max_entropy(2, {}, std::vector<bool>(3, true), {}), Error);
}
