#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "gbi/lp.hpp"

using namespace gbi;

namespace {

// Solves the square system by partial-pivot elimination; false if singular.
bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (std::abs(a[p][c]) < 1e-10) return false;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

// Minimum over all basic feasible solutions; +inf when none exists.
double vertex_oracle(const lp::Problem& p) {
  const std::size_t m = p.rows.size();
  const std::size_t n = p.num_vars;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t cols = 0; cols < (1U << n); ++cols) {
    if (static_cast<std::size_t>(__builtin_popcount(cols)) != m) continue;
    std::vector<std::size_t> basis;
    for (std::size_t j = 0; j < n; ++j) {
      if ((cols >> j) & 1U) basis.push_back(j);
    }
    std::vector<std::vector<double>> a(m, std::vector<double>(m));
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t k = 0; k < m; ++k) a[r][k] = p.rows[r][basis[k]];
    }
    std::vector<double> xb;
    if (!solve_square(a, p.rhs, xb)) continue;
    bool feasible = true;
    double obj = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (xb[k] < -1e-9) feasible = false;
      obj += p.cost[basis[k]] * xb[k];
    }
    if (feasible) best = std::min(best, obj);
  }
  return best;
}

}  // namespace

TEST_CASE("simplex matches vertex enumeration on random bounded LPs") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  int optimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng() % 5;
    const std::size_t extra = rng() % 3;
    lp::Problem p;
    p.num_vars = n;
    std::vector<double> x0(n);
    for (auto& x : x0) x = pos(rng) < 0.3 ? 0.0 : pos(rng);
    p.add_row(std::vector<double>(n, 1.0), std::accumulate(x0.begin(), x0.end(), 0.0));
    for (std::size_t r = 0; r < extra; ++r) {
      std::vector<double> row(n);
      double b = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = u(rng);
        b += row[j] * x0[j];
      }
      p.add_row(row, b);
    }
    p.cost.resize(n);
    for (auto& c : p.cost) c = u(rng);
    const auto sol = lp::solve(p);
    const double want = vertex_oracle(p);
    if (!std::isfinite(want)) continue;  // rank-deficient draw
    REQUIRE(sol.status == lp::Status::Optimal);
    CHECK(sol.objective == doctest::Approx(want).epsilon(1e-9));
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < n; ++j) lhs += p.rows[r][j] * sol.x[j];
      CHECK(std::abs(lhs - p.rhs[r]) < 1e-9);
    }
    for (double x : sol.x) CHECK(x >= -1e-12);
    ++optimal;
  }
  CHECK(optimal > 250);
}

TEST_CASE("simplex detects infeasibility and unboundedness") {
  lp::Problem p;
  p.num_vars = 2;
  p.add_row({1.0, 1.0}, -1.0);
  p.cost = {1.0, 1.0};
  CHECK(lp::solve(p).status == lp::Status::Infeasible);

  lp::Problem q;
  q.num_vars = 2;
  q.add_row({1.0, -1.0}, 0.0);
  q.cost = {-1.0, 0.0};
  CHECK(lp::solve(q).status == lp::Status::Unbounded);
}

TEST_CASE("simplex tolerates redundant and degenerate rows") {
  // Probability simplex over four atoms with a duplicated row and a row at
  // its bound: maximize atom 3 subject to atom 3 + atom 1 = 0.25.
  lp::Problem p;
  p.num_vars = 4;
  p.add_row({1, 1, 1, 1}, 1.0);
  p.add_row({1, 1, 1, 1}, 1.0);
  p.add_row({0, 1, 0, 1}, 0.25);
  p.add_row({0, 0, 0, 0}, 0.0);
  p.cost = {0, 0, 0, -1};
  const auto s = lp::solve(p);
  REQUIRE(s.status == lp::Status::Optimal);
  CHECK(s.objective == doctest::Approx(-0.25));
}
