#pragma once

// Small dense linear programs: minimize c·x subject to A x = b, x >= 0.
//
// A two-phase tableau simplex. Entering columns are chosen by most negative
// reduced cost, falling back to Bland's rule after a run of degenerate pivots
// so that the highly degenerate probability polytopes cannot cycle.

#include <cstddef>
#include <vector>

namespace gbi::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Problem {
  std::size_t num_vars = 0;
  // Row-major, rows.size() == rhs.size(), each row num_vars wide.
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<double> cost;

  void add_row(std::vector<double> row, double value) {
    rows.push_back(std::move(row));
    rhs.push_back(value);
  }
};

struct Options {
  // Phase-one objective above this means infeasible.
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-11;
  double cost_tol = 1e-11;
  std::size_t max_pivots = 200000;
};

struct Solution {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

Solution solve(const Problem& problem, const Options& options = {});

}  // namespace gbi::lp
