#include "gbi/lp.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gbi/error.hpp"
#include "gbi/kernels.hpp"

namespace gbi::lp {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr int kDegenerateBeforeBland = 50;

class Tableau {
 public:
  Tableau(const Problem& p, const Options& opt)
      : opt_(opt),
        m_(p.rows.size()),
        n_(p.num_vars),
        width_(n_ + m_ + 1),
        cells_((m_ + 1) * width_, 0.0),
        basis_(m_),
        active_row_(m_, true) {
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = p.rhs[i] < 0.0 ? -1.0 : 1.0;
      double* r = row(i);
      for (std::size_t j = 0; j < n_; ++j) r[j] = sign * p.rows[i][j];
      r[n_ + i] = 1.0;
      r[rhs_col()] = sign * p.rhs[i];
      basis_[i] = n_ + i;
    }
  }

  // Minimizes the sum of artificials. Returns false when infeasible.
  bool phase_one() {
    double* z = row(m_);
    for (std::size_t j = 0; j < width_; ++j) z[j] = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      kernels::active().axpy(z, row(i), n_, -1.0);
      z[rhs_col()] -= row(i)[rhs_col()];
    }
    if (!iterate(n_ + m_)) return false;  // unbounded cannot happen in phase one
    if (-z[rhs_col()] > opt_.feasibility_tol) return false;
    drive_out_artificials();
    return true;
  }

  Status phase_two(const std::vector<double>& cost) {
    double* z = row(m_);
    for (std::size_t j = 0; j < width_; ++j) z[j] = 0.0;
    for (std::size_t j = 0; j < n_; ++j) z[j] = cost[j];
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_row_[i]) continue;
      const double cb = basis_[i] < n_ ? cost[basis_[i]] : 0.0;
      if (cb != 0.0) {
        kernels::active().axpy(z, row(i), width_, -cb);
      }
    }
    return iterate(n_) ? Status::Optimal : Status::Unbounded;
  }

  double objective() const { return -cells_[m_ * width_ + rhs_col()]; }

  std::vector<double> primal() const {
    std::vector<double> x(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (active_row_[i] && basis_[i] < n_) x[basis_[i]] = std::max(0.0, at(i, rhs_col()));
    }
    return x;
  }

 private:
  double* row(std::size_t i) { return cells_.data() + i * width_; }
  const double* row(std::size_t i) const { return cells_.data() + i * width_; }
  double at(std::size_t i, std::size_t j) const { return cells_[i * width_ + j]; }
  std::size_t rhs_col() const { return width_ - 1; }

  // Runs simplex pivots over entering columns [0, limit). False on unbounded.
  bool iterate(std::size_t limit) {
    int degenerate = 0;
    for (std::size_t pivots = 0; pivots < opt_.max_pivots; ++pivots) {
      const bool bland = degenerate >= kDegenerateBeforeBland;
      const std::size_t enter = choose_entering(limit, bland);
      if (enter == kNone) return true;
      const std::size_t leave = choose_leaving(enter);
      if (leave == kNone) return false;
      if (at(leave, rhs_col()) <= opt_.pivot_tol) {
        ++degenerate;
      } else {
        degenerate = 0;
      }
      pivot(leave, enter);
    }
    throw Error(ErrorCode::InfeasibleConstraintSet, "simplex pivot limit exceeded");
  }

  std::size_t choose_entering(std::size_t limit, bool bland) const {
    const double* z = row(m_);
    std::size_t best = kNone;
    double best_value = -opt_.cost_tol;
    for (std::size_t j = 0; j < limit; ++j) {
      if (z[j] < best_value) {
        best = j;
        if (bland) break;
        best_value = z[j];
      }
    }
    return best;
  }

  std::size_t choose_leaving(std::size_t enter) const {
    std::size_t best = kNone;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_row_[i]) continue;
      const double a = at(i, enter);
      if (a <= opt_.pivot_tol) continue;
      const double ratio = at(i, rhs_col()) / a;
      if (ratio < best_ratio - 1e-15 ||
          (std::abs(ratio - best_ratio) <= 1e-15 && best != kNone && basis_[i] < basis_[best])) {
        best = i;
        best_ratio = ratio;
      }
    }
    return best;
  }

  void pivot(std::size_t r, std::size_t e) {
    const auto& k = kernels::active();
    double* pr = row(r);
    k.scale(pr, width_, 1.0 / pr[e]);
    pr[e] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* ri = row(i);
      const double f = ri[e];
      if (f == 0.0) continue;
      k.axpy(ri, pr, width_, -f);
      ri[e] = 0.0;
    }
    basis_[r] = e;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      std::size_t col = kNone;
      double best = opt_.pivot_tol * 100;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(at(i, j)) > best) {
          best = std::abs(at(i, j));
          col = j;
        }
      }
      if (col == kNone) {
        active_row_[i] = false;  // redundant equality
      } else {
        pivot(i, col);
      }
    }
  }

  const Options& opt_;
  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  std::vector<double> cells_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_row_;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  if (problem.rows.size() != problem.rhs.size() || problem.cost.size() != problem.num_vars) {
    throw Error(ErrorCode::InvalidArgument, "linear program dimensions disagree");
  }
  for (const auto& r : problem.rows) {
    if (r.size() != problem.num_vars) {
      throw Error(ErrorCode::InvalidArgument, "linear program row has wrong width");
    }
  }
  Tableau t(problem, options);
  Solution s;
  if (!t.phase_one()) {
    s.status = Status::Infeasible;
    return s;
  }
  s.status = t.phase_two(problem.cost);
  if (s.status == Status::Optimal) {
    s.objective = t.objective();
    s.x = t.primal();
  }
  return s;
}

}  // namespace gbi::lp
