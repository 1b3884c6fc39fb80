#include "bpmm/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bpmm {

namespace {
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;
constexpr int kDegenerateRunBeforeBland = 32;
using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}  // namespace

LpSolution solve_lp(const LinearProgram& lp, int max_pivots) {
  const auto m = lp.a.rows();
  const auto n = lp.a.cols();
  if (lp.b.size() != m || lp.c.size() != n) throw std::invalid_argument("solve_lp: dimension mismatch");
  if (m > 0 && lp.b.minCoeff() < 0.0) throw std::invalid_argument("solve_lp: b must be nonnegative");

  // Costs are rescaled to unit max so the tolerances are relative.
  const double scale = n > 0 ? std::max(lp.c.cwiseAbs().maxCoeff(), 1e-300) : 1.0;

  // Columns: n structural, m slack, then the right-hand side.
  Tableau t = Tableau::Zero(m, n + m + 1);
  t.leftCols(n) = lp.a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m) = lp.b;
  Eigen::RowVectorXd cost = Eigen::RowVectorXd::Zero(n + m + 1);
  cost.head(n) = lp.c.transpose() / scale;
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  LpSolution sol;
  int degenerate_run = 0;
  const Eigen::Index rhs = n + m;
  while (true) {
    const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
    Eigen::Index enter = -1;
    double best = kCostTol;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (cost(j) > best) {
        enter = j;
        if (bland) break;
        best = cost(j);
      }
    }
    if (enter < 0) break;
    if (sol.pivots >= max_pivots) {
      sol.status = LpStatus::IterationLimit;
      break;
    }
    Eigen::Index leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = t(i, enter);
      if (a <= kPivotTol) continue;
      const double r = t(i, rhs) / a;
      if (r < ratio - 1e-12 ||
          (r <= ratio + 1e-12 && leave >= 0 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        ratio = r;
        leave = i;
      }
    }
    if (leave < 0) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }
    degenerate_run = t(leave, rhs) <= kPivotTol ? degenerate_run + 1 : 0;

    t.row(leave) /= t(leave, enter);
    const Eigen::VectorXd column = t.col(enter);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i != leave && column(i) != 0.0) t.row(i) -= column(i) * t.row(leave);
    }
    const double c = cost(enter);
    cost -= c * t.row(leave);
    basis[static_cast<std::size_t>(leave)] = enter;
    ++sol.pivots;
  }

  sol.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = basis[static_cast<std::size_t>(i)];
    if (j < n) sol.x(j) = std::max(0.0, t(i, rhs));
  }
  sol.objective = lp.c.dot(sol.x);
  return sol;
}

}  // namespace bpmm
