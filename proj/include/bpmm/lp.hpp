#pragma once

#include <Eigen/Dense>

namespace bpmm {

/// maximize c'x  subject to  A x <= b, x >= 0, with b >= 0 so that the slack
/// basis is feasible and no phase 1 is needed.
struct LinearProgram {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class LpStatus { Optimal, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  double objective = 0.0;
  Eigen::VectorXd x;
  int pivots = 0;
};

/// Dense-tableau primal simplex. Dantzig pricing, switching to Bland's rule
/// after a run of degenerate pivots so it cannot cycle.
LpSolution solve_lp(const LinearProgram& lp, int max_pivots = 100000);

}  // namespace bpmm
