#pragma once

#include <vector>

#include <Eigen/Core>

namespace sdfield {

struct Assignment {
  std::vector<int> row_to_col;
  double cost = 0.0;
};

// Minimum-cost perfect matching on a square cost matrix (shortest augmenting
// paths with dual potentials, O(n^3)). The cost is re-summed from the
// matched entries.
Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace sdfield
