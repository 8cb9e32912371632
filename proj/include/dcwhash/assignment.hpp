// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "dcwhash/matrix.hpp"

namespace dcwhash {

struct AssignmentPlan {
  std::vector<std::size_t> permutation;  // row i is matched to column permutation[i]
  double total_cost = 0.0;
};

// Exact minimum-cost perfect matching on a square cost matrix using the
// shortest augmenting path method with row/column potentials, O(n^3).
AssignmentPlan solve_assignment(const Matrix& cost);

}  // namespace dcwhash
