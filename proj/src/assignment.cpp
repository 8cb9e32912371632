// SPDX-License-Identifier: Apache-2.0
#include "dcwhash/assignment.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "dcwhash/error.hpp"

namespace dcwhash {

AssignmentPlan solve_assignment(const Matrix& cost) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) {
    throw DimensionError("assignment needs a square cost matrix, got " +
                         std::to_string(cost.rows()) + "x" + std::to_string(cost.cols()));
  }
  if (!cost.all_finite()) throw NumericError("assignment cost matrix has non-finite entries");

  AssignmentPlan plan;
  if (n == 0) return plan;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual source column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1);
  std::vector<std::size_t> row_of_col(n + 1, 0), prev_col(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    // Grow a shortest augmenting path from row i.
    row_of_col[0] = i;
    std::size_t col = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col] = 1;
      const std::size_t row = row_of_col[col];
      double delta = kInf;
      std::size_t next = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = cost(row - 1, j - 1) - u[row] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          prev_col[j] = col;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          next = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col = next;
    } while (row_of_col[col] != 0);
    // Flip the path.
    do {
      const std::size_t prev = prev_col[col];
      row_of_col[col] = row_of_col[prev];
      col = prev;
    } while (col != 0);
  }

  plan.permutation.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) plan.permutation[row_of_col[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) plan.total_cost += cost(i, plan.permutation[i]);
  return plan;
}

}  // namespace dcwhash
