// SPDX-License-Identifier: Apache-2.0
//
// Empirical Wasserstein estimators between two equal-size samples, each a
// Matrix with one sample per row:
//
//   wasserstein_1d  sort both sides, pair by rank.
//   dcw             mean over coordinates of wasserstein_1d on each column.
//   swd             mean over projection directions of wasserstein_1d on the
//                   projected scalars. With the m one-hot directions it is
//                   the same computation as dcw, bit for bit.
//   ot_exact        exact assignment between the two samples.
//
// All estimators are normalized by the sample size N. In loss mode they
// return the mean p-th power cost; distance mode takes the p-th root.
// Gradients are taken w.r.t. the generated sample (f_sample) with the
// sort orders / assignment frozen.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcwhash/assignment.hpp"
#include "dcwhash/matrix.hpp"

namespace dcwhash {

enum class Mode { kDistance, kLoss };

double wasserstein_1d(std::span<const double> a, std::span<const double> b, int p, Mode mode);

struct DcwResult {
  double value = 0.0;
  std::vector<double> per_dim;
};

DcwResult dcw(const Matrix& d_sample, const Matrix& f_sample, int p, Mode mode);

struct DcwGradient {
  double loss = 0.0;
  Matrix grad;  // d loss / d f_sample
  // Per dimension, the stable ascending sort order of each sample's column.
  std::vector<std::vector<std::size_t>> prior_order;
  std::vector<std::vector<std::size_t>> generated_order;
};

DcwGradient dcw_backward(const Matrix& d_sample, const Matrix& f_sample, int p);

// Unit-norm directions stored as rows.
struct ProjectionSet {
  Matrix directions;

  std::size_t count() const { return directions.rows(); }
  std::size_t dims() const { return directions.cols(); }
};

// Isotropic Gaussian directions normalized to unit length.
ProjectionSet sample_projections(std::size_t dims, std::size_t n_omega, std::uint64_t seed);
// The dims one-hot directions, in coordinate order.
ProjectionSet axis_projections(std::size_t dims);

double swd(const Matrix& d_sample, const Matrix& f_sample, const ProjectionSet& projections,
           int p, Mode mode);

struct SwdGradient {
  double loss = 0.0;
  Matrix grad;
};

SwdGradient swd_backward(const Matrix& d_sample, const Matrix& f_sample,
                         const ProjectionSet& projections, int p);

// D_ij = ||f_i - d_j||_p^p, rows index the generated sample.
Matrix cost_matrix(const Matrix& f_sample, const Matrix& d_sample, int p);

constexpr std::size_t kMaxExactOtSize = 4096;

struct OtResult {
  double mean_cost = 0.0;
  AssignmentPlan plan;  // generated row i -> prior row plan.permutation[i]
};

OtResult ot_exact(const Matrix& d_sample, const Matrix& f_sample, int p);

struct OtGradient {
  double loss = 0.0;
  Matrix grad;
};

OtGradient ot_backward(const Matrix& d_sample, const Matrix& f_sample, int p);

}  // namespace dcwhash
