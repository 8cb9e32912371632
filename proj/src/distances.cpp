// SPDX-License-Identifier: Apache-2.0
#include "dcwhash/distances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dcwhash/error.hpp"
#include "dcwhash/rng.hpp"

namespace dcwhash {
namespace {

void check_p(int p) {
  if (p != 1 && p != 2) throw UsageError("norm order p must be 1 or 2, got " + std::to_string(p));
}

void check_pair(const Matrix& d_sample, const Matrix& f_sample, const char* what) {
  if (d_sample.rows() != f_sample.rows()) {
    throw SizeError(std::string(what) + ": sample sizes differ (" +
                    std::to_string(d_sample.rows()) + " vs " + std::to_string(f_sample.rows()) +
                    ")");
  }
  if (d_sample.cols() != f_sample.cols()) {
    throw SizeError(std::string(what) + ": sample dimensions differ (" +
                    std::to_string(d_sample.cols()) + " vs " + std::to_string(f_sample.cols()) +
                    ")");
  }
  if (d_sample.rows() == 0) throw SizeError(std::string(what) + ": empty samples");
}

double pow_abs(double d, int p) { return p == 1 ? std::fabs(d) : d * d; }

// Gradient of scale * |diff|^p w.r.t. the generated value. Zero at ties.
double matched_grad(double diff, int p, double scale) {
  if (p == 1) return diff > 0.0 ? scale : (diff < 0.0 ? -scale : 0.0);
  return scale * (2.0 * diff);
}

// 1/(count*n), the weight of one matched pair in a mean-over-directions loss.
double pair_scale(std::size_t count, std::size_t n) {
  return 1.0 / (static_cast<double>(count) * static_cast<double>(n));
}

double finish(double sum, std::size_t n, int p, Mode mode) {
  const double mean = sum / static_cast<double>(n);
  if (mode == Mode::kLoss || p == 1) return mean;
  return std::sqrt(mean);
}

std::vector<std::size_t> argsort(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  return order;
}

std::vector<double> project(const Matrix& sample, std::span<const double> direction) {
  std::vector<double> out(sample.rows());
  for (std::size_t r = 0; r < sample.rows(); ++r) {
    const auto row = sample.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * direction[c];
    out[r] = acc;
  }
  return out;
}

// Adds the frozen-sort gradient of one slice into grad via `scatter`.
template <typename Scatter>
void slice_backward(std::span<const double> prior, std::span<const double> generated, int p,
                    double scale, std::vector<std::size_t>& prior_order,
                    std::vector<std::size_t>& generated_order, Scatter&& scatter) {
  prior_order = argsort(prior);
  generated_order = argsort(generated);
  for (std::size_t j = 0; j < generated.size(); ++j) {
    const std::size_t row = generated_order[j];
    scatter(row, matched_grad(generated[row] - prior[prior_order[j]], p, scale));
  }
}

}  // namespace

double wasserstein_1d(std::span<const double> a, std::span<const double> b, int p, Mode mode) {
  check_p(p);
  if (a.size() != b.size()) {
    throw SizeError("wasserstein_1d: sample sizes differ (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw SizeError("wasserstein_1d: empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double sum = 0.0;
  for (std::size_t j = 0; j < sa.size(); ++j) sum += pow_abs(sa[j] - sb[j], p);
  return finish(sum, sa.size(), p, mode);
}

DcwResult dcw(const Matrix& d_sample, const Matrix& f_sample, int p, Mode mode) {
  check_pair(d_sample, f_sample, "dcw");
  check_p(p);
  const std::size_t m = d_sample.cols();
  DcwResult out;
  out.per_dim.resize(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    out.per_dim[i] = wasserstein_1d(d_sample.column(i), f_sample.column(i), p, mode);
    sum += out.per_dim[i];
  }
  out.value = sum / static_cast<double>(m);
  return out;
}

DcwGradient dcw_backward(const Matrix& d_sample, const Matrix& f_sample, int p) {
  check_pair(d_sample, f_sample, "dcw_backward");
  check_p(p);
  const std::size_t n = f_sample.rows();
  const std::size_t m = f_sample.cols();
  const double scale = pair_scale(m, n);

  DcwGradient out;
  out.grad = Matrix(n, m);
  out.prior_order.resize(m);
  out.generated_order.resize(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto prior = d_sample.column(i);
    const auto generated = f_sample.column(i);
    sum += wasserstein_1d(prior, generated, p, Mode::kLoss);
    slice_backward(prior, generated, p, scale, out.prior_order[i], out.generated_order[i],
                   [&](std::size_t row, double g) { out.grad(row, i) += g; });
  }
  out.loss = sum / static_cast<double>(m);
  return out;
}

ProjectionSet sample_projections(std::size_t dims, std::size_t n_omega, std::uint64_t seed) {
  if (n_omega == 0) throw UsageError("sample_projections: n_omega must be at least 1");
  if (dims == 0) throw UsageError("sample_projections: dims must be at least 1");
  Rng rng = make_stream(seed, "projection");
  std::normal_distribution<double> normal(0.0, 1.0);
  ProjectionSet set{Matrix(n_omega, dims)};
  for (std::size_t k = 0; k < n_omega; ++k) {
    auto dir = set.directions.row(k);
    double norm = 0.0;
    while (!(norm > 0.0)) {
      norm = 0.0;
      for (double& v : dir) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
    }
    for (double& v : dir) v /= norm;
  }
  return set;
}

ProjectionSet axis_projections(std::size_t dims) {
  ProjectionSet set{Matrix(dims, dims)};
  for (std::size_t i = 0; i < dims; ++i) set.directions(i, i) = 1.0;
  return set;
}

double swd(const Matrix& d_sample, const Matrix& f_sample, const ProjectionSet& projections,
           int p, Mode mode) {
  check_pair(d_sample, f_sample, "swd");
  check_p(p);
  if (projections.dims() != d_sample.cols()) {
    throw SizeError("swd: projection dimension " + std::to_string(projections.dims()) +
                    " does not match sample dimension " + std::to_string(d_sample.cols()));
  }
  if (projections.count() == 0) throw UsageError("swd: empty projection set");
  double sum = 0.0;
  for (std::size_t k = 0; k < projections.count(); ++k) {
    const auto dir = projections.directions.row(k);
    sum += wasserstein_1d(project(d_sample, dir), project(f_sample, dir), p, mode);
  }
  return sum / static_cast<double>(projections.count());
}

SwdGradient swd_backward(const Matrix& d_sample, const Matrix& f_sample,
                         const ProjectionSet& projections, int p) {
  check_pair(d_sample, f_sample, "swd_backward");
  check_p(p);
  if (projections.dims() != d_sample.cols()) {
    throw SizeError("swd_backward: projection dimension mismatch");
  }
  if (projections.count() == 0) throw UsageError("swd_backward: empty projection set");
  const std::size_t n = f_sample.rows();
  const double scale = pair_scale(projections.count(), n);

  SwdGradient out{0.0, Matrix(n, f_sample.cols())};
  std::vector<std::size_t> prior_order, generated_order;
  double sum = 0.0;
  for (std::size_t k = 0; k < projections.count(); ++k) {
    const auto dir = projections.directions.row(k);
    const auto prior = project(d_sample, dir);
    const auto generated = project(f_sample, dir);
    sum += wasserstein_1d(prior, generated, p, Mode::kLoss);
    slice_backward(prior, generated, p, scale, prior_order, generated_order,
                   [&](std::size_t row, double g) {
                     auto grad_row = out.grad.row(row);
                     for (std::size_t c = 0; c < grad_row.size(); ++c) grad_row[c] += g * dir[c];
                   });
  }
  out.loss = sum / static_cast<double>(projections.count());
  return out;
}

Matrix cost_matrix(const Matrix& f_sample, const Matrix& d_sample, int p) {
  check_pair(d_sample, f_sample, "cost_matrix");
  check_p(p);
  const std::size_t n = f_sample.rows();
  Matrix cost(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = f_sample.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto z = d_sample.row(j);
      double c = 0.0;
      for (std::size_t d = 0; d < b.size(); ++d) c += pow_abs(b[d] - z[d], p);
      cost(i, j) = c;
    }
  }
  return cost;
}

OtResult ot_exact(const Matrix& d_sample, const Matrix& f_sample, int p) {
  check_pair(d_sample, f_sample, "ot_exact");
  if (f_sample.rows() > kMaxExactOtSize) {
    throw CapacityError("ot_exact: n=" + std::to_string(f_sample.rows()) +
                        " exceeds the exact solver limit of " + std::to_string(kMaxExactOtSize));
  }
  OtResult out;
  out.plan = solve_assignment(cost_matrix(f_sample, d_sample, p));
  out.mean_cost = out.plan.total_cost / static_cast<double>(f_sample.rows());
  return out;
}

OtGradient ot_backward(const Matrix& d_sample, const Matrix& f_sample, int p) {
  const OtResult ot = ot_exact(d_sample, f_sample, p);
  const std::size_t n = f_sample.rows();
  const double scale = 1.0 / static_cast<double>(n);
  OtGradient out{ot.mean_cost, Matrix(n, f_sample.cols())};
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = f_sample.row(i);
    const auto z = d_sample.row(ot.plan.permutation[i]);
    auto g = out.grad.row(i);
    for (std::size_t d = 0; d < b.size(); ++d) g[d] = matched_grad(b[d] - z[d], p, scale);
  }
  return out;
}

}  // namespace dcwhash
