// SPDX-License-Identifier: Apache-2.0
// Independent reference implementations used as test oracles. Nothing here
// calls into the library's estimators.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "dcwhash/matrix.hpp"

namespace oracle {

using dcwhash::Matrix;

inline double ipow(double x, int p) { return p == 1 ? std::abs(x) : x * x; }

// Minimum over all n! bijections of the mean cost(i, perm[i]).
inline double brute_force_assignment(std::size_t n,
                                     const std::function<double(std::size_t, std::size_t)>& cost) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost(i, perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

// Mean |a_i - b_perm(i)|^p minimized over permutations.
inline double brute_force_1d(const std::vector<double>& a, const std::vector<double>& b, int p) {
  return brute_force_assignment(a.size(),
                                [&](std::size_t i, std::size_t j) { return ipow(a[i] - b[j], p); });
}

// Mean ||f_i - d_perm(i)||_p^p minimized over permutations.
inline double brute_force_ot(const Matrix& d, const Matrix& f, int p) {
  return brute_force_assignment(d.rows(), [&](std::size_t i, std::size_t j) {
    double c = 0.0;
    for (std::size_t k = 0; k < d.cols(); ++k) c += ipow(f(i, k) - d(j, k), p);
    return c;
  });
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (double& v : m.values()) v = u(rng);
  return m;
}

// Smallest gap between two values of the same column, used to stay away from
// rank changes when differencing sort-based losses.
inline double min_column_gap(const Matrix& a) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < a.cols(); ++c) {
    auto col = a.column(c);
    std::sort(col.begin(), col.end());
    for (std::size_t i = 1; i < col.size(); ++i) gap = std::min(gap, col[i] - col[i - 1]);
  }
  return gap;
}

// Central differences of f over every entry of x.
inline Matrix numeric_gradient(Matrix x, const std::function<double(const Matrix&)>& f,
                               double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x.values()[i];
    x.values()[i] = keep + h;
    const double up = f(x);
    x.values()[i] = keep - h;
    const double down = f(x);
    x.values()[i] = keep;
    g.values()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// max_i |a_i - b_i| / max(1, max_i |b_i|): relative to the gradient's scale, so
// entries that are legitimately zero do not blow up the ratio.
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / std::max(scale, 1e-8);
}

// AP straight from the definition with a double loop.
inline double naive_average_precision(const std::vector<int>& rel) {
  double nq = 0.0;
  for (int r : rel) nq += r;
  if (nq == 0.0) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (std::size_t r = 1; r <= rel.size(); ++r) {
    if (!rel[r - 1]) continue;
    double hits = 0.0;
    for (std::size_t k = 1; k <= r; ++k) hits += rel[k - 1];
    sum += hits / static_cast<double>(r);
  }
  return sum / nq;
}

inline std::size_t naive_hamming(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

}  // namespace oracle
