// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>

#include "dcwhash/distances.hpp"
#include "dcwhash/error.hpp"
#include "support/oracles.hpp"

using namespace dcwhash;

namespace {

std::vector<double> col(const Matrix& m, std::size_t c) { return m.column(c); }

Matrix integer_matrix(std::mt19937_64& gen, std::size_t r, std::size_t c) {
  std::uniform_int_distribution<int> u(-4, 4);
  Matrix m(r, c);
  for (double& v : m.values()) v = u(gen);
  return m;
}

// Smallest |a_(j) - b_(j)| over sorted columns, i.e. over the matched pairs.
double min_matched_gap(const Matrix& a, const Matrix& b) {
  double gap = 1e300;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    auto x = a.column(c), y = b.column(c);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    for (std::size_t i = 0; i < x.size(); ++i) gap = std::min(gap, std::abs(x[i] - y[i]));
  }
  return gap;
}

}  // namespace

TEST_CASE("wasserstein_1d hand examples") {
  const std::vector<double> a{1, 2, 3};
  for (int p : {1, 2}) {
    CHECK(wasserstein_1d(a, a, p, Mode::kLoss) == 0.0);
    CHECK(wasserstein_1d(a, a, p, Mode::kDistance) == 0.0);
  }
  CHECK(wasserstein_1d(std::vector<double>{0, 0}, std::vector<double>{1, 1}, 1, Mode::kLoss) == 1.0);
  const std::vector<double> x{0, 1, 2}, y{0, 0, 3};
  CHECK(wasserstein_1d(x, y, 1, Mode::kLoss) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(oracle::brute_force_1d(x, y, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // p = 2 distance is the root of the loss
  CHECK(wasserstein_1d(std::vector<double>{0}, std::vector<double>{3}, 2, Mode::kDistance) == 3.0);
}

TEST_CASE("wasserstein_1d errors") {
  CHECK_THROWS_AS(wasserstein_1d(std::vector<double>{1}, std::vector<double>{1, 2}, 1, Mode::kLoss),
                  SizeError);
  CHECK_THROWS_AS(wasserstein_1d(std::vector<double>{1}, std::vector<double>{1}, 3, Mode::kLoss),
                  UsageError);
}

TEST_CASE("wasserstein_1d agrees with permutation brute force") {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<int> size(1, 7);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = size(gen);
    const int p = 1 + t % 2;
    const Matrix a = oracle::random_matrix(gen, n, 1), b = oracle::random_matrix(gen, n, 1);
    CHECK(std::abs(wasserstein_1d(col(a, 0), col(b, 0), p, Mode::kLoss) -
                   oracle::brute_force_1d(col(a, 0), col(b, 0), p)) <= 1e-12);
  }
}

TEST_CASE("dcw hand examples and the marginal counterexample") {
  const Matrix z{{0, 0}, {0, 0}}, o{{1, 1}, {1, 1}};
  const auto r = dcw(z, o, 1, Mode::kLoss);
  CHECK(r.value == 1.0);
  CHECK(r.per_dim == std::vector<double>{1.0, 1.0});
  const auto same = dcw(o, o, 2, Mode::kDistance);
  CHECK(same.value == 0.0);

  const Matrix d{{0, 1}, {1, 0}}, f{{0, 0}, {1, 1}};
  CHECK(dcw(d, f, 1, Mode::kLoss).value == 0.0);
  CHECK(dcw(d, f, 1, Mode::kDistance).value == 0.0);
  CHECK(ot_exact(d, f, 1).mean_cost == 1.0);
  CHECK(oracle::brute_force_ot(d, f, 1) == 1.0);
  CHECK_THROWS_AS(dcw(Matrix(2, 2), Matrix(2, 3), 1, Mode::kLoss), SizeError);
  CHECK_THROWS_AS(dcw(Matrix(2, 2), Matrix(3, 2), 1, Mode::kLoss), SizeError);
}

TEST_CASE("dcw identity characterization") {
  std::mt19937_64 gen(4);
  for (int t = 0; t < 50; ++t) {
    const Matrix a = oracle::random_matrix(gen, 6, 3);
    // Shuffle each column independently: same marginals, different joint sample.
    Matrix b = a;
    for (std::size_t c = 0; c < 3; ++c) {
      auto v = a.column(c);
      std::shuffle(v.begin(), v.end(), gen);
      for (std::size_t r = 0; r < 6; ++r) b(r, c) = v[r];
    }
    CHECK(dcw(a, b, 1, Mode::kDistance).value == 0.0);
    CHECK(dcw(a, b, 2, Mode::kDistance).value == 0.0);
    // Any change to one column's multiset makes it positive.
    Matrix c = b;
    c(0, t % 3) += 0.5;
    CHECK(dcw(a, c, 1, Mode::kDistance).value > 0.0);
  }
}

TEST_CASE("dcw lower-bounds exact OT") {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 100; ++t) {
    const int p = 1 + t % 2;
    const Matrix a = oracle::random_matrix(gen, 12, 4), b = oracle::random_matrix(gen, 12, 4);
    // Exact OT uses the summed cost over coordinates; dcw averages, so compare
    // m * dcw against it.
    CHECK(4.0 * dcw(a, b, p, Mode::kLoss).value <= ot_exact(a, b, p).mean_cost + 1e-12);
  }
}

TEST_CASE("wasserstein_1d equals one-dimensional exact OT") {
  std::mt19937_64 gen(13);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + t % 7;
    const int p = 1 + t % 2;
    const Matrix a = integer_matrix(gen, n, 1), b = integer_matrix(gen, n, 1);
    CHECK(wasserstein_1d(col(a, 0), col(b, 0), p, Mode::kLoss) == ot_exact(a, b, p).mean_cost);
    const Matrix x = oracle::random_matrix(gen, n, 1), y = oracle::random_matrix(gen, n, 1);
    CHECK(std::abs(wasserstein_1d(col(x, 0), col(y, 0), p, Mode::kLoss) -
                   ot_exact(x, y, p).mean_cost) <= 1e-12);
  }
}

TEST_CASE("swd examples") {
  std::mt19937_64 gen(2);
  const Matrix a = oracle::random_matrix(gen, 9, 2), b = oracle::random_matrix(gen, 9, 2);
  const auto proj = sample_projections(2, 7, 99);
  CHECK(swd(a, a, proj, 2, Mode::kLoss) == 0.0);

  ProjectionSet first{Matrix{{1, 0}}};
  CHECK(swd(a, b, first, 1, Mode::kLoss) == wasserstein_1d(col(a, 0), col(b, 0), 1, Mode::kLoss));
  CHECK(swd(a, b, axis_projections(2), 2, Mode::kLoss) == dcw(a, b, 2, Mode::kLoss).value);
  CHECK_THROWS_AS(swd(a, b, sample_projections(3, 2, 1), 2, Mode::kLoss), SizeError);
}

TEST_CASE("dcw equals swd over axis projections bit for bit") {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<std::size_t> nd(1, 64), md(1, 32);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = nd(gen), m = md(gen);
    const int p = 1 + t % 2;
    const Mode mode = t % 3 ? Mode::kLoss : Mode::kDistance;
    const Matrix a = oracle::random_matrix(gen, n, m, 0, 1), b = oracle::random_matrix(gen, n, m, 0, 1);
    CHECK(dcw(a, b, p, mode).value == swd(a, b, axis_projections(m), p, mode));
    if (mode == Mode::kLoss) {
      CHECK(dcw_backward(a, b, p).grad == swd_backward(a, b, axis_projections(m), p).grad);
    }
  }
}

TEST_CASE("sample_projections") {
  const auto a = sample_projections(5, 50, 7);
  const auto b = sample_projections(5, 50, 7);
  CHECK(a.directions == b.directions);
  CHECK_FALSE(a.directions == sample_projections(5, 50, 8).directions);
  for (std::size_t k = 0; k < a.count(); ++k) {
    double s = 0.0;
    for (double v : a.directions.row(k)) s += v * v;
    CHECK(std::abs(std::sqrt(s) - 1.0) <= 1e-12);
  }
  const std::size_t n_omega = 20000;
  const auto many = sample_projections(2, n_omega, 3);
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n_omega; ++k) {
    mx += many.directions(k, 0);
    my += many.directions(k, 1);
  }
  const double bound = 5.0 / std::sqrt(static_cast<double>(n_omega));
  CHECK(std::hypot(mx, my) / n_omega < bound);
  CHECK_THROWS_AS(sample_projections(2, 0, 1), UsageError);
}

TEST_CASE("ot_exact examples and brute force") {
  std::mt19937_64 gen(31);
  const Matrix a = oracle::random_matrix(gen, 6, 3);
  const std::vector<std::size_t> rev{5, 4, 3, 2, 1, 0};
  CHECK(ot_exact(a, a.gather_rows(rev), 2).mean_cost == 0.0);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 1 + t % 7, m = 1 + t % 4;
    const int p = 1 + t % 2;
    const Matrix d = oracle::random_matrix(gen, n, m), f = oracle::random_matrix(gen, n, m);
    const auto r = ot_exact(d, f, p);
    CHECK(std::abs(r.mean_cost - oracle::brute_force_ot(d, f, p)) <= 1e-9);
    // the plan is a bijection whose cost is the reported total
    std::vector<char> seen(n, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = r.plan.permutation[i];
      REQUIRE(j < n);
      CHECK_FALSE(seen[j]);
      seen[j] = 1;
      for (std::size_t k = 0; k < m; ++k) total += oracle::ipow(f(i, k) - d(j, k), p);
    }
    CHECK(std::abs(total - r.plan.total_cost) <= 1e-12);
  }
  CHECK_THROWS_AS(ot_exact(Matrix(kMaxExactOtSize + 1, 1), Matrix(kMaxExactOtSize + 1, 1), 1),
                  CapacityError);
}

TEST_CASE("gradient hand examples") {
  const auto g = dcw_backward(Matrix{{0.0}}, Matrix{{2.0}}, 2);
  CHECK(g.loss == 4.0);
  CHECK(g.grad(0, 0) == 4.0);
  std::mt19937_64 gen(6);
  const Matrix a = oracle::random_matrix(gen, 5, 3);
  const Matrix zero(5, 3);
  CHECK(dcw_backward(a, a, 2).grad == zero);
  CHECK(dcw_backward(a, a, 1).grad == zero);
  CHECK(ot_backward(a, a, 2).grad == zero);
  const auto one = ot_backward(Matrix{{1.0, 2.0}}, Matrix{{0.5, 4.0}}, 2);
  CHECK(one.grad == Matrix{{-1.0, 4.0}});
  const auto one_l1 = ot_backward(Matrix{{1.0, 2.0}}, Matrix{{0.5, 4.0}}, 1);
  CHECK(one_l1.grad == Matrix{{-1.0, 1.0}});
}

TEST_CASE("dcw_backward and ot_backward match central differences") {
  std::mt19937_64 gen(77);
  int checked = 0;
  while (checked < 20) {
    const std::size_t n = 2 + gen() % 7, m = 1 + gen() % 4;
    const int p = 1 + checked % 2;
    const Matrix d = oracle::random_matrix(gen, n, m), f = oracle::random_matrix(gen, n, m);
    if (oracle::min_column_gap(f) < 1e-3 || (p == 1 && min_matched_gap(d, f) < 1e-3)) continue;
    const auto analytic = dcw_backward(d, f, p);
    CHECK(analytic.loss == dcw(d, f, p, Mode::kLoss).value);
    const auto numeric = oracle::numeric_gradient(
        f, [&](const Matrix& x) { return dcw(d, x, p, Mode::kLoss).value; });
    CHECK(oracle::relative_error(analytic.grad.values(), numeric.values()) < 1e-4);

    const auto ot = ot_backward(d, f, p);
    const auto ot_numeric =
        oracle::numeric_gradient(f, [&](const Matrix& x) { return ot_exact(d, x, p).mean_cost; });
    CHECK(oracle::relative_error(ot.grad.values(), ot_numeric.values()) < 1e-4);
    ++checked;
  }
}

TEST_CASE("dcw distance mode is a pseudometric") {
  std::mt19937_64 gen(41);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + gen() % 32, m = 1 + gen() % 8;
    const int p = 1 + t % 2;
    const Matrix a = oracle::random_matrix(gen, n, m), b = oracle::random_matrix(gen, n, m),
                 c = oracle::random_matrix(gen, n, m);
    const double ab = dcw(a, b, p, Mode::kDistance).value;
    const double ba = dcw(b, a, p, Mode::kDistance).value;
    const double bc = dcw(b, c, p, Mode::kDistance).value;
    const double ac = dcw(a, c, p, Mode::kDistance).value;
    CHECK(ab >= 0.0);
    CHECK(std::abs(ab - ba) <= 1e-9);
    CHECK(ac <= ab + bc + 1e-9);
  }
}
