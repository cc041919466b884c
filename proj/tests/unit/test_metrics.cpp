#include <cmath>
#include <limits>
#include <vector>

#include "gnnrec/metrics.hpp"
#include "gnnrec/rng.hpp"
#include "helpers.hpp"

using namespace gnnrec;

namespace {

Matrix gaussian(Index r, Index c, Seed seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

}  // namespace

TEST_CASE("aligned relative error") {
  const Matrix w = gaussian(5, 4, 1);
  CHECK(aligned_relative_error(w, w).rel_error == 0.0);

  Matrix swapped = w;
  swapped.col(1).swap(swapped.col(3));
  CHECK(aligned_relative_error(swapped, w).rel_error == 0.0);

  // Signs are not quotiented.
  Matrix flipped = w;
  flipped.col(0) *= -1.0;
  CHECK(aligned_relative_error(flipped, w).rel_error > 0.0);

  CHECK_ERROR_CODE(aligned_relative_error(w, Matrix::Zero(5, 4)), ErrorCode::DegenerateReference);
  CHECK_ERROR_CODE(aligned_relative_error(w, Matrix::Ones(5, 3)), ErrorCode::InvalidShape);

  const double c = 3.7;
  const Matrix other = gaussian(5, 4, 2);
  CHECK(aligned_relative_error(c * other, c * w).rel_error ==
        doctest::Approx(aligned_relative_error(other, w).rel_error).epsilon(1e-13));
}

TEST_CASE("hungarian equals enumeration") {
  for (Seed s = 0; s < 200; ++s) {
    const Index k = 1 + static_cast<Index>(s % 6);
    const Matrix a = gaussian(4, k, 10 + s);
    const Matrix b = gaussian(4, k, 1000 + s);
    const double fast = aligned_relative_error(a, b).rel_error;
    const double slow = aligned_relative_error_brute_force(a, b).rel_error;
    CHECK(std::abs(fast - slow) <= 1e-12);
  }
  Matrix cost(3, 3);
  cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const auto assign = hungarian_assignment(cost);
  double total = 0.0;
  for (Index i = 0; i < 3; ++i) total += cost(i, assign[static_cast<std::size_t>(i)]);
  CHECK(total == 5.0);
}

TEST_CASE("alignment of a permuted, perturbed copy recovers the permutation") {
  const Matrix w = gaussian(8, 5, 3);
  const std::vector<Index> perm{3, 0, 4, 1, 2};
  Matrix p(8, 5);
  for (Index j = 0; j < 5; ++j) p.col(j) = w.col(perm[static_cast<std::size_t>(j)]);
  p += 1e-3 * gaussian(8, 5, 4);
  const auto r = aligned_relative_error(p, w);
  CHECK(r.permutation == perm);
  CHECK(r.rel_error < 1e-2);
}

TEST_CASE("success rate") {
  const std::vector<double> good(10, 1e-5);
  CHECK(success_rate(good) == 1.0);
  std::vector<double> half(good);
  half.insert(half.end(), 10, 1.0);
  CHECK(success_rate(half) == 0.5);
  CHECK(success_rate(std::vector<double>{1e-3}) == 0.0);
  CHECK_ERROR_CODE(success_rate(std::vector<double>{}), ErrorCode::EmptyList);
}

TEST_CASE("log-log slope") {
  const std::vector<double> xs{1, 10, 100, 1000};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(std::pow(x, -0.5));
  CHECK(std::abs(loglog_slope(xs, ys) + 0.5) <= 1e-12);
  CHECK(std::abs(loglog_slope(xs, std::vector<double>(4, 2.0))) <= 1e-12);
  CHECK_ERROR_CODE(loglog_slope(xs, std::vector<double>{1, 0, 1, 1}), ErrorCode::InvalidDomain);
  CHECK_THROWS_AS(loglog_slope(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);

  const auto fit = least_squares_line(std::vector<double>{0, 1, 2}, std::vector<double>{1, 3, 5});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("threshold crossing") {
  const std::vector<double> xs{100, 200, 400, 800};
  CHECK(crossing_point(xs, std::vector<double>{0, 0.25, 0.75, 1.0}) == doctest::Approx(std::sqrt(200.0 * 400.0)));
  CHECK(crossing_point(xs, std::vector<double>{0.6, 0.8, 1, 1}) == 100.0);
  CHECK(std::isinf(crossing_point(xs, std::vector<double>{0, 0.1, 0.2, 0.3})));
}
