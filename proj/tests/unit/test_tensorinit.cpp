#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "gnnrec/metrics.hpp"
#include "gnnrec/oracle.hpp"
#include "gnnrec/quadrature.hpp"
#include "gnnrec/rng.hpp"
#include "gnnrec/tensorinit.hpp"
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

Matrix orthonormal(Index n, Index k, Seed seed) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(n, n, seed));
  return qr.householderQ() * Matrix::Identity(n, k);
}

struct Sample {
  NormalizedAdjacency adj;
  GroundTruth gt;
  Dataset ds;
  Batch batch;
};

Sample plain_sample(const Matrix& w, Activation act, Index n, Seed seed) {
  Sample s{normalized_adjacency(build_empty(n)), make_ground_truth(w, act), {}, {}};
  s.ds = forward_labels(s.gt, s.adj, sample_features(n, w.rows(), seed), Problem::Regression, std::nullopt, seed + 1);
  s.batch = make_batch(s.adj, s.ds, s.ds.omega);
  return s;
}

double max_abs_cos_mismatch(const Matrix& u, const Matrix& truth) {
  // Best |cos| per true column, worst over columns.
  double worst = 1.0;
  for (Index j = 0; j < truth.cols(); ++j) {
    double best = 0.0;
    for (Index i = 0; i < u.cols(); ++i)
      best = std::max(best, std::abs(u.col(i).normalized().dot(truth.col(j).normalized())));
    worst = std::min(worst, best);
  }
  return worst;
}

// E[f(g) 1{g > 0}] by composite Simpson on [0, 12].
template <class F>
double half_line_expectation(F f) {
  const int n = 20000;
  const double h = 12.0 / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double g = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * f(g) * std::exp(-0.5 * g * g);
  }
  return acc * h / 3.0 / std::sqrt(2.0 * M_PI);
}

}  // namespace

TEST_CASE("special outer product") {
  Vector v(1);
  v << 2.0;
  Matrix z(1, 1);
  z << 3.0;
  CHECK(special_outer(v, z)(0, 0, 0) == doctest::Approx(3 * 2.0 * 9.0));

  const Vector v3 = gaussian(3, 1, 1).col(0);
  const Matrix z3 = gaussian(3, 2, 2);
  const Tensor3 t = special_outer(v3, z3);
  CHECK(t.max_asymmetry() <= 1e-14);
  for (Index a = 0; a < 3; ++a)
    for (Index b = 0; b < 3; ++b)
      for (Index c = 0; c < 3; ++c) {
        double ref = 0.0;
        for (Index i = 0; i < 2; ++i)
          ref += v3(a) * z3(b, i) * z3(c, i) + z3(a, i) * v3(b) * z3(c, i) + z3(a, i) * z3(b, i) * v3(c);
        CHECK(std::abs(t(a, b, c) - ref) <= 1e-14);
      }
  CHECK_ERROR_CODE(special_outer(Vector::Ones(2), Matrix::Ones(3, 2)), ErrorCode::InvalidShape);
}

TEST_CASE("moment estimators vanish with zero labels and are linear in the labels") {
  auto s = plain_sample(gaussian(4, 2, 3), Activation::ReLU, 500, 4);
  Batch zero = s.batch;
  zero.y.setZero();
  const Matrix v = orthonormal(4, 2, 5);
  CHECK(estimate_m1(zero).norm() == 0.0);
  CHECK(estimate_m2(zero).norm() == 0.0);
  CHECK(estimate_m3_projected(zero, v).norm() == 0.0);
  CHECK(estimate_m4_projected(zero, v).norm() == 0.0);

  Batch doubled = s.batch;
  doubled.y *= 2.0;
  CHECK((estimate_m1(doubled) - 2.0 * estimate_m1(s.batch)).cwiseAbs().maxCoeff() <= 1e-12);
  const Matrix m2 = estimate_m2(s.batch);
  CHECK((estimate_m2(doubled) - 2.0 * m2).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((m2 - m2.transpose()).cwiseAbs().maxCoeff() == 0.0);

  Batch other = s.batch;
  other.y = gaussian(500, 1, 9).col(0);
  Batch sum = s.batch;
  sum.y += other.y;
  const Tensor3 t1 = estimate_m3_projected(s.batch, v);
  const Tensor3 t2 = estimate_m3_projected(other, v);
  Tensor3 ts = estimate_m3_projected(sum, v);
  Tensor3 expect = t1;
  expect += t2;
  ts *= -1.0;
  expect += ts;
  CHECK(expect.norm() <= 1e-10);
  CHECK(t1.max_asymmetry() <= 1e-10);
  CHECK(estimate_m4_projected(s.batch, v).max_asymmetry() <= 1e-10);
}

TEST_CASE("first moment of a single ReLU filter") {
  Matrix w(5, 1);
  w << 1.0, -2.0, 0.5, 0.0, 1.5;
  auto s = plain_sample(w, Activation::ReLU, 100000, 10);
  const Vector m1 = estimate_m1(s.batch);
  // Per-coordinate standard errors from the sample itself.
  const Matrix terms = s.batch.h.array().colwise() * s.batch.y.array();
  const Vector mean = terms.colwise().mean();
  const Vector se = ((terms.rowwise() - mean.transpose()).colwise().squaredNorm() / (100000.0 * 99999.0))
                        .cwiseSqrt();
  for (Index i = 0; i < 5; ++i) CHECK(std::abs(m1(i) - w(i) / 2.0) <= 3.0 * se(i) + 1e-12);
}

TEST_CASE("second and third moment coefficients") {
  const double c2 = half_line_expectation([](double g) { return g * (g * g - 1.0); });
  CHECK(c2 == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-9));
  const double c3 = half_line_expectation([](double g) { return g * (g * g * g - 3.0 * g); });
  CHECK(std::abs(c3) <= 1e-9);
  const double s2 = gaussian_expectation([](double g) { return (g * g - 1.0) / (1.0 + std::exp(-g)); });
  CHECK(std::abs(s2) <= 1e-10);

  Matrix w(5, 1);
  w << 0.6, 0.8, 0.0, 0.0, 0.0;
  auto s = plain_sample(w, Activation::ReLU, 100000, 12);
  const auto sub = subspace(estimate_m2(s.batch), 1);
  CHECK(std::abs(sub.v_hat.col(0).dot(w.col(0))) >= 0.98);

  // K = 1 third moment is a scalar; for ReLU its population value is 0.
  const Tensor3 t = estimate_m3_projected(s.batch, w);
  double acc = 0.0, acc2 = 0.0;
  for (Index n = 0; n < s.batch.size(); ++n) {
    const double u = s.batch.h.row(n).dot(w.col(0));
    const double term = s.batch.y(n) * (u * u * u - 3.0 * u);
    acc += term;
    acc2 += term * term;
  }
  const double nn = static_cast<double>(s.batch.size());
  const double se = std::sqrt((acc2 / nn - (acc / nn) * (acc / nn)) / nn);
  CHECK(t(0, 0, 0) == doctest::Approx(acc / nn).epsilon(1e-10));
  CHECK(std::abs(t(0, 0, 0)) <= 3.0 * se);
}

TEST_CASE("subspace extraction") {
  Matrix m2 = Matrix::Zero(5, 5);
  m2.diagonal() << 3, 2, 1, 0, 0;
  const auto r = subspace(m2, 2);
  CHECK((r.v_hat.transpose() * r.v_hat - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
  Matrix proj = r.v_hat * r.v_hat.transpose();
  Matrix expect = Matrix::Zero(5, 5);
  expect(0, 0) = expect(1, 1) = 1.0;
  CHECK((proj - expect).cwiseAbs().maxCoeff() <= 1e-12);

  Matrix tie = Matrix::Identity(4, 4);
  CHECK(subspace(tie, 2).degenerate);
  CHECK_ERROR_CODE(subspace(tie, 2, true), ErrorCode::DegenerateSpectrum);
}

TEST_CASE("subspace error shrinks with more samples") {
  const Matrix w = 2.0 * orthonormal(6, 2, 20);
  std::vector<double> errs;
  for (Index n : {5000, 20000, 80000}) {
    double acc = 0.0;
    for (Seed s = 0; s < 6; ++s) {
      auto smp = plain_sample(w, Activation::ReLU, n, 30 + s);
      const Matrix v = subspace(estimate_m2(smp.batch), 2).v_hat;
      acc += (v * v.transpose() - w * w.transpose() / 4.0).norm();
    }
    errs.push_back(acc / 6.0);
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  const double slope = loglog_slope(std::vector<double>{5000, 20000, 80000}, errs);
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.4));
}

TEST_CASE("decomposition of planted tensors") {
  Tensor3 zero(3);
  CHECK_ERROR_CODE(decompose(zero, DecomposeConfig{}), ErrorCode::DegenerateTensor);

  for (Seed s = 0; s < 10; ++s) {
    const Index k = 2 + static_cast<Index>(s % 4);
    const Matrix u = orthonormal(k, k, 40 + s);
    Tensor3 t(k);
    Tensor4 t4(k);
    for (Index j = 0; j < k; ++j) {
      t.add_rank_one(1.0 + static_cast<double>(j), u.col(j));
      t4.add_rank_one(0.5 + static_cast<double>(j), u.col(j));
    }
    CHECK(max_abs_cos_mismatch(decompose(t, DecomposeConfig{16, 200, s}).u_hat, u) >= 1.0 - 1e-8);
    CHECK(max_abs_cos_mismatch(decompose(t4, DecomposeConfig{16, 200, s}).u_hat, u) >= 1.0 - 1e-8);
  }

  // Non-orthogonal components.
  Matrix u = gaussian(3, 3, 77);
  for (Index j = 0; j < 3; ++j) u.col(j).normalize();
  Tensor3 t(3);
  for (Index j = 0; j < 3; ++j) t.add_rank_one(1.0, u.col(j));
  const auto r = decompose(t, DecomposeConfig{16, 200, 5});
  CHECK(r.method == DecomposeMethod::SimultaneousDiagonalization);
  CHECK(max_abs_cos_mismatch(r.u_hat, u) >= 1.0 - 1e-8);
  CHECK(r.residual <= 1e-8);
}

TEST_CASE("magnitudes") {
  SUBCASE("single ReLU filter closed form") {
    Vector m1(3);
    m1 << 0.3, 0.4, 0.0;
    AggregationScale sc;
    sc.mean_sq = 0.8;
    Matrix v = Matrix::Identity(3, 1);
    v.col(0) = m1.normalized();
    const auto r = magnitudes(m1, Matrix::Ones(1, 1), v, Activation::ReLU, sc);
    CHECK(r.alpha(0) == doctest::Approx(m1.norm() * 2.0 / sc.mean_sq));
    CHECK(r.directions.col(0).dot(m1) > 0.0);
  }
  SUBCASE("exact population first moment") {
    const Matrix dirs = orthonormal(5, 3, 60);
    const Vector alpha = (Vector(3) << 1.0, 2.0, 3.0).finished();
    AggregationScale sc = aggregation_scale(Vector::Constant(10, 0.7));
    for (Activation act : {Activation::ReLU, Activation::Sigmoid}) {
      Vector m1 = Vector::Zero(5);
      for (Index j = 0; j < 3; ++j) m1 += first_moment_coefficient(act, alpha(j), sc, 3) * dirs.col(j);
      const auto r = magnitudes(m1, Matrix::Identity(3, 3), dirs, act, sc);
      for (Index j = 0; j < 3; ++j) CHECK(r.alpha(j) == doctest::Approx(alpha(j)).epsilon(1e-8));
    }
  }
  SUBCASE("zero first moment") {
    AggregationScale sc;
    const auto r = magnitudes(Vector::Zero(4), Matrix::Identity(2, 2), orthonormal(4, 2, 1), Activation::ReLU, sc);
    CHECK(r.alpha.norm() == 0.0);
  }
  SUBCASE("repeated directions") {
    Matrix u(2, 2);
    u << 1, 1, 0, 0;
    AggregationScale sc;
    CHECK_ERROR_CODE(magnitudes(Vector::Ones(4), u, orthonormal(4, 2, 2), Activation::ReLU, sc),
                     ErrorCode::IllConditionedDirections);
  }
}

TEST_CASE("population moments recover an orthogonal planted model") {
  const auto r = population_init_check(3);
  CHECK(r.passed);
  CHECK(r.max_abs_dev <= 1e-6);
}

TEST_CASE("scaling covariance") {
  const Matrix w = gaussian(6, 2, 70);
  auto s = plain_sample(w, Activation::ReLU, 30000, 71);
  const auto split = split_three(s.ds.omega, 72);
  const auto base = tensor_initialize(s.adj, s.ds, split, 2, InitConfig{});
  Dataset scaled = s.ds;
  scaled.y *= 3.0;
  const auto up = tensor_initialize(s.adj, scaled, split, 2, InitConfig{});
  CHECK((up.moments.m1 - 3.0 * base.moments.m1).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((up.alpha_hat - 3.0 * base.alpha_hat).cwiseAbs().maxCoeff() <= 1e-8 * up.alpha_hat.norm());
  CHECK(max_abs_cos_mismatch(up.u_hat, base.u_hat) >= 1.0 - 1e-8);
}

TEST_CASE("end to end initialization") {
  const Matrix w = sample_ground_truth(6, 2, 1.0, Activation::ReLU, 80).w_star;
  auto s = plain_sample(w, Activation::ReLU, 300000, 81);
  const auto split = split_three(s.ds.omega, 82);
  const auto out = tensor_initialize(s.adj, s.ds, split, 2, InitConfig{});
  CHECK(aligned_relative_error(out.w0, w).rel_error <= 0.5);
  CHECK(out.diagnostics.tensor_order == 4);
  for (Index j = 0; j < 2; ++j)
    CHECK((out.w0.col(j) - out.alpha_hat(j) * out.v_hat * out.u_hat.col(j)).norm() <= 1e-8 * (1.0 + out.w0.norm()));

  const auto again = tensor_initialize(s.adj, s.ds, split, 2, InitConfig{});
  CHECK((again.w0.array() == out.w0.array()).all());

  const auto sizes = out.diagnostics.split_sizes;
  CHECK(sizes[0] + sizes[1] + sizes[2] == 300000);
}

TEST_CASE("classification initialization runs on the contraction subspace") {
  const auto gt = sample_ground_truth(5, 2, 1.0, Activation::Sigmoid, 90);
  const auto adj = normalized_adjacency(build_cycle(30000, 2));
  const auto ds = forward_labels(gt, adj, sample_features(30000, 5, 91), Problem::Classification, std::nullopt, 92);
  const auto out = tensor_initialize(adj, ds, split_three(ds.omega, 93), 2, InitConfig{});
  CHECK(out.diagnostics.subspace_source == "m3-contraction");
  CHECK(out.w0.allFinite());
}
