#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "gnnrec/metrics.hpp"
#include "gnnrec/model.hpp"
#include "gnnrec/synth.hpp"
#include "helpers.hpp"

using namespace gnnrec;

namespace {

struct Instance {
  NormalizedAdjacency adj;
  GroundTruth gt;
  Dataset ds;
};

Instance make_instance(Index n, Index d, Index k, Activation act, Problem problem, double scale, Seed seed,
                       double noise = 0.0) {
  Instance in{normalized_adjacency(build_cycle(n, 2)), sample_ground_truth(d, k, scale, act, seed), {}};
  std::optional<NoiseSpec> ns;
  if (noise > 0) ns = NoiseSpec{noise};
  in.ds = forward_labels(in.gt, in.adj, sample_features(n, d, seed + 100), problem, ns, seed + 200);
  return in;
}

Matrix fd_gradient(Problem problem, const ModelParams& p, const Batch& b, double h) {
  Matrix g(p.dim(), p.filters());
  for (Index j = 0; j < p.filters(); ++j)
    for (Index i = 0; i < p.dim(); ++i) {
      ModelParams up = p, dn = p;
      up.w(i, j) += h;
      dn.w(i, j) -= h;
      g(i, j) = (risk(problem, up, b).value - risk(problem, dn, b).value) / (2 * h);
    }
  return g;
}

double min_abs_preactivation(const ModelParams& p, const Batch& b) {
  return (b.h * p.w).cwiseAbs().minCoeff();
}

}  // namespace

TEST_CASE("forward pass") {
  const auto eye = normalized_adjacency(build_empty(6));
  const Matrix x = sample_features(6, 3, 1);
  const Matrix w = sample_ground_truth(3, 2, 1.0, Activation::ReLU, 2).w_star;
  const Vector plain = forward(ModelParams{w, Activation::ReLU}, eye, x);
  for (Index n = 0; n < 6; ++n) {
    const double ref = 0.5 * (std::max(0.0, x.row(n).dot(w.col(0))) + std::max(0.0, x.row(n).dot(w.col(1))));
    CHECK(plain(n) == doctest::Approx(ref).epsilon(1e-14));
  }
  CHECK(forward(ModelParams{Matrix::Zero(3, 2), Activation::ReLU}, eye, x).norm() == 0.0);

  const auto adj = normalized_adjacency(build_cycle(6, 2));
  const Matrix a = adj.dense();
  const Vector z = forward(ModelParams{w, Activation::Sigmoid}, adj, x);
  for (Index n = 0; n < 6; ++n) {
    double ref = 0.0;
    for (Index j = 0; j < 2; ++j) {
      double pre = 0.0;
      for (Index m = 0; m < 6; ++m)
        for (Index i = 0; i < 3; ++i) pre += a(n, m) * x(m, i) * w(i, j);
      ref += 1.0 / (1.0 + std::exp(-pre));
    }
    CHECK(std::abs(z(n) - ref / 2.0) <= 1e-12);
  }
  CHECK_ERROR_CODE(forward(ModelParams{Matrix::Zero(4, 2), Activation::ReLU}, adj, x), ErrorCode::InvalidShape);
}

TEST_CASE("permutation invariance and homogeneity") {
  const auto adj = normalized_adjacency(build_cycle(20, 4));
  const Matrix x = sample_features(20, 4, 3);
  Matrix w = sample_ground_truth(4, 3, 1.0, Activation::ReLU, 4).w_star;
  Matrix swapped = w;
  swapped.col(0).swap(swapped.col(2));
  const Vector z = forward(ModelParams{w, Activation::ReLU}, adj, x);
  CHECK((forward(ModelParams{swapped, Activation::ReLU}, adj, x) - z).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((forward(ModelParams{2.5 * w, Activation::ReLU}, adj, x) - 2.5 * z).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("regression risk") {
  auto in = make_instance(200, 5, 3, Activation::ReLU, Problem::Regression, 5.0, 1);
  const ModelParams truth{in.gt.w_star, Activation::ReLU};
  const auto at_truth = risk_regression(truth, in.adj, in.ds, in.ds.omega);
  CHECK(at_truth.value == 0.0);
  CHECK(at_truth.gradient.norm() == 0.0);
  CHECK_ERROR_CODE(risk_regression(truth, in.adj, in.ds, IndexSet{}), ErrorCode::EmptySubset);

  // Single sample, K = 1, A = I, y = 0: gradient = relu(x.w) x.
  const auto eye = normalized_adjacency(build_empty(1));
  Dataset one;
  one.x = Matrix(1, 3);
  one.x << 0.3, -1.2, 2.0;
  one.y = Vector::Zero(1);
  one.z = one.y;
  one.omega = {0};
  Matrix w1(3, 1);
  w1 << 1.0, 0.5, 0.7;
  const auto rr = risk_regression(ModelParams{w1, Activation::ReLU}, eye, one, one.omega);
  const double pre = one.x.row(0).dot(w1.col(0));
  REQUIRE(pre > 0);
  CHECK((rr.gradient - pre * one.x.row(0).transpose()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("regression gradient matches finite differences on kink-free points") {
  Index checked = 0;
  for (Seed s = 0; s < 100; ++s) {
    auto in = make_instance(60, 4, 2, Activation::ReLU, Problem::Regression, 1.0, s, 0.1);
    Matrix w = in.gt.w_star + 0.3 * sample_ground_truth(4, 2, 1.0, Activation::ReLU, s + 7).w_star;
    const ModelParams p{w, Activation::ReLU};
    const Batch b = make_batch(in.adj, in.ds, in.ds.omega);
    const double h = 1e-6;
    if (min_abs_preactivation(p, b) < 10 * h * 10) continue;
    const Matrix g = risk_regression(p, b).gradient;
    const Matrix fd = fd_gradient(Problem::Regression, p, b, h);
    CHECK((fd - g).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()) <= 1e-5);
    ++checked;
  }
  CHECK(checked >= 50);
}

TEST_CASE("classification risk") {
  const auto eye = normalized_adjacency(build_empty(4));
  Dataset ds;
  ds.x = sample_features(4, 3, 1);
  ds.y = Vector::Ones(4);
  ds.y(1) = 0.0;
  ds.z = Vector::Constant(4, 0.5);
  ds.omega = all_nodes(4);
  ds.problem = Problem::Classification;
  ds.activation = Activation::Sigmoid;
  const auto rr = risk_classification(ModelParams{Matrix::Zero(3, 1), Activation::Sigmoid}, eye, ds, ds.omega);
  CHECK(rr.value == doctest::Approx(std::log(2.0)));

  ds.y(2) = 0.5;
  CHECK_ERROR_CODE(risk_classification(ModelParams{Matrix::Zero(3, 1), Activation::Sigmoid}, eye, ds, ds.omega),
                   ErrorCode::InvalidLabel);

  for (Seed s = 0; s < 100; ++s) {
    auto in = make_instance(40, 3, 2, Activation::Sigmoid, Problem::Classification, 1.0, s);
    const ModelParams p{in.gt.w_star + 0.5 * sample_ground_truth(3, 2, 1.0, Activation::Sigmoid, s + 9).w_star,
                        Activation::Sigmoid};
    const Batch b = make_batch(in.adj, in.ds, in.ds.omega);
    const Matrix g = risk_classification(p, b).gradient;
    const Matrix fd = fd_gradient(Problem::Classification, p, b, 1e-5);
    CHECK((fd - g).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()) <= 1e-6);
  }
}

TEST_CASE("classification gradient at the truth shrinks with the sample size") {
  const std::vector<double> sizes{500, 2000, 8000};
  std::vector<double> norms;
  for (double n : sizes) {
    double acc = 0.0;
    for (Seed s = 0; s < 20; ++s) {
      auto in = make_instance(static_cast<Index>(n), 5, 2, Activation::Sigmoid, Problem::Classification, 1.0, s);
      acc += risk_classification(ModelParams{in.gt.w_star, Activation::Sigmoid}, in.adj, in.ds, in.ds.omega)
                 .gradient.norm();
    }
    norms.push_back(acc / 20.0);
  }
  const double slope = loglog_slope(sizes, norms);
  CHECK(slope >= -0.7);
  CHECK(slope <= -0.3);
}

TEST_CASE("hessians") {
  SUBCASE("regression") {
    auto in = make_instance(300, 3, 2, Activation::ReLU, Problem::Regression, 1.0, 3);
    const ModelParams p{in.gt.w_star, Activation::ReLU};
    const Batch b = make_batch(in.adj, in.ds, in.ds.omega);
    const Matrix h = hessian_regression(p, b);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().minCoeff() > 0.0);

    // Away from W* the exact Hessian differs from the Gauss-Newton form, so
    // compare at W* where the residual term vanishes.
    const double step = 1e-6;
    Matrix fd(6, 6);
    for (Index c = 0; c < 6; ++c) {
      ModelParams up = p, dn = p;
      up.w(c % 3, c / 3) += step;
      dn.w(c % 3, c / 3) -= step;
      const Matrix diff = (risk_regression(up, b).gradient - risk_regression(dn, b).gradient) / (2 * step);
      fd.col(c) = Eigen::Map<const Vector>(diff.data(), 6);
    }
    CHECK((fd - h).cwiseAbs().maxCoeff() <= 1e-4);
  }
  SUBCASE("classification") {
    auto in = make_instance(400, 3, 2, Activation::Sigmoid, Problem::Classification, 1.0, 4);
    const ModelParams p{in.gt.w_star + 0.1 * Matrix::Ones(3, 2), Activation::Sigmoid};
    const Batch b = make_batch(in.adj, in.ds, in.ds.omega);
    const Matrix h = hessian_classification(p, b);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const double step = 1e-5;
    Matrix fd(6, 6);
    for (Index c = 0; c < 6; ++c) {
      ModelParams up = p, dn = p;
      up.w(c % 3, c / 3) += step;
      dn.w(c % 3, c / 3) -= step;
      const Matrix diff = (risk_classification(up, b).gradient - risk_classification(dn, b).gradient) / (2 * step);
      fd.col(c) = Eigen::Map<const Vector>(diff.data(), 6);
    }
    CHECK((fd - h).cwiseAbs().maxCoeff() <= 1e-5);
    const Matrix h0 = hessian_classification(ModelParams{in.gt.w_star, Activation::Sigmoid}, b);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(h0).eigenvalues().minCoeff() > 0.0);
  }
  SUBCASE("size guard") {
    auto in = make_instance(30, 30, 20, Activation::ReLU, Problem::Regression, 1.0, 5);
    CHECK_ERROR_CODE(hessian_regression(ModelParams{in.gt.w_star, Activation::ReLU}, in.adj, in.ds, in.ds.omega),
                     ErrorCode::TooLarge);
  }
}
