#pragma once

#include "gnnrec/graph.hpp"
#include "gnnrec/synth.hpp"
#include "gnnrec/types.hpp"

namespace gnnrec {

struct ModelParams {
  Matrix w;  // d x K
  Activation activation = Activation::ReLU;

  Index dim() const noexcept { return w.rows(); }
  Index filters() const noexcept { return w.cols(); }
};

struct RiskReport {
  double value = 0.0;
  Matrix gradient;
};

/// Aggregated rows (A X)_n and labels for one index subset. Built once per
/// subset so the optimizer does not re-aggregate every iteration.
struct Batch {
  Matrix h;            // |S| x d
  Vector y;            // |S|
  Vector a_norm_sq;    // ||a_n||^2 for each row
  IndexSet indices;

  Index size() const noexcept { return h.rows(); }
};

Matrix aggregate(const NormalizedAdjacency& adj, const Matrix& x);
Batch make_batch(const NormalizedAdjacency& adj, const Dataset& ds, const IndexSet& subset);
Batch make_batch(const Matrix& aggregated, const Vector& a_norm_sq, const Vector& y, const IndexSet& subset);

/// g(W; a_n^T X) for every node.
Vector forward(const ModelParams& params, const NormalizedAdjacency& adj, const Matrix& x);
Vector forward(const ModelParams& params, const Matrix& aggregated);

RiskReport risk_regression(const ModelParams& params, const Batch& batch);
RiskReport risk_regression(const ModelParams& params, const NormalizedAdjacency& adj, const Dataset& ds,
                           const IndexSet& subset);

/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs and divisions.
inline constexpr double kProbClamp = 1e-12;

RiskReport risk_classification(const ModelParams& params, const Batch& batch);
RiskReport risk_classification(const ModelParams& params, const NormalizedAdjacency& adj, const Dataset& ds,
                               const IndexSet& subset);

RiskReport risk(Problem problem, const ModelParams& params, const Batch& batch);

/// Hessians are indexed by vec(W) in column-major order: entry j*d + i is w_ij.
inline constexpr Index kMaxHessianDim = 500;

Matrix hessian_regression(const ModelParams& params, const Batch& batch);
Matrix hessian_regression(const ModelParams& params, const NormalizedAdjacency& adj, const Dataset& ds,
                          const IndexSet& subset);
Matrix hessian_classification(const ModelParams& params, const Batch& batch);
Matrix hessian_classification(const ModelParams& params, const NormalizedAdjacency& adj, const Dataset& ds,
                              const IndexSet& subset);
Matrix hessian(Problem problem, const ModelParams& params, const Batch& batch);

}  // namespace gnnrec
