#include "gnnrec/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnnrec/error.hpp"

namespace gnnrec {

Matrix aggregate(const NormalizedAdjacency& adj, const Matrix& x) {
  if (adj.size() != x.rows()) throw Error(ErrorCode::InvalidShape, "adjacency and features disagree on N");
  return adj.matrix * x;
}

Batch make_batch(const Matrix& aggregated, const Vector& a_norm_sq, const Vector& y, const IndexSet& subset) {
  if (subset.empty()) throw Error(ErrorCode::EmptySubset, "batch subset is empty");
  Batch b;
  const Index s = static_cast<Index>(subset.size());
  b.h.resize(s, aggregated.cols());
  b.y.resize(s);
  b.a_norm_sq.resize(s);
  for (Index r = 0; r < s; ++r) {
    const Index n = subset[static_cast<std::size_t>(r)];
    if (n < 0 || n >= aggregated.rows()) throw Error(ErrorCode::InvalidShape, "subset index out of range");
    b.h.row(r) = aggregated.row(n);
    b.y(r) = y(n);
    b.a_norm_sq(r) = a_norm_sq(n);
  }
  b.indices = subset;
  return b;
}

Batch make_batch(const NormalizedAdjacency& adj, const Dataset& ds, const IndexSet& subset) {
  return make_batch(aggregate(adj, ds.x), adj.row_norms_squared(), ds.y, subset);
}

Vector forward(const ModelParams& params, const Matrix& aggregated) {
  if (aggregated.cols() != params.dim())
    throw Error(ErrorCode::InvalidShape, "W has " + std::to_string(params.dim()) + " rows but features have " +
                                             std::to_string(aggregated.cols()) + " columns");
  const Matrix pre = aggregated * params.w;
  const double inv_k = 1.0 / static_cast<double>(params.filters());
  Vector z(pre.rows());
  for (Index n = 0; n < pre.rows(); ++n) {
    double acc = 0.0;
    for (Index j = 0; j < pre.cols(); ++j) acc += activate(params.activation, pre(n, j));
    z(n) = acc * inv_k;
  }
  return z;
}

Vector forward(const ModelParams& params, const NormalizedAdjacency& adj, const Matrix& x) {
  return forward(params, aggregate(adj, x));
}

namespace {

void check_shapes(const ModelParams& params, const Batch& batch) {
  if (batch.size() == 0) throw Error(ErrorCode::EmptySubset, "risk over an empty subset");
  if (batch.h.cols() != params.dim()) throw Error(ErrorCode::InvalidShape, "W rows do not match feature dim");
}

// Per-sample pre-activations, outputs g, and activation derivatives.
struct Evaluated {
  Matrix pre;    // S x K
  Matrix dphi;   // S x K
  Vector g;      // S
};

Evaluated evaluate(const ModelParams& params, const Batch& batch) {
  Evaluated e;
  e.pre.noalias() = batch.h * params.w;
  e.dphi.resize(e.pre.rows(), e.pre.cols());
  e.g.resize(e.pre.rows());
  const double inv_k = 1.0 / static_cast<double>(params.filters());
  for (Index n = 0; n < e.pre.rows(); ++n) {
    double acc = 0.0;
    for (Index j = 0; j < e.pre.cols(); ++j) {
      const double t = e.pre(n, j);
      acc += activate(params.activation, t);
      e.dphi(n, j) = activate_derivative(params.activation, t);
    }
    e.g(n) = acc * inv_k;
  }
  return e;
}

}  // namespace

RiskReport risk_regression(const ModelParams& params, const Batch& batch) {
  check_shapes(params, batch);
  Evaluated e = evaluate(params, batch);
  const double s = static_cast<double>(batch.size());
  const double k = static_cast<double>(params.filters());
  const Vector resid = batch.y - e.g;
  RiskReport out;
  out.value = resid.squaredNorm() / (2.0 * s);
  // dL/dw_k = -(1/(K|S|)) sum_n r_n phi'(h_n w_k) h_n
  e.dphi.array().colwise() *= resid.array();
  out.gradient.noalias() = batch.h.transpose() * e.dphi;
  out.gradient *= -1.0 / (k * s);
  return out;
}

RiskReport risk_regression(const ModelParams& params, const NormalizedAdjacency& adj, const Dataset& ds,
                           const IndexSet& subset) {
  return risk_regression(params, make_batch(adj, ds, subset));
}

namespace {

void check_binary(const Vector& y) {
  for (Index n = 0; n < y.size(); ++n)
    if (y(n) != 0.0 && y(n) != 1.0)
      throw Error(ErrorCode::InvalidLabel, "classification label " + std::to_string(y(n)) + " is not 0 or 1");
}

double clamp_prob(double g) { return std::clamp(g, kProbClamp, 1.0 - kProbClamp); }

}  // namespace

RiskReport risk_classification(const ModelParams& params, const Batch& batch) {
  check_shapes(params, batch);
  if (params.activation != Activation::Sigmoid)
    throw Error(ErrorCode::InvalidActivation, "cross-entropy risk needs the sigmoid activation");
  check_binary(batch.y);
  Evaluated e = evaluate(params, batch);
  const double s = static_cast<double>(batch.size());
  const double k = static_cast<double>(params.filters());
  Vector weight(batch.size());
  double value = 0.0;
  for (Index n = 0; n < batch.size(); ++n) {
    const double g = clamp_prob(e.g(n));
    const double y = batch.y(n);
    value -= y * std::log(g) + (1.0 - y) * std::log(1.0 - g);
    weight(n) = (y - g) / (g * (1.0 - g));
  }
  RiskReport out;
  out.value = value / s;
  e.dphi.array().colwise() *= weight.array();
  out.gradient.noalias() = batch.h.transpose() * e.dphi;
  out.gradient *= -1.0 / (k * s);
  return out;
}

RiskReport risk_classification(const ModelParams& params, const NormalizedAdjacency& adj, const Dataset& ds,
                               const IndexSet& subset) {
  return risk_classification(params, make_batch(adj, ds, subset));
}

RiskReport risk(Problem problem, const ModelParams& params, const Batch& batch) {
  return problem == Problem::Regression ? risk_regression(params, batch) : risk_classification(params, batch);
}

namespace {

// Accumulates sum_n [outer(n) * c_jk(n) + [j==k] diag(n) * c_j(n)] h_n h_n^T
// into the (dK x dK) block matrix, then scales.
template <typename CrossFn, typename DiagFn>
Matrix assemble_hessian(const ModelParams& params, const Batch& batch, CrossFn cross, DiagFn diag) {
  const Index d = params.dim();
  const Index k = params.filters();
  if (d * k > kMaxHessianDim)
    throw Error(ErrorCode::TooLarge, "Hessian dimension " + std::to_string(d * k) + " exceeds " +
                                         std::to_string(kMaxHessianDim));
  Evaluated e = evaluate(params, batch);
  Matrix hess = Matrix::Zero(d * k, d * k);
  Matrix coeff(k, k);
  for (Index n = 0; n < batch.size(); ++n) {
    for (Index a = 0; a < k; ++a)
      for (Index b = 0; b < k; ++b) coeff(a, b) = cross(n, e, a, b) + (a == b ? diag(n, e, a) : 0.0);
    const Matrix hh = batch.h.row(n).transpose() * batch.h.row(n);
    for (Index a = 0; a < k; ++a)
      for (Index b = 0; b < k; ++b)
        if (coeff(a, b) != 0.0) hess.block(a * d, b * d, d, d).noalias() += coeff(a, b) * hh;
  }
  hess /= static_cast<double>(batch.size());
  // exact symmetry; the accumulation is already symmetric up to rounding
  return 0.5 * (hess + hess.transpose());
}

}  // namespace

Matrix hessian_regression(const ModelParams& params, const Batch& batch) {
  check_shapes(params, batch);
  const double k = static_cast<double>(params.filters());
  const Activation act = params.activation;
  const Vector& y = batch.y;
  return assemble_hessian(
      params, batch,
      [k](Index n, const Evaluated& e, Index a, Index b) { return e.dphi(n, a) * e.dphi(n, b) / (k * k); },
      [k, act, &y](Index n, const Evaluated& e, Index a) {
        return -(y(n) - e.g(n)) * activate_second_derivative(act, e.pre(n, a)) / k;
      });
}

Matrix hessian_regression(const ModelParams& params, const NormalizedAdjacency& adj, const Dataset& ds,
                          const IndexSet& subset) {
  return hessian_regression(params, make_batch(adj, ds, subset));
}

Matrix hessian_classification(const ModelParams& params, const Batch& batch) {
  check_shapes(params, batch);
  if (params.activation != Activation::Sigmoid)
    throw Error(ErrorCode::InvalidActivation, "cross-entropy Hessian needs the sigmoid activation");
  check_binary(batch.y);
  const double k = static_cast<double>(params.filters());
  const Vector& y = batch.y;
  // l(g) = -y log g - (1-y) log(1-g)
  auto dl = [&y](Index n, double g) { return -(y(n) - g) / (g * (1.0 - g)); };
  auto d2l = [&y](Index n, double g) { return y(n) / (g * g) + (1.0 - y(n)) / ((1.0 - g) * (1.0 - g)); };
  return assemble_hessian(
      params, batch,
      [k, d2l](Index n, const Evaluated& e, Index a, Index b) {
        return d2l(n, clamp_prob(e.g(n))) * e.dphi(n, a) * e.dphi(n, b) / (k * k);
      },
      [k, dl](Index n, const Evaluated& e, Index a) {
        return dl(n, clamp_prob(e.g(n))) * activate_second_derivative(Activation::Sigmoid, e.pre(n, a)) / k;
      });
}

Matrix hessian_classification(const ModelParams& params, const NormalizedAdjacency& adj, const Dataset& ds,
                              const IndexSet& subset) {
  return hessian_classification(params, make_batch(adj, ds, subset));
}

Matrix hessian(Problem problem, const ModelParams& params, const Batch& batch) {
  return problem == Problem::Regression ? hessian_regression(params, batch)
                                        : hessian_classification(params, batch);
}

}  // namespace gnnrec
