#include "gnnrec/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>

#include "gnnrec/error.hpp"

namespace gnnrec {

GaussHermiteRule gauss_hermite(int order) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "quadrature order must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
  Vector diag = Vector::Zero(order);
  Vector off(order > 1 ? order - 1 : 0);
  for (int i = 1; i < order; ++i) off(i - 1) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  GaussHermiteRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = es.eigenvectors().row(0).transpose().array().square();
  return rule;
}

double gaussian_expectation(const std::function<double(double)>& f, int order) {
  static std::mutex mu;
  static std::map<int, GaussHermiteRule> cache;
  const GaussHermiteRule* rule = nullptr;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, gauss_hermite(order)).first;
    rule = &it->second;
  }
  double acc = 0.0;
  for (Index i = 0; i < rule->nodes.size(); ++i) acc += rule->weights(i) * f(rule->nodes(i));
  return acc;
}

}  // namespace gnnrec
