#pragma once

#include <vector>

#include "gnnrec/types.hpp"

namespace gnnrec {

/// Dense cubical tensor of order 3 (n x n x n), row-major over (i, j, k).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Index n) : n_(n), data_(static_cast<std::size_t>(n * n * n), 0.0) {}

  Index dim() const noexcept { return n_; }
  double& operator()(Index i, Index j, Index k) { return data_[static_cast<std::size_t>((i * n_ + j) * n_ + k)]; }
  double operator()(Index i, Index j, Index k) const {
    return data_[static_cast<std::size_t>((i * n_ + j) * n_ + k)];
  }

  double norm() const;
  /// Largest |T_ijk - T_pi(ijk)| over the six index permutations.
  double max_asymmetry() const;
  Tensor3 symmetrized() const;

  /// T(I, I, theta)
  Matrix contract(const Vector& theta) const;
  /// T(I, u, u)
  Vector apply(const Vector& u) const;
  /// T(u, u, u)
  double value(const Vector& u) const;

  Tensor3& operator+=(const Tensor3& o);
  Tensor3& operator*=(double s);
  void add_rank_one(double weight, const Vector& u);
  /// T(M, M, M): every mode multiplied by M (n x m).
  Tensor3 transformed(const Matrix& m) const;

 private:
  Index n_ = 0;
  std::vector<double> data_;
};

/// Dense cubical tensor of order 4.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Index n) : n_(n), data_(static_cast<std::size_t>(n * n * n * n), 0.0) {}

  Index dim() const noexcept { return n_; }
  double& operator()(Index i, Index j, Index k, Index l) {
    return data_[static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + l)];
  }
  double operator()(Index i, Index j, Index k, Index l) const {
    return data_[static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + l)];
  }

  double norm() const;
  double max_asymmetry() const;
  Tensor4 symmetrized() const;

  /// T(I, I, theta, theta)
  Matrix contract(const Vector& theta) const;
  /// T(I, u, u, u)
  Vector apply(const Vector& u) const;
  double value(const Vector& u) const;

  void add_rank_one(double weight, const Vector& u);

  /// T(M, M, M, M): every mode multiplied by M (n x m).
  Tensor4 transformed(const Matrix& m) const;

 private:
  Index n_ = 0;
  std::vector<double> data_;
};

}  // namespace gnnrec
