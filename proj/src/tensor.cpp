#include "gnnrec/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "gnnrec/error.hpp"

namespace gnnrec {

double Tensor3::norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Tensor3::max_asymmetry() const {
  double worst = 0.0;
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j)
      for (Index k = 0; k < n_; ++k) {
        const double v = (*this)(i, j, k);
        for (double w : {(*this)(i, k, j), (*this)(j, i, k), (*this)(j, k, i), (*this)(k, i, j), (*this)(k, j, i)})
          worst = std::max(worst, std::abs(v - w));
      }
  return worst;
}

Tensor3 Tensor3::symmetrized() const {
  Tensor3 out(n_);
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j)
      for (Index k = 0; k < n_; ++k) {
        // Sum in a canonical order so every permutation gets the same bits.
        std::array<Index, 3> idx{i, j, k};
        std::sort(idx.begin(), idx.end());
        const auto [a, b, c] = idx;
        out(i, j, k) = ((*this)(a, b, c) + (*this)(a, c, b) + (*this)(b, a, c) + (*this)(b, c, a) +
                        (*this)(c, a, b) + (*this)(c, b, a)) / 6.0;
      }
  return out;
}

Matrix Tensor3::contract(const Vector& theta) const {
  Matrix m = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j) {
      double acc = 0.0;
      for (Index k = 0; k < n_; ++k) acc += (*this)(i, j, k) * theta(k);
      m(i, j) = acc;
    }
  return m;
}

Vector Tensor3::apply(const Vector& u) const {
  Vector out = Vector::Zero(n_);
  for (Index i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (Index j = 0; j < n_; ++j)
      for (Index k = 0; k < n_; ++k) acc += (*this)(i, j, k) * u(j) * u(k);
    out(i) = acc;
  }
  return out;
}

double Tensor3::value(const Vector& u) const { return u.dot(apply(u)); }

Tensor3& Tensor3::operator+=(const Tensor3& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

void Tensor3::add_rank_one(double weight, const Vector& u) {
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j)
      for (Index k = 0; k < n_; ++k) (*this)(i, j, k) += weight * u(i) * u(j) * u(k);
}

double Tensor4::norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

namespace {

template <typename F>
void for_each_permutation4(Index i, Index j, Index k, Index l, F f) {
  std::array<Index, 4> idx{i, j, k, l};
  std::sort(idx.begin(), idx.end());
  do {
    f(idx[0], idx[1], idx[2], idx[3]);
  } while (std::next_permutation(idx.begin(), idx.end()));
}

}  // namespace

double Tensor4::max_asymmetry() const {
  double worst = 0.0;
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j)
      for (Index k = 0; k < n_; ++k)
        for (Index l = 0; l < n_; ++l) {
          const double v = (*this)(i, j, k, l);
          for_each_permutation4(i, j, k, l, [&](Index a, Index b, Index c, Index d) {
            worst = std::max(worst, std::abs(v - (*this)(a, b, c, d)));
          });
        }
  return worst;
}

Tensor4 Tensor4::symmetrized() const {
  Tensor4 out(n_);
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j)
      for (Index k = 0; k < n_; ++k)
        for (Index l = 0; l < n_; ++l) {
          double acc = 0.0;
          int count = 0;
          // Enumerates distinct permutations of the sorted multi-index; the
          // average over distinct ones equals the average over all 24.
          for_each_permutation4(i, j, k, l, [&](Index a, Index b, Index c, Index d) {
            acc += (*this)(a, b, c, d);
            ++count;
          });
          out(i, j, k, l) = acc / count;
        }
  return out;
}

Matrix Tensor4::contract(const Vector& theta) const {
  Matrix m = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j) {
      double acc = 0.0;
      for (Index k = 0; k < n_; ++k)
        for (Index l = 0; l < n_; ++l) acc += (*this)(i, j, k, l) * theta(k) * theta(l);
      m(i, j) = acc;
    }
  return m;
}

Vector Tensor4::apply(const Vector& u) const {
  Vector out = Vector::Zero(n_);
  for (Index i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (Index j = 0; j < n_; ++j)
      for (Index k = 0; k < n_; ++k)
        for (Index l = 0; l < n_; ++l) acc += (*this)(i, j, k, l) * u(j) * u(k) * u(l);
    out(i) = acc;
  }
  return out;
}

double Tensor4::value(const Vector& u) const { return u.dot(apply(u)); }

void Tensor4::add_rank_one(double weight, const Vector& u) {
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j)
      for (Index k = 0; k < n_; ++k)
        for (Index l = 0; l < n_; ++l) (*this)(i, j, k, l) += weight * u(i) * u(j) * u(k) * u(l);
}

namespace {

// Multiplies every mode of a cubical row-major tensor of order `order` by m.
std::vector<double> all_modes(const std::vector<double>& data, Index n, int order, const Matrix& m) {
  const Index q = m.cols();
  std::vector<double> cur = data;
  std::vector<Index> dims(static_cast<std::size_t>(order), n);
  for (int axis = 0; axis < order; ++axis) {
    Index outer = 1, inner = 1;
    for (int a = 0; a < axis; ++a) outer *= dims[static_cast<std::size_t>(a)];
    for (int a = axis + 1; a < order; ++a) inner *= dims[static_cast<std::size_t>(a)];
    std::vector<double> next(static_cast<std::size_t>(outer * q * inner), 0.0);
    for (Index o = 0; o < outer; ++o)
      for (Index i = 0; i < n; ++i)
        for (Index p = 0; p < q; ++p) {
          const double f = m(i, p);
          if (f == 0.0) continue;
          const double* src = cur.data() + (o * n + i) * inner;
          double* dst = next.data() + (o * q + p) * inner;
          for (Index r = 0; r < inner; ++r) dst[r] += f * src[r];
        }
    cur = std::move(next);
    dims[static_cast<std::size_t>(axis)] = q;
  }
  return cur;
}

}  // namespace

Tensor3 Tensor3::transformed(const Matrix& m) const {
  if (m.rows() != n_) throw Error(ErrorCode::InvalidShape, "transform rows must match the tensor dimension");
  Tensor3 out(m.cols());
  out.data_ = all_modes(data_, n_, 3, m);
  return out;
}

Tensor4 Tensor4::transformed(const Matrix& m) const {
  if (m.rows() != n_) throw Error(ErrorCode::InvalidShape, "transform rows must match the tensor dimension");
  Tensor4 out(m.cols());
  out.data_ = all_modes(data_, n_, 4, m);
  return out;
}

}  // namespace gnnrec
