#include "gnnrec/tensorinit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>

#include "gnnrec/error.hpp"
#include "gnnrec/quadrature.hpp"
#include "gnnrec/rng.hpp"

namespace gnnrec {

Tensor3 special_outer(const Vector& v, const Matrix& z) {
  if (v.size() != z.rows()) throw Error(ErrorCode::InvalidShape, "special outer product needs len(v) == rows(Z)");
  const Index n = v.size();
  Tensor3 out(n);
  for (Index c = 0; c < z.cols(); ++c) {
    const auto zc = z.col(c);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < n; ++k)
          out(i, j, k) += v(i) * zc(j) * zc(k) + zc(i) * v(j) * zc(k) + zc(i) * zc(j) * v(k);
  }
  return out;
}

namespace {

void require_rows(const Batch& batch) {
  if (batch.size() == 0) throw Error(ErrorCode::EmptySubset, "moment estimate over an empty subset");
}

}  // namespace

Vector estimate_m1(const Batch& batch) {
  require_rows(batch);
  return batch.h.transpose() * batch.y / static_cast<double>(batch.size());
}

Matrix estimate_m2(const Batch& batch) {
  require_rows(batch);
  const double s = static_cast<double>(batch.size());
  Matrix m = batch.h.transpose() * (batch.h.array().colwise() * batch.y.array()).matrix();
  m /= s;
  const double baseline = batch.y.dot(batch.a_norm_sq) / s;
  m.diagonal().array() -= baseline;
  return 0.5 * (m + m.transpose());
}

Tensor3 estimate_m3_projected(const Batch& batch, const Matrix& v_hat) {
  require_rows(batch);
  if (v_hat.rows() != batch.h.cols()) throw Error(ErrorCode::InvalidShape, "V has the wrong number of rows");
  const Index k = v_hat.cols();
  const Matrix t = batch.h * v_hat;
  const double s = static_cast<double>(batch.size());
  Tensor3 acc(k);
  Vector b = Vector::Zero(k);
  for (Index n = 0; n < t.rows(); ++n) {
    const double y = batch.y(n);
    if (y == 0.0) continue;
    for (Index i = 0; i < k; ++i) {
      const double yi = y * t(n, i);
      for (Index j = 0; j < k; ++j) {
        const double yij = yi * t(n, j);
        for (Index l = 0; l < k; ++l) acc(i, j, l) += yij * t(n, l);
      }
    }
    b += (y * batch.a_norm_sq(n)) * t.row(n).transpose();
  }
  acc *= 1.0 / s;
  b /= s;
  Tensor3 baseline = special_outer(b, Matrix::Identity(k, k));
  baseline *= -1.0;
  acc += baseline;
  return acc.symmetrized();
}

Tensor4 estimate_m4_projected(const Batch& batch, const Matrix& v_hat) {
  require_rows(batch);
  if (v_hat.rows() != batch.h.cols()) throw Error(ErrorCode::InvalidShape, "V has the wrong number of rows");
  const Index k = v_hat.cols();
  const Matrix t = batch.h * v_hat;
  const double s = static_cast<double>(batch.size());
  Tensor4 out(k);
  Matrix b = Matrix::Zero(k, k);  // mean y r^2 t t^T
  double c = 0.0;                 // mean y r^4
  for (Index n = 0; n < t.rows(); ++n) {
    const double y = batch.y(n);
    if (y == 0.0) continue;
    const double r2 = batch.a_norm_sq(n);
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j) {
        const double yij = y * t(n, i) * t(n, j);
        for (Index l = 0; l < k; ++l) {
          const double yijl = yij * t(n, l);
          for (Index m = 0; m < k; ++m) out(i, j, l, m) += yijl * t(n, m);
        }
      }
    b.noalias() += (y * r2) * t.row(n).transpose() * t.row(n);
    c += y * r2 * r2;
  }
  b /= s;
  c /= s;
  auto delta = [](Index a, Index b2) { return a == b2 ? 1.0 : 0.0; };
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      for (Index l = 0; l < k; ++l)
        for (Index m = 0; m < k; ++m) {
          double v = out(i, j, l, m) / s;
          v -= delta(i, j) * b(l, m) + delta(i, l) * b(j, m) + delta(i, m) * b(j, l) + delta(j, l) * b(i, m) +
               delta(j, m) * b(i, l) + delta(l, m) * b(i, j);
          v += c * (delta(i, j) * delta(l, m) + delta(i, l) * delta(j, m) + delta(i, m) * delta(j, l));
          out(i, j, l, m) = v;
        }
  return out.symmetrized();
}

Matrix estimate_m3_contracted(const Batch& batch, const Vector& theta) {
  require_rows(batch);
  if (theta.size() != batch.h.cols()) throw Error(ErrorCode::InvalidShape, "contraction vector has the wrong size");
  const double s = static_cast<double>(batch.size());
  const Vector tau = batch.h * theta;
  const Vector weight = batch.y.cwiseProduct(tau);
  Matrix m = batch.h.transpose() * (batch.h.array().colwise() * weight.array()).matrix();
  m /= s;
  const Vector b = batch.h.transpose() * batch.y.cwiseProduct(batch.a_norm_sq) / s;
  m -= theta * b.transpose() + b * theta.transpose();
  m.diagonal().array() -= b.dot(theta);
  return 0.5 * (m + m.transpose());
}

Vector estimate_m1(const NormalizedAdjacency& adj, const Dataset& ds, const IndexSet& subset) {
  return estimate_m1(make_batch(adj, ds, subset));
}

Matrix estimate_m2(const NormalizedAdjacency& adj, const Dataset& ds, const IndexSet& subset) {
  return estimate_m2(make_batch(adj, ds, subset));
}

Tensor3 estimate_m3_projected(const NormalizedAdjacency& adj, const Dataset& ds, const IndexSet& subset,
                              const Matrix& v_hat) {
  return estimate_m3_projected(make_batch(adj, ds, subset), v_hat);
}

SubspaceResult subspace(const Matrix& m2, Index filters, bool strict) {
  if (m2.rows() != m2.cols()) throw Error(ErrorCode::InvalidShape, "subspace needs a square matrix");
  const Index d = m2.rows();
  if (filters < 1 || filters > d) throw Error(ErrorCode::InvalidShape, "subspace needs 1 <= K <= d");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m2 + m2.transpose()));
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  const Vector& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&ev](Index a, Index b) {
    const double fa = std::abs(ev(a)), fb = std::abs(ev(b));
    if (fa != fb) return fa > fb;
    return ev(a) > ev(b);
  });
  SubspaceResult out;
  out.eigenvalues.resize(d);
  out.v_hat.resize(d, filters);
  for (Index i = 0; i < d; ++i) out.eigenvalues(i) = ev(order[static_cast<std::size_t>(i)]);
  for (Index j = 0; j < filters; ++j) {
    Vector col = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
    for (Index i = 0; i < d; ++i) {
      if (std::abs(col(i)) > 1e-12) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
    out.v_hat.col(j) = col;
  }
  const double top = std::abs(out.eigenvalues(0));
  const double kth = std::abs(out.eigenvalues(filters - 1));
  const double next = filters < d ? std::abs(out.eigenvalues(filters)) : 0.0;
  out.gap = kth - next;
  out.degenerate = out.gap <= 1e-12 * std::max(1.0, top);
  if (strict && out.degenerate)
    throw Error(ErrorCode::DegenerateSpectrum, "K-th and (K+1)-th eigenvalues coincide");
  return out;
}

namespace {

constexpr double kMaxContractionCondition = 1e8;

template <typename TensorT>
double rank_one_residual(const TensorT& t, const Matrix& u_hat);

template <>
double rank_one_residual(const Tensor3& t, const Matrix& u_hat) {
  const Index k = t.dim();
  const Index r = u_hat.cols();
  Matrix design(k * k * k, r);
  Vector target(k * k * k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      for (Index l = 0; l < k; ++l) {
        const Index row = (i * k + j) * k + l;
        target(row) = t(i, j, l);
        for (Index c = 0; c < r; ++c) design(row, c) = u_hat(i, c) * u_hat(j, c) * u_hat(l, c);
      }
  const Vector w = design.colPivHouseholderQr().solve(target);
  return (design * w - target).norm() / std::max(target.norm(), std::numeric_limits<double>::min());
}

template <>
double rank_one_residual(const Tensor4& t, const Matrix& u_hat) {
  const Index k = t.dim();
  const Index r = u_hat.cols();
  Matrix design(k * k * k * k, r);
  Vector target(k * k * k * k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      for (Index l = 0; l < k; ++l)
        for (Index m = 0; m < k; ++m) {
          const Index row = ((i * k + j) * k + l) * k + m;
          target(row) = t(i, j, l, m);
          for (Index c = 0; c < r; ++c) design(row, c) = u_hat(i, c) * u_hat(j, c) * u_hat(l, c) * u_hat(m, c);
        }
  const Vector w = design.colPivHouseholderQr().solve(target);
  return (design * w - target).norm() / std::max(target.norm(), std::numeric_limits<double>::min());
}

Vector random_unit(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v / v.norm();
}

template <typename TensorT>
DecomposeResult power_deflation(TensorT t, const DecomposeConfig& cfg, Rng& rng) {
  const Index k = t.dim();
  DecomposeResult out;
  out.method = DecomposeMethod::PowerDeflation;
  out.u_hat.resize(k, k);
  const int restarts = std::max(1, cfg.restarts);
  for (Index c = 0; c < k; ++c) {
    Vector best;
    double best_value = -1.0;
    for (int r = 0; r < restarts; ++r) {
      Vector u = random_unit(k, rng);
      for (int it = 0; it < cfg.iters; ++it) {
        Vector next = t.apply(u);
        const double norm = next.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) break;
        // odd-order maps can flip sign every step; keep a consistent orientation
        if (next.dot(u) < 0.0) next = -next;
        u = next / norm;
      }
      const double v = std::abs(t.value(u));
      if (std::isfinite(v) && v > best_value) {
        best_value = v;
        best = u;
      }
    }
    if (best.size() == 0 || !best.allFinite())
      throw Error(ErrorCode::DecompositionFailed, "power iteration produced no finite component");
    out.u_hat.col(c) = best;
    t.add_rank_one(-t.value(best), best);
  }
  return out;
}

template <typename TensorT>
DecomposeResult decompose_impl(const TensorT& t, const DecomposeConfig& cfg) {
  const Index k = t.dim();
  if (k < 1) throw Error(ErrorCode::InvalidShape, "empty tensor");
  if (t.norm() < 1e-12) throw Error(ErrorCode::DegenerateTensor, "tensor norm below 1e-12");
  Rng rng = make_rng(derive_seed(cfg.seed, stream::decompose));
  DecomposeResult out;
  if (k == 1) {
    out.u_hat = Matrix::Ones(1, 1);
    out.condition = 1.0;
    out.separation = 1.0;
    return out;
  }

  // Joint diagonalization: with T = sum_j c_j u_j^{op}, every contraction is
  // U diag(.) U^T, so T(theta1) T(theta2)^{-1} = U D U^{-1}.
  double best_score = -1.0;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    const Vector theta1 = random_unit(k, rng);
    const Vector theta2 = random_unit(k, rng);
    const Matrix c1 = t.contract(theta1);
    const Matrix c2 = t.contract(theta2);
    Eigen::JacobiSVD<Matrix> svd(c2);
    const Vector& sv = svd.singularValues();
    if (!(sv(k - 1) > 0.0)) continue;
    const double cond = sv(0) / sv(k - 1);
    if (!(cond <= kMaxContractionCondition)) continue;
    const Matrix p = c1 * c2.inverse();
    Eigen::EigenSolver<Matrix> es(p);
    if (es.info() != Eigen::Success) continue;
    const auto& lam = es.eigenvalues();
    const double scale = lam.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) continue;
    if (lam.imag().cwiseAbs().maxCoeff() > 1e-8 * scale) continue;
    double sep = std::numeric_limits<double>::infinity();
    for (Index a = 0; a < k; ++a)
      for (Index b = a + 1; b < k; ++b) sep = std::min(sep, std::abs(lam(a).real() - lam(b).real()) / scale);
    const double score = sep / cond;
    if (score > best_score) {
      best_score = score;
      Matrix u = es.eigenvectors().real();
      for (Index c = 0; c < k; ++c) u.col(c).normalize();
      out.u_hat = u;
      out.condition = cond;
      out.separation = sep;
    }
  }
  if (best_score < 0.0) out = power_deflation(t, cfg, rng);
  out.residual = rank_one_residual(t, out.u_hat);
  return out;
}

}  // namespace

DecomposeResult decompose(const Tensor3& t, const DecomposeConfig& cfg) { return decompose_impl(t, cfg); }
DecomposeResult decompose(const Tensor4& t, const DecomposeConfig& cfg) { return decompose_impl(t, cfg); }

AggregationScale aggregation_scale(const Vector& a_norm_sq) {
  if (a_norm_sq.size() == 0) throw Error(ErrorCode::EmptySubset, "aggregation scale of an empty subset");
  AggregationScale out;
  out.mean_sq = a_norm_sq.mean();
  std::vector<double> r(a_norm_sq.data(), a_norm_sq.data() + a_norm_sq.size());
  for (double& v : r) v = std::sqrt(v);
  std::sort(r.begin(), r.end());
  // Group equal norms; fall back to 64 equal-count bins when there are many.
  std::vector<std::pair<double, std::size_t>> groups;
  for (double v : r) {
    if (!groups.empty() && std::abs(groups.back().first - v) <= 1e-12 * v)
      ++groups.back().second;
    else
      groups.emplace_back(v, 1);
  }
  const double total = static_cast<double>(r.size());
  constexpr std::size_t kMaxBins = 64;
  if (groups.size() <= kMaxBins) {
    for (const auto& [v, count] : groups) {
      out.norms.push_back(v);
      out.weights.push_back(static_cast<double>(count) / total);
    }
  } else {
    const std::size_t n = r.size();
    for (std::size_t b = 0; b < kMaxBins; ++b) {
      const std::size_t lo = b * n / kMaxBins, hi = (b + 1) * n / kMaxBins;
      if (hi <= lo) continue;
      const double mean = std::accumulate(r.begin() + static_cast<std::ptrdiff_t>(lo),
                                          r.begin() + static_cast<std::ptrdiff_t>(hi), 0.0) /
                          static_cast<double>(hi - lo);
      out.norms.push_back(mean);
      out.weights.push_back(static_cast<double>(hi - lo) / total);
    }
  }
  return out;
}

double first_moment_coefficient(Activation act, double alpha, const AggregationScale& scale, Index filters) {
  const double inv_k = 1.0 / static_cast<double>(filters);
  if (act == Activation::ReLU) return inv_k * scale.mean_sq * alpha / 2.0;
  // E[sigma(alpha r h) r h] averaged over the norm distribution
  double acc = 0.0;
  for (std::size_t b = 0; b < scale.norms.size(); ++b) {
    const double r = scale.norms[b];
    acc += scale.weights[b] * r *
           gaussian_expectation([alpha, r](double h) { return h / (1.0 + std::exp(-alpha * r * h)); });
  }
  return inv_k * acc;
}

namespace {

double invert_coefficient(Activation act, double coeff, const AggregationScale& scale, Index filters) {
  if (coeff <= 0.0) return 0.0;
  if (act == Activation::ReLU) return coeff * 2.0 * static_cast<double>(filters) / scale.mean_sq;
  double lo = 0.0, hi = 1.0;
  constexpr double kMaxMagnitude = 1e4;
  while (first_moment_coefficient(act, hi, scale, filters) < coeff) {
    hi *= 2.0;
    if (hi > kMaxMagnitude) return kMaxMagnitude;
  }
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (first_moment_coefficient(act, mid, scale, filters) < coeff)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

MagnitudeResult magnitudes(const Vector& m1, const Matrix& u_hat, const Matrix& v_hat, Activation act,
                           const AggregationScale& scale) {
  if (v_hat.rows() != m1.size() || v_hat.cols() != u_hat.rows())
    throw Error(ErrorCode::InvalidShape, "magnitude stage shapes disagree");
  const Index k = u_hat.cols();
  Eigen::JacobiSVD<Matrix> svd(u_hat);
  const Vector& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-8 * sv(0)))
    throw Error(ErrorCode::IllConditionedDirections, "estimated directions are nearly dependent");

  MagnitudeResult out;
  out.directions = v_hat * u_hat;
  for (Index j = 0; j < k; ++j) out.directions.col(j).normalize();
  // Least squares over the candidate directions; flipping direction j flips
  // the sign of its coefficient and leaves the residual unchanged, so the
  // nonnegative sign pattern is also a minimiser.
  Vector coeff = out.directions.colPivHouseholderQr().solve(m1);
  for (Index j = 0; j < k; ++j) {
    if (coeff(j) < 0.0) {
      coeff(j) = -coeff(j);
      out.directions.col(j) *= -1.0;
    }
  }
  const double m1_norm = m1.norm();
  out.residual = m1_norm > 0.0 ? (out.directions * coeff - m1).norm() / m1_norm : 0.0;
  out.alpha.resize(k);
  for (Index j = 0; j < k; ++j) out.alpha(j) = invert_coefficient(act, coeff(j), scale, k);
  return out;
}

TensorOrder resolve_order(TensorOrder order, Activation act) {
  if (order != TensorOrder::Auto) return order;
  // E[relu(h) He_3(h)] = 0, so the third moment carries no direction signal for ReLU.
  return act == Activation::ReLU ? TensorOrder::Fourth : TensorOrder::Third;
}

std::array<IndexSet, 3> split_three(const IndexSet& omega, Seed seed) {
  auto parts = partition_omega(omega, 3, BatchMode::Disjoint, seed);
  return {std::move(parts[0]), std::move(parts[1]), std::move(parts[2])};
}

namespace {

struct Whitening {
  Matrix w;      // P^{-1/2}
  Matrix w_inv;  // P^{1/2}
};

// P = V^T M2 V; whitening makes the components of the tensor orthonormal.
std::optional<Whitening> whitening(const MomentSet& m) {
  if (m.m2.size() == 0 || m.v_hat.size() == 0) return std::nullopt;
  const Matrix proj = m.v_hat.transpose() * m.m2 * m.v_hat;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (proj + proj.transpose()));
  const Vector& ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-10 * ev.cwiseAbs().maxCoeff())) return std::nullopt;
  const Matrix& q = es.eigenvectors();
  return Whitening{q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose(),
                   q * ev.cwiseSqrt().asDiagonal() * q.transpose()};
}

}  // namespace

InitOutput initialize_from_moments(const MomentSet& moments, const AggregationScale& scale, Activation act,
                                   const InitConfig& cfg) {
  InitOutput out;
  out.moments = moments;
  out.v_hat = moments.v_hat;
  DecomposeResult dec;
  std::optional<Whitening> wh;
  if (cfg.whiten && act == Activation::ReLU) wh = whitening(moments);
  out.diagnostics.whitened = wh.has_value();
  if (moments.m4_proj) {
    dec = wh ? decompose(moments.m4_proj->transformed(wh->w), cfg.decompose)
             : decompose(*moments.m4_proj, cfg.decompose);
    out.diagnostics.tensor_order = 4;
    out.diagnostics.tensor_norm = moments.m4_proj->norm();
    out.diagnostics.tensor_asymmetry = moments.m4_proj->max_asymmetry();
  } else if (moments.m3_proj) {
    dec = wh ? decompose(moments.m3_proj->transformed(wh->w), cfg.decompose)
             : decompose(*moments.m3_proj, cfg.decompose);
    out.diagnostics.tensor_order = 3;
    out.diagnostics.tensor_norm = moments.m3_proj->norm();
    out.diagnostics.tensor_asymmetry = moments.m3_proj->max_asymmetry();
  } else {
    throw Error(ErrorCode::InvalidArgument, "moment set carries no projected tensor");
  }
  out.diagnostics.decompose_method =
      dec.method == DecomposeMethod::SimultaneousDiagonalization ? "simultaneous-diagonalization" : "power-deflation";
  out.diagnostics.contraction_condition = dec.condition;
  out.diagnostics.eigen_separation = dec.separation;
  out.diagnostics.decomposition_residual = dec.residual;
  if (wh) {
    dec.u_hat = wh->w_inv * dec.u_hat;
    for (Index j = 0; j < dec.u_hat.cols(); ++j) dec.u_hat.col(j).normalize();
  }

  MagnitudeResult mag = magnitudes(moments.m1, dec.u_hat, moments.v_hat, act, scale);
  out.diagnostics.magnitude_residual = mag.residual;
  out.alpha_hat = mag.alpha;
  out.u_hat = moments.v_hat.transpose() * mag.directions;
  out.w0 = mag.directions * mag.alpha.asDiagonal();
  return out;
}

InitOutput tensor_initialize(const NormalizedAdjacency& adj, const Dataset& ds, const std::array<IndexSet, 3>& split,
                             Index filters, const InitConfig& cfg) {
  for (const auto& part : split)
    if (part.empty()) throw Error(ErrorCode::EmptySubset, "tensor initialization needs three nonempty subsets");
  if (filters < 1 || filters > ds.dim()) throw Error(ErrorCode::InvalidShape, "need 1 <= K <= d");
  const Matrix agg = aggregate(adj, ds.x);
  const Vector norms = adj.row_norms_squared();
  const Batch b1 = make_batch(agg, norms, ds.y, split[0]);
  const Batch b2 = make_batch(agg, norms, ds.y, split[1]);
  const Batch b3 = make_batch(agg, norms, ds.y, split[2]);

  MomentSet moments;
  moments.m1 = estimate_m1(b1);
  moments.m2 = estimate_m2(b2);
  moments.scale_c = b1.a_norm_sq.mean();

  InitDiagnostics diag;
  SubspaceResult sub = subspace(moments.m2, filters, cfg.strict_subspace && ds.activation == Activation::ReLU);
  diag.subspace_source = "m2";
  if (ds.activation == Activation::Sigmoid) {
    // E[sigmoid(g)(g^2 - 1)] = 0: M2 has no population signal, use a random
    // contraction of the third moment instead.
    Rng rng = make_rng(derive_seed(cfg.decompose.seed, stream::decompose, 1));
    const Vector theta = random_unit(ds.dim(), rng);
    sub = subspace(estimate_m3_contracted(b2, theta), filters, cfg.strict_subspace);
    diag.subspace_source = "m3-contraction";
    diag.degenerate_spectrum = true;
  }
  diag.subspace_eigenvalues = sub.eigenvalues;
  diag.subspace_gap = sub.gap;
  diag.degenerate_spectrum = diag.degenerate_spectrum || sub.degenerate;
  moments.v_hat = sub.v_hat;

  if (resolve_order(cfg.order, ds.activation) == TensorOrder::Fourth)
    moments.m4_proj = estimate_m4_projected(b3, moments.v_hat);
  else
    moments.m3_proj = estimate_m3_projected(b3, moments.v_hat);

  InitOutput out = initialize_from_moments(moments, aggregation_scale(b1.a_norm_sq), ds.activation, cfg);
  const auto keep = out.diagnostics;
  out.diagnostics = diag;
  out.diagnostics.tensor_order = keep.tensor_order;
  out.diagnostics.tensor_norm = keep.tensor_norm;
  out.diagnostics.tensor_asymmetry = keep.tensor_asymmetry;
  out.diagnostics.decompose_method = keep.decompose_method;
  out.diagnostics.whitened = keep.whitened;
  out.diagnostics.contraction_condition = keep.contraction_condition;
  out.diagnostics.eigen_separation = keep.eigen_separation;
  out.diagnostics.decomposition_residual = keep.decomposition_residual;
  out.diagnostics.magnitude_residual = keep.magnitude_residual;
  out.diagnostics.split_sizes = {static_cast<Index>(split[0].size()), static_cast<Index>(split[1].size()),
                                 static_cast<Index>(split[2].size())};
  return out;
}

}  // namespace gnnrec
