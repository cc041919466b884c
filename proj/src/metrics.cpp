#include "gnnrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gnnrec/error.hpp"

namespace gnnrec {

namespace {

Matrix column_distances(const Matrix& w, const Matrix& w_star) {
  const Index k = w.cols();
  Matrix cost(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) cost(i, j) = (w.col(i) - w_star.col(j)).squaredNorm();
  return cost;
}

void check_alignment_inputs(const Matrix& w, const Matrix& w_star) {
  if (w.rows() != w_star.rows() || w.cols() != w_star.cols())
    throw Error(ErrorCode::InvalidShape, "alignment needs matrices of equal shape");
  if (w_star.norm() == 0.0) throw Error(ErrorCode::DegenerateReference, "||W*||_F is zero");
}

double permuted_error(const Matrix& cost, const std::vector<Index>& perm, double ref_norm) {
  double total = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) total += cost(static_cast<Index>(i), perm[i]);
  return std::sqrt(total) / ref_norm;
}

}  // namespace

std::vector<Index> hungarian_assignment(const Matrix& cost) {
  // O(n^3) shortest augmenting path formulation with row/column potentials.
  const Index n = cost.rows();
  if (cost.cols() != n) throw Error(ErrorCode::InvalidShape, "assignment cost must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based
  for (Index row = 1; row <= n; ++row) {
    match[0] = row;
    Index col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const Index r0 = match[col0];
      double delta = inf;
      Index col1 = 0;
      for (Index c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double cur = cost(r0 - 1, c - 1) - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (Index c = 0; c <= n; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const Index col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<Index> assignment(static_cast<std::size_t>(n));
  for (Index c = 1; c <= n; ++c) assignment[static_cast<std::size_t>(match[c] - 1)] = c - 1;
  return assignment;
}

AlignmentResult aligned_relative_error(const Matrix& w, const Matrix& w_star) {
  check_alignment_inputs(w, w_star);
  if (w.cols() > 64) throw Error(ErrorCode::TooLarge, "alignment supports K <= 64");
  const Matrix cost = column_distances(w, w_star);
  AlignmentResult out;
  out.permutation = hungarian_assignment(cost);
  out.rel_error = permuted_error(cost, out.permutation, w_star.norm());
  return out;
}

AlignmentResult aligned_relative_error_brute_force(const Matrix& w, const Matrix& w_star) {
  check_alignment_inputs(w, w_star);
  if (w.cols() > 8) throw Error(ErrorCode::TooLarge, "brute-force alignment supports K <= 8");
  const Matrix cost = column_distances(w, w_star);
  std::vector<Index> perm(static_cast<std::size_t>(w.cols()));
  std::iota(perm.begin(), perm.end(), Index{0});
  AlignmentResult best;
  best.rel_error = std::numeric_limits<double>::infinity();
  do {
    const double err = permuted_error(cost, perm, w_star.norm());
    if (err < best.rel_error) {
      best.rel_error = err;
      best.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double success_rate(std::span<const double> final_errors, double threshold) {
  if (final_errors.empty()) throw Error(ErrorCode::EmptyList, "success rate of zero trials");
  const auto hits = std::count_if(final_errors.begin(), final_errors.end(),
                                  [threshold](double e) { return e < threshold; });
  return static_cast<double>(hits) / static_cast<double>(final_errors.size());
}

LinearFit least_squares_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "line fit needs two or more paired points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "line fit needs distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 3 || xs.size() != ys.size())
    throw Error(ErrorCode::InvalidArgument, "log-log slope needs three or more paired points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw Error(ErrorCode::InvalidDomain, "log-log slope needs strictly positive values");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  return least_squares_line(lx, ly).slope;
}

double crossing_point(std::span<const double> xs, std::span<const double> rates, double level) {
  if (xs.empty() || xs.size() != rates.size())
    throw Error(ErrorCode::InvalidArgument, "crossing point needs a nonempty paired grid");
  if (rates[0] >= level) return xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (rates[i] >= level) {
      const double t = (level - rates[i - 1]) / (rates[i] - rates[i - 1]);
      return std::exp(std::log(xs[i - 1]) + t * (std::log(xs[i]) - std::log(xs[i - 1])));
    }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace gnnrec
