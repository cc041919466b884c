#pragma once

#include <span>
#include <vector>

#include "gnnrec/types.hpp"

namespace gnnrec {

struct AlignmentResult {
  std::vector<Index> permutation;  // column j of W is matched to column permutation[j] of W*
  double rel_error = 0.0;
};

/// min over column permutations P of ||W P - W*||_F / ||W*||_F.
AlignmentResult aligned_relative_error(const Matrix& w, const Matrix& w_star);

/// Same minimisation by enumerating every permutation; K <= 8.
AlignmentResult aligned_relative_error_brute_force(const Matrix& w, const Matrix& w_star);

/// Minimum-cost perfect matching on a square cost matrix. Returns, for each
/// row, its assigned column.
std::vector<Index> hungarian_assignment(const Matrix& cost);

inline constexpr double kSuccessThreshold = 1e-3;

/// Fraction of errors strictly below the threshold.
double success_rate(std::span<const double> final_errors, double threshold = kSuccessThreshold);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit least_squares_line(std::span<const double> xs, std::span<const double> ys);

/// Slope of log y against log x.
double loglog_slope(std::span<const double> xs, std::span<const double> ys);

/// Interpolated x at which a (roughly increasing) rate curve first crosses
/// `level`, linear in log x between grid points. Returns +inf when the curve
/// never reaches the level and the first x when it starts above it.
double crossing_point(std::span<const double> xs, std::span<const double> rates, double level = 0.5);

}  // namespace gnnrec
