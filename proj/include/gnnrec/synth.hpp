#pragma once

#include <optional>
#include <vector>

#include "gnnrec/graph.hpp"
#include "gnnrec/types.hpp"

namespace gnnrec {

struct WeightStats {
  Vector singular_values;  // descending
  double kappa = 1.0;      // sigma_1 / sigma_K
  double gamma = 1.0;      // prod_j sigma_j / sigma_K
};

WeightStats weight_stats(const Matrix& w);

struct GroundTruth {
  Matrix w_star;  // d x K
  Activation activation = Activation::ReLU;
  WeightStats stats;

  Index dim() const noexcept { return w_star.rows(); }
  Index filters() const noexcept { return w_star.cols(); }
};

struct NoiseSpec {
  double sigma = 0.0;
};

struct Dataset {
  Matrix x;  // N x d
  Vector z;  // noiseless outputs
  Vector y;  // observed labels
  IndexSet omega;
  std::vector<IndexSet> partitions;
  Problem problem = Problem::Regression;
  Activation activation = Activation::ReLU;
  double noise_sigma = 0.0;
  Seed seed = 0;

  Index n_nodes() const noexcept { return x.rows(); }
  Index dim() const noexcept { return x.cols(); }
  /// sigma / E_z with E_z = sqrt(mean z^2).
  double noise_level() const;
};

enum class BatchMode { Disjoint, FullBatch };

Matrix sample_features(Index n_nodes, Index dim, Seed seed);
GroundTruth sample_ground_truth(Index dim, Index filters, double scale, Activation activation, Seed seed);
GroundTruth make_ground_truth(Matrix w_star, Activation activation);

double activate(Activation a, double t) noexcept;
double activate_derivative(Activation a, double t) noexcept;
double activate_second_derivative(Activation a, double t) noexcept;

/// z_n = (1/K) sum_j phi(a_n^T X w_j). Labels follow the problem kind:
/// regression y = z + noise, classification y ~ Bernoulli(z).
Dataset forward_labels(const GroundTruth& gt, const NormalizedAdjacency& adj, Matrix x,
                       Problem problem, const std::optional<NoiseSpec>& noise, Seed seed);

/// Re-draw labels from the stored z with a fresh seed.
Dataset resample_labels(const Dataset& base, Seed seed);

IndexSet all_nodes(Index n_nodes);
/// Random subset of [N] of the requested size, returned sorted.
IndexSet sample_omega(Index n_nodes, Index size, Seed seed);

std::vector<IndexSet> partition_omega(const IndexSet& omega, Index parts, BatchMode mode, Seed seed);

/// T = ceil(ln(1/epsilon)), at least 1.
Index partitions_for_tolerance(double epsilon);

}  // namespace gnnrec
