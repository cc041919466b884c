#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gnnrec/model.hpp"
#include "gnnrec/tensor.hpp"
#include "gnnrec/types.hpp"

namespace gnnrec {

/// v (x~) Z = sum_i (v o z_i o z_i + z_i o v o z_i + z_i o z_i o v).
Tensor3 special_outer(const Vector& v, const Matrix& z);

// Label-weighted moment estimators. The Gaussian baseline is removed per
// sample with ||a_n||^2 in place of the unit variance, since a_n^T X has
// covariance ||a_n||^2 I.
Vector estimate_m1(const Batch& batch);
Matrix estimate_m2(const Batch& batch);
/// Sample average of y [s^{o3} - ||a||^2 (s (x~) I_K)], s = V^T X^T a_n; symmetrized.
Tensor3 estimate_m3_projected(const Batch& batch, const Matrix& v_hat);
/// Fourth-order Hermite analogue projected on V; used when the third-order
/// coefficient of the activation vanishes (ReLU).
Tensor4 estimate_m4_projected(const Batch& batch, const Matrix& v_hat);
/// d x d contraction M3(I, I, theta) of the unprojected third moment.
Matrix estimate_m3_contracted(const Batch& batch, const Vector& theta);

Vector estimate_m1(const NormalizedAdjacency& adj, const Dataset& ds, const IndexSet& subset);
Matrix estimate_m2(const NormalizedAdjacency& adj, const Dataset& ds, const IndexSet& subset);
Tensor3 estimate_m3_projected(const NormalizedAdjacency& adj, const Dataset& ds, const IndexSet& subset,
                              const Matrix& v_hat);

struct SubspaceResult {
  Matrix v_hat;               // d x K, orthonormal columns
  Vector eigenvalues;         // sorted by decreasing magnitude
  double gap = 0.0;           // |lambda_K| - |lambda_{K+1}|
  bool degenerate = false;    // gap within 1e-12 (relative)
};

/// Orthonormal basis for the eigenvectors of the K largest |eigenvalues|.
/// With strict = true a degenerate gap throws DegenerateSpectrum.
SubspaceResult subspace(const Matrix& m2, Index filters, bool strict = false);

struct DecomposeConfig {
  int restarts = 16;
  int iters = 200;
  Seed seed = 0;
};

enum class DecomposeMethod { SimultaneousDiagonalization, PowerDeflation };

struct DecomposeResult {
  Matrix u_hat;                // K x K, unit columns
  DecomposeMethod method = DecomposeMethod::SimultaneousDiagonalization;
  double condition = 0.0;      // condition number of the inverted contraction
  double separation = 0.0;     // smallest relative gap between eigenvalues
  double residual = 0.0;       // relative residual of the rank-K fit
};

/// Components of a symmetric tensor sum_j c_j u_j^{o p} (p = 3 or 4).
DecomposeResult decompose(const Tensor3& t, const DecomposeConfig& cfg);
DecomposeResult decompose(const Tensor4& t, const DecomposeConfig& cfg);

/// Distribution of ||a_n|| over the magnitude-estimation subset.
struct AggregationScale {
  double mean_sq = 1.0;            // (1/|S|) sum ||a_n||^2
  std::vector<double> norms;       // representative ||a_n|| values
  std::vector<double> weights;     // their frequencies (sum to 1)
};

AggregationScale aggregation_scale(const Vector& a_norm_sq);

/// M1 coefficient m(alpha) for one filter of magnitude alpha:
/// E[y s] = sum_j m(||w_j||) w_j / ||w_j|| with y = (1/K) sum_j phi(w_j^T s).
double first_moment_coefficient(Activation act, double alpha, const AggregationScale& scale, Index filters);

struct MagnitudeResult {
  Vector alpha;       // K magnitudes, nonnegative
  Matrix directions;  // d x K signed unit directions V u_j
  double residual = 0.0;
};

MagnitudeResult magnitudes(const Vector& m1, const Matrix& u_hat, const Matrix& v_hat, Activation act,
                           const AggregationScale& scale);

enum class TensorOrder { Auto, Third, Fourth };

struct InitConfig {
  TensorOrder order = TensorOrder::Auto;
  DecomposeConfig decompose;
  bool strict_subspace = false;
  /// Whiten the tensor with the projected M2 before decomposing (ReLU only,
  /// where M2 is positive definite on the span of W*).
  bool whiten = true;
};

struct InitDiagnostics {
  std::string subspace_source;  // "m2" or "m3-contraction"
  Vector subspace_eigenvalues;
  double subspace_gap = 0.0;
  bool degenerate_spectrum = false;
  int tensor_order = 3;
  double tensor_norm = 0.0;
  double tensor_asymmetry = 0.0;
  std::string decompose_method;
  bool whitened = false;
  double contraction_condition = 0.0;
  double eigen_separation = 0.0;
  double decomposition_residual = 0.0;
  double magnitude_residual = 0.0;
  std::array<Index, 3> split_sizes{0, 0, 0};
};

struct MomentSet {
  Vector m1;
  Matrix m2;
  Matrix v_hat;
  std::optional<Tensor3> m3_proj;
  std::optional<Tensor4> m4_proj;
  double scale_c = 1.0;
};

struct InitOutput {
  Matrix w0;
  Matrix u_hat;
  Vector alpha_hat;
  Matrix v_hat;
  MomentSet moments;
  InitDiagnostics diagnostics;
};

TensorOrder resolve_order(TensorOrder order, Activation act);

/// Equal-thirds random split of omega.
std::array<IndexSet, 3> split_three(const IndexSet& omega, Seed seed);

/// Directions from the projected tensor in `moments`, magnitudes from m1.
InitOutput initialize_from_moments(const MomentSet& moments, const AggregationScale& scale, Activation act,
                                   const InitConfig& cfg);

InitOutput tensor_initialize(const NormalizedAdjacency& adj, const Dataset& ds,
                             const std::array<IndexSet, 3>& split, Index filters, const InitConfig& cfg);

}  // namespace gnnrec
