#include "gnnrec/synth.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gnnrec/error.hpp"
#include "gnnrec/rng.hpp"

namespace gnnrec {

std::string_view to_string(Activation a) noexcept {
  return a == Activation::ReLU ? "relu" : "sigmoid";
}

std::string_view to_string(Problem p) noexcept {
  return p == Problem::Regression ? "regression" : "classification";
}

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw Error(ErrorCode::InvalidActivation, "unknown activation '" + std::string(s) + "'");
}

Problem parse_problem(std::string_view s) {
  if (s == "regression") return Problem::Regression;
  if (s == "classification") return Problem::Classification;
  throw Error(ErrorCode::InvalidArgument, "unknown problem '" + std::string(s) + "'");
}

double activate(Activation a, double t) noexcept {
  if (a == Activation::ReLU) return t > 0.0 ? t : 0.0;
  return 1.0 / (1.0 + std::exp(-t));
}

double activate_derivative(Activation a, double t) noexcept {
  if (a == Activation::ReLU) return t > 0.0 ? 1.0 : 0.0;
  double s = 1.0 / (1.0 + std::exp(-t));
  return s * (1.0 - s);
}

double activate_second_derivative(Activation a, double t) noexcept {
  if (a == Activation::ReLU) return 0.0;
  double s = 1.0 / (1.0 + std::exp(-t));
  return s * (1.0 - s) * (1.0 - 2.0 * s);
}

WeightStats weight_stats(const Matrix& w) {
  WeightStats st;
  Eigen::JacobiSVD<Matrix> svd(w);
  st.singular_values = svd.singularValues();
  const Index k = std::min(w.rows(), w.cols());
  if (k == 0) return st;
  double smin = st.singular_values(k - 1);
  if (smin > 0.0) {
    st.kappa = st.singular_values(0) / smin;
    st.gamma = st.singular_values.head(k).prod() / smin;
  } else {
    st.kappa = st.gamma = std::numeric_limits<double>::infinity();
  }
  return st;
}

Matrix sample_features(Index n_nodes, Index dim, Seed seed) {
  if (n_nodes < 1 || dim < 1) throw Error(ErrorCode::InvalidShape, "features need N >= 1 and d >= 1");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n_nodes, dim);
  for (Index n = 0; n < n_nodes; ++n)
    for (Index j = 0; j < dim; ++j) x(n, j) = normal(rng);
  return x;
}

GroundTruth make_ground_truth(Matrix w_star, Activation activation) {
  if (w_star.cols() < 1 || w_star.cols() > w_star.rows())
    throw Error(ErrorCode::InvalidShape, "ground truth needs 1 <= K <= d");
  GroundTruth gt;
  gt.stats = weight_stats(w_star);
  gt.w_star = std::move(w_star);
  gt.activation = activation;
  return gt;
}

GroundTruth sample_ground_truth(Index dim, Index filters, double scale, Activation activation, Seed seed) {
  if (filters < 1 || filters > dim)
    throw Error(ErrorCode::InvalidShape,
                "K=" + std::to_string(filters) + " must satisfy 1 <= K <= d=" + std::to_string(dim));
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix w(dim, filters);
  for (Index j = 0; j < filters; ++j)
    for (Index i = 0; i < dim; ++i) w(i, j) = normal(rng);
  return make_ground_truth(std::move(w), activation);
}

double Dataset::noise_level() const {
  if (z.size() == 0) return 0.0;
  double ez = std::sqrt(z.squaredNorm() / static_cast<double>(z.size()));
  return ez > 0.0 ? noise_sigma / ez : 0.0;
}

namespace {

void draw_labels(Dataset& ds, Seed seed) {
  Rng rng = make_rng(seed);
  const Index n = ds.z.size();
  ds.y.resize(n);
  if (ds.problem == Problem::Regression) {
    if (ds.noise_sigma > 0.0) {
      std::normal_distribution<double> normal(0.0, ds.noise_sigma);
      for (Index i = 0; i < n; ++i) ds.y(i) = ds.z(i) + normal(rng);
    } else {
      ds.y = ds.z;
    }
  } else {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Index i = 0; i < n; ++i) ds.y(i) = unif(rng) < ds.z(i) ? 1.0 : 0.0;
  }
}

}  // namespace

Dataset forward_labels(const GroundTruth& gt, const NormalizedAdjacency& adj, Matrix x, Problem problem,
                       const std::optional<NoiseSpec>& noise, Seed seed) {
  if (x.rows() != adj.size() || x.cols() != gt.dim())
    throw Error(ErrorCode::InvalidShape, "features, adjacency, and W* disagree on shape");
  if (problem == Problem::Classification && gt.activation != Activation::Sigmoid)
    throw Error(ErrorCode::InvalidActivation, "classification labels need the sigmoid activation");
  if (noise && noise->sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");

  Dataset ds;
  ds.problem = problem;
  ds.activation = gt.activation;
  ds.noise_sigma = (problem == Problem::Regression && noise) ? noise->sigma : 0.0;
  ds.seed = seed;

  const Matrix pre = (adj.matrix * x) * gt.w_star;
  const double inv_k = 1.0 / static_cast<double>(gt.filters());
  ds.z.resize(pre.rows());
  for (Index n = 0; n < pre.rows(); ++n) {
    double acc = 0.0;
    for (Index j = 0; j < pre.cols(); ++j) acc += activate(gt.activation, pre(n, j));
    ds.z(n) = acc * inv_k;
  }
  ds.x = std::move(x);
  ds.omega = all_nodes(ds.x.rows());
  draw_labels(ds, seed);
  return ds;
}

Dataset resample_labels(const Dataset& base, Seed seed) {
  Dataset ds = base;
  ds.seed = seed;
  draw_labels(ds, seed);
  return ds;
}

IndexSet all_nodes(Index n_nodes) {
  IndexSet out(static_cast<std::size_t>(n_nodes));
  std::iota(out.begin(), out.end(), Index{0});
  return out;
}

IndexSet sample_omega(Index n_nodes, Index size, Seed seed) {
  if (size < 0 || size > n_nodes) throw Error(ErrorCode::NotEnoughSamples, "omega larger than node set");
  IndexSet all = all_nodes(n_nodes);
  Rng rng = make_rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(size));
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<IndexSet> partition_omega(const IndexSet& omega, Index parts, BatchMode mode, Seed seed) {
  if (parts < 1) throw Error(ErrorCode::InvalidArgument, "need at least one partition");
  if (mode == BatchMode::FullBatch) return std::vector<IndexSet>(static_cast<std::size_t>(parts), omega);
  if (static_cast<Index>(omega.size()) < parts)
    throw Error(ErrorCode::NotEnoughSamples, "|omega| = " + std::to_string(omega.size()) +
                                                 " cannot be split into " + std::to_string(parts) + " parts");
  IndexSet shuffled = omega;
  Rng rng = make_rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::vector<IndexSet> out(static_cast<std::size_t>(parts));
  const std::size_t n = shuffled.size();
  const std::size_t t = static_cast<std::size_t>(parts);
  std::size_t begin = 0;
  for (std::size_t p = 0; p < t; ++p) {
    std::size_t len = n / t + (p < n % t ? 1 : 0);
    out[p].assign(shuffled.begin() + static_cast<std::ptrdiff_t>(begin),
                  shuffled.begin() + static_cast<std::ptrdiff_t>(begin + len));
    std::sort(out[p].begin(), out[p].end());
    begin += len;
  }
  return out;
}

Index partitions_for_tolerance(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) return 1;
  return std::max<Index>(1, static_cast<Index>(std::ceil(std::log(1.0 / epsilon))));
}

}  // namespace gnnrec
