#include "gnnrec/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include "json.hpp"
#include <ostream>

#include "gnnrec/error.hpp"
#include "gnnrec/metrics.hpp"
#include "gnnrec/rng.hpp"

namespace gnnrec {

OracleReport make_report(std::string name, double dev, double tolerance, Index samples, Index excluded) {
  OracleReport r;
  r.name = std::move(name);
  r.max_abs_dev = dev;
  r.tolerance = tolerance;
  r.passed = std::isfinite(dev) && dev <= tolerance;
  r.samples_used = samples;
  r.excluded = excluded;
  return r;
}

namespace {

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

Vector unit_vector(Index n, Rng& rng) {
  Vector v = gaussian_matrix(n, 1, rng);
  return v / v.norm();
}

struct RunningStat {
  std::vector<double> values;
  void add(double v) { values.push_back(v); }
  double mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  double std_error() const {
    const double m = mean();
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    const double n = static_cast<double>(values.size());
    return std::sqrt(s / (n - 1.0) / n);
  }
};

double z_score(double diff, double se) {
  if (diff == 0.0) return 0.0;
  return se > 0.0 ? std::abs(diff) / se : std::numeric_limits<double>::infinity();
}

}  // namespace

OracleReport fd_gradient_check(const ModelParams& params, const Dataset& ds, const NormalizedAdjacency& adj,
                               const IndexSet& subset, double h, double tolerance) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  const Index d = params.w.rows(), k = params.w.cols();
  if (d * k > 200) throw Error(ErrorCode::TooLarge, "finite-difference check limited to dK <= 200");
  const Batch batch = make_batch(adj, ds, subset);
  const Matrix analytic = risk(ds.problem, params, batch).gradient;

  std::vector<bool> skip(static_cast<std::size_t>(k), false);
  if (params.activation == Activation::ReLU) {
    const Matrix pre = batch.h * params.w;
    for (Index c = 0; c < k; ++c) skip[static_cast<std::size_t>(c)] = pre.col(c).cwiseAbs().minCoeff() < 10.0 * h;
  }
  const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
  double dev = 0.0;
  Index used = 0, excluded = 0;
  ModelParams probe = params;
  for (Index c = 0; c < k; ++c) {
    for (Index i = 0; i < d; ++i) {
      if (skip[static_cast<std::size_t>(c)]) {
        ++excluded;
        continue;
      }
      probe.w(i, c) = params.w(i, c) + h;
      const double up = risk(ds.problem, probe, batch).value;
      probe.w(i, c) = params.w(i, c) - h;
      const double down = risk(ds.problem, probe, batch).value;
      probe.w(i, c) = params.w(i, c);
      dev = std::max(dev, std::abs((up - down) / (2.0 * h) - analytic(i, c)) / scale);
      ++used;
    }
  }
  return make_report(std::string("fd_gradient_") + std::string(to_string(params.activation)), dev, tolerance, used,
                     excluded);
}

OracleReport mc_moment_check(const GroundTruth& gt, const NormalizedAdjacency& adj, Index n_mc, Seed seed) {
  const Index n = adj.size();
  const Index d = gt.dim(), k = gt.filters();
  const Index reps = std::max<Index>(10, (n_mc + n - 1) / n);
  Rng rng = make_rng(derive_seed(seed, stream::trial));
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(d, k, rng));
  const Matrix v_basis = qr.householderQ() * Matrix::Identity(d, k);
  constexpr int kDirections = 3;
  std::vector<Vector> us, vs, ps;
  for (int i = 0; i < kDirections; ++i) {
    us.push_back(unit_vector(d, rng));
    vs.push_back(unit_vector(d, rng));
    ps.push_back(unit_vector(k, rng));
  }
  const Vector a_norm_sq = adj.row_norms_squared();

  std::vector<RunningStat> lib(3 * kDirections), naive(3 * kDirections);
  for (Index r = 0; r < reps; ++r) {
    // Library estimators on one replicate.
    {
      const Seed s = derive_seed(seed, stream::features, static_cast<std::uint64_t>(2 * r));
      const Dataset ds = forward_labels(gt, adj, sample_features(n, d, s), Problem::Regression, std::nullopt, s);
      const Batch b = make_batch(adj, ds, all_nodes(n));
      const Vector m1 = estimate_m1(b);
      const Matrix m2 = estimate_m2(b);
      const Tensor3 m3 = estimate_m3_projected(b, v_basis);
      for (int i = 0; i < kDirections; ++i) {
        lib[3 * i].add(us[i].dot(m1));
        lib[3 * i + 1].add(us[i].dot(m2 * vs[i]));
        lib[3 * i + 2].add(m3.value(ps[i]));
      }
    }
    // Per-sample formula on an independent replicate.
    {
      const Seed s = derive_seed(seed, stream::features, static_cast<std::uint64_t>(2 * r + 1));
      const Dataset ds = forward_labels(gt, adj, sample_features(n, d, s), Problem::Regression, std::nullopt, s);
      const Matrix agg = adj.matrix * ds.x;
      for (int i = 0; i < kDirections; ++i) {
        double s1 = 0.0, s2 = 0.0, s3 = 0.0;
        const Vector proj = v_basis * ps[i];
        const double pp = ps[i].squaredNorm();
        const double uv = us[i].dot(vs[i]);
        for (Index row = 0; row < n; ++row) {
          const double y = ds.y(row);
          const double r2 = a_norm_sq(row);
          double hu = 0.0, hv = 0.0, q = 0.0;
          for (Index c = 0; c < d; ++c) {
            hu += agg(row, c) * us[i](c);
            hv += agg(row, c) * vs[i](c);
            q += agg(row, c) * proj(c);
          }
          s1 += y * hu;
          s2 += y * (hu * hv - r2 * uv);
          s3 += y * (q * q * q - 3.0 * r2 * q * pp);
        }
        naive[3 * i].add(s1 / static_cast<double>(n));
        naive[3 * i + 1].add(s2 / static_cast<double>(n));
        naive[3 * i + 2].add(s3 / static_cast<double>(n));
      }
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < lib.size(); ++i) {
    const double se = std::hypot(lib[i].std_error(), naive[i].std_error());
    worst = std::max(worst, z_score(lib[i].mean() - naive[i].mean(), se));
  }
  if (gt.activation == Activation::ReLU) {
    // E[y x] = mean(||a||^2) / (2K) * sum_j w_j
    const Vector pop = a_norm_sq.mean() / (2.0 * static_cast<double>(k)) * gt.w_star.rowwise().sum();
    for (int i = 0; i < kDirections; ++i)
      worst = std::max(worst, z_score(lib[3 * i].mean() - us[i].dot(pop), lib[3 * i].std_error()));
  }
  return make_report(std::string("mc_moments_") + std::string(to_string(gt.activation)), worst, 3.0,
                     2 * reps * n);
}

OracleReport hessian_spd_check(const GroundTruth& gt, const NormalizedAdjacency& adj, const Dataset& ds,
                               double radius, Seed seed) {
  const Index d = gt.dim(), k = gt.filters();
  if (d * k > 300) throw Error(ErrorCode::TooLarge, "Hessian check limited to dK <= 300");
  const Batch batch = make_batch(adj, ds, ds.omega);
  Rng rng = make_rng(derive_seed(seed, stream::init));
  double min_eig = std::numeric_limits<double>::infinity();
  const int points = radius > 0.0 ? 6 : 1;
  for (int p = 0; p < points; ++p) {
    Matrix w = gt.w_star;
    if (p > 0) {
      const Matrix g = gaussian_matrix(d, k, rng);
      w += radius * gt.w_star.norm() * g / g.norm();
    }
    const Matrix hess = hessian(ds.problem, ModelParams{w, gt.activation}, batch);
    Eigen::SelfAdjointEigenSolver<Matrix> es(hess, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  return make_report(std::string("hessian_spd_") + std::string(to_string(ds.problem)),
                     std::max(0.0, 1e-12 - min_eig), 0.0, batch.size() * points);
}

OracleReport lemma1_check(Index n_graphs, Seed seed) {
  Rng rng = make_rng(derive_seed(seed, stream::graph));
  double dev = 0.0;
  for (Index g = 0; g < n_graphs; ++g) {
    const Seed gs = derive_seed(seed, stream::graph, static_cast<std::uint64_t>(g) + 1);
    auto uniform = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Graph graph = build_empty(1);
    switch (g % 4) {
      case 0:
        graph = build_cycle(uniform(10, 80), 2 * uniform(1, 3));
        break;
      case 1:
        graph = build_grid2d(uniform(2, 10), uniform(2, 10));
        break;
      case 2: {
        const int delta = uniform(3, 5);
        graph = build_random_regular(2 * uniform(8, 40), delta, gs);
        break;
      }
      default:
        graph = build_random_bounded(uniform(10, 80), uniform(3, 6),
                                     std::uniform_real_distribution<double>(0.1, 1.0)(rng), gs);
    }
    const NormalizedAdjacency adj = normalized_adjacency(graph);
    Eigen::JacobiSVD<Matrix> svd(adj.dense());
    const double sigma = svd.singularValues()(0);
    const SpectralBounds b = lemma1_bounds(graph);
    dev = std::max({dev, b.lower - sigma, sigma - b.upper, std::abs(sigma - adj.sigma1)});
  }
  return make_report("lemma1_bounds", std::max(0.0, dev), 1e-9, n_graphs);
}

OracleReport alignment_check(Index max_filters, Index trials, Seed seed) {
  Rng rng = make_rng(derive_seed(seed, stream::trial, 1));
  double dev = 0.0;
  for (Index t = 0; t < trials; ++t) {
    const Index k = 1 + t % max_filters;
    const Matrix w_star = gaussian_matrix(4, k, rng);
    const Matrix w = gaussian_matrix(4, k, rng);
    dev = std::max(dev, std::abs(aligned_relative_error(w, w_star).rel_error -
                                 aligned_relative_error_brute_force(w, w_star).rel_error));
  }
  return make_report("alignment_hungarian", dev, 1e-12, trials);
}

OracleReport special_outer_check(Seed seed) {
  Rng rng = make_rng(derive_seed(seed, stream::trial, 2));
  const Index n = 5, cols = 3;
  const Vector v = gaussian_matrix(n, 1, rng);
  const Matrix z = gaussian_matrix(n, cols, rng);
  const Tensor3 t = special_outer(v, z);
  double dev = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) {
        double ref = 0.0;
        for (Index c = 0; c < cols; ++c) {
          ref += v(i) * z(j, c) * z(k, c);
          ref += z(i, c) * v(j) * z(k, c);
          ref += z(i, c) * z(j, c) * v(k);
        }
        dev = std::max(dev, std::abs(t(i, j, k) - ref));
      }
  return make_report("special_outer", dev, 1e-14, n * n * n);
}

MomentSet population_moments_relu(const GroundTruth& gt, const Vector& a_norm_sq) {
  if (gt.activation != Activation::ReLU) throw Error(ErrorCode::InvalidActivation, "closed form needs ReLU");
  const Index d = gt.dim(), k = gt.filters();
  const double inv_k = 1.0 / static_cast<double>(k);
  const double c2 = 1.0 / std::sqrt(2.0 * M_PI);  // E[relu(g) He_2(g)]
  const double c4 = -c2;                          // E[relu(g) He_4(g)]
  const Vector r = a_norm_sq.cwiseSqrt();
  const double r2 = a_norm_sq.mean();
  const double r3 = r.array().pow(3).mean();
  const double r5 = r.array().pow(5).mean();
  MomentSet m;
  m.scale_c = r2;
  m.m1 = inv_k * r2 * 0.5 * gt.w_star.rowwise().sum();
  m.m2 = Matrix::Zero(d, d);
  for (Index j = 0; j < k; ++j) {
    const Vector w = gt.w_star.col(j);
    m.m2 += inv_k * r3 * c2 * w * w.transpose() / w.norm();
  }
  m.v_hat = subspace(m.m2, k).v_hat;
  Tensor4 t(k);
  for (Index j = 0; j < k; ++j) {
    const Vector w = gt.w_star.col(j);
    t.add_rank_one(inv_k * r5 * c4 * w.norm(), m.v_hat.transpose() * w / w.norm());
  }
  m.m4_proj = t;
  return m;
}

OracleReport population_init_check(Seed seed) {
  Rng rng = make_rng(derive_seed(seed, stream::weights));
  const Index d = 8, k = 3;
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(d, k, rng));
  Matrix w = qr.householderQ() * Matrix::Identity(d, k);
  for (Index j = 0; j < k; ++j) w.col(j) *= static_cast<double>(j + 1);
  const GroundTruth gt = make_ground_truth(w, Activation::ReLU);
  const NormalizedAdjacency adj = normalized_adjacency(build_random_bounded(60, 4, 0.5, seed));
  const Vector norms = adj.row_norms_squared();
  InitConfig cfg;
  cfg.decompose.seed = seed;
  const InitOutput out =
      initialize_from_moments(population_moments_relu(gt, norms), aggregation_scale(norms), Activation::ReLU, cfg);
  return make_report("population_tensor_init", aligned_relative_error(out.w0, w).rel_error, 1e-6, 1);
}

std::vector<OracleReport> run_default_suite(Seed seed) {
  std::vector<OracleReport> out;
  {
    const NormalizedAdjacency adj = normalized_adjacency(build_cycle(120, 2));
    const GroundTruth gt = sample_ground_truth(5, 3, 1.0, Activation::Sigmoid, derive_seed(seed, stream::weights));
    const Dataset ds = forward_labels(gt, adj, sample_features(120, 5, derive_seed(seed, stream::features)),
                                      Problem::Classification, std::nullopt, seed);
    Rng rng = make_rng(derive_seed(seed, stream::init));
    const Matrix w = gt.w_star + 0.3 * gaussian_matrix(5, 3, rng);
    out.push_back(fd_gradient_check({w, Activation::Sigmoid}, ds, adj, ds.omega, 1e-5, 1e-6));
  }
  {
    const NormalizedAdjacency adj = normalized_adjacency(build_cycle(120, 2));
    const GroundTruth gt = sample_ground_truth(5, 3, 1.0, Activation::ReLU, derive_seed(seed, stream::weights, 1));
    const Matrix x = sample_features(120, 5, derive_seed(seed, stream::features, 1));
    const Dataset noisy = forward_labels(gt, adj, x, Problem::Regression, NoiseSpec{0.1}, seed);
    Rng rng = make_rng(derive_seed(seed, stream::init, 1));
    const Matrix w = gt.w_star + 0.3 * gaussian_matrix(5, 3, rng);
    OracleReport r = fd_gradient_check({w, Activation::ReLU}, noisy, adj, noisy.omega, 1e-5, 1e-5);
    out.push_back(r);
    const Dataset clean = forward_labels(gt, adj, x, Problem::Regression, std::nullopt, seed);
    r = fd_gradient_check({gt.w_star, Activation::ReLU}, clean, adj, clean.omega, 1e-5, 1e-8);
    r.name = "fd_gradient_at_truth";
    out.push_back(r);
  }
  {
    const NormalizedAdjacency adj = normalized_adjacency(build_cycle(1000, 2));
    const GroundTruth relu = sample_ground_truth(5, 3, 1.0, Activation::ReLU, derive_seed(seed, stream::weights, 2));
    out.push_back(mc_moment_check(relu, adj, 40000, derive_seed(seed, stream::labels, 1)));
    const GroundTruth sig =
        sample_ground_truth(5, 3, 1.0, Activation::Sigmoid, derive_seed(seed, stream::weights, 3));
    out.push_back(mc_moment_check(sig, adj, 40000, derive_seed(seed, stream::labels, 2)));
  }
  {
    constexpr Index kNodes = 100000;
    const NormalizedAdjacency adj = normalized_adjacency(build_cycle(kNodes, 2));
    const Matrix x = sample_features(kNodes, 6, derive_seed(seed, stream::features, 4));
    const GroundTruth relu = sample_ground_truth(6, 2, 5.0, Activation::ReLU, derive_seed(seed, stream::weights, 4));
    const Dataset reg = forward_labels(relu, adj, x, Problem::Regression, std::nullopt, seed);
    out.push_back(hessian_spd_check(relu, adj, reg, 0.05, seed));
    const GroundTruth sig =
        sample_ground_truth(6, 2, 1.0, Activation::Sigmoid, derive_seed(seed, stream::weights, 5));
    const Dataset cls = forward_labels(sig, adj, x, Problem::Classification, std::nullopt, seed);
    out.push_back(hessian_spd_check(sig, adj, cls, 0.05, seed));
  }
  out.push_back(lemma1_check(100, seed));
  out.push_back(alignment_check(6, 300, seed));
  out.push_back(special_outer_check(seed));
  out.push_back(population_init_check(seed));
  return out;
}

bool all_passed(const std::vector<OracleReport>& reports) {
  for (const auto& r : reports)
    if (!r.passed) return false;
  return !reports.empty();
}

void write_oracle_json(std::ostream& os, const std::vector<OracleReport>& reports) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["all_passed"] = all_passed(reports);
  j["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    j["reports"].push_back({{"name", r.name},
                            {"max_abs_dev", r.max_abs_dev},
                            {"tolerance", r.tolerance},
                            {"passed", r.passed},
                            {"samples_used", r.samples_used},
                            {"excluded", r.excluded}});
  }
  os << j.dump(2) << '\n';
}

}  // namespace gnnrec
