#include "gnnrec/optim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "gnnrec/error.hpp"
#include "gnnrec/metrics.hpp"

namespace gnnrec {

double default_eta(Problem problem, Index filters, double sigma1) {
  if (!(sigma1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma1 must be positive");
  const double s2 = sigma1 * sigma1;
  return problem == Problem::Regression ? static_cast<double>(filters) / (8.0 * s2) : 1.0 / (2.0 * s2);
}

double oracle_beta(Problem problem, const WeightStats& stats, Index filters, double eps0) {
  const double base = stats.kappa * stats.kappa * stats.gamma;
  const double k = static_cast<double>(filters);
  const double root = problem == Problem::Regression ? std::sqrt((1.0 - eps0) / (88.0 * base))
                                                     : std::sqrt((1.0 - eps0) / (11.0 * base * k * k));
  return (1.0 - root) * (1.0 - root);
}

double max_curvature(Problem problem, const ModelParams& params, const Batch& batch, int iters) {
  const Index d = params.dim();
  const Index k = params.filters();
  const Matrix pre = batch.h * params.w;
  Matrix jac(pre.rows(), k);  // phi'(pre) / K, scaled by sqrt(c_n)
  for (Index n = 0; n < pre.rows(); ++n) {
    double c = 1.0;
    if (problem == Problem::Classification) {
      double g = 0.0;
      for (Index j = 0; j < k; ++j) g += activate(params.activation, pre(n, j));
      g = std::clamp(g / static_cast<double>(k), kProbClamp, 1.0 - kProbClamp);
      c = batch.y(n) / (g * g) + (1.0 - batch.y(n)) / ((1.0 - g) * (1.0 - g));
    }
    for (Index j = 0; j < k; ++j)
      jac(n, j) = std::sqrt(c) * activate_derivative(params.activation, pre(n, j)) / static_cast<double>(k);
  }
  Matrix v = Matrix::Ones(d, k);
  v /= v.norm();
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    // (J v)_n = sum_j jac(n, j) h_n . v_j
    const Vector jv = (jac.array() * (batch.h * v).array()).rowwise().sum();
    Matrix next = batch.h.transpose() * (jac.array().colwise() * jv.array()).matrix();
    next /= static_cast<double>(batch.size());
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    lambda = norm;
    v = next / norm;
  }
  return lambda;
}

double resolve_eta(const OptimizerConfig& cfg, const ModelParams& params0, const Batch& first_batch,
                   double sigma1) {
  if (cfg.eta) return *cfg.eta;
  if (cfg.step_rule == StepRule::Theory) return default_eta(cfg.problem, params0.filters(), sigma1);
  const double lambda = max_curvature(cfg.problem, params0, first_batch);
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "zero curvature at the initial point");
  return cfg.curvature_scale / lambda;
}

namespace {

constexpr double kDivergenceThreshold = 1e12;

double aligned_error_or_nan(const Matrix& w, const GroundTruth* gt) {
  if (gt == nullptr) return std::numeric_limits<double>::quiet_NaN();
  return aligned_relative_error(w, gt->w_star).rel_error;
}

}  // namespace

AgdResult agd_run(const ModelParams& params0, const std::vector<Batch>& batches, const OptimizerConfig& cfg,
                  double eta, const GroundTruth* gt) {
  if (batches.empty()) throw Error(ErrorCode::EmptySubset, "optimizer needs at least one batch");
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) throw Error(ErrorCode::InvalidArgument, "beta must lie in [0, 1)");
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
  if (!params0.w.allFinite()) throw Error(ErrorCode::InvalidArgument, "initial weights are not finite");
  if (gt != nullptr && (gt->w_star.rows() != params0.dim() || gt->w_star.cols() != params0.filters()))
    throw Error(ErrorCode::InvalidShape, "ground truth and initial weights differ in shape");

  AgdResult out;
  out.eta = eta;
  out.params = params0;
  Matrix w = params0.w;
  Matrix w_prev = w;
  ModelParams current{w, params0.activation};
  out.trace.reserve(static_cast<std::size_t>(std::min<Index>(cfg.max_iters + 1, 100000)));

  for (Index t = 0;; ++t) {
    const Batch& batch = batches[static_cast<std::size_t>(t) % batches.size()];
    current.w = w;
    RiskReport rr = risk(cfg.problem, current, batch);
    if (!std::isfinite(rr.value) || rr.value > kDivergenceThreshold || !rr.gradient.allFinite() ||
        !w.allFinite())
      throw Error(ErrorCode::Diverged, "iterate diverged at iteration " + std::to_string(t));

    TraceEntry entry{t, aligned_error_or_nan(w, gt), rr.value, rr.gradient.norm()};
    out.trace.push_back(entry);

    if (cfg.stop_on_target && gt != nullptr && entry.aligned_rel_error < cfg.epsilon) {
      out.reason = StopReason::ReachedTarget;
      break;
    }
    if (cfg.grad_tol > 0.0 && entry.grad_norm <= cfg.grad_tol * std::max(1.0, w.norm())) {
      out.reason = StopReason::GradientTolerance;
      break;
    }
    if (cfg.stall_window > 0 && gt != nullptr && t >= cfg.stall_window) {
      const double earlier = out.trace[static_cast<std::size_t>(t - cfg.stall_window)].aligned_rel_error;
      if (!(entry.aligned_rel_error < cfg.stall_ratio * earlier)) {
        out.reason = StopReason::Stalled;
        break;
      }
    }
    if (t >= cfg.max_iters) {
      out.reason = StopReason::MaxIters;
      break;
    }

    Matrix next = w - eta * rr.gradient;
    if (cfg.beta != 0.0) next += cfg.beta * (w - w_prev);
    w_prev = std::move(w);
    w = std::move(next);
  }
  out.params.w = w;
  return out;
}

AgdResult agd_run(const ModelParams& params0, const Dataset& ds, const NormalizedAdjacency& adj,
                  const OptimizerConfig& cfg, const GroundTruth* gt) {
  if (ds.dim() != params0.dim()) throw Error(ErrorCode::InvalidShape, "dataset and weights differ in d");
  const Matrix agg = aggregate(adj, ds.x);
  const Vector norms = adj.row_norms_squared();

  std::vector<IndexSet> parts = ds.partitions;
  if (parts.empty()) {
    const Index t = cfg.batch_mode == BatchMode::FullBatch ? 1 : partitions_for_tolerance(cfg.epsilon);
    parts = partition_omega(ds.omega, t, cfg.batch_mode, cfg.partition_seed);
  }
  std::vector<Batch> batches;
  batches.reserve(parts.size());
  for (const auto& p : parts) batches.push_back(make_batch(agg, norms, ds.y, p));
  const double eta = resolve_eta(cfg, params0, batches.front(), adj.sigma1);
  return agd_run(params0, batches, cfg, eta, gt);
}

RateFit fit_convergence_rate_detail(const Trace& trace, double min_r2) {
  constexpr std::size_t kMinPoints = 10;
  std::vector<double> xs, ys;
  for (const auto& e : trace) {
    if (std::isfinite(e.aligned_rel_error) && e.aligned_rel_error > 0.0) {
      xs.push_back(static_cast<double>(e.iter));
      ys.push_back(std::log(e.aligned_rel_error));
    }
  }
  if (xs.size() < kMinPoints || !(ys.back() < ys.front()))
    throw Error(ErrorCode::NoLinearRegime, "trace too short or not decreasing");

  // Suffix sums so every candidate start is O(1).
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::vector<RateFit> fits(n);
  std::vector<bool> ok(n, false);
  for (std::size_t i = n; i-- > 0;) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
    const double m = static_cast<double>(n - i);
    if (n - i < kMinPoints) continue;
    const double vxx = sxx - sx * sx / m;
    const double vxy = sxy - sx * sy / m;
    const double vyy = syy - sy * sy / m;
    if (vxx <= 0.0 || vyy <= 0.0) continue;
    const double slope = vxy / vxx;
    const double r2 = vxy * vxy / (vxx * vyy);
    if (slope < 0.0 && r2 >= min_r2) {
      ok[i] = true;
      fits[i] = RateFit{std::exp(slope), r2, static_cast<Index>(xs[i]), static_cast<Index>(m)};
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (ok[i]) return fits[i];
  throw Error(ErrorCode::NoLinearRegime, "no suffix of the trace decays linearly in log scale");
}

double fit_convergence_rate(const Trace& trace) { return fit_convergence_rate_detail(trace).nu; }

std::optional<Index> iterations_to_error(const Trace& trace, double target) {
  for (const auto& e : trace)
    if (e.aligned_rel_error <= target) return e.iter;
  return std::nullopt;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "iter,rel_error,risk,grad_norm\n";
  os << std::setprecision(17);
  for (const auto& e : trace)
    os << e.iter << ',' << e.aligned_rel_error << ',' << e.risk_value << ',' << e.grad_norm << '\n';
}

}  // namespace gnnrec
