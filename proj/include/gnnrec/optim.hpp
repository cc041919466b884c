#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "gnnrec/model.hpp"
#include "gnnrec/synth.hpp"

namespace gnnrec {

enum class StepRule { Theory, Curvature };

struct OptimizerConfig {
  Problem problem = Problem::Regression;
  std::optional<double> eta;  // explicit step; when unset the step rule decides
  StepRule step_rule = StepRule::Theory;
  /// Curvature rule: eta = curvature_scale / lambda_max(Gauss-Newton at W(0)).
  double curvature_scale = 1.0;
  double beta = 0.0;
  Index max_iters = 5000;
  double epsilon = 1e-3;
  BatchMode batch_mode = BatchMode::FullBatch;
  bool stop_on_target = true;
  /// Stop once ||grad||_F <= grad_tol * ||W||_F (0 disables). Used where the
  /// target is a critical point rather than W*.
  double grad_tol = 0.0;
  /// Stop when the aligned error has not dropped below `stall_ratio` times
  /// its value `stall_window` iterations earlier (0 disables).
  Index stall_window = 0;
  double stall_ratio = 0.99;
  Seed partition_seed = 0;
};

struct TraceEntry {
  Index iter = 0;
  double aligned_rel_error = 0.0;  // NaN when no ground truth was supplied
  double risk_value = 0.0;
  double grad_norm = 0.0;
};

using Trace = std::vector<TraceEntry>;

enum class StopReason { MaxIters, ReachedTarget, GradientTolerance, Stalled };

struct AgdResult {
  ModelParams params;
  Trace trace;
  StopReason reason = StopReason::MaxIters;
  double eta = 0.0;
};

/// Regression: K / (8 sigma1^2). Classification: 1 / (2 sigma1^2).
double default_eta(Problem problem, Index filters, double sigma1);

/// Largest eigenvalue of the Gauss-Newton matrix (1/|S|) sum_n c_n J_n J_n^T
/// at `params`, by power iteration; c_n = 1 for squared loss and the
/// cross-entropy curvature for classification.
double max_curvature(Problem problem, const ModelParams& params, const Batch& batch, int iters = 50);

/// Resolves the step size for a run: explicit eta, theory default, or curvature rule.
double resolve_eta(const OptimizerConfig& cfg, const ModelParams& params0, const Batch& first_batch,
                   double sigma1);

/// Momentum constant from the known planted W* (diagnostic only; needs
/// kappa and gamma which are unobservable in practice).
double oracle_beta(Problem problem, const WeightStats& stats, Index filters, double eps0 = 0.25);

/// Heavy-Ball iteration W(t+1) = W(t) - eta grad f_t(W(t)) + beta (W(t) - W(t-1))
/// with W(-1) = W(0). Trace entry t describes W(t).
AgdResult agd_run(const ModelParams& params0, const Dataset& ds, const NormalizedAdjacency& adj,
                  const OptimizerConfig& cfg, const GroundTruth* gt = nullptr);

/// Same iteration on pre-built batches; batches are consumed cyclically.
AgdResult agd_run(const ModelParams& params0, const std::vector<Batch>& batches, const OptimizerConfig& cfg,
                  double eta, const GroundTruth* gt = nullptr);

/// exp(slope) of ln(error) against iteration over the longest suffix whose
/// fit has R^2 >= min_r2. Throws NoLinearRegime otherwise.
struct RateFit {
  double nu = 1.0;
  double r_squared = 0.0;
  Index first_iter = 0;
  Index points = 0;
};

RateFit fit_convergence_rate_detail(const Trace& trace, double min_r2 = 0.9);
double fit_convergence_rate(const Trace& trace);

std::optional<Index> iterations_to_error(const Trace& trace, double target);

/// CSV: iter,rel_error,risk,grad_norm
void write_trace_csv(std::ostream& os, const Trace& trace);

}  // namespace gnnrec
