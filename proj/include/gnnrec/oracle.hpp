#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gnnrec/model.hpp"
#include "gnnrec/synth.hpp"
#include "gnnrec/tensorinit.hpp"

namespace gnnrec {

struct OracleReport {
  std::string name;
  double max_abs_dev = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  Index samples_used = 0;
  Index excluded = 0;  // coordinates skipped (ReLU kinks)
};

OracleReport make_report(std::string name, double dev, double tolerance, Index samples, Index excluded = 0);

/// Central differences of the risk on every coordinate of W against the
/// analytic gradient. Deviation is max |fd - g| / max(1, max |g|).
OracleReport fd_gradient_check(const ModelParams& params, const Dataset& ds, const NormalizedAdjacency& adj,
                               const IndexSet& subset, double h, double tolerance = 1e-6);

/// Library estimators on replicate datasets against a per-sample formula on
/// independent replicates; deviation is the largest z-score over a handful of
/// random contractions of M1, M2 and the projected M3.
OracleReport mc_moment_check(const GroundTruth& gt, const NormalizedAdjacency& adj, Index n_mc, Seed seed);

/// Minimum Hessian eigenvalue at W* and 5 points at relative distance radius.
/// Deviation is max(0, 1e-12 - min eigenvalue).
OracleReport hessian_spd_check(const GroundTruth& gt, const NormalizedAdjacency& adj, const Dataset& ds,
                               double radius, Seed seed);

/// sigma1(A) inside the degree bounds on random graphs of every family.
OracleReport lemma1_check(Index n_graphs, Seed seed);

/// Hungarian alignment against enumeration of all permutations.
OracleReport alignment_check(Index max_filters, Index trials, Seed seed);

OracleReport special_outer_check(Seed seed);

/// Closed-form ReLU moments E[y He_p] for a planted W* on a graph, with
/// V from the population M2 and the fourth-order tensor projected on it.
MomentSet population_moments_relu(const GroundTruth& gt, const Vector& a_norm_sq);

/// Tensor initialization from exact population moments of an orthogonal W*.
OracleReport population_init_check(Seed seed);

std::vector<OracleReport> run_default_suite(Seed seed = 20240601);
bool all_passed(const std::vector<OracleReport>& reports);

void write_oracle_json(std::ostream& os, const std::vector<OracleReport>& reports);

}  // namespace gnnrec
