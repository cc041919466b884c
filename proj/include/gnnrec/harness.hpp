#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gnnrec/graph.hpp"
#include "gnnrec/optim.hpp"
#include "gnnrec/synth.hpp"

namespace gnnrec {

enum class InitMode { Tensor, RandomBall, OracleNear };

std::string_view to_string(InitMode m) noexcept;
InitMode parse_init_mode(std::string_view s);
GraphFamily parse_graph_family(std::string_view s);

struct GraphSpec {
  GraphFamily family = GraphFamily::Cycle;
  Index delta = 4;
  double p = 1.0;  // edge-keep probability for RandomBounded

  std::string label() const;
};

/// Graph on at least `min_nodes` nodes; the grid uses floor(sqrt n) rows.
Graph build_graph(const GraphSpec& g, Index min_nodes, Seed seed);

struct ExperimentSpec {
  std::string name;
  std::vector<GraphSpec> graphs;
  std::vector<Index> dims;
  std::vector<Index> filters;
  /// |Omega| grid. When omega_factors is set it wins: |Omega| = ceil(f * d * K).
  std::vector<Index> omega_sizes;
  std::vector<double> omega_factors;
  std::vector<double> noise_levels{0.0};  // sigma / E_z
  std::vector<double> betas{0.5};
  double scale = 5.0;
  Activation activation = Activation::ReLU;
  Problem problem = Problem::Regression;
  OptimizerConfig optimizer;
  InitMode init = InitMode::RandomBall;
  double init_radius = 0.5;
  Index n_seeds = 100;
  double success_threshold = 1e-3;
  Seed master_seed = 1;

  void validate() const;
};

struct CellKey {
  Index graph = 0, dim = 0, filters = 0, omega = 0, noise = 0, beta = 0;
};

/// Grid cells in a fixed order (graph, d, K, |Omega|, noise, beta; last fastest).
std::vector<CellKey> enumerate_cells(const ExperimentSpec& spec);
Index omega_size(const ExperimentSpec& spec, const CellKey& cell);

struct TrialResult {
  std::string graph;
  Index d = 0, k = 0, omega = 0;
  double noise_level = 0.0;
  double beta = 0.0;
  Index cell = 0;
  Index seed_index = 0;
  Seed seed = 0;
  double init_error = 0.0;
  double final_error = 0.0;
  double final_distance = 0.0;  // aligned ||W - W*||_F
  Index iterations = 0;
  Index iters_to_target = -1;   // -1 when never reached
  double nu = std::numeric_limits<double>::quiet_NaN();
  double nu_r2 = std::numeric_limits<double>::quiet_NaN();
  bool success = false;
  std::string status;           // stop reason, "diverged", or an error code
  double wall_ms = 0.0;
};

struct CellSummary {
  Index cell = 0;
  std::string graph;
  Index d = 0, k = 0, omega = 0;
  double noise_level = 0.0;
  double beta = 0.0;
  Index trials = 0;
  Index successes = 0;
  double success_rate = 0.0;
  double mean_final_error = 0.0;
  double median_final_error = 0.0;
  double mean_distance = 0.0;
  double median_iterations = 0.0;
  double median_nu = std::numeric_limits<double>::quiet_NaN();
  Index failures = 0;  // diverged or errored
};

struct ExperimentResults {
  ExperimentSpec spec;
  std::vector<TrialResult> trials;
  std::vector<CellSummary> cells;
  std::string started_at;
  std::string finished_at;
};

std::vector<ExperimentSpec> builtin_specs();
ExperimentSpec find_spec(std::string_view name);

TrialResult run_trial(const ExperimentSpec& spec, const CellKey& cell, Index cell_index, Index seed_index);

using ProgressFn = std::function<void(Index done, Index total)>;

/// All cells x seeds on `parallelism` workers; results are ordered by
/// (cell, seed) regardless of scheduling.
ExperimentResults run_experiment(const ExperimentSpec& spec, Index parallelism = 1,
                                 const ProgressFn& progress = {});

std::vector<CellSummary> summarize(const std::vector<TrialResult>& trials);

/// Threads from GNNREC_THREADS, else hardware concurrency.
Index default_parallelism();

enum class EmitFormat { Csv, Json };

inline constexpr int kResultsSchemaVersion = 1;

void write_trials_csv(std::ostream& os, const ExperimentResults& r);
void write_cells_csv(std::ostream& os, const ExperimentResults& r);
void write_results_json(std::ostream& os, const ExperimentResults& r);
ExperimentResults read_results_json(std::istream& is);

/// Csv: trial rows to `path` and cell rows to `<stem>_cells.csv` beside it.
/// Json: everything, including timestamps, to `path`.
void emit(const ExperimentResults& r, EmitFormat format, const std::filesystem::path& path);

}  // namespace gnnrec
