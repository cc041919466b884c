// gnnrec command-line front end.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gnnrec/error.hpp"
#include "gnnrec/harness.hpp"
#include "gnnrec/io.hpp"
#include "gnnrec/metrics.hpp"
#include "gnnrec/oracle.hpp"
#include "gnnrec/optim.hpp"
#include "gnnrec/rng.hpp"
#include "gnnrec/tensorinit.hpp"
#include "json.hpp"

using namespace gnnrec;
namespace fs = std::filesystem;

namespace {

struct GraphOpts {
  std::string family = "cycle";
  Index nodes = 100;
  Index delta = 4;
  double p = 1.0;
  Index rows = 0, cols = 0;
  Seed seed = 1;
  std::string file;
};

void add_graph_options(CLI::App* cmd, GraphOpts& g) {
  cmd->add_option("--family", g.family, "cycle, grid, regular, bounded or empty")->capture_default_str();
  cmd->add_option("--nodes", g.nodes, "number of nodes")->capture_default_str();
  cmd->add_option("--delta", g.delta, "degree parameter")->capture_default_str();
  cmd->add_option("--p", g.p, "edge keep probability (bounded)")->capture_default_str();
  cmd->add_option("--rows", g.rows, "grid rows (default floor(sqrt(nodes)))");
  cmd->add_option("--cols", g.cols, "grid columns");
  cmd->add_option("--graph-seed", g.seed, "graph seed")->capture_default_str();
  cmd->add_option("--graph", g.file, "read the graph from an edge list instead");
}

Graph make_graph(const GraphOpts& g) {
  if (!g.file.empty()) return read_edge_list_file(g.file);
  const GraphFamily f = parse_graph_family(g.family);
  if (f == GraphFamily::Grid2D && g.rows > 0) return build_grid2d(g.rows, g.cols > 0 ? g.cols : g.rows);
  return build_graph(GraphSpec{f, g.delta, g.p}, g.nodes, g.seed);
}

nlohmann::ordered_json graph_summary(const Graph& g, const NormalizedAdjacency& adj) {
  const SpectralBounds b = lemma1_bounds(g);
  return {{"nodes", g.n_nodes()},     {"edges", g.edges().size()}, {"max_degree", g.max_degree()},
          {"average_degree", g.average_degree()}, {"sigma1", adj.sigma1}, {"lemma1_lower", b.lower},
          {"lemma1_upper", b.upper}};
}

Matrix random_ball(const Matrix& w_star, double radius, Seed seed) {
  Rng rng = make_rng(derive_seed(seed, stream::init));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(w_star.rows(), w_star.cols());
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  return w_star + radius * w_star.norm() * g / g.norm();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planted one-hidden-layer GNN: data synthesis, tensor initialization, Heavy-Ball training"};
  app.set_config("--config", "", "TOML/INI file with values for any flag");
  app.require_subcommand(1);
  Index threads = default_parallelism();
  app.add_option("--threads", threads, "worker threads for experiments")->envname("GNNREC_THREADS");

  // graph
  GraphOpts gopts;
  std::string graph_out;
  auto* graph_cmd = app.add_subcommand("graph", "build a graph, print spectral summary, optionally save edges");
  add_graph_options(graph_cmd, gopts);
  graph_cmd->add_option("--out", graph_out, "edge list output path");

  // synth
  GraphOpts sg;
  Index s_dim = 10, s_filters = 5, s_omega = 0;
  double s_scale = 5.0, s_noise = 0.0;
  std::string s_activation = "relu", s_problem = "regression", s_out;
  Seed s_seed = 1;
  auto* synth_cmd = app.add_subcommand("synth", "sample features, planted weights and labels into a dataset directory");
  add_graph_options(synth_cmd, sg);
  synth_cmd->add_option("--dim", s_dim, "feature dimension d")->capture_default_str();
  synth_cmd->add_option("--filters", s_filters, "hidden filters K")->capture_default_str();
  synth_cmd->add_option("--scale", s_scale, "std of W* entries")->capture_default_str();
  synth_cmd->add_option("--activation", s_activation, "relu or sigmoid")->capture_default_str();
  synth_cmd->add_option("--problem", s_problem, "regression or classification")->capture_default_str();
  synth_cmd->add_option("--noise", s_noise, "label noise sigma (regression)")->capture_default_str();
  synth_cmd->add_option("--omega", s_omega, "labeled nodes (0 = all)")->capture_default_str();
  synth_cmd->add_option("--seed", s_seed, "master seed")->capture_default_str();
  synth_cmd->add_option("--out", s_out, "output directory")->required();

  // train
  std::string t_data, t_init = "random-ball", t_trace, t_out, t_step = "curvature", t_batch = "full-batch";
  double t_beta = 0.5, t_radius = 0.5, t_epsilon = 1e-3, t_grad_tol = 0.0;
  std::optional<double> t_eta;
  Index t_max_iters = 5000;
  bool t_no_target_stop = false;
  Seed t_seed = 1;
  auto* train_cmd = app.add_subcommand("train", "run Heavy-Ball gradient descent on a dataset directory");
  train_cmd->add_option("--data", t_data, "dataset directory")->required();
  train_cmd->add_option("--init", t_init, "random-ball, oracle-near or tensor")->capture_default_str();
  train_cmd->add_option("--radius", t_radius, "random-ball relative radius")->capture_default_str();
  train_cmd->add_option("--beta", t_beta, "momentum")->capture_default_str();
  train_cmd->add_option("--eta", t_eta, "explicit step size");
  train_cmd->add_option("--step-rule", t_step, "theory or curvature")->capture_default_str();
  train_cmd->add_option("--batch-mode", t_batch, "full-batch or disjoint")->capture_default_str();
  train_cmd->add_option("--max-iters", t_max_iters, "iteration cap")->capture_default_str();
  train_cmd->add_option("--epsilon", t_epsilon, "target aligned error")->capture_default_str();
  train_cmd->add_option("--grad-tol", t_grad_tol, "relative gradient-norm stop (0 = off)")->capture_default_str();
  train_cmd->add_flag("--no-target-stop", t_no_target_stop, "keep iterating after reaching the target");
  train_cmd->add_option("--seed", t_seed, "seed for init and partitions")->capture_default_str();
  train_cmd->add_option("--trace", t_trace, "trace CSV output");
  train_cmd->add_option("--out", t_out, "final weights (binary, d x K row-major)");

  // init-tensor
  std::string i_data, i_out, i_order = "auto";
  Index i_filters = 0;
  Seed i_seed = 1;
  auto* init_cmd = app.add_subcommand("init-tensor", "moment-based initialization with diagnostics");
  init_cmd->add_option("--data", i_data, "dataset directory")->required();
  init_cmd->add_option("--filters", i_filters, "K (default: from the stored W*)");
  init_cmd->add_option("--order", i_order, "auto, 3 or 4")->capture_default_str();
  init_cmd->add_option("--seed", i_seed, "split and decomposition seed")->capture_default_str();
  init_cmd->add_option("--out", i_out, "diagnostics JSON path (default stdout)");

  // oracle
  std::string o_suite = "default", o_out;
  Seed o_seed = 20240601;
  auto* oracle_cmd = app.add_subcommand("oracle", "independent checks of the analytic formulas");
  auto* oracle_run = oracle_cmd->add_subcommand("run", "run an oracle suite");
  oracle_cmd->require_subcommand(1);
  oracle_run->add_option("--suite", o_suite, "suite name")->capture_default_str();
  oracle_run->add_option("--seed", o_seed, "suite seed")->capture_default_str();
  oracle_run->add_option("--out", o_out, "JSON report path (default stdout)");

  // experiments
  std::string e_spec, e_out = "results";
  Index e_seeds = 0;
  std::optional<Seed> e_master;
  bool e_require = false;
  auto* exp_cmd = app.add_subcommand("experiments", "named experiment recipes");
  exp_cmd->require_subcommand(1);
  auto* exp_list = exp_cmd->add_subcommand("list", "list built-in specs");
  auto* exp_run = exp_cmd->add_subcommand("run", "run a built-in spec");
  exp_run->add_option("--spec", e_spec, "spec name")->required();
  exp_run->add_option("--seeds", e_seeds, "seeds per cell (default: spec value)");
  exp_run->add_option("--master-seed", e_master, "override the master seed");
  exp_run->add_option("--out", e_out, "output directory")->capture_default_str();
  exp_run->add_flag("--require-oracles", e_require, "refuse to run unless the default oracle suite passes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*graph_cmd) {
      const Graph g = make_graph(gopts);
      const NormalizedAdjacency adj = normalized_adjacency(g);
      if (!graph_out.empty()) write_edge_list_file(graph_out, g);
      std::cout << graph_summary(g, adj).dump(2) << '\n';
    } else if (*synth_cmd) {
      const Graph g = make_graph(sg);
      const NormalizedAdjacency adj = normalized_adjacency(g);
      const Activation act = parse_activation(s_activation);
      const Problem prob = parse_problem(s_problem);
      const GroundTruth gt =
          sample_ground_truth(s_dim, s_filters, s_scale, act, derive_seed(s_seed, stream::weights));
      std::optional<NoiseSpec> noise;
      if (s_noise > 0.0) noise = NoiseSpec{s_noise};
      Dataset ds = forward_labels(gt, adj, sample_features(g.n_nodes(), s_dim, derive_seed(s_seed, stream::features)),
                                  prob, noise, derive_seed(s_seed, stream::labels));
      ds.seed = s_seed;
      if (s_omega > 0) ds.omega = sample_omega(g.n_nodes(), s_omega, derive_seed(s_seed, stream::partition));
      save_dataset(s_out, DatasetBundle{ds, gt, g});
      std::cout << "wrote " << s_out << " (N=" << g.n_nodes() << ", |Omega|=" << ds.omega.size()
                << ", noise level=" << ds.noise_level() << ")\n";
    } else if (*train_cmd) {
      const DatasetBundle b = load_dataset(t_data);
      if (!b.graph) throw Error(ErrorCode::InvalidArgument, "dataset has no graph.edges");
      const NormalizedAdjacency adj = normalized_adjacency(*b.graph);
      const GroundTruth* gt = b.ground_truth ? &*b.ground_truth : nullptr;
      const Index k = gt ? gt->filters() : i_filters;
      const InitMode mode = parse_init_mode(t_init);
      Matrix w0;
      if (mode == InitMode::Tensor) {
        InitConfig icfg;
        icfg.decompose.seed = derive_seed(t_seed, stream::decompose);
        w0 = tensor_initialize(adj, b.dataset, split_three(b.dataset.omega, derive_seed(t_seed, stream::init)), k,
                               icfg)
                 .w0;
      } else {
        if (!gt) throw Error(ErrorCode::InvalidArgument, "random-ball and oracle-near init need the stored W*");
        w0 = random_ball(gt->w_star, mode == InitMode::RandomBall ? t_radius : 0.05, t_seed);
      }
      OptimizerConfig cfg;
      cfg.problem = b.dataset.problem;
      cfg.eta = t_eta;
      cfg.step_rule = t_step == "theory" ? StepRule::Theory : StepRule::Curvature;
      cfg.batch_mode = t_batch == "disjoint" ? BatchMode::Disjoint : BatchMode::FullBatch;
      cfg.beta = t_beta;
      cfg.max_iters = t_max_iters;
      cfg.epsilon = t_epsilon;
      cfg.stop_on_target = !t_no_target_stop;
      cfg.grad_tol = t_grad_tol;
      cfg.partition_seed = derive_seed(t_seed, stream::partition);
      const AgdResult res = agd_run(ModelParams{w0, b.dataset.activation}, b.dataset, adj, cfg, gt);
      if (!t_trace.empty()) {
        std::ofstream os(t_trace);
        write_trace_csv(os, res.trace);
      }
      if (!t_out.empty()) write_matrix_bin(t_out, res.params.w);
      nlohmann::ordered_json j{{"iterations", res.trace.back().iter},
                               {"eta", res.eta},
                               {"final_risk", res.trace.back().risk_value},
                               {"final_grad_norm", res.trace.back().grad_norm}};
      if (gt) {
        j["final_rel_error"] = res.trace.back().aligned_rel_error;
        try {
          j["nu"] = fit_convergence_rate(res.trace);
        } catch (const Error&) {
          j["nu"] = nullptr;
        }
      }
      std::cout << j.dump(2) << '\n';
    } else if (*init_cmd) {
      const DatasetBundle b = load_dataset(i_data);
      if (!b.graph) throw Error(ErrorCode::InvalidArgument, "dataset has no graph.edges");
      const Index k = i_filters > 0 ? i_filters : (b.ground_truth ? b.ground_truth->filters() : 0);
      if (k < 1) throw Error(ErrorCode::InvalidArgument, "pass --filters when the dataset has no W*");
      InitConfig icfg;
      icfg.order = i_order == "3" ? TensorOrder::Third : i_order == "4" ? TensorOrder::Fourth : TensorOrder::Auto;
      icfg.decompose.seed = derive_seed(i_seed, stream::decompose);
      const NormalizedAdjacency adj = normalized_adjacency(*b.graph);
      const InitOutput out =
          tensor_initialize(adj, b.dataset, split_three(b.dataset.omega, derive_seed(i_seed, stream::init)), k, icfg);
      if (i_out.empty()) {
        write_init_diagnostics_json(std::cout, out);
      } else {
        std::ofstream os(i_out);
        write_init_diagnostics_json(os, out);
      }
      if (b.ground_truth)
        std::cerr << "aligned init error " << aligned_relative_error(out.w0, b.ground_truth->w_star).rel_error << '\n';
    } else if (*oracle_run) {
      if (o_suite != "default") throw Error(ErrorCode::InvalidArgument, "unknown suite: " + o_suite);
      const auto reports = run_default_suite(o_seed);
      if (o_out.empty()) {
        write_oracle_json(std::cout, reports);
      } else {
        std::ofstream os(o_out);
        write_oracle_json(os, reports);
      }
      for (const auto& r : reports)
        std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << " dev=" << r.max_abs_dev << " tol=" << r.tolerance
                  << '\n';
      return all_passed(reports) ? 0 : 1;
    } else if (*exp_list) {
      for (const auto& s : builtin_specs()) std::cout << s.name << '\n';
    } else if (*exp_run) {
      if (e_require && !all_passed(run_default_suite())) {
        std::cerr << "oracle suite is not green; refusing to run experiments\n";
        return 2;
      }
      ExperimentSpec spec = find_spec(e_spec);
      if (e_seeds > 0) spec.n_seeds = e_seeds;
      if (e_master) spec.master_seed = *e_master;
      const ExperimentResults res = run_experiment(spec, threads, [](Index done, Index total) {
        if (done % 50 == 0 || done == total) std::cerr << "\r" << done << "/" << total << std::flush;
      });
      std::cerr << '\n';
      const fs::path dir(e_out);
      emit(res, EmitFormat::Csv, dir / (spec.name + ".csv"));
      emit(res, EmitFormat::Json, dir / (spec.name + ".json"));
      std::cout << "wrote " << (dir / (spec.name + ".csv")).string() << ", " << spec.name << "_cells.csv and "
                << spec.name << ".json\n";
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
