#include "gnnrec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "gnnrec/error.hpp"
#include "gnnrec/metrics.hpp"
#include "gnnrec/rng.hpp"
#include "gnnrec/tensorinit.hpp"
#include "json.hpp"

namespace gnnrec {

using json = nlohmann::ordered_json;

std::string_view to_string(InitMode m) noexcept {
  switch (m) {
    case InitMode::Tensor: return "tensor";
    case InitMode::RandomBall: return "random-ball";
    case InitMode::OracleNear: return "oracle-near";
  }
  return "random-ball";
}

InitMode parse_init_mode(std::string_view s) {
  if (s == "tensor") return InitMode::Tensor;
  if (s == "random-ball") return InitMode::RandomBall;
  if (s == "oracle-near") return InitMode::OracleNear;
  throw Error(ErrorCode::InvalidArgument, "unknown init mode: " + std::string(s));
}

GraphFamily parse_graph_family(std::string_view s) {
  for (GraphFamily f : {GraphFamily::Cycle, GraphFamily::Grid2D, GraphFamily::RandomRegular,
                        GraphFamily::RandomBounded, GraphFamily::Empty})
    if (s == to_string(f)) return f;
  throw Error(ErrorCode::InvalidArgument, "unknown graph family: " + std::string(s));
}

std::string GraphSpec::label() const {
  std::ostringstream os;
  os << to_string(family);
  switch (family) {
    case GraphFamily::Cycle:
    case GraphFamily::RandomRegular: os << "-d" << delta; break;
    case GraphFamily::RandomBounded: os << "-d" << delta << "-p" << p; break;
    default: break;
  }
  return os.str();
}

Graph build_graph(const GraphSpec& g, Index min_nodes, Seed seed) {
  switch (g.family) {
    case GraphFamily::Cycle: return build_cycle(min_nodes, g.delta);
    case GraphFamily::Grid2D: {
      const auto rows = std::max<Index>(1, static_cast<Index>(std::floor(std::sqrt(static_cast<double>(min_nodes)))));
      return build_grid2d(rows, (min_nodes + rows - 1) / rows);
    }
    case GraphFamily::RandomRegular:
      return build_random_regular(min_nodes + ((min_nodes * g.delta) % 2), g.delta, seed);
    case GraphFamily::RandomBounded: return build_random_bounded(min_nodes, g.delta, g.p, seed);
    case GraphFamily::Empty: return build_empty(min_nodes);
    case GraphFamily::Custom: break;
  }
  throw Error(ErrorCode::InvalidArgument, "experiments cannot build a custom graph");
}

void ExperimentSpec::validate() const {
  if (graphs.empty() || dims.empty() || filters.empty() || (omega_sizes.empty() && omega_factors.empty()) ||
      noise_levels.empty() || betas.empty())
    throw Error(ErrorCode::InvalidArgument, "experiment grids must be nonempty");
  if (n_seeds < 1) throw Error(ErrorCode::InvalidArgument, "need at least one seed");
  if (problem == Problem::Classification && activation != Activation::Sigmoid)
    throw Error(ErrorCode::InvalidActivation, "classification needs the sigmoid activation");
}

std::vector<CellKey> enumerate_cells(const ExperimentSpec& spec) {
  const Index n_omega =
      static_cast<Index>(spec.omega_factors.empty() ? spec.omega_sizes.size() : spec.omega_factors.size());
  std::vector<CellKey> out;
  for (Index g = 0; g < static_cast<Index>(spec.graphs.size()); ++g)
    for (Index d = 0; d < static_cast<Index>(spec.dims.size()); ++d)
      for (Index k = 0; k < static_cast<Index>(spec.filters.size()); ++k)
        for (Index o = 0; o < n_omega; ++o)
          for (Index n = 0; n < static_cast<Index>(spec.noise_levels.size()); ++n)
            for (Index b = 0; b < static_cast<Index>(spec.betas.size()); ++b) out.push_back({g, d, k, o, n, b});
  return out;
}

Index omega_size(const ExperimentSpec& spec, const CellKey& cell) {
  const auto at = [](const auto& v, Index i) { return v[static_cast<std::size_t>(i)]; };
  if (spec.omega_factors.empty()) return at(spec.omega_sizes, cell.omega);
  const double dk = static_cast<double>(at(spec.dims, cell.dim) * at(spec.filters, cell.filters));
  return static_cast<Index>(std::ceil(at(spec.omega_factors, cell.omega) * dk - 1e-9));
}

namespace {

template <typename T>
const T& at(const std::vector<T>& v, Index i) {
  return v[static_cast<std::size_t>(i)];
}

// Data seeds ignore the beta and noise axes so those comparisons are paired.
Seed trial_seed(const ExperimentSpec& spec, const CellKey& cell, Index seed_index) {
  std::uint64_t key = static_cast<std::uint64_t>(cell.graph);
  key = key * 1000003u + static_cast<std::uint64_t>(cell.dim);
  key = key * 1000003u + static_cast<std::uint64_t>(cell.filters);
  key = key * 1000003u + static_cast<std::uint64_t>(omega_size(spec, cell));
  return derive_seed(derive_seed(spec.master_seed, stream::trial, key), stream::trial,
                     static_cast<std::uint64_t>(seed_index));
}

Matrix gaussian_matrix(Index rows, Index cols, Seed seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxIters: return "max-iters";
    case StopReason::ReachedTarget: return "target";
    case StopReason::GradientTolerance: return "grad-tol";
    case StopReason::Stalled: return "stalled";
  }
  return "max-iters";
}

constexpr double kOracleNearRadius = 0.05;

}  // namespace

TrialResult run_trial(const ExperimentSpec& spec, const CellKey& cell, Index cell_index, Index seed_index) {
  const auto t0 = std::chrono::steady_clock::now();
  TrialResult r;
  const GraphSpec& gs = at(spec.graphs, cell.graph);
  r.graph = gs.label();
  r.d = at(spec.dims, cell.dim);
  r.k = at(spec.filters, cell.filters);
  r.omega = omega_size(spec, cell);
  r.noise_level = at(spec.noise_levels, cell.noise);
  r.beta = at(spec.betas, cell.beta);
  r.cell = cell_index;
  r.seed_index = seed_index;
  r.seed = trial_seed(spec, cell, seed_index);
  r.final_error = std::numeric_limits<double>::infinity();
  r.final_distance = std::numeric_limits<double>::infinity();
  r.init_error = std::numeric_limits<double>::quiet_NaN();

  try {
    const Seed ts = r.seed;
    const Graph graph = build_graph(gs, r.omega, derive_seed(ts, stream::graph));
    const NormalizedAdjacency adj = normalized_adjacency(graph);
    const Index n = graph.n_nodes();
    const GroundTruth gt =
        sample_ground_truth(r.d, r.k, spec.scale, spec.activation, derive_seed(ts, stream::weights));
    Dataset ds = forward_labels(gt, adj, sample_features(n, r.d, derive_seed(ts, stream::features)), spec.problem,
                                std::nullopt, derive_seed(ts, stream::labels));
    if (r.noise_level > 0.0) {
      ds.noise_sigma = r.noise_level * std::sqrt(ds.z.squaredNorm() / static_cast<double>(n));
      ds = resample_labels(ds, derive_seed(ts, stream::labels, 1));
    }
    ds.omega = r.omega == n ? all_nodes(n) : sample_omega(n, r.omega, derive_seed(ts, stream::partition, 1));

    Matrix w0;
    switch (spec.init) {
      case InitMode::RandomBall:
      case InitMode::OracleNear: {
        const double radius = spec.init == InitMode::RandomBall ? spec.init_radius : kOracleNearRadius;
        const Matrix g = gaussian_matrix(r.d, r.k, derive_seed(ts, stream::init));
        w0 = gt.w_star + radius * gt.w_star.norm() * g / g.norm();
        break;
      }
      case InitMode::Tensor: {
        InitConfig icfg;
        icfg.decompose.seed = derive_seed(ts, stream::decompose);
        w0 = tensor_initialize(adj, ds, split_three(ds.omega, derive_seed(ts, stream::init)), r.k, icfg).w0;
        break;
      }
    }
    r.init_error = aligned_relative_error(w0, gt.w_star).rel_error;

    OptimizerConfig cfg = spec.optimizer;
    cfg.problem = spec.problem;
    cfg.beta = r.beta;
    cfg.epsilon = std::min(spec.optimizer.epsilon, spec.success_threshold);
    cfg.partition_seed = derive_seed(ts, stream::partition);
    try {
      const AgdResult res = agd_run(ModelParams{w0, spec.activation}, ds, adj, cfg, &gt);
      r.final_error = res.trace.back().aligned_rel_error;
      r.final_distance = r.final_error * gt.w_star.norm();
      r.iterations = res.trace.back().iter;
      if (auto hit = iterations_to_error(res.trace, spec.success_threshold)) r.iters_to_target = *hit;
      r.status = std::string(to_string(res.reason));
      try {
        const RateFit fit = fit_convergence_rate_detail(res.trace);
        r.nu = fit.nu;
        r.nu_r2 = fit.r_squared;
      } catch (const Error&) {
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Diverged) throw;
      r.status = "diverged";
    }
  } catch (const Error& e) {
    r.status = std::string(to_string(e.code()));
  }
  r.success = r.final_error < spec.success_threshold;
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

namespace {

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<CellSummary> summarize(const std::vector<TrialResult>& trials) {
  std::vector<CellSummary> out;
  std::size_t i = 0;
  while (i < trials.size()) {
    std::size_t j = i;
    while (j < trials.size() && trials[j].cell == trials[i].cell) ++j;
    CellSummary c;
    const TrialResult& f = trials[i];
    c.cell = f.cell;
    c.graph = f.graph;
    c.d = f.d;
    c.k = f.k;
    c.omega = f.omega;
    c.noise_level = f.noise_level;
    c.beta = f.beta;
    std::vector<double> errors, iters, nus;
    double sum_err = 0.0, sum_dist = 0.0;
    for (std::size_t t = i; t < j; ++t) {
      const TrialResult& tr = trials[t];
      ++c.trials;
      c.successes += tr.success ? 1 : 0;
      if (tr.status == "diverged" || !std::isfinite(tr.final_error)) ++c.failures;
      errors.push_back(tr.final_error);
      iters.push_back(static_cast<double>(tr.iterations));
      nus.push_back(tr.nu);
      sum_err += tr.final_error;
      sum_dist += tr.final_distance;
    }
    const double n = static_cast<double>(c.trials);
    c.success_rate = static_cast<double>(c.successes) / n;
    c.mean_final_error = sum_err / n;
    c.median_final_error = median(errors);
    c.mean_distance = sum_dist / n;
    c.median_iterations = median(iters);
    c.median_nu = median(nus);
    out.push_back(std::move(c));
    i = j;
  }
  return out;
}

Index default_parallelism() {
  if (const char* env = std::getenv("GNNREC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return v;
  }
  return std::max<Index>(1, static_cast<Index>(std::thread::hardware_concurrency()));
}

ExperimentResults run_experiment(const ExperimentSpec& spec, Index parallelism, const ProgressFn& progress) {
  spec.validate();
  ExperimentResults out;
  out.spec = spec;
  out.started_at = utc_now();
  const std::vector<CellKey> cells = enumerate_cells(spec);
  const Index total = static_cast<Index>(cells.size()) * spec.n_seeds;
  out.trials.resize(static_cast<std::size_t>(total));

  std::atomic<Index> next{0};
  std::atomic<Index> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (Index i = next++; i < total; i = next++) {
      const Index c = i / spec.n_seeds;
      out.trials[static_cast<std::size_t>(i)] = run_trial(spec, cells[static_cast<std::size_t>(c)], c, i % spec.n_seeds);
      const Index finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, total);
      }
    }
  };
  const Index workers = std::clamp<Index>(parallelism, 1, std::max<Index>(1, total));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (Index w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  out.cells = summarize(out.trials);
  out.finished_at = utc_now();
  return out;
}

namespace {

void require_nonempty(const ExperimentResults& r) {
  if (r.trials.empty()) throw Error(ErrorCode::EmptyResults, "no trial results to emit");
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_trials_csv(std::ostream& os, const ExperimentResults& r) {
  require_nonempty(r);
  os << "# gnnrec trials schema_version=" << kResultsSchemaVersion << " spec=" << r.spec.name
     << " master_seed=" << r.spec.master_seed << '\n';
  os << "cell,graph,d,K,omega,noise_level,beta,seed_index,seed,init_error,final_error,final_distance,iterations,"
        "iters_to_target,nu,nu_r2,success,status\n";
  for (const auto& t : r.trials) {
    os << t.cell << ',' << t.graph << ',' << t.d << ',' << t.k << ',' << t.omega << ',' << num(t.noise_level) << ','
       << num(t.beta) << ',' << t.seed_index << ',' << t.seed << ',' << num(t.init_error) << ','
       << num(t.final_error) << ',' << num(t.final_distance) << ',' << t.iterations << ',' << t.iters_to_target
       << ',' << num(t.nu) << ',' << num(t.nu_r2) << ',' << (t.success ? 1 : 0) << ',' << t.status << '\n';
  }
}

void write_cells_csv(std::ostream& os, const ExperimentResults& r) {
  require_nonempty(r);
  os << "# gnnrec cells schema_version=" << kResultsSchemaVersion << " spec=" << r.spec.name
     << " master_seed=" << r.spec.master_seed << '\n';
  os << "cell,graph,d,K,omega,noise_level,beta,trials,successes,success_rate,mean_final_error,median_final_error,"
        "mean_distance,median_iterations,median_nu,failures\n";
  for (const auto& c : r.cells) {
    os << c.cell << ',' << c.graph << ',' << c.d << ',' << c.k << ',' << c.omega << ',' << num(c.noise_level) << ','
       << num(c.beta) << ',' << c.trials << ',' << c.successes << ',' << num(c.success_rate) << ','
       << num(c.mean_final_error) << ',' << num(c.median_final_error) << ',' << num(c.mean_distance) << ','
       << num(c.median_iterations) << ',' << num(c.median_nu) << ',' << c.failures << '\n';
  }
}

namespace {

json real(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

double real_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return s == "-inf" ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
}

json spec_json(const ExperimentSpec& s) {
  json g = json::array();
  for (const auto& gs : s.graphs)
    g.push_back({{"family", std::string(to_string(gs.family))}, {"delta", gs.delta}, {"p", gs.p}});
  const OptimizerConfig& o = s.optimizer;
  return {{"name", s.name},
          {"graphs", g},
          {"dims", s.dims},
          {"filters", s.filters},
          {"omega_sizes", s.omega_sizes},
          {"omega_factors", s.omega_factors},
          {"noise_levels", s.noise_levels},
          {"betas", s.betas},
          {"scale", s.scale},
          {"activation", std::string(to_string(s.activation))},
          {"problem", std::string(to_string(s.problem))},
          {"init", std::string(to_string(s.init))},
          {"init_radius", s.init_radius},
          {"n_seeds", s.n_seeds},
          {"success_threshold", s.success_threshold},
          {"master_seed", s.master_seed},
          {"optimizer",
           {{"step_rule", o.step_rule == StepRule::Curvature ? "curvature" : "theory"},
            {"eta", o.eta ? json(*o.eta) : json(nullptr)},
            {"curvature_scale", o.curvature_scale},
            {"max_iters", o.max_iters},
            {"epsilon", o.epsilon},
            {"stop_on_target", o.stop_on_target},
            {"grad_tol", o.grad_tol},
            {"stall_window", o.stall_window},
            {"stall_ratio", o.stall_ratio},
            {"batch_mode", o.batch_mode == BatchMode::FullBatch ? "full-batch" : "disjoint"}}}};
}

ExperimentSpec spec_from_json(const json& j) {
  ExperimentSpec s;
  s.name = j.at("name").get<std::string>();
  for (const auto& g : j.at("graphs"))
    s.graphs.push_back(
        {parse_graph_family(g.at("family").get<std::string>()), g.at("delta").get<Index>(), g.at("p").get<double>()});
  s.dims = j.at("dims").get<std::vector<Index>>();
  s.filters = j.at("filters").get<std::vector<Index>>();
  s.omega_sizes = j.at("omega_sizes").get<std::vector<Index>>();
  s.omega_factors = j.at("omega_factors").get<std::vector<double>>();
  s.noise_levels = j.at("noise_levels").get<std::vector<double>>();
  s.betas = j.at("betas").get<std::vector<double>>();
  s.scale = j.at("scale").get<double>();
  s.activation = parse_activation(j.at("activation").get<std::string>());
  s.problem = parse_problem(j.at("problem").get<std::string>());
  s.init = parse_init_mode(j.at("init").get<std::string>());
  s.init_radius = j.at("init_radius").get<double>();
  s.n_seeds = j.at("n_seeds").get<Index>();
  s.success_threshold = j.at("success_threshold").get<double>();
  s.master_seed = j.at("master_seed").get<Seed>();
  const json& o = j.at("optimizer");
  s.optimizer.step_rule = o.at("step_rule") == "curvature" ? StepRule::Curvature : StepRule::Theory;
  if (!o.at("eta").is_null()) s.optimizer.eta = o.at("eta").get<double>();
  s.optimizer.curvature_scale = o.at("curvature_scale").get<double>();
  s.optimizer.max_iters = o.at("max_iters").get<Index>();
  s.optimizer.epsilon = o.value("epsilon", s.success_threshold);
  s.optimizer.stop_on_target = o.at("stop_on_target").get<bool>();
  s.optimizer.grad_tol = o.at("grad_tol").get<double>();
  s.optimizer.stall_window = o.at("stall_window").get<Index>();
  s.optimizer.stall_ratio = o.at("stall_ratio").get<double>();
  s.optimizer.batch_mode = o.at("batch_mode") == "disjoint" ? BatchMode::Disjoint : BatchMode::FullBatch;
  s.optimizer.problem = s.problem;
  return s;
}

}  // namespace

void write_results_json(std::ostream& os, const ExperimentResults& r) {
  require_nonempty(r);
  json j;
  j["schema_version"] = kResultsSchemaVersion;
  j["started_at"] = r.started_at;
  j["finished_at"] = r.finished_at;
  j["spec"] = spec_json(r.spec);
  json trials = json::array();
  for (const auto& t : r.trials) {
    trials.push_back({{"cell", t.cell},
                      {"graph", t.graph},
                      {"d", t.d},
                      {"K", t.k},
                      {"omega", t.omega},
                      {"noise_level", t.noise_level},
                      {"beta", t.beta},
                      {"seed_index", t.seed_index},
                      {"seed", t.seed},
                      {"init_error", real(t.init_error)},
                      {"final_error", real(t.final_error)},
                      {"final_distance", real(t.final_distance)},
                      {"iterations", t.iterations},
                      {"iters_to_target", t.iters_to_target},
                      {"nu", real(t.nu)},
                      {"nu_r2", real(t.nu_r2)},
                      {"success", t.success},
                      {"status", t.status},
                      {"wall_ms", t.wall_ms}});
  }
  j["trials"] = std::move(trials);
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"cell", c.cell},
                     {"graph", c.graph},
                     {"d", c.d},
                     {"K", c.k},
                     {"omega", c.omega},
                     {"noise_level", c.noise_level},
                     {"beta", c.beta},
                     {"trials", c.trials},
                     {"successes", c.successes},
                     {"success_rate", c.success_rate},
                     {"mean_final_error", real(c.mean_final_error)},
                     {"median_final_error", real(c.median_final_error)},
                     {"mean_distance", real(c.mean_distance)},
                     {"median_iterations", real(c.median_iterations)},
                     {"median_nu", real(c.median_nu)},
                     {"failures", c.failures}});
  }
  j["cells"] = std::move(cells);
  os << j.dump(1) << '\n';
}

ExperimentResults read_results_json(std::istream& is) {
  ExperimentResults r;
  try {
    const json j = json::parse(is);
    if (j.at("schema_version").get<int>() != kResultsSchemaVersion)
      throw Error(ErrorCode::Parse, "unsupported results schema version");
    r.started_at = j.at("started_at").get<std::string>();
    r.finished_at = j.at("finished_at").get<std::string>();
    r.spec = spec_from_json(j.at("spec"));
    for (const auto& t : j.at("trials")) {
      TrialResult tr;
      tr.cell = t.at("cell").get<Index>();
      tr.graph = t.at("graph").get<std::string>();
      tr.d = t.at("d").get<Index>();
      tr.k = t.at("K").get<Index>();
      tr.omega = t.at("omega").get<Index>();
      tr.noise_level = t.at("noise_level").get<double>();
      tr.beta = t.at("beta").get<double>();
      tr.seed_index = t.at("seed_index").get<Index>();
      tr.seed = t.at("seed").get<Seed>();
      tr.init_error = real_from(t.at("init_error"));
      tr.final_error = real_from(t.at("final_error"));
      tr.final_distance = real_from(t.at("final_distance"));
      tr.iterations = t.at("iterations").get<Index>();
      tr.iters_to_target = t.at("iters_to_target").get<Index>();
      tr.nu = real_from(t.at("nu"));
      tr.nu_r2 = real_from(t.at("nu_r2"));
      tr.success = t.at("success").get<bool>();
      tr.status = t.at("status").get<std::string>();
      tr.wall_ms = t.at("wall_ms").get<double>();
      r.trials.push_back(std::move(tr));
    }
    for (const auto& c : j.at("cells")) {
      CellSummary cs;
      cs.cell = c.at("cell").get<Index>();
      cs.graph = c.at("graph").get<std::string>();
      cs.d = c.at("d").get<Index>();
      cs.k = c.at("K").get<Index>();
      cs.omega = c.at("omega").get<Index>();
      cs.noise_level = c.at("noise_level").get<double>();
      cs.beta = c.at("beta").get<double>();
      cs.trials = c.at("trials").get<Index>();
      cs.successes = c.at("successes").get<Index>();
      cs.success_rate = c.at("success_rate").get<double>();
      cs.mean_final_error = real_from(c.at("mean_final_error"));
      cs.median_final_error = real_from(c.at("median_final_error"));
      cs.mean_distance = real_from(c.at("mean_distance"));
      cs.median_iterations = real_from(c.at("median_iterations"));
      cs.median_nu = real_from(c.at("median_nu"));
      cs.failures = c.at("failures").get<Index>();
      r.cells.push_back(std::move(cs));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("results json: ") + e.what());
  }
  return r;
}

void emit(const ExperimentResults& r, EmitFormat format, const std::filesystem::path& path) {
  require_nonempty(r);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto open = [](const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw Error(ErrorCode::Io, "cannot open " + p.string() + " for writing");
    return os;
  };
  if (format == EmitFormat::Json) {
    auto os = open(path);
    write_results_json(os, r);
    if (!os) throw Error(ErrorCode::Io, "write failed: " + path.string());
    return;
  }
  {
    auto os = open(path);
    write_trials_csv(os, r);
    if (!os) throw Error(ErrorCode::Io, "write failed: " + path.string());
  }
  std::filesystem::path cells = path;
  cells.replace_filename(path.stem().string() + "_cells.csv");
  auto os = open(cells);
  write_cells_csv(os, r);
  if (!os) throw Error(ErrorCode::Io, "write failed: " + cells.string());
}

namespace {

OptimizerConfig regression_optimizer() {
  OptimizerConfig o;
  o.problem = Problem::Regression;
  o.step_rule = StepRule::Curvature;
  o.max_iters = 5000;
  o.stop_on_target = true;
  o.stall_window = 300;
  o.stall_ratio = 0.9;
  return o;
}

const std::vector<double> kPhaseFactors{0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.4};

}  // namespace

std::vector<ExperimentSpec> builtin_specs() {
  std::vector<ExperimentSpec> out;
  {
    ExperimentSpec s;
    s.name = "fig3_convergence";
    s.graphs = {{GraphFamily::Cycle, 4}};
    s.dims = {10};
    s.filters = {3, 4, 5, 6};
    s.omega_sizes = {2000};
    s.betas = {0.5};
    s.optimizer = regression_optimizer();
    s.optimizer.stall_window = 0;
    s.optimizer.epsilon = 1e-8;
    s.n_seeds = 10;
    s.master_seed = 3;
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig4_agd_gd";
    s.graphs = {{GraphFamily::Cycle, 4}};
    s.dims = {10};
    s.filters = {5};
    s.omega_sizes = {500};
    s.betas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    s.optimizer = regression_optimizer();
    s.optimizer.stall_window = 0;
    s.master_seed = 4;
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig5_phase";
    s.graphs = {{GraphFamily::Cycle, 2}, {GraphFamily::Cycle, 4}, {GraphFamily::Cycle, 8}};
    s.dims = {10, 20, 40};
    s.filters = {5};
    s.omega_factors = kPhaseFactors;
    s.optimizer = regression_optimizer();
    s.master_seed = 5;
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig6_bounded";
    s.graphs = {{GraphFamily::RandomBounded, 4, 0.25}, {GraphFamily::RandomBounded, 4, 0.5},
                {GraphFamily::RandomBounded, 4, 1.0}};
    s.dims = {40};
    s.filters = {5};
    s.omega_factors = kPhaseFactors;
    s.optimizer = regression_optimizer();
    s.master_seed = 6;
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig7_structures";
    s.graphs = {{GraphFamily::Cycle, 4}, {GraphFamily::Grid2D, 4}, {GraphFamily::RandomRegular, 4}};
    s.dims = {40};
    s.filters = {5};
    s.omega_factors = kPhaseFactors;
    s.optimizer = regression_optimizer();
    s.master_seed = 7;
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig8_noise";
    s.graphs = {{GraphFamily::Cycle, 2}};
    s.dims = {60};
    s.filters = {5};
    s.omega_sizes = {400, 800, 1600, 3200};
    s.noise_levels = {0.0, 0.1, 0.3};
    s.optimizer = regression_optimizer();
    s.optimizer.stall_window = 200;
    s.optimizer.stall_ratio = 0.99;
    s.n_seeds = 20;
    s.master_seed = 8;
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "fig9_classification";
    s.graphs = {{GraphFamily::Cycle, 2}};
    s.dims = {20};
    s.filters = {3};
    s.omega_sizes = {20000, 43089, 92832, 200000};
    s.scale = 1.0;
    s.activation = Activation::Sigmoid;
    s.problem = Problem::Classification;
    s.optimizer.problem = Problem::Classification;
    s.optimizer.step_rule = StepRule::Curvature;
    s.optimizer.max_iters = 20000;
    s.optimizer.stop_on_target = false;
    s.optimizer.grad_tol = 1e-8;
    s.master_seed = 9;
    out.push_back(s);
  }
  {
    ExperimentSpec s;
    s.name = "init_scaling";
    s.graphs = {{GraphFamily::Empty, 0}};
    s.dims = {6};
    s.filters = {2};
    s.omega_sizes = {30000, 100000, 300000, 1000000, 3000000};
    s.scale = 1.0;
    s.init = InitMode::Tensor;
    s.optimizer = regression_optimizer();
    s.optimizer.max_iters = 0;
    s.n_seeds = 20;
    s.master_seed = 10;
    out.push_back(s);
  }
  return out;
}

ExperimentSpec find_spec(std::string_view name) {
  for (auto& s : builtin_specs())
    if (s.name == name) return s;
  throw Error(ErrorCode::InvalidArgument, "unknown experiment spec: " + std::string(name));
}

}  // namespace gnnrec
