#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gnnrec/harness.hpp"
#include "helpers.hpp"

using namespace gnnrec;

namespace {

ExperimentSpec tiny_spec() {
  ExperimentSpec s;
  s.name = "tiny";
  s.graphs = {{GraphFamily::Cycle, 2}, {GraphFamily::Grid2D, 4}};
  s.dims = {4};
  s.filters = {2};
  s.omega_sizes = {40, 120};
  s.betas = {0.0, 0.5};
  s.optimizer.step_rule = StepRule::Curvature;
  s.optimizer.max_iters = 300;
  s.n_seeds = 3;
  s.master_seed = 42;
  return s;
}

std::string trials_csv(const ExperimentResults& r) {
  std::ostringstream os;
  write_trials_csv(os, r);
  return os.str();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("builtin recipes") {
  const auto f3 = find_spec("fig3_convergence");
  CHECK(f3.dims == std::vector<Index>{10});
  CHECK(f3.omega_sizes == std::vector<Index>{2000});
  CHECK(f3.filters == std::vector<Index>{3, 4, 5, 6});
  CHECK(f3.graphs.at(0).delta == 4);

  const auto f4 = find_spec("fig4_agd_gd");
  CHECK(f4.omega_sizes == std::vector<Index>{500});
  CHECK(f4.betas.size() == 6);

  const auto f7 = find_spec("fig7_structures");
  CHECK(f7.graphs.size() == 3);
  for (const auto& g : f7.graphs) CHECK(g.delta == 4);
  CHECK(f7.dims == std::vector<Index>{40});

  const auto f8 = find_spec("fig8_noise");
  CHECK(f8.dims == std::vector<Index>{60});
  CHECK(f8.graphs.at(0).delta == 2);

  const auto f9 = find_spec("fig9_classification");
  CHECK(f9.filters == std::vector<Index>{3});
  CHECK(f9.dims == std::vector<Index>{20});
  CHECK(f9.problem == Problem::Classification);

  for (const auto& s : builtin_specs()) CHECK_NOTHROW(s.validate());
  CHECK_ERROR_CODE(find_spec("nope"), ErrorCode::InvalidArgument);

  ExperimentSpec bad = tiny_spec();
  bad.n_seeds = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("graph sizing") {
  const Graph g = build_graph({GraphFamily::Grid2D, 4}, 50, 1);
  CHECK(g.n_nodes() >= 50);
  const Graph r = build_graph({GraphFamily::RandomRegular, 3}, 51, 1);
  CHECK(r.n_nodes() * 3 % 2 == 0);
  CHECK(parse_graph_family("bounded") == GraphFamily::RandomBounded);
  CHECK(parse_init_mode("tensor") == InitMode::Tensor);
}

TEST_CASE("experiment runs are deterministic and ordered") {
  const auto spec = tiny_spec();
  const auto one = run_experiment(spec, 1);
  const auto three = run_experiment(spec, 3);
  CHECK(one.trials.size() == 2 * 2 * 2 * 3);
  CHECK(trials_csv(one) == trials_csv(three));

  for (const auto& t : one.trials) CHECK(t.success == (t.final_error < spec.success_threshold));

  // Cell success rates are recounts of the trial booleans.
  for (const auto& c : one.cells) {
    Index wins = 0, n = 0;
    for (const auto& t : one.trials)
      if (t.cell == c.cell) {
        ++n;
        wins += t.success ? 1 : 0;
      }
    CHECK(n == c.trials);
    CHECK(wins == c.successes);
    CHECK(c.success_rate == doctest::Approx(static_cast<double>(wins) / static_cast<double>(n)));
  }

  // beta and noise do not enter the trial seed, so paired cells share data.
  CHECK(one.trials[0].seed == one.trials[3].seed);
}

TEST_CASE("csv schema is frozen") {
  const auto r = run_experiment(tiny_spec(), 1);
  const auto golden = std::filesystem::path(GNNREC_TEST_DATA) / "golden_tiny.csv";
  if (const char* regen = std::getenv("GNNREC_REGEN_GOLDEN"); regen != nullptr) {
    std::ofstream(golden) << trials_csv(r);
  }
  CHECK(trials_csv(r) == read_file(golden));
}

TEST_CASE("emission") {
  ExperimentResults empty;
  empty.spec = tiny_spec();
  const auto dir = std::filesystem::temp_directory_path() / "gnnrec_emit_test";
  std::filesystem::create_directories(dir);
  CHECK_ERROR_CODE(emit(empty, EmitFormat::Csv, dir / "x.csv"), ErrorCode::EmptyResults);

  const auto r = run_experiment(tiny_spec(), 1);
  emit(r, EmitFormat::Csv, dir / "tiny.csv");
  CHECK(std::filesystem::exists(dir / "tiny_cells.csv"));
  CHECK(read_file(dir / "tiny.csv") == trials_csv(r));

  emit(r, EmitFormat::Json, dir / "tiny.json");
  std::ifstream in(dir / "tiny.json");
  const auto back = read_results_json(in);
  CHECK(back.spec.name == "tiny");
  REQUIRE(back.cells.size() == r.cells.size());
  std::ostringstream a, b;
  write_cells_csv(a, r);
  write_cells_csv(b, back);
  CHECK(a.str() == b.str());
  CHECK(trials_csv(back) == trials_csv(r));
  std::filesystem::remove_all(dir);
}

TEST_CASE("failed trials are recorded, not thrown") {
  auto spec = tiny_spec();
  spec.optimizer.step_rule = StepRule::Theory;
  spec.optimizer.eta = 1e7;
  spec.graphs = {{GraphFamily::Cycle, 2}};
  spec.omega_sizes = {40};
  spec.betas = {0.0};
  const auto r = run_experiment(spec, 1);
  for (const auto& t : r.trials) {
    CHECK(t.status == "diverged");
    CHECK(!t.success);
  }
  CHECK(r.cells.at(0).failures == 3);
}
