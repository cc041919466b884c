#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "gnnrec/error.hpp"
#include "gnnrec/graph.hpp"
#include "gnnrec/harness.hpp"
#include "gnnrec/metrics.hpp"
#include "gnnrec/model.hpp"
#include "gnnrec/optim.hpp"
#include "gnnrec/oracle.hpp"
#include "gnnrec/synth.hpp"
#include "gnnrec/tensorinit.hpp"

namespace py = pybind11;
using namespace gnnrec;

namespace {

const char* stop_reason(StopReason r) {
  switch (r) {
    case StopReason::MaxIters: return "max_iters";
    case StopReason::ReachedTarget: return "reached_target";
    case StopReason::GradientTolerance: return "gradient_tolerance";
    case StopReason::Stalled: return "stalled";
  }
  return "unknown";
}

StepRule parse_step_rule(const std::string& s) {
  if (s == "theory") return StepRule::Theory;
  if (s == "curvature") return StepRule::Curvature;
  throw Error(ErrorCode::Parse, "unknown step rule: " + s);
}

}  // namespace

PYBIND11_MODULE(_gnnrec, m) {
  m.doc() = "Native core of gnnrec";

  // Leaked on purpose: the type must outlive interpreter teardown.
  static PyObject* error_type = nullptr;
  error_type = py::exception<Error>(m, "GnnrecError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  py::class_<Graph>(m, "Graph")
      .def(py::init([](Index n, const std::vector<Edge>& edges) { return Graph(n, edges); }), py::arg("n_nodes"),
           py::arg("edges"))
      .def_property_readonly("n_nodes", &Graph::n_nodes)
      .def_property_readonly("edges", &Graph::edges)
      .def_property_readonly("degrees", &Graph::degrees)
      .def_property_readonly("family", [](const Graph& g) { return std::string(to_string(g.family())); })
      .def("max_degree", &Graph::max_degree)
      .def("average_degree", &Graph::average_degree);

  m.def("build_cycle", &build_cycle, py::arg("n_nodes"), py::arg("delta"));
  m.def("build_grid2d", &build_grid2d, py::arg("rows"), py::arg("cols"));
  m.def("build_random_regular", &build_random_regular, py::arg("n_nodes"), py::arg("delta"), py::arg("seed") = 0);
  m.def("build_random_bounded", &build_random_bounded, py::arg("n_nodes"), py::arg("delta"), py::arg("p"),
        py::arg("seed") = 0);
  m.def("build_empty", &build_empty, py::arg("n_nodes"));

  py::class_<NormalizedAdjacency>(m, "NormalizedAdjacency")
      .def_readonly("sigma1", &NormalizedAdjacency::sigma1)
      .def_readonly("delta_max", &NormalizedAdjacency::delta_max)
      .def_readonly("delta_ave", &NormalizedAdjacency::delta_ave)
      .def_property_readonly("size", &NormalizedAdjacency::size)
      .def("dense", &NormalizedAdjacency::dense);
  m.def("normalized_adjacency", &normalized_adjacency, py::arg("graph"));
  m.def("lemma1_bounds", [](const Graph& g) {
    const auto b = lemma1_bounds(g);
    return py::make_tuple(b.lower, b.upper);
  });

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("x", &Dataset::x)
      .def_readonly("z", &Dataset::z)
      .def_readonly("y", &Dataset::y)
      .def_readwrite("omega", &Dataset::omega)
      .def_readonly("noise_sigma", &Dataset::noise_sigma)
      .def_property_readonly("problem", [](const Dataset& d) { return std::string(to_string(d.problem)); })
      .def_property_readonly("activation", [](const Dataset& d) { return std::string(to_string(d.activation)); });

  m.def("sample_features", &sample_features, py::arg("n_nodes"), py::arg("dim"), py::arg("seed") = 0);
  m.def(
      "sample_ground_truth",
      [](Index d, Index k, double scale, const std::string& act, Seed seed) {
        return sample_ground_truth(d, k, scale, parse_activation(act), seed).w_star;
      },
      py::arg("dim"), py::arg("filters"), py::arg("scale") = 5.0, py::arg("activation") = "relu",
      py::arg("seed") = 0);
  m.def(
      "forward_labels",
      [](const Matrix& w_star, const NormalizedAdjacency& adj, const Matrix& x, const std::string& act,
         const std::string& problem, double noise_sigma, Seed seed) {
        std::optional<NoiseSpec> noise;
        if (noise_sigma > 0.0) noise = NoiseSpec{noise_sigma};
        return forward_labels(make_ground_truth(w_star, parse_activation(act)), adj, x, parse_problem(problem),
                              noise, seed);
      },
      py::arg("w_star"), py::arg("adj"), py::arg("x"), py::arg("activation") = "relu",
      py::arg("problem") = "regression", py::arg("noise_sigma") = 0.0, py::arg("seed") = 0);

  m.def(
      "forward",
      [](const Matrix& w, const NormalizedAdjacency& adj, const Matrix& x, const std::string& act) {
        return forward(ModelParams{w, parse_activation(act)}, adj, x);
      },
      py::arg("w"), py::arg("adj"), py::arg("x"), py::arg("activation") = "relu");
  m.def(
      "risk",
      [](const Matrix& w, const NormalizedAdjacency& adj, const Dataset& ds, std::optional<IndexSet> subset) {
        const ModelParams p{w, ds.activation};
        const Batch b = make_batch(adj, ds, subset ? *subset : ds.omega);
        const RiskReport r = risk(ds.problem, p, b);
        return py::make_tuple(r.value, r.gradient);
      },
      py::arg("w"), py::arg("adj"), py::arg("dataset"), py::arg("subset") = py::none());
  m.def(
      "default_eta", [](const std::string& problem, Index k, double s1) { return default_eta(parse_problem(problem), k, s1); },
      py::arg("problem"), py::arg("filters"), py::arg("sigma1"));

  m.def(
      "agd_run",
      [](const Matrix& w0, const Dataset& ds, const NormalizedAdjacency& adj, double beta, std::optional<double> eta,
         const std::string& step_rule, Index max_iters, double epsilon, std::optional<Matrix> w_star) {
        OptimizerConfig cfg;
        cfg.problem = ds.problem;
        cfg.beta = beta;
        cfg.eta = eta;
        cfg.step_rule = parse_step_rule(step_rule);
        cfg.max_iters = max_iters;
        cfg.epsilon = epsilon;
        std::optional<GroundTruth> gt;
        if (w_star) gt = make_ground_truth(*w_star, ds.activation);
        const AgdResult r = agd_run(ModelParams{w0, ds.activation}, ds, adj, cfg, gt ? &*gt : nullptr);
        Matrix trace(static_cast<Index>(r.trace.size()), 4);
        for (std::size_t i = 0; i < r.trace.size(); ++i) {
          const auto& e = r.trace[i];
          trace.row(static_cast<Index>(i)) << static_cast<double>(e.iter), e.aligned_rel_error, e.risk_value,
              e.grad_norm;
        }
        py::dict out;
        out["w"] = r.params.w;
        out["trace"] = trace;
        out["reason"] = stop_reason(r.reason);
        out["eta"] = r.eta;
        return out;
      },
      py::arg("w0"), py::arg("dataset"), py::arg("adj"), py::arg("beta") = 0.0, py::arg("eta") = py::none(),
      py::arg("step_rule") = "theory", py::arg("max_iters") = 5000, py::arg("epsilon") = 1e-3,
      py::arg("w_star") = py::none());

  m.def(
      "tensor_initialize",
      [](const NormalizedAdjacency& adj, const Dataset& ds, Index filters, Seed seed) {
        InitConfig cfg;
        cfg.decompose.seed = seed;
        const InitOutput o = tensor_initialize(adj, ds, split_three(ds.omega, seed), filters, cfg);
        py::dict out;
        out["w0"] = o.w0;
        out["alpha"] = o.alpha_hat;
        out["u"] = o.u_hat;
        out["v"] = o.v_hat;
        out["subspace_source"] = o.diagnostics.subspace_source;
        out["tensor_order"] = o.diagnostics.tensor_order;
        out["decompose_method"] = o.diagnostics.decompose_method;
        return out;
      },
      py::arg("adj"), py::arg("dataset"), py::arg("filters"), py::arg("seed") = 0);

  m.def(
      "aligned_relative_error",
      [](const Matrix& w, const Matrix& w_star) {
        const auto r = aligned_relative_error(w, w_star);
        return py::make_tuple(r.rel_error, r.permutation);
      },
      py::arg("w"), py::arg("w_star"));

  m.def(
      "run_oracle_suite",
      [](Seed seed) {
        py::list out;
        for (const auto& r : run_default_suite(seed)) {
          py::dict d;
          d["name"] = r.name;
          d["max_abs_dev"] = r.max_abs_dev;
          d["tolerance"] = r.tolerance;
          d["passed"] = r.passed;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 20240601);

  m.def("builtin_spec_names", [] {
    std::vector<std::string> names;
    for (const auto& s : builtin_specs()) names.push_back(s.name);
    return names;
  });
  m.def(
      "run_experiment",
      [](const std::string& name, std::optional<Index> seeds, Index threads) {
        ExperimentSpec spec = find_spec(name);
        if (seeds) spec.n_seeds = *seeds;
        ExperimentResults r;
        {
          py::gil_scoped_release release;
          r = run_experiment(spec, threads);
        }
        py::list out;
        for (const auto& t : r.trials) {
          py::dict d;
          d["graph"] = t.graph;
          d["d"] = t.d;
          d["k"] = t.k;
          d["omega"] = t.omega;
          d["beta"] = t.beta;
          d["noise_level"] = t.noise_level;
          d["seed"] = t.seed;
          d["init_error"] = t.init_error;
          d["final_error"] = t.final_error;
          d["iterations"] = t.iterations;
          d["success"] = t.success;
          d["status"] = t.status;
          out.append(d);
        }
        return out;
      },
      py::arg("name"), py::arg("seeds") = py::none(), py::arg("threads") = 1);
}
