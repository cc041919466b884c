#include "gnnrec/io.hpp"

#include <bit>
#include <fstream>
#include <ostream>

#include "gnnrec/error.hpp"
#include "json.hpp"

namespace gnnrec {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "binary format assumes a little-endian host");

void write_matrix_bin(const fs::path& path, const Matrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  os.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (!os) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

Matrix read_matrix_bin(const fs::path& path, Index rows, Index cols) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const auto expected = static_cast<std::uintmax_t>(rows * cols) * sizeof(double);
  if (fs::file_size(path) != expected)
    throw Error(ErrorCode::Parse, path.string() + " does not match the manifest shape");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  is.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(expected));
  if (!is) throw Error(ErrorCode::Io, "read failed: " + path.string());
  return rm;
}

void write_edge_list_file(const fs::path& path, const Graph& g) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  write_edge_list(os, g);
}

Graph read_edge_list_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_edge_list(is);
}

namespace {

Matrix as_column(const Vector& v) { return v; }

Matrix indices_as_matrix(const IndexSet& idx) {
  Matrix m(static_cast<Index>(idx.size()), 1);
  for (std::size_t i = 0; i < idx.size(); ++i) m(static_cast<Index>(i), 0) = static_cast<double>(idx[i]);
  return m;
}

}  // namespace

void save_dataset(const fs::path& dir, const DatasetBundle& bundle) {
  fs::create_directories(dir);
  const Dataset& ds = bundle.dataset;
  write_matrix_bin(dir / "x.bin", ds.x);
  write_matrix_bin(dir / "z.bin", as_column(ds.z));
  write_matrix_bin(dir / "y.bin", as_column(ds.y));
  write_matrix_bin(dir / "omega.bin", indices_as_matrix(ds.omega));

  json j;
  j["format_version"] = 1;
  j["n_nodes"] = ds.n_nodes();
  j["dim"] = ds.dim();
  j["omega_size"] = ds.omega.size();
  j["seed"] = ds.seed;
  j["problem"] = std::string(to_string(ds.problem));
  j["activation"] = std::string(to_string(ds.activation));
  j["noise_sigma"] = ds.noise_sigma;
  j["noise_level"] = ds.noise_level();
  j["files"] = {{"x", "x.bin"}, {"z", "z.bin"}, {"y", "y.bin"}, {"omega", "omega.bin"}};
  if (bundle.ground_truth) {
    write_matrix_bin(dir / "w_star.bin", bundle.ground_truth->w_star);
    j["filters"] = bundle.ground_truth->filters();
    j["files"]["w_star"] = "w_star.bin";
  }
  if (bundle.graph) {
    write_edge_list_file(dir / "graph.edges", *bundle.graph);
    j["files"]["graph"] = "graph.edges";
  }
  std::ofstream os(dir / "manifest.json");
  if (!os) throw Error(ErrorCode::Io, "cannot write manifest in " + dir.string());
  os << j.dump(2) << '\n';
}

DatasetBundle load_dataset(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw Error(ErrorCode::Io, "no manifest.json in " + dir.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
  DatasetBundle b;
  Dataset& ds = b.dataset;
  try {
    const Index n = j.at("n_nodes").get<Index>();
    const Index d = j.at("dim").get<Index>();
    const Index m = j.at("omega_size").get<Index>();
    ds.x = read_matrix_bin(dir / "x.bin", n, d);
    ds.z = read_matrix_bin(dir / "z.bin", n, 1).col(0);
    ds.y = read_matrix_bin(dir / "y.bin", n, 1).col(0);
    const Matrix om = read_matrix_bin(dir / "omega.bin", m, 1);
    ds.omega.resize(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) ds.omega[static_cast<std::size_t>(i)] = static_cast<Index>(om(i, 0));
    ds.seed = j.at("seed").get<Seed>();
    ds.problem = parse_problem(j.at("problem").get<std::string>());
    ds.activation = parse_activation(j.at("activation").get<std::string>());
    ds.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("filters")) {
      const Index k = j.at("filters").get<Index>();
      b.ground_truth = make_ground_truth(read_matrix_bin(dir / "w_star.bin", d, k), ds.activation);
    }
    if (j.at("files").contains("graph")) b.graph = read_edge_list_file(dir / "graph.edges");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
  return b;
}

namespace {

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

}  // namespace

void write_init_diagnostics_json(std::ostream& os, const InitOutput& out) {
  const InitDiagnostics& d = out.diagnostics;
  json j;
  j["schema_version"] = 1;
  j["subspace"] = {{"source", d.subspace_source},
                   {"eigenvalues", vector_json(d.subspace_eigenvalues)},
                   {"gap", d.subspace_gap},
                   {"degenerate", d.degenerate_spectrum}};
  j["tensor"] = {{"order", d.tensor_order}, {"norm", d.tensor_norm}, {"asymmetry", d.tensor_asymmetry}};
  j["decomposition"] = {{"method", d.decompose_method},
                        {"condition", d.contraction_condition},
                        {"separation", d.eigen_separation},
                        {"residual", d.decomposition_residual}};
  j["magnitudes"] = {{"alpha", vector_json(out.alpha_hat)}, {"residual", d.magnitude_residual}};
  j["split_sizes"] = d.split_sizes;
  j["w0"] = matrix_json(out.w0);
  os << j.dump(2) << '\n';
}

}  // namespace gnnrec
